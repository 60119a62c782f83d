/**
 * Scene model: one node per ranked article, laid out on a grid in x/y with
 * depth proportional to rank id, so depth order equals rank order at every
 * zoom level. Everything displayed originates from the gateway XML.
 */

import type { ArticleEntry, ResultsDoc } from "./xml.js";
import { FOCAL, type SceneBounds } from "./camera.js";

export type ViewState = "title" | "detailed";

export interface SceneNode {
  entry: ArticleEntry;
  x: number;
  y: number;
  z: number;
  view: ViewState;
}

export interface Scene {
  query: string;
  total: number;
  nodes: SceneNode[];
  selectedId: number | null;
}

export const BASE_DEPTH = 60;
export const DEPTH_STEP = 90;
export const GRID_SPACING_X = 260;
export const GRID_SPACING_Y = 170;

export function buildScene(doc: ResultsDoc): Scene {
  const n = doc.entries.length;
  const cols = Math.max(1, Math.ceil(Math.sqrt(n)));
  const nodes = doc.entries.map((entry, i) => {
    const col = i % cols;
    const row = Math.floor(i / cols);
    const rows = Math.ceil(n / cols);
    return {
      entry,
      x: (col - (cols - 1) / 2) * GRID_SPACING_X,
      y: (row - (rows - 1) / 2) * GRID_SPACING_Y,
      z: BASE_DEPTH + entry.id * DEPTH_STEP,
      view: "title" as ViewState,
    };
  });
  return { query: doc.query, total: doc.total, nodes, selectedId: null };
}

/** Left click: flip the node between title and detailed view and show its
 * id in the bottom-left readout. */
export function toggleSelect(scene: Scene, nodeId: number): Scene {
  return {
    ...scene,
    selectedId: nodeId,
    nodes: scene.nodes.map((node) =>
      node.entry.id === nodeId
        ? { ...node, view: node.view === "title" ? "detailed" : "title" }
        : node,
    ),
  };
}

export function anyDetailed(scene: Scene): boolean {
  return scene.nodes.some((node) => node.view === "detailed");
}

/** Bottom-right readout: the total number of retrieved articles. */
export function counterText(scene: Scene | null): string {
  return scene ? String(scene.total) : "";
}

/** Bottom-left readout: the last clicked article id. */
export function selectedIdText(scene: Scene | null): string {
  return scene && scene.selectedId !== null ? String(scene.selectedId) : "";
}

export function sceneBounds(scene: Scene | null): SceneBounds {
  if (!scene || scene.nodes.length === 0) {
    return { panLimitX: 0, panLimitY: 0, zoomMin: 0, zoomMax: 0 };
  }
  const xs = scene.nodes.map((n) => Math.abs(n.x));
  const ys = scene.nodes.map((n) => Math.abs(n.y));
  const maxZ = Math.max(...scene.nodes.map((n) => n.z));
  return {
    panLimitX: Math.max(...xs) + GRID_SPACING_X,
    panLimitY: Math.max(...ys) + GRID_SPACING_Y,
    zoomMin: -FOCAL / 2,
    zoomMax: maxZ,
  };
}
