/**
 * Canvas renderer: depth-scaled billboards, painter-ordered back to front,
 * with the counter bottom-right and the last clicked id bottom-left.
 */

import type { CameraState, Projected } from "./camera.js";
import { project } from "./camera.js";
import { highlightSegments } from "./highlight.js";
import type { Scene, SceneNode } from "./scene.js";

export interface Viewport {
  width: number;
  height: number;
}

export interface NodeBox {
  node: SceneNode;
  projected: Projected;
  width: number;
  height: number;
}

const TITLE_CARD_W = 230;
const TITLE_CARD_H = 74;
const DETAIL_CARD_W = 420;
const DETAIL_CARD_H = 300;

/** Projected card geometry, far to near so hit-testing can walk it in
 * reverse for the topmost node. */
export function layoutNodes(scene: Scene, camera: CameraState, viewport: Viewport): NodeBox[] {
  const boxes: NodeBox[] = [];
  for (const node of scene.nodes) {
    const projected = project(node, camera, viewport);
    if (!projected) {
      continue;
    }
    const w = (node.view === "detailed" ? DETAIL_CARD_W : TITLE_CARD_W) * projected.scale;
    const h = (node.view === "detailed" ? DETAIL_CARD_H : TITLE_CARD_H) * projected.scale;
    boxes.push({ node, projected, width: w, height: h });
  }
  boxes.sort((a, b) => b.projected.depth - a.projected.depth);
  return boxes;
}

export function hitTest(boxes: NodeBox[], x: number, y: number): SceneNode | null {
  for (let i = boxes.length - 1; i >= 0; i--) {
    const box = boxes[i];
    if (!box) continue;
    const { projected, width, height } = box;
    if (
      x >= projected.x - width / 2 &&
      x <= projected.x + width / 2 &&
      y >= projected.y - height / 2 &&
      y <= projected.y + height / 2
    ) {
      return box.node;
    }
  }
  return null;
}

function wrapText(
  ctx: CanvasRenderingContext2D,
  segments: { text: string; hit: boolean }[],
  x: number,
  y: number,
  maxWidth: number,
  lineHeight: number,
  maxLines: number,
): void {
  let cursorX = x;
  let line = 0;
  for (const segment of segments) {
    for (const word of segment.text.split(/(\s+)/)) {
      if (!word) continue;
      const width = ctx.measureText(word).width;
      if (cursorX + width > x + maxWidth && cursorX > x) {
        line++;
        cursorX = x;
        if (line >= maxLines) return;
      }
      if (!/^\s+$/.test(word) || cursorX > x) {
        ctx.fillStyle = segment.hit ? "#ffd54d" : "#e8e8e8";
        ctx.fillText(word, cursorX, y + line * lineHeight);
        cursorX += width;
      }
    }
  }
}

export function render(
  ctx: CanvasRenderingContext2D,
  scene: Scene | null,
  camera: CameraState,
  viewport: Viewport,
  banner: string | null,
): NodeBox[] {
  ctx.fillStyle = "#101418";
  ctx.fillRect(0, 0, viewport.width, viewport.height);
  if (!scene) {
    if (banner) drawBanner(ctx, viewport, banner);
    return [];
  }

  const boxes = layoutNodes(scene, camera, viewport);
  for (const box of boxes) {
    const { node, projected, width, height } = box;
    const left = projected.x - width / 2;
    const top = projected.y - height / 2;
    const alpha = Math.max(0.25, Math.min(1, projected.scale));
    ctx.globalAlpha = alpha;
    ctx.fillStyle = node.view === "detailed" ? "#243447" : "#1b2836";
    ctx.strokeStyle = "#3e5871";
    ctx.fillRect(left, top, width, height);
    ctx.strokeRect(left, top, width, height);

    const fontSize = Math.max(9, 13 * projected.scale);
    ctx.font = `${fontSize}px system-ui, sans-serif`;
    ctx.textBaseline = "top";
    ctx.fillStyle = "#9fc2e8";
    ctx.fillText(`#${node.entry.id}  ${node.entry.date}`, left + 8, top + 6);
    ctx.fillStyle = "#ffffff";
    ctx.fillText(node.entry.title.slice(0, 60), left + 8, top + 6 + fontSize * 1.3);
    if (node.view === "detailed") {
      const segments = highlightSegments(node.entry.body, node.entry.keywords);
      wrapText(
        ctx,
        segments,
        left + 8,
        top + 6 + fontSize * 3,
        width - 16,
        fontSize * 1.25,
        Math.floor((height - fontSize * 3.5) / (fontSize * 1.25)),
      );
    }
    ctx.globalAlpha = 1;
  }

  // bottom-left: last clicked article id; bottom-right: total retrieved
  ctx.font = "14px system-ui, sans-serif";
  ctx.textBaseline = "bottom";
  ctx.fillStyle = "#9fc2e8";
  const selected = scene.selectedId !== null ? String(scene.selectedId) : "";
  if (selected) {
    ctx.fillText(selected, 12, viewport.height - 10);
  }
  const counter = String(scene.total);
  const cw = ctx.measureText(counter).width;
  ctx.fillText(counter, viewport.width - cw - 12, viewport.height - 10);

  if (banner) drawBanner(ctx, viewport, banner);
  return boxes;
}

function drawBanner(ctx: CanvasRenderingContext2D, viewport: Viewport, message: string): void {
  ctx.fillStyle = "rgba(160, 40, 40, 0.92)";
  ctx.fillRect(0, 0, viewport.width, 34);
  ctx.font = "13px system-ui, sans-serif";
  ctx.textBaseline = "middle";
  ctx.fillStyle = "#ffffff";
  ctx.fillText(message.slice(0, 160), 12, 17);
}
