/**
 * Headless application controller: owns the scene, camera and banner state
 * so the interaction rules are testable without a DOM. The canvas layer in
 * main.ts only renders this state and forwards events.
 */

import type { SearchClient, SearchMode } from "./api.js";
import {
  initialCamera,
  panByKey,
  pan,
  wheelZoom,
  zoomTargetFor,
  type ArrowKey,
  type CameraState,
} from "./camera.js";
import {
  anyDetailed,
  buildScene,
  counterText,
  sceneBounds,
  selectedIdText,
  toggleSelect,
  type Scene,
} from "./scene.js";

export class App {
  scene: Scene | null = null;
  camera: CameraState = initialCamera();
  banner: string | null = null;
  loading = false;

  constructor(private readonly client: SearchClient) {}

  /** Issue a search; on any failure show the banner and leave the current
   * scene untouched. */
  async runSearch(q: string, mode: SearchMode, expand: boolean): Promise<void> {
    this.loading = true;
    try {
      const doc = await this.client.search(q, mode, expand);
      this.scene = buildScene(doc);
      this.camera = initialCamera();
      this.banner = null;
    } catch (err) {
      this.banner = err instanceof Error ? err.message : String(err);
    } finally {
      this.loading = false;
    }
  }

  clickNode(nodeId: number): void {
    if (this.scene) {
      this.scene = toggleSelect(this.scene, nodeId);
    }
  }

  keydown(key: string): boolean {
    if (!this.scene) {
      return false;
    }
    if (key === "ArrowLeft" || key === "ArrowRight" || key === "ArrowUp" || key === "ArrowDown") {
      this.camera = panByKey(this.camera, key as ArrowKey, sceneBounds(this.scene));
      return true;
    }
    return false;
  }

  wheel(deltaY: number): void {
    if (this.scene) {
      this.camera = wheelZoom(this.camera, deltaY, sceneBounds(this.scene));
    }
  }

  /** Pointer movement pans only while some node is in detailed view. */
  pointerPan(dx: number, dy: number): void {
    if (this.scene && anyDetailed(this.scene)) {
      this.camera = pan(this.camera, dx, dy, sceneBounds(this.scene));
    }
  }

  /** Double-click fly-to: the zoom value that renders the node readable. */
  flyToTarget(nodeId: number): number | null {
    const node = this.scene?.nodes.find((n) => n.entry.id === nodeId);
    return node ? zoomTargetFor(node.z) : null;
  }

  setZoom(zoom: number): void {
    this.camera = { ...this.camera, zoom };
  }

  counter(): string {
    return counterText(this.scene);
  }

  selectedId(): string {
    return selectedIdText(this.scene);
  }
}
