/** DOM and canvas wiring around the headless App controller. */

import { SearchClient, type SearchMode } from "./api.js";
import { App } from "./app.js";
import { hitTest, render, type NodeBox } from "./render.js";

function param(name: string, fallback: string): string {
  return new URLSearchParams(window.location.search).get(name) ?? fallback;
}

const serverBase = param("server", "http://127.0.0.1:8400");
const client = new SearchClient(serverBase, new DOMParser());
const app = new App(client);

const canvas = document.getElementById("space") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const form = document.getElementById("query-form") as HTMLFormElement;
const queryInput = document.getElementById("query") as HTMLInputElement;
const modeSelect = document.getElementById("mode") as HTMLSelectElement;
const expandBox = document.getElementById("expand") as HTMLInputElement;

let boxes: NodeBox[] = [];
let flyTarget: number | null = null;

function viewport() {
  return { width: canvas.width, height: canvas.height };
}

function resize(): void {
  canvas.width = window.innerWidth;
  canvas.height = window.innerHeight - 52;
  draw();
}

function draw(): void {
  boxes = render(ctx, app.scene, app.camera, viewport(), app.banner);
}

function tick(): void {
  if (flyTarget !== null) {
    const diff = flyTarget - app.camera.zoom;
    if (Math.abs(diff) < 1) {
      app.setZoom(flyTarget);
      flyTarget = null;
    } else {
      app.setZoom(app.camera.zoom + diff * 0.18);
    }
    draw();
  }
  requestAnimationFrame(tick);
}

form.addEventListener("submit", (event) => {
  event.preventDefault();
  const q = queryInput.value.trim();
  if (!q) return;
  void app
    .runSearch(q, modeSelect.value as SearchMode, expandBox.checked)
    .then(draw);
});

canvas.addEventListener("click", (event) => {
  const node = hitTest(boxes, event.offsetX, event.offsetY);
  if (node) {
    app.clickNode(node.entry.id);
    draw();
  }
});

canvas.addEventListener("dblclick", (event) => {
  const node = hitTest(boxes, event.offsetX, event.offsetY);
  if (node) {
    flyTarget = app.flyToTarget(node.entry.id);
  }
});

window.addEventListener("keydown", (event) => {
  if (document.activeElement === queryInput) return;
  if (app.keydown(event.key)) {
    event.preventDefault();
    draw();
  }
});

canvas.addEventListener(
  "wheel",
  (event) => {
    event.preventDefault();
    app.wheel(event.deltaY);
    draw();
  },
  { passive: false },
);

canvas.addEventListener("pointermove", (event) => {
  if (event.buttons === 0) {
    app.pointerPan(event.movementX * 0.6, event.movementY * 0.6);
    draw();
  }
});

window.addEventListener("resize", resize);
resize();
requestAnimationFrame(tick);
