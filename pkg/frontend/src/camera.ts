/**
 * Camera state and perspective math for the 2.5D space.
 *
 * Zoom is a scalar translation along z: a node's effective depth is
 * `node.z - camera.zoom`, so equal wheel-up/wheel-down deltas are exact
 * inverses and relative depth order is preserved by construction. Pan is a
 * screen-space offset clamped to the scene extents.
 */

export interface CameraState {
  panX: number;
  panY: number;
  zoom: number;
}

export interface SceneBounds {
  panLimitX: number;
  panLimitY: number;
  zoomMin: number;
  zoomMax: number;
}

export const PAN_STEP = 40;
export const WHEEL_ZOOM_STEP = 60;
export const FOCAL = 600;
export const READABLE_SCALE = 0.85;

export function initialCamera(): CameraState {
  return { panX: 0, panY: 0, zoom: 0 };
}

function clamp(value: number, lo: number, hi: number): number {
  return Math.min(hi, Math.max(lo, value));
}

export function pan(
  state: CameraState,
  dx: number,
  dy: number,
  bounds: SceneBounds,
): CameraState {
  return {
    panX: clamp(state.panX + dx, -bounds.panLimitX, bounds.panLimitX),
    panY: clamp(state.panY + dy, -bounds.panLimitY, bounds.panLimitY),
    zoom: state.zoom,
  };
}

export type ArrowKey = "ArrowLeft" | "ArrowRight" | "ArrowUp" | "ArrowDown";

const ARROW_DELTAS: Record<ArrowKey, [number, number]> = {
  ArrowLeft: [-1, 0],
  ArrowRight: [1, 0],
  ArrowUp: [0, -1],
  ArrowDown: [0, 1],
};

export function panByKey(
  state: CameraState,
  key: ArrowKey,
  bounds: SceneBounds,
  step: number = PAN_STEP,
): CameraState {
  const [dx, dy] = ARROW_DELTAS[key];
  return pan(state, dx * step, dy * step, bounds);
}

export function zoomBy(state: CameraState, delta: number, bounds: SceneBounds): CameraState {
  return {
    panX: state.panX,
    panY: state.panY,
    zoom: clamp(state.zoom + delta, bounds.zoomMin, bounds.zoomMax),
  };
}

/** Wheel up (negative deltaY) flies in: depths shrink. */
export function wheelZoom(
  state: CameraState,
  deltaY: number,
  bounds: SceneBounds,
  step: number = WHEEL_ZOOM_STEP,
): CameraState {
  return zoomBy(state, deltaY < 0 ? step : -step, bounds);
}

export function effectiveDepth(nodeZ: number, camera: CameraState): number {
  return nodeZ - camera.zoom;
}

export function projectedScale(nodeZ: number, camera: CameraState): number {
  return FOCAL / (FOCAL + effectiveDepth(nodeZ, camera));
}

export interface Projected {
  x: number;
  y: number;
  scale: number;
  depth: number;
}

/** Perspective-project a scene point, or null when it sits behind the
 * camera plane. */
export function project(
  point: { x: number; y: number; z: number },
  camera: CameraState,
  viewport: { width: number; height: number },
): Projected | null {
  const depth = effectiveDepth(point.z, camera);
  if (depth <= -FOCAL * 0.5) {
    return null;
  }
  const scale = FOCAL / (FOCAL + depth);
  return {
    x: viewport.width / 2 + (point.x - camera.panX) * scale,
    y: viewport.height / 2 + (point.y - camera.panY) * scale,
    scale,
    depth,
  };
}

/** Zoom that renders a node at `threshold` scale or larger; the
 * double-click fly-to animation targets this value. Lands one world unit
 * past the exact boundary so rounding never leaves the node sub-readable. */
export function zoomTargetFor(nodeZ: number, threshold: number = READABLE_SCALE): number {
  return nodeZ + FOCAL - FOCAL / threshold + 1;
}
