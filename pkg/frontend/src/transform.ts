/** Affine mapping between floor and screen coordinates.
 *
 * Floor coordinates have the origin at the bottom left with y pointing
 * up; screen coordinates are canvas pixels with y pointing down. The
 * mapping is a uniform scale plus an offset, so round trips are exact
 * up to floating point and stay far inside a 1 px budget at any zoom.
 */

export interface Viewport {
  scale: number; // pixels per metre
  offsetX: number; // screen x of floor x = 0
  offsetY: number; // screen y of floor y = 0
}

export function toScreen(v: Viewport, p: [number, number]): [number, number] {
  return [v.offsetX + p[0] * v.scale, v.offsetY - p[1] * v.scale];
}

export function toFloor(v: Viewport, s: [number, number]): [number, number] {
  return [(s[0] - v.offsetX) / v.scale, (v.offsetY - s[1]) / v.scale];
}

/** Viewport that centres the bounds in a width x height canvas. */
export function fitViewport(
  bounds: [number, number, number, number],
  width: number,
  height: number,
  margin = 24,
): Viewport {
  const [x0, y0, x1, y1] = bounds;
  const spanX = Math.max(x1 - x0, 1e-9);
  const spanY = Math.max(y1 - y0, 1e-9);
  const scale = Math.min((width - 2 * margin) / spanX, (height - 2 * margin) / spanY);
  return {
    scale,
    offsetX: (width - spanX * scale) / 2 - x0 * scale,
    offsetY: (height + spanY * scale) / 2 + y0 * scale,
  };
}

/** Rescale about a screen point so the floor point under it stays put. */
export function zoomAt(v: Viewport, at: [number, number], factor: number): Viewport {
  const scale = Math.min(Math.max(v.scale * factor, 1e-3), 1e6);
  const anchor = toFloor(v, at);
  return {
    scale,
    offsetX: at[0] - anchor[0] * scale,
    offsetY: at[1] + anchor[1] * scale,
  };
}

export function panBy(v: Viewport, dx: number, dy: number): Viewport {
  return { ...v, offsetX: v.offsetX + dx, offsetY: v.offsetY + dy };
}
