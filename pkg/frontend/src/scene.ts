/** Render model: view state projected into screen-space shapes.
 *
 * Painting is a separate concern (render.ts) so the scene can be
 * asserted on directly in tests without a real canvas.
 */

import type { ViewState } from "./state";
import { toScreen, type Viewport } from "./transform";

export type PendingStyle = "draft" | "accepted" | "rejected";

export interface BoundsShape {
  kind: "bounds";
  x: number;
  y: number;
  w: number;
  h: number;
}

export interface WallShape {
  kind: "wall";
  x1: number;
  y1: number;
  x2: number;
  y2: number;
  loss: number;
}

export interface BeaconShape {
  kind: "beacon";
  x: number;
  y: number;
  id: string;
}

export interface WaypointShape {
  kind: "waypoint";
  x: number;
  y: number;
}

export interface SubareaShape {
  kind: "subarea";
  x: number;
  y: number;
  w: number;
  h: number;
  id: string;
  highlight: boolean;
}

export interface PointShape {
  kind: "point";
  x: number;
  y: number;
  id: string;
  assigned: boolean;
}

export interface PendingShape {
  kind: "pending";
  x: number;
  y: number;
  w: number;
  h: number;
  style: PendingStyle;
  reason: string | null;
}

export interface TrailShape {
  kind: "trail";
  x: number;
  y: number;
  t: number;
}

export interface TruthShape {
  kind: "truth";
  x: number;
  y: number;
  t: number;
}

export type Shape =
  | BoundsShape
  | WallShape
  | BeaconShape
  | WaypointShape
  | SubareaShape
  | PointShape
  | PendingShape
  | TrailShape
  | TruthShape;

interface ScreenRect {
  x: number;
  y: number;
  w: number;
  h: number;
}

function screenRect(v: Viewport, r: [number, number, number, number]): ScreenRect {
  const [ax, ay] = toScreen(v, [r[0], r[1]]);
  const [bx, by] = toScreen(v, [r[2], r[3]]);
  return {
    x: Math.min(ax, bx),
    y: Math.min(ay, by),
    w: Math.abs(bx - ax),
    h: Math.abs(by - ay),
  };
}

/** Subarea id named by a not-distinct rejection, if any. */
export function conflictSubarea(state: ViewState): string | null {
  const verdict = state.pending?.verdict ?? null;
  if (verdict === null || verdict.accepted) return null;
  const prefix = "not-distinct-from:";
  return verdict.reason.startsWith(prefix) ? verdict.reason.slice(prefix.length) : null;
}

export function buildScene(state: ViewState, viewport: Viewport): Shape[] {
  const shapes: Shape[] = [];
  const fp = state.floorplan;
  if (fp === null) return shapes;
  const conflict = conflictSubarea(state);

  shapes.push({ kind: "bounds", ...screenRect(viewport, fp.bounds) });
  for (const sub of fp.subareas) {
    shapes.push({
      kind: "subarea",
      ...screenRect(viewport, sub.rect),
      id: sub.id,
      highlight: sub.id === conflict,
    });
  }
  for (const wall of fp.walls) {
    const [x1, y1] = toScreen(viewport, [wall[0], wall[1]]);
    const [x2, y2] = toScreen(viewport, [wall[2], wall[3]]);
    shapes.push({ kind: "wall", x1, y1, x2, y2, loss: wall[4] });
  }
  for (const wp of fp.waypoints) {
    const [x, y] = toScreen(viewport, wp);
    shapes.push({ kind: "waypoint", x, y });
  }
  for (const p of fp.reference_points) {
    const [x, y] = toScreen(viewport, [p.x, p.y]);
    shapes.push({ kind: "point", x, y, id: p.id, assigned: p.subarea !== null });
  }
  for (const b of fp.beacons) {
    const [x, y] = toScreen(viewport, [b.x, b.y]);
    shapes.push({ kind: "beacon", x, y, id: b.id });
  }
  if (state.pending !== null) {
    const verdict = state.pending.verdict;
    const style: PendingStyle =
      verdict === null ? "draft" : verdict.accepted ? "accepted" : "rejected";
    shapes.push({
      kind: "pending",
      ...screenRect(viewport, state.pending.rect),
      style,
      reason: verdict !== null && !verdict.accepted ? verdict.reason : null,
    });
  }
  state.walk.truth.forEach((p, i) => {
    const [x, y] = toScreen(viewport, p);
    shapes.push({ kind: "truth", x, y, t: i });
  });
  state.walk.trail.forEach((p, i) => {
    const [x, y] = toScreen(viewport, p);
    shapes.push({ kind: "trail", x, y, t: i });
  });
  return shapes;
}
