/** Canvas painter for the scene model. */

import type { Shape, TrailShape, TruthShape } from "./scene";

const STYLE = {
  background: "#fafafa",
  bounds: "#55524c",
  wall: "#8a5a2b",
  beacon: "#1f77b4",
  point: "#2ca02c",
  pointAssigned: "#17650e",
  subareaFill: "rgba(31, 119, 180, 0.10)",
  subareaEdge: "#1f77b4",
  subareaConflict: "#d62728",
  pendingDraft: "#888888",
  pendingAccepted: "#2ca02c",
  pendingRejected: "#d62728",
  trail: "#9467bd",
  truth: "#d62728",
  waypoint: "#c7c3bd",
  label: "#333333",
};

function dot(ctx: CanvasRenderingContext2D, x: number, y: number, r: number, color: string): void {
  ctx.fillStyle = color;
  ctx.beginPath();
  ctx.arc(x, y, r, 0, 2 * Math.PI);
  ctx.fill();
}

function polyline(
  ctx: CanvasRenderingContext2D,
  points: { x: number; y: number }[],
  color: string,
): void {
  if (points.length < 2) return;
  ctx.strokeStyle = color;
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  ctx.moveTo(points[0].x, points[0].y);
  for (const p of points.slice(1)) ctx.lineTo(p.x, p.y);
  ctx.stroke();
}

export function paint(
  ctx: CanvasRenderingContext2D,
  shapes: Shape[],
  width: number,
  height: number,
): void {
  ctx.fillStyle = STYLE.background;
  ctx.fillRect(0, 0, width, height);
  ctx.font = "11px sans-serif";

  const trail: TrailShape[] = [];
  const truth: TruthShape[] = [];

  for (const shape of shapes) {
    switch (shape.kind) {
      case "bounds":
        ctx.strokeStyle = STYLE.bounds;
        ctx.lineWidth = 1.5;
        ctx.strokeRect(shape.x, shape.y, shape.w, shape.h);
        break;
      case "subarea":
        ctx.fillStyle = STYLE.subareaFill;
        ctx.fillRect(shape.x, shape.y, shape.w, shape.h);
        ctx.strokeStyle = shape.highlight ? STYLE.subareaConflict : STYLE.subareaEdge;
        ctx.lineWidth = shape.highlight ? 2.5 : 1;
        ctx.strokeRect(shape.x, shape.y, shape.w, shape.h);
        ctx.fillStyle = STYLE.label;
        ctx.fillText(shape.id, shape.x + 4, shape.y + 14);
        break;
      case "wall":
        ctx.strokeStyle = STYLE.wall;
        ctx.lineWidth = Math.max(1.5, shape.loss / 5);
        ctx.beginPath();
        ctx.moveTo(shape.x1, shape.y1);
        ctx.lineTo(shape.x2, shape.y2);
        ctx.stroke();
        break;
      case "waypoint":
        dot(ctx, shape.x, shape.y, 3, STYLE.waypoint);
        break;
      case "point":
        dot(ctx, shape.x, shape.y, 4, shape.assigned ? STYLE.pointAssigned : STYLE.point);
        ctx.fillStyle = STYLE.label;
        ctx.fillText(shape.id, shape.x + 6, shape.y + 4);
        break;
      case "beacon":
        dot(ctx, shape.x, shape.y, 5, STYLE.beacon);
        ctx.fillStyle = STYLE.label;
        ctx.fillText(shape.id, shape.x + 7, shape.y - 5);
        break;
      case "pending": {
        const color =
          shape.style === "accepted"
            ? STYLE.pendingAccepted
            : shape.style === "rejected"
              ? STYLE.pendingRejected
              : STYLE.pendingDraft;
        ctx.strokeStyle = color;
        ctx.lineWidth = 2;
        ctx.setLineDash(shape.style === "draft" ? [5, 3] : []);
        ctx.strokeRect(shape.x, shape.y, shape.w, shape.h);
        ctx.setLineDash([]);
        if (shape.reason !== null) {
          ctx.fillStyle = color;
          ctx.fillText(shape.reason, shape.x + 4, shape.y - 6);
        }
        break;
      }
      case "trail":
        trail.push(shape);
        break;
      case "truth":
        truth.push(shape);
        break;
    }
  }

  polyline(ctx, truth, STYLE.truth);
  for (const p of truth) dot(ctx, p.x, p.y, 2.5, STYLE.truth);
  polyline(ctx, trail, STYLE.trail);
  for (const p of trail) dot(ctx, p.x, p.y, 3, STYLE.trail);
}
