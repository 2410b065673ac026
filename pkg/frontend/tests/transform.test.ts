import { describe, expect, it } from "vitest";

import { fitViewport, panBy, toFloor, toScreen, zoomAt, type Viewport } from "../src/transform";

const HALL: [number, number, number, number] = [0, 0, 30.5, 11.3];

describe("fitViewport", () => {
  it("keeps the whole floor inside the canvas with the margin", () => {
    const v = fitViewport(HALL, 1040, 420, 24);
    const corners: [number, number][] = [
      [0, 0],
      [30.5, 0],
      [0, 11.3],
      [30.5, 11.3],
    ];
    for (const c of corners) {
      const [sx, sy] = toScreen(v, c);
      expect(sx).toBeGreaterThanOrEqual(24 - 1e-9);
      expect(sx).toBeLessThanOrEqual(1040 - 24 + 1e-9);
      expect(sy).toBeGreaterThanOrEqual(24 - 1e-9);
      expect(sy).toBeLessThanOrEqual(420 - 24 + 1e-9);
    }
  });

  it("puts the floor origin at the bottom left of the canvas", () => {
    const v = fitViewport(HALL, 1040, 420, 24);
    const [ox, oy] = toScreen(v, [0, 0]);
    const [tx, ty] = toScreen(v, [30.5, 11.3]);
    expect(ox).toBeLessThan(tx); // x grows rightward
    expect(oy).toBeGreaterThan(ty); // floor y up means screen y down
  });
});

describe("round trip", () => {
  const viewports: Viewport[] = [];
  for (const scale of [0.01, 0.5, 1, 32.5, 200, 5e3]) {
    for (const [ox, oy] of [
      [0, 0],
      [24.05, 393.75],
      [-912.4, 77.7],
    ]) {
      viewports.push({ scale, offsetX: ox, offsetY: oy });
    }
  }

  it("floor -> screen -> floor returns the same point", () => {
    for (const v of viewports) {
      for (const p of [
        [0, 0],
        [30.5, 11.3],
        [15.123456, 7.654321],
        [-3.25, 40.5],
      ] as [number, number][]) {
        const back = toFloor(v, toScreen(v, p));
        expect(back[0]).toBeCloseTo(p[0], 9);
        expect(back[1]).toBeCloseTo(p[1], 9);
      }
    }
  });

  it("screen -> floor -> screen lands within one pixel at any zoom", () => {
    for (const v of viewports) {
      for (const s of [
        [0, 0],
        [1040, 420],
        [517.25, 133.125],
      ] as [number, number][]) {
        const back = toScreen(v, toFloor(v, s));
        expect(Math.abs(back[0] - s[0])).toBeLessThan(1);
        expect(Math.abs(back[1] - s[1])).toBeLessThan(1);
      }
    }
  });
});

describe("zoomAt", () => {
  it("keeps the floor point under the cursor fixed", () => {
    let v = fitViewport(HALL, 1040, 420);
    const cursor: [number, number] = [301.5, 99.25];
    const anchor = toFloor(v, cursor);
    for (const factor of [1.2, 1.2, 1 / 1.2, 3.0, 0.1]) {
      v = zoomAt(v, cursor, factor);
      const [sx, sy] = toScreen(v, anchor);
      expect(sx).toBeCloseTo(cursor[0], 6);
      expect(sy).toBeCloseTo(cursor[1], 6);
    }
  });

  it("scales by the requested factor", () => {
    const v = fitViewport(HALL, 1040, 420);
    expect(zoomAt(v, [0, 0], 1.2).scale).toBeCloseTo(v.scale * 1.2, 12);
  });
});

describe("panBy", () => {
  it("shifts every projected point by the pixel delta", () => {
    const v = fitViewport(HALL, 1040, 420);
    const moved = panBy(v, 17.5, -8.25);
    const p: [number, number] = [12.2, 3.4];
    const [ax, ay] = toScreen(v, p);
    const [bx, by] = toScreen(moved, p);
    expect(bx - ax).toBeCloseTo(17.5, 12);
    expect(by - ay).toBeCloseTo(-8.25, 12);
  });
});
