/** DOM wiring for the workbench page.
 *
 * mountApp binds gestures and buttons to client calls, holds the view
 * state and viewport, and repaints after every transition. Mutations
 * run one at a time through a promise chain; the walk stream is
 * consumed on its own chain so gestures stay live while it runs.
 */

import { ApiError, WorkbenchClient } from "./api";
import { buildScene, type Shape } from "./scene";
import { paint } from "./render";
import {
  applyWalkEvent,
  clearPending,
  initialState,
  walkStarted,
  withDebug,
  withFloorplan,
  withPending,
  withStatus,
  withVerdict,
  type FloorRect,
  type ViewState,
} from "./state";
import { fitViewport, panBy, toFloor, zoomAt, type Viewport } from "./transform";

export type Mode = "collect" | "segment" | "pan";

export interface AppHandles {
  state(): ViewState;
  viewport(): Viewport;
  scene(): Shape[];
  redraw(): void;
  refresh(): Promise<void>;
  whenIdle(): Promise<void>;
  walkFinished(): Promise<void>;
}

function normRect(a: [number, number], b: [number, number]): FloorRect {
  return [Math.min(a[0], b[0]), Math.min(a[1], b[1]), Math.max(a[0], b[0]), Math.max(a[1], b[1])];
}

export function mountApp(doc: Document, client: WorkbenchClient): AppHandles {
  const must = (id: string): HTMLElement => {
    const el = doc.getElementById(id);
    if (el === null) throw new Error(`missing element #${id}`);
    return el;
  };

  const canvas = must("floor-canvas") as HTMLCanvasElement;
  const ctx = canvas.getContext("2d");
  const revisionEl = must("revision");
  const statusEl = must("status");
  const bannerEl = must("verdict-banner");
  const reasonEl = must("verdict-reason");
  const featureEl = must("verdict-feature");
  const walkStatusEl = must("walk-status");
  const walkSummaryEl = must("walk-summary");
  const pointListEl = must("point-list");

  let state: ViewState = initialState();
  let viewport: Viewport = { scale: 1, offsetX: 0, offsetY: 0 };
  let fitted = false;
  let mutations: Promise<void> = Promise.resolve();
  let walkDone: Promise<void> = Promise.resolve();

  function syncDom(): void {
    const fp = state.floorplan;
    revisionEl.textContent = fp === null ? "rev -" : `rev ${fp.revision}`;
    statusEl.textContent = state.status ?? "";

    const verdict = state.pending?.verdict ?? null;
    bannerEl.hidden = verdict === null;
    bannerEl.className = verdict === null ? "" : verdict.accepted ? "accepted" : "rejected";
    reasonEl.textContent = verdict === null ? "" : verdict.reason;
    featureEl.textContent = "";
    if (verdict?.feature) {
      for (const [bid, range] of Object.entries(verdict.feature)) {
        const row = doc.createElement("li");
        row.textContent = `${bid}: ${range[0].toFixed(1)} to ${range[1].toFixed(1)}`;
        featureEl.appendChild(row);
      }
    }

    pointListEl.textContent = "";
    for (const p of fp?.reference_points ?? []) {
      const li = doc.createElement("li");
      li.dataset.id = p.id;
      li.textContent =
        `${p.id} (${p.x.toFixed(2)}, ${p.y.toFixed(2)})` +
        (p.subarea !== null ? ` in ${p.subarea}` : "");
      pointListEl.appendChild(li);
    }

    const w = state.walk;
    walkStatusEl.textContent =
      w.lastT === null ? "" : `step ${w.lastT + 1}/${w.expected ?? "?"} in ${w.subarea ?? "?"}`;
    walkSummaryEl.textContent =
      w.summary === null
        ? ""
        : `mean error ${w.summary.mean_error.toFixed(3)} m over ${w.summary.steps} steps`;
  }

  function render(): void {
    if (ctx !== null) paint(ctx, buildScene(state, viewport), canvas.width, canvas.height);
    syncDom();
  }

  function setState(next: ViewState): void {
    state = next;
    render();
  }

  function toastError(exc: unknown): void {
    setState(withStatus(state, exc instanceof ApiError ? exc.message : String(exc)));
  }

  // one mutation in flight; later gestures queue behind the current one
  function run(op: () => Promise<void>): Promise<void> {
    const next = mutations.then(op, op);
    mutations = next.catch(() => undefined);
    return next;
  }

  async function refresh(): Promise<void> {
    const fp = await client.floorplan();
    if (!fitted) {
      viewport = fitViewport(fp.bounds, canvas.width, canvas.height);
      fitted = true;
    }
    setState(withFloorplan(state, fp));
  }

  async function collectAt(p: [number, number]): Promise<void> {
    try {
      await client.collect(p[0], p[1]);
      setState(withStatus(state, null));
      await refresh(); // the marker comes back in the server document
    } catch (exc) {
      toastError(exc);
    }
  }

  async function checkPending(rect: FloorRect): Promise<void> {
    try {
      const { verdict, revision } = await client.checkRect(rect);
      setState(withVerdict(state, verdict, revision));
    } catch (exc) {
      toastError(exc);
    }
  }

  async function commitPending(): Promise<void> {
    const pending = state.pending;
    if (pending === null || pending.verdict === null || pending.checkedRevision === null) {
      setState(withStatus(state, "check a rectangle before committing"));
      return;
    }
    try {
      const result = await client.commitRect(pending.rect, pending.checkedRevision);
      if (result.ok) {
        setState(clearPending(withStatus(state, `committed ${result.subarea.id}`)));
        await refresh();
      } else {
        setState(withVerdict(state, result.verdict, result.revision));
      }
    } catch (exc) {
      toastError(exc); // stale revision and friends; resync so a re-check is honest
      await refresh();
    }
  }

  async function autoSegment(): Promise<void> {
    try {
      const result = await client.segmentAuto();
      if (result.success) {
        setState(withStatus(state, `auto segmentation committed ${result.subareas.length} subareas`));
      } else {
        const reasons = result.failures.map(
          (f) => `[${f.rect.map((v) => v.toFixed(1)).join(", ")}] ${f.reason}`,
        );
        setState(withStatus(state, `auto segmentation failed: ${reasons.join("; ")}`));
      }
      await refresh();
    } catch (exc) {
      toastError(exc);
    }
  }

  async function startWalk(): Promise<void> {
    try {
      const { steps } = await client.startWalk();
      setState(walkStarted(withStatus(state, null), steps));
      const events = await client.streamWalk(state.debug);
      walkDone = (async () => {
        for await (const ev of events) setState(applyWalkEvent(state, ev));
      })();
    } catch (exc) {
      toastError(exc);
    }
  }

  async function saveDatabase(): Promise<void> {
    try {
      const text = await client.saveDatabase();
      if (typeof URL.createObjectURL === "function") {
        const url = URL.createObjectURL(new Blob([text], { type: "application/json" }));
        const a = doc.createElement("a");
        a.href = url;
        a.download = "database.json";
        a.click();
        URL.revokeObjectURL(url);
      }
      setState(withStatus(state, `saved ${text.length} bytes`));
    } catch (exc) {
      toastError(exc);
    }
  }

  async function loadFrom(file: File): Promise<void> {
    try {
      const text = await file.text();
      const info = await client.loadDatabase(text);
      setState(
        withStatus(state, `loaded ${info.reference_points} points, ${info.subareas} subareas`),
      );
      await refresh();
    } catch (exc) {
      toastError(exc);
    }
  }

  function currentMode(): Mode {
    const checked = doc.querySelector('input[name="mode"]:checked') as HTMLInputElement | null;
    const value = checked?.value;
    return value === "segment" || value === "pan" ? value : "collect";
  }

  function canvasPos(e: MouseEvent): [number, number] {
    const r = canvas.getBoundingClientRect();
    return [e.clientX - r.left, e.clientY - r.top];
  }

  let gesture: { start: [number, number]; mode: Mode; moved: boolean } | null = null;

  canvas.addEventListener("mousedown", (e) => {
    if (e.button !== 0) return;
    gesture = { start: canvasPos(e), mode: currentMode(), moved: false };
  });

  canvas.addEventListener("mousemove", (e) => {
    if (gesture === null) return;
    const pos = canvasPos(e);
    const dx = pos[0] - gesture.start[0];
    const dy = pos[1] - gesture.start[1];
    if (Math.abs(dx) + Math.abs(dy) > 2) gesture.moved = true;
    if (gesture.mode === "pan" && gesture.moved) {
      viewport = panBy(viewport, dx, dy);
      gesture.start = pos;
      render();
    } else if (gesture.mode === "segment") {
      setState(
        withPending(state, normRect(toFloor(viewport, gesture.start), toFloor(viewport, pos))),
      );
    }
  });

  canvas.addEventListener("mouseup", (e) => {
    if (gesture === null) return;
    const g = gesture;
    gesture = null;
    const pos = canvasPos(e);
    if (g.mode === "collect" && !g.moved) {
      const p = toFloor(viewport, pos);
      void run(() => collectAt(p));
    } else if (g.mode === "segment") {
      const rect = normRect(toFloor(viewport, g.start), toFloor(viewport, pos));
      setState(withPending(state, rect));
      void run(() => checkPending(rect));
    }
  });

  canvas.addEventListener("wheel", (e) => {
    e.preventDefault();
    viewport = zoomAt(viewport, canvasPos(e), e.deltaY < 0 ? 1.2 : 1 / 1.2);
    render();
  });

  must("commit-btn").addEventListener("click", () => void run(commitPending));
  must("auto-btn").addEventListener("click", () => void run(autoSegment));
  must("walk-btn").addEventListener("click", () => void run(startWalk));
  must("save-btn").addEventListener("click", () => void run(saveDatabase));
  (must("debug-toggle") as HTMLInputElement).addEventListener("change", (e) => {
    setState(withDebug(state, (e.target as HTMLInputElement).checked));
  });
  (must("load-input") as HTMLInputElement).addEventListener("change", (e) => {
    const file = (e.target as HTMLInputElement).files?.[0];
    if (file !== undefined) void run(() => loadFrom(file));
  });

  render();
  void run(refresh);

  return {
    state: () => state,
    viewport: () => viewport,
    scene: () => buildScene(state, viewport),
    redraw: render,
    refresh: () => run(refresh),
    whenIdle: async () => {
      let seen: Promise<void>;
      do {
        seen = mutations;
        await seen;
      } while (seen !== mutations);
    },
    walkFinished: () => walkDone,
  };
}
