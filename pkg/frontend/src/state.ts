/** View state and its pure transition functions.
 *
 * Authoritative data (points, subareas, revision) only ever enters
 * through withFloorplan, so the scene is always a function of the last
 * server document plus the in-flight gesture. Every transition returns
 * a new state and leaves its input untouched.
 */

import type { FloorplanDoc, VerdictDoc, WalkEvent } from "./api";

export type FloorRect = [number, number, number, number];

export interface PendingRect {
  rect: FloorRect;
  verdict: VerdictDoc | null;
  checkedRevision: number | null;
}

export interface WalkSummary {
  steps: number;
  mean_error: number;
}

export interface WalkState {
  trail: [number, number][];
  truth: [number, number][];
  subarea: string | null;
  lastT: number | null;
  expected: number | null;
  summary: WalkSummary | null;
  done: boolean;
}

export interface ViewState {
  floorplan: FloorplanDoc | null;
  pending: PendingRect | null;
  walk: WalkState;
  status: string | null;
  debug: boolean;
}

export function emptyWalk(): WalkState {
  return {
    trail: [],
    truth: [],
    subarea: null,
    lastT: null,
    expected: null,
    summary: null,
    done: false,
  };
}

export function initialState(): ViewState {
  return { floorplan: null, pending: null, walk: emptyWalk(), status: null, debug: false };
}

export function withFloorplan(s: ViewState, doc: FloorplanDoc): ViewState {
  return { ...s, floorplan: doc };
}

export function withStatus(s: ViewState, status: string | null): ViewState {
  return { ...s, status };
}

export function withDebug(s: ViewState, debug: boolean): ViewState {
  return { ...s, debug };
}

export function withPending(s: ViewState, rect: FloorRect | null): ViewState {
  return {
    ...s,
    pending: rect === null ? null : { rect, verdict: null, checkedRevision: null },
  };
}

export function withVerdict(s: ViewState, verdict: VerdictDoc, revision: number): ViewState {
  if (s.pending === null) return s;
  return { ...s, pending: { ...s.pending, verdict, checkedRevision: revision } };
}

export function clearPending(s: ViewState): ViewState {
  return { ...s, pending: null };
}

export function walkStarted(s: ViewState, expected: number): ViewState {
  return { ...s, walk: { ...emptyWalk(), expected } };
}

export function applyWalkEvent(s: ViewState, ev: WalkEvent): ViewState {
  const w = s.walk;
  if (w.done) return s; // the summary froze the panel
  if (ev.type === "summary") {
    return {
      ...s,
      walk: { ...w, summary: { steps: ev.steps, mean_error: ev.mean_error }, done: true },
    };
  }
  return {
    ...s,
    walk: {
      ...w,
      trail: [...w.trail, ev.estimate],
      truth: ev.true !== undefined ? [...w.truth, ev.true] : w.truth,
      subarea: ev.subarea,
      lastT: ev.t,
    },
  };
}
