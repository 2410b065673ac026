/** Typed client for the workbench HTTP API.
 *
 * One method per endpoint. Non-2xx responses raise ApiError carrying the
 * server's diagnostic text, with one exception: a rejected subarea commit
 * comes back as 409 with the verdict document, and commitRect surfaces
 * that as an ordinary return value so the caller can render the reason.
 */

export interface BeaconDoc {
  id: string;
  x: number;
  y: number;
  tx_label: string;
}

export interface PointDoc {
  id: string;
  x: number;
  y: number;
  readings: Record<string, number>;
  subarea: string | null;
}

export interface SubareaDoc {
  id: string;
  rect: [number, number, number, number];
  feature: Record<string, [number, number]>;
}

export interface FloorplanDoc {
  scenario: string;
  bounds: [number, number, number, number];
  walls: [number, number, number, number, number][];
  beacons: BeaconDoc[];
  reference_points: PointDoc[];
  subareas: SubareaDoc[];
  waypoints: [number, number][];
  revision: number;
}

export interface VerdictDoc {
  accepted: boolean;
  reason: string;
  feature: Record<string, [number, number]> | null;
  point_ids: string[];
}

export interface StepEvent {
  type: "step";
  t: number;
  estimate: [number, number];
  subarea: string;
  candidates: number;
  fallback: boolean;
  true?: [number, number];
  error?: number;
}

export interface SummaryEvent {
  type: "summary";
  steps: number;
  mean_error: number;
}

export type WalkEvent = StepEvent | SummaryEvent;

export type CommitResult =
  | { ok: true; subarea: SubareaDoc; revision: number }
  | { ok: false; verdict: VerdictDoc; revision: number };

export interface AutoFailure {
  rect: [number, number, number, number];
  reason: string;
}

export type AutoResult =
  | { success: true; subareas: SubareaDoc[]; iterations: number; revision: number }
  | { success: false; failures: AutoFailure[]; iterations: number; revision: number };

export class ApiError extends Error {
  constructor(
    readonly status: number,
    detail: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }
}

function describe(body: unknown): string {
  if (body !== null && typeof body === "object" && "detail" in body) {
    const detail = (body as { detail: unknown }).detail;
    if (typeof detail === "string") return detail;
    return JSON.stringify(detail);
  }
  if (typeof body === "string" && body) return body;
  return "request failed";
}

async function parseBody(resp: Response): Promise<unknown> {
  const text = await resp.text();
  if (!text) return null;
  try {
    return JSON.parse(text);
  } catch {
    return text;
  }
}

/** Parse a text/event-stream body into walk events, one per data frame. */
export async function* readSse(body: ReadableStream<Uint8Array>): AsyncGenerator<WalkEvent, void> {
  const reader = body.getReader();
  const decoder = new TextDecoder();
  let buffered = "";
  for (;;) {
    const { done, value } = await reader.read();
    if (value) buffered += decoder.decode(value, { stream: true });
    let cut: number;
    while ((cut = buffered.indexOf("\n\n")) >= 0) {
      const frame = buffered.slice(0, cut);
      buffered = buffered.slice(cut + 2);
      const data = frame
        .split("\n")
        .filter((line) => line.startsWith("data: "))
        .map((line) => line.slice(6))
        .join("\n");
      if (data) yield JSON.parse(data) as WalkEvent;
    }
    if (done) return;
  }
}

export class WorkbenchClient {
  constructor(private readonly base: string = "") {}

  private async call(path: string, init?: RequestInit): Promise<unknown> {
    const resp = await fetch(this.base + path, init);
    const body = await parseBody(resp);
    if (!resp.ok) throw new ApiError(resp.status, describe(body));
    return body;
  }

  private post(path: string, payload: unknown): Promise<unknown> {
    return this.call(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  floorplan(): Promise<FloorplanDoc> {
    return this.call("/api/floorplan") as Promise<FloorplanDoc>;
  }

  collect(x: number, y: number): Promise<{ point: PointDoc; revision: number }> {
    return this.post("/api/collect", { x, y }) as Promise<{ point: PointDoc; revision: number }>;
  }

  checkRect(
    rect: [number, number, number, number],
  ): Promise<{ verdict: VerdictDoc; revision: number }> {
    return this.post("/api/segment/check", { rect }) as Promise<{
      verdict: VerdictDoc;
      revision: number;
    }>;
  }

  async commitRect(
    rect: [number, number, number, number],
    revision: number,
  ): Promise<CommitResult> {
    const resp = await fetch(this.base + "/api/segment/commit", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ rect, revision }),
    });
    const body = await parseBody(resp);
    if (resp.status === 409 && body !== null && typeof body === "object" && "verdict" in body) {
      const doc = body as { verdict: VerdictDoc; revision: number };
      return { ok: false, verdict: doc.verdict, revision: doc.revision };
    }
    if (!resp.ok) throw new ApiError(resp.status, describe(body));
    const doc = body as { subarea: SubareaDoc; revision: number };
    return { ok: true, subarea: doc.subarea, revision: doc.revision };
  }

  segmentAuto(params: Record<string, number> = {}): Promise<AutoResult> {
    return this.post("/api/segment/auto", params) as Promise<AutoResult>;
  }

  startWalk(waypoints?: [number, number][], step?: number): Promise<{ steps: number }> {
    const payload: Record<string, unknown> = {};
    if (waypoints !== undefined) payload.waypoints = waypoints;
    if (step !== undefined) payload.step = step;
    return this.post("/api/walk", payload) as Promise<{ steps: number }>;
  }

  async streamWalk(debug = false): Promise<AsyncGenerator<WalkEvent, void>> {
    const url = this.base + "/api/walk/stream" + (debug ? "?debug=true" : "");
    const resp = await fetch(url);
    if (!resp.ok) throw new ApiError(resp.status, describe(await parseBody(resp)));
    if (!resp.body) throw new ApiError(0, "stream has no body");
    return readSse(resp.body);
  }

  async saveDatabase(): Promise<string> {
    const resp = await fetch(this.base + "/api/database/save", { method: "POST" });
    if (!resp.ok) throw new ApiError(resp.status, describe(await parseBody(resp)));
    return resp.text();
  }

  loadDatabase(
    text: string,
  ): Promise<{ reference_points: number; subareas: number; revision: number }> {
    return this.call("/api/database/load", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: text,
    }) as Promise<{ reference_points: number; subareas: number; revision: number }>;
  }
}
