"""HTTP facade over the engine and simulator for the operator workbench.

One in-memory session per process: a working database, a revision
counter bumped on every mutation, and at most one live walk. Mutations
serialize behind a single lock; the walk stepper runs on its own thread
and publishes events to a buffer that streaming responses drain.
"""

from __future__ import annotations

import json
import threading
import time
from pathlib import Path

import click
import uvicorn
from fastapi import FastAPI, HTTPException, Request, Response
from fastapi.responses import JSONResponse, StreamingResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .core import (
    ConflictError,
    DatabaseFormatError,
    DatabaseMeta,
    FingerprintDatabase,
    InvalidInputError,
    utc_timestamp,
)
from .estimators import ThreeNNFLocalizer
from .geometry import Rect, euclid
from .io import dumps_database, loads_database
from .segmentation import (
    SegmentationParams,
    commit_subarea,
    segment_auto,
    segment_manual_check,
)
from .simulate import NS_SURVEY, Scenario, load_scenario, sample_batch, walk_positions
from .simulate import observe, NS_WALK


class CollectBody(BaseModel):
    x: float
    y: float


def _rect_from_payload(value) -> Rect:
    try:
        x0, y0, x1, y1 = (float(v) for v in value)
    except (TypeError, ValueError) as exc:
        raise InvalidInputError(f"rect must be [x0, y0, x1, y1], got {value!r}") from exc
    return Rect(x0, y0, x1, y1)


def _point_doc(rp) -> dict:
    return {
        "id": rp.id,
        "x": rp.position[0],
        "y": rp.position[1],
        "readings": {k: rp.vector.readings[k] for k in sorted(rp.vector.readings)},
        "subarea": rp.subarea,
    }


def _subarea_doc(sub) -> dict:
    return {
        "id": sub.id,
        "rect": list(sub.region.as_tuple()),
        "feature": {k: list(sub.feature.ranges[k]) for k in sorted(sub.feature.ranges)},
    }


def _verdict_doc(verdict) -> dict:
    return {
        "accepted": verdict.accepted,
        "reason": verdict.reason,
        "feature": (
            None
            if verdict.feature is None
            else {k: list(v) for k, v in sorted(verdict.feature.ranges.items())}
        ),
        "point_ids": list(verdict.point_ids),
    }


class WalkRun:
    """Event buffer for one simulated walk; filled by the stepper thread."""

    def __init__(self):
        self.events: list[dict] = []
        self.done = False
        self.cond = threading.Condition()

    def publish(self, event: dict, last: bool = False):
        with self.cond:
            self.events.append(event)
            if last:
                self.done = True
            self.cond.notify_all()

    def stream(self):
        i = 0
        while True:
            with self.cond:
                while i >= len(self.events) and not self.done:
                    self.cond.wait(timeout=5.0)
                if i >= len(self.events):
                    if self.done:
                        return
                    continue
                event = self.events[i]
            i += 1
            yield event


class Session:
    def __init__(self, scenario: Scenario, seed: int, step_interval: float):
        self.scenario = scenario
        self.seed = seed
        self.step_interval = step_interval
        self.lock = threading.Lock()
        self.revision = 0
        self.collect_index = 0
        self.walk: WalkRun | None = None
        self.walk_thread: threading.Thread | None = None
        self.db = self._fresh_db()

    def _fresh_db(self) -> FingerprintDatabase:
        return FingerprintDatabase(
            beacons=list(self.scenario.beacons),
            meta=DatabaseMeta(scenario=self.scenario.name, created=utc_timestamp()),
            bounds=self.scenario.floorplan.bounds,
        )

    def walk_active(self) -> bool:
        return self.walk_thread is not None and self.walk_thread.is_alive()


def create_app(
    scenario: Scenario | str = "office",
    seed: int = 0,
    step_interval: float = 0.5,
    static_dir: str | Path | None = None,
) -> FastAPI:
    if isinstance(scenario, str):
        scenario = load_scenario(scenario)
    session = Session(scenario, seed, step_interval)
    app = FastAPI(title="rsslocate workbench")
    app.state.session = session

    @app.exception_handler(InvalidInputError)
    async def _invalid(request, exc):
        return JSONResponse({"detail": str(exc)}, status_code=400)

    @app.exception_handler(ConflictError)
    async def _conflict(request, exc):
        return JSONResponse({"detail": str(exc)}, status_code=409)

    @app.get("/api/floorplan")
    def floorplan():
        s = session
        with s.lock:
            fp = s.scenario.floorplan
            return {
                "scenario": s.scenario.name,
                "bounds": list(fp.bounds.as_tuple()),
                "walls": [[*w.p1, *w.p2, w.loss_db] for w in fp.walls],
                "beacons": [
                    {"id": b.id, "x": b.position[0], "y": b.position[1], "tx_label": b.tx_label}
                    for b in s.db.beacons
                ],
                "reference_points": [_point_doc(rp) for rp in s.db.reference_points],
                "subareas": [_subarea_doc(sub) for sub in s.db.subareas],
                "waypoints": [list(p) for p in s.scenario.waypoints],
                "revision": s.revision,
            }

    @app.post("/api/collect")
    def collect(body: CollectBody):
        s = session
        position = (body.x, body.y)
        with s.lock:
            if not s.scenario.floorplan.bounds.contains(position):
                raise HTTPException(status_code=422, detail=f"position {position} out of bounds")
            batch = sample_batch(
                s.scenario,
                position,
                s.seed,
                NS_SURVEY,
                s.collect_index,
                s.scenario.propagation.samples_per_reading,
            )
            rp_id = s.db.add_reference_point(position, batch)
            s.collect_index += 1
            s.revision += 1
            return {"point": _point_doc(s.db.get_reference_point(rp_id)), "revision": s.revision}

    @app.post("/api/segment/check")
    async def segment_check(request: Request):
        s = session
        try:
            payload = await request.json()
        except json.JSONDecodeError as exc:
            raise InvalidInputError(f"body is not valid JSON: {exc}") from exc
        if not isinstance(payload, dict) or "rect" not in payload:
            raise InvalidInputError("body must be an object with a 'rect' field")
        rect = _rect_from_payload(payload["rect"])
        with s.lock:
            verdict = segment_manual_check(s.db, rect)
            return {"verdict": _verdict_doc(verdict), "revision": s.revision}

    @app.post("/api/segment/commit")
    async def segment_commit(request: Request):
        s = session
        try:
            payload = await request.json()
        except json.JSONDecodeError as exc:
            raise InvalidInputError(f"body is not valid JSON: {exc}") from exc
        if not isinstance(payload, dict) or "rect" not in payload or "revision" not in payload:
            raise InvalidInputError("body must be an object with 'rect' and 'revision'")
        rect = _rect_from_payload(payload["rect"])
        try:
            revision = int(payload["revision"])
        except (TypeError, ValueError) as exc:
            raise InvalidInputError("revision must be an integer") from exc
        with s.lock:
            if revision != s.revision:
                raise ConflictError(
                    f"stale revision {revision} (current {s.revision}); re-check first"
                )
            verdict = segment_manual_check(s.db, rect)
            if not verdict.accepted:
                return JSONResponse(
                    {"verdict": _verdict_doc(verdict), "revision": s.revision}, status_code=409
                )
            sub_id = commit_subarea(s.db, rect, verdict.feature)
            s.revision += 1
            return {"subarea": _subarea_doc(s.db.get_subarea(sub_id)), "revision": s.revision}

    @app.post("/api/segment/auto")
    async def segment_auto_endpoint(request: Request):
        s = session
        body = await request.body()
        params = SegmentationParams()
        if body:
            try:
                payload = json.loads(body)
            except json.JSONDecodeError as exc:
                raise InvalidInputError(f"body is not valid JSON: {exc}") from exc
            if payload:
                if not isinstance(payload, dict):
                    raise InvalidInputError("params must be an object")
                try:
                    params = SegmentationParams(**payload)
                except TypeError as exc:
                    raise InvalidInputError(f"bad segmentation params: {exc}") from exc
        with s.lock:
            report = segment_auto(s.db, params, seed=s.seed)
            if report.success:
                s.revision += 1
                return {
                    "success": True,
                    "subareas": [_subarea_doc(sub) for sub in s.db.subareas],
                    "iterations": report.iterations,
                    "revision": s.revision,
                }
            return {
                "success": False,
                "failures": [
                    {"rect": list(rect.as_tuple()), "reason": reason}
                    for rect, reason in report.failures
                ],
                "iterations": report.iterations,
                "revision": s.revision,
            }

    def _run_walk(run: WalkRun, estimator, positions, seed):
        previous = None
        total = 0.0
        for t, pos in enumerate(positions):
            v = observe(
                session.scenario, pos, seed, NS_WALK, t,
                session.scenario.propagation.query_samples,
            )
            result = estimator.track(v, previous)
            previous = result
            err = euclid(pos, result.position)
            total += err
            run.publish(
                {
                    "type": "step",
                    "t": t,
                    "estimate": list(result.position),
                    "subarea": result.subarea,
                    "candidates": result.candidate_count,
                    "fallback": result.fallback_used,
                    "true": list(pos),
                    "error": err,
                }
            )
            if session.step_interval > 0 and t + 1 < len(positions):
                time.sleep(session.step_interval)
        run.publish(
            {"type": "summary", "steps": len(positions), "mean_error": total / len(positions)},
            last=True,
        )

    @app.post("/api/walk")
    async def start_walk(request: Request):
        s = session
        body = await request.body()
        payload = {}
        if body:
            try:
                payload = json.loads(body)
            except json.JSONDecodeError as exc:
                raise InvalidInputError(f"body is not valid JSON: {exc}") from exc
            if not isinstance(payload, dict):
                raise InvalidInputError("body must be an object")
        waypoints = payload.get("waypoints")
        if waypoints is not None:
            try:
                waypoints = tuple((float(p[0]), float(p[1])) for p in waypoints)
            except (TypeError, ValueError, IndexError) as exc:
                raise InvalidInputError("waypoints must be [x, y] pairs") from exc
        step = float(payload.get("step", 1.0))
        with s.lock:
            if not s.db.subareas:
                raise ConflictError("database is not segmented; segment before walking")
            if s.walk_active():
                raise ConflictError("a walk is already running")
            positions = walk_positions(s.scenario, waypoints, step)
            estimator = ThreeNNFLocalizer().fit(s.db)
            run = WalkRun()
            s.walk = run
            thread = threading.Thread(
                target=_run_walk, args=(run, estimator, positions, s.seed), daemon=True
            )
            s.walk_thread = thread
            thread.start()
        return {"steps": len(positions)}

    @app.get("/api/walk/stream")
    def walk_stream(debug: bool = False):
        s = session
        with s.lock:
            run = s.walk
        if run is None:
            raise ConflictError("no walk has been started")

        def generate():
            for event in run.stream():
                if not debug and event.get("type") == "step":
                    event = {k: v for k, v in event.items() if k not in ("true", "error")}
                yield f"data: {json.dumps(event, sort_keys=True)}\n\n"

        return StreamingResponse(generate(), media_type="text/event-stream")

    @app.post("/api/database/save")
    def database_save():
        s = session
        with s.lock:
            return Response(content=dumps_database(s.db), media_type="application/json")

    @app.post("/api/database/load")
    async def database_load(request: Request):
        s = session
        raw = await request.body()
        try:
            text = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise InvalidInputError(f"body is not UTF-8: {exc}") from exc
        db = loads_database(text)  # DatabaseFormatError -> 400 via handler below
        with s.lock:
            if s.walk_active():
                raise ConflictError("cannot load while a walk is running")
            s.db = db
            s.collect_index = len(db.reference_points)
            s.revision = 0
            s.walk = None
            return {"reference_points": len(db.reference_points),
                    "subareas": len(db.subareas), "revision": s.revision}

    @app.exception_handler(DatabaseFormatError)
    async def _format_error(request, exc):
        return JSONResponse({"detail": str(exc)}, status_code=400)

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app


@click.command()
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--scenario", default="office", help="Preset name or scenario file.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--step-interval", type=float, default=0.5, show_default=True,
              help="Seconds between walk steps (2 Hz default).")
@click.option("--static", "static_dir", type=click.Path(file_okay=False), default=None,
              help="Directory with the UI bundle (default: bundled frontend if present).")
def main(port, host, scenario, seed, step_interval, static_dir):
    """Serve the workbench API and UI."""
    if static_dir is None:
        bundled = Path(__file__).resolve().parents[2] / "frontend" / "dist"
        static_dir = str(bundled) if bundled.is_dir() else None
    app = create_app(scenario, seed, step_interval, static_dir)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
