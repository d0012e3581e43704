"""HTTP gateway: commands in, telemetry out.

All mutations funnel through EngineHub.apply(Command, payload) under one
lock, so concurrent submissions serialize into a total order and never
interleave with a running tick. Queries build snapshots under the same
lock. Telemetry fans out over a server-sent event stream; each subscriber
gets an independent queue, and a dropped connection never touches session
state.

Sessions started over HTTP run on a background ticker thread. A speed
multiplier scales wall-clock pacing (0 means free-run, for scripted
sessions and tests).
"""

from __future__ import annotations

import json
import os
import queue
import threading
import time
import warnings
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from fastapi import Body, FastAPI, HTTPException, Query
from fastapi.responses import StreamingResponse
from fastapi.staticfiles import StaticFiles

from .environment.scenes import builtin_scene_names, load_scene
from .locomotion import TraceSampler, load_input_trace
from .registry import PresetDoc, RegistryError, SchemaVersionError
from .runtime import (
    ExperimentSet,
    SessionError,
    SessionState,
    experiment_set_from_json,
    finalize,
    next_node,
    plan_from_json,
)


class Command(str, Enum):
    LOAD_SCENE = "LoadScene"
    TOGGLE_PRESET = "TogglePreset"
    APPLY_PRESET = "ApplyPreset"
    START_SESSION = "StartSession"
    STOP_SESSION = "StopSession"
    SUBMIT_FMS = "SubmitFms"
    SUBMIT_HIT = "SubmitHit"
    ADVANCE_SET = "AdvanceSet"


@dataclass(frozen=True)
class TelemetryFrame:
    seq: int
    t: float
    phase: str
    phase_index: int
    pending_fms: bool
    complete: bool
    position: tuple
    heading: tuple
    fov: float
    opacity: float
    coins_collected: int
    recent_events: tuple

    def to_json(self) -> str:
        return json.dumps({
            "seq": self.seq, "t": self.t, "phase": self.phase,
            "phase_index": self.phase_index, "pending_fms": self.pending_fms,
            "complete": self.complete, "position": list(self.position),
            "heading": list(self.heading), "fov": self.fov, "opacity": self.opacity,
            "coins_collected": self.coins_collected,
            "recent_events": [{"t": t, "kind": kind, "payload": payload}
                              for t, kind, payload in self.recent_events],
        }, sort_keys=True)


def data_dir() -> Path:
    return Path(os.environ.get("CSAF_DATA_DIR", "csaf_data"))


class EngineHub:
    """Owns the scene, the live session, and the telemetry fan-out."""

    def __init__(self, scene: str = "forest_simple"):
        self.lock = threading.RLock()
        self.scene_desc = load_scene(scene)
        from .features import default_registry
        self.registry = default_registry()
        self.scene = self.scene_desc.instantiate(self.registry)
        self.session: SessionState | None = None
        self.last_summary: dict | None = None
        self.last_artifacts = None
        self.experiment_set: ExperimentSet | None = None
        self.set_current: str | None = None
        self.speed = 1.0
        self.auto_fms: int | None = None
        self._sampler: TraceSampler | None = None
        self._seq = 0
        self._run_counter = 0
        self._subscribers: list[queue.Queue] = []
        self._ticker: threading.Thread | None = None
        self._stop_requested = False
        self._events_cursor = 0

    # -- telemetry ----------------------------------------------------------

    def subscribe(self) -> queue.Queue:
        q: queue.Queue = queue.Queue(maxsize=256)
        with self.lock:
            self._subscribers.append(q)
            frame = self._frame()
        q.put(frame)
        return q

    def unsubscribe(self, q: queue.Queue):
        with self.lock:
            if q in self._subscribers:
                self._subscribers.remove(q)

    def _frame(self) -> TelemetryFrame:
        session = self.session
        self._seq += 1
        if session is None:
            return TelemetryFrame(seq=self._seq, t=0.0, phase="Idle", phase_index=-1,
                                  pending_fms=False, complete=False,
                                  position=(0.0, 0.0, 0.0), heading=(1.0, 0.0, 0.0, 0.0),
                                  fov=0.0, opacity=0.0, coins_collected=0,
                                  recent_events=())
        rig = session.rig
        recent = tuple((rec.t, rec.kind, rec.payload)
                       for rec in session.event_log[self._events_cursor:][-20:])
        self._events_cursor = len(session.event_log)
        return TelemetryFrame(
            seq=self._seq, t=session.clock, phase=session.phase.kind,
            phase_index=session.phase_index, pending_fms=session.pending_fms,
            complete=session.complete,
            position=tuple(float(v) for v in rig.position),
            heading=tuple(float(v) for v in rig.heading),
            fov=float(session._fov), opacity=float(session._opacity),
            coins_collected=sum(1 for c in session.collectibles if c.collected),
            recent_events=recent)

    def _publish(self):
        frame = self._frame()
        for q in list(self._subscribers):
            try:
                q.put_nowait(frame)
            except queue.Full:
                pass

    # -- ticker ---------------------------------------------------------------

    def _ticker_loop(self):
        while True:
            with self.lock:
                session = self.session
                if session is None or session.complete or self._stop_requested:
                    break
                inputs = self._sampler.at(session.clock) if self._sampler else {}
                session.tick(inputs)
                if session.pending_fms and self.auto_fms is not None:
                    session.submit_fms(self.auto_fms, source="scripted")
                publish = (session.tick_index % self._frames_every == 0
                           or session.complete)
                if publish:
                    self._publish()
                dt = session.plan.dt
                if session.complete:
                    self._finalize_locked()
                    break
            if self.speed > 0:
                time.sleep(dt / self.speed)
        with self.lock:
            self._publish()

    def _finalize_locked(self):
        session = self.session
        if session is None:
            return
        if not session.complete:
            session.stop()
        self._run_counter += 1
        out = data_dir() / f"{session.plan.name}-{self._run_counter:03d}"
        artifacts = finalize(session, out)
        self.last_summary = artifacts.summary
        self.last_artifacts = artifacts

    # -- commands ---------------------------------------------------------------

    def apply(self, command: Command, payload: dict) -> dict:
        with self.lock:
            handler = getattr(self, f"_cmd_{command.name.lower()}")
            result = handler(payload or {})
            self._publish()
            return result

    def _cmd_load_scene(self, payload: dict) -> dict:
        if self.session is not None and not self.session.finalized:
            raise SessionError("stop the running session before loading a scene")
        name = payload["name"]
        self.scene_desc = load_scene(name)
        from .features import default_registry
        self.registry = default_registry()
        self.scene = self.scene_desc.instantiate(self.registry)
        self.session = None
        self.last_summary = None
        return {"scene": self.scene_desc.name}

    def _cmd_toggle_preset(self, payload: dict) -> dict:
        entity = self.scene.get(payload["entity"])
        type_id = payload["type"]
        enabled = bool(payload.get("enabled", True))
        self.registry.toggle_feature(entity, type_id, enabled)
        return {"entity": entity.entity_id, "type": type_id, "enabled": enabled}

    def _cmd_apply_preset(self, payload: dict) -> dict:
        entity = self.scene.get(payload["entity"])
        doc = PresetDoc.from_json(json.dumps(payload["preset"]))
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            self.registry.apply_preset(entity, doc)
        return {"entity": entity.entity_id, "type": doc.target_type,
                "warnings": [str(w.message) for w in caught]}

    def _cmd_start_session(self, payload: dict) -> dict:
        if self.session is not None and not self.session.complete \
                and not self.session.finalized:
            raise SessionError("a session is already running")
        plan_doc = dict(payload.get("plan", {}))
        plan_doc.setdefault("scene", self.scene_desc.name)
        plan = plan_from_json(plan_doc)
        if isinstance(plan.scene, str) and plan.scene == self.scene_desc.name:
            plan.scene = self.scene_desc
        self.speed = float(payload.get("speed", 1.0))
        self.auto_fms = payload.get("auto_fms", plan.auto_fms)
        self._sampler = None
        if plan.input_trace:
            self._sampler = TraceSampler(load_input_trace(plan.input_trace))
        self.session = SessionState(plan)
        self._events_cursor = 0
        telemetry_rate = 10.0
        self._frames_every = max(1, int(round(1.0 / (telemetry_rate * plan.dt))))
        self._stop_requested = False
        self._ticker = threading.Thread(target=self._ticker_loop, daemon=True)
        self._ticker.start()
        return {"started": True, "plan": plan.name, "scene": self.scene_desc.name}

    def _cmd_stop_session(self, payload: dict) -> dict:
        if self.session is None:
            raise SessionError("no session to stop")
        self._stop_requested = True
        if not self.session.finalized:
            self._finalize_locked()
        return {"stopped": True, "summary": self.last_summary}

    def _cmd_submit_fms(self, payload: dict) -> dict:
        if self.session is None:
            raise SessionError("no running session")
        self.session.submit_fms(int(payload["rating"]),
                                source=payload.get("source", "participant"))
        return {"accepted": True}

    def _cmd_submit_hit(self, payload: dict) -> dict:
        if self.session is None:
            raise SessionError("no running session")
        self.session.submit_hit(payload.get("payload", {}))
        return {"accepted": True}

    def _cmd_advance_set(self, payload: dict) -> dict:
        if "set" in payload:
            self.experiment_set = experiment_set_from_json(payload["set"])
            self.set_current = self.experiment_set.nodes[0].node_id
            return {"current": self.set_current, "done": False}
        if self.experiment_set is None or self.set_current is None:
            raise SessionError("no experiment set loaded")
        results = payload.get("results") or self.last_summary or {}
        nxt = next_node(self.experiment_set, self.set_current, results)
        if nxt is None:
            self.set_current = None
            return {"current": None, "done": True}
        self.set_current = nxt.node_id
        self._cmd_load_scene({"name": nxt.scene})
        return {"current": nxt.node_id, "done": False, "scene": nxt.scene}

    # -- queries -----------------------------------------------------------------

    def scene_snapshot(self) -> dict:
        with self.lock:
            entities = []
            for entity in self.scene.entities.values():
                attachments = []
                for type_id, att in entity.attached.items():
                    tag = self.registry.get_type(type_id)
                    attachments.append({
                        "type": type_id,
                        "category": tag.category,
                        "enabled": att.enabled,
                        "values": att.values,
                        "schema_version": tag.schema_version,
                        "fields": [{"name": f.name, "semantic": f.semantic,
                                    "unit": f.unit, "choices": list(f.choices),
                                    "default": f.default} for f in tag.field_schema],
                    })
                entities.append({
                    "id": entity.entity_id,
                    "name": entity.display_name,
                    "attachments": attachments,
                    "available_extensions": [t.identifier for t in
                                             self.registry.available_extensions(entity)],
                })
            return {
                "scene": self.scene_desc.name,
                "theme": self.scene_desc.theme,
                "categories": self.registry.list_categories(),
                "types": {category: [t.identifier for t in
                                     self.registry.list_types(category)]
                          for category in self.registry.list_categories()},
                "entities": entities,
                "builtin_scenes": builtin_scene_names(),
            }

    def session_snapshot(self) -> dict:
        with self.lock:
            if self.session is None:
                return {"running": False, "complete": False,
                        "summary": self.last_summary}
            session = self.session
            return {
                "running": not session.complete and not session.finalized,
                "complete": session.complete,
                "clock": session.clock,
                "phase": session.phase.kind,
                "phase_index": session.phase_index,
                "pending_fms": session.pending_fms,
                "coins_collected": sum(1 for c in session.collectibles if c.collected),
                "fms_responses": sum(1 for rec in session.event_log
                                     if rec.kind == "FmsResponse"),
                "events": len(session.event_log),
                "summary": self.last_summary,
            }

    def set_snapshot(self) -> dict:
        with self.lock:
            if self.experiment_set is None:
                return {"loaded": False}
            return {
                "loaded": True,
                "current": self.set_current,
                "nodes": [{"id": n.node_id, "scene": n.scene}
                          for n in self.experiment_set.nodes],
            }


def create_app(scene: str = "forest_simple", ui_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="csaf gateway")
    hub = EngineHub(scene)
    app.state.hub = hub

    def run(command: Command, payload: dict) -> dict:
        try:
            return hub.apply(command, payload)
        except SessionError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        except SchemaVersionError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        except KeyError as exc:
            raise HTTPException(status_code=404, detail=f"not found: {exc}")
        except (RegistryError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))

    @app.get("/scene")
    def get_scene():
        return hub.scene_snapshot()

    @app.get("/scene/validate-name")
    def validate_name(name: str = Query(...)):
        with hub.lock:
            return {"name": name, "status": hub.registry.validate_feature_name(name)}

    @app.post("/scene")
    def post_scene(payload: dict = Body(...)):
        return run(Command.LOAD_SCENE, payload)

    @app.get("/presets")
    def get_presets():
        with hub.lock:
            docs = []
            root = data_dir() / "presets"
            if root.is_dir():
                for path in sorted(root.glob("*.preset.json")):
                    docs.append(json.loads(path.read_text(encoding="utf-8")))
            return {"presets": docs}

    @app.post("/presets/toggle")
    def post_toggle(payload: dict = Body(...)):
        return run(Command.TOGGLE_PRESET, payload)

    @app.post("/presets/apply")
    def post_apply(payload: dict = Body(...)):
        return run(Command.APPLY_PRESET, payload)

    @app.post("/presets/extract")
    def post_extract(payload: dict = Body(...)):
        with hub.lock:
            try:
                entity = hub.scene.get(payload["entity"])
                doc = hub.registry.extract_preset(entity, payload["type"],
                                                  payload.get("name", "extracted"))
            except KeyError as exc:
                raise HTTPException(status_code=404, detail=f"not found: {exc}")
            except RegistryError as exc:
                raise HTTPException(status_code=400, detail=str(exc))
            return json.loads(doc.to_json())

    @app.get("/session")
    def get_session():
        return hub.session_snapshot()

    @app.post("/session/start")
    def post_start(payload: dict = Body(default={})):
        return run(Command.START_SESSION, payload)

    @app.post("/session/stop")
    def post_stop(payload: dict = Body(default={})):
        return run(Command.STOP_SESSION, payload)

    @app.post("/fms")
    def post_fms(payload: dict = Body(...)):
        return run(Command.SUBMIT_FMS, payload)

    @app.post("/hit")
    def post_hit(payload: dict = Body(default={})):
        return run(Command.SUBMIT_HIT, payload)

    @app.get("/set")
    def get_set():
        return hub.set_snapshot()

    @app.post("/set/advance")
    def post_advance(payload: dict = Body(default={})):
        return run(Command.ADVANCE_SET, payload)

    @app.get("/events")
    def get_events():
        q = hub.subscribe()
        keepalive = float(os.environ.get("CSAF_SSE_KEEPALIVE", "15.0"))

        def stream():
            try:
                while True:
                    try:
                        frame = q.get(timeout=keepalive)
                        yield f"data: {frame.to_json()}\n\n"
                    except queue.Empty:
                        yield ": keepalive\n\n"
            finally:
                hub.unsubscribe(q)

        return StreamingResponse(stream(), media_type="text/event-stream",
                                 headers={"Cache-Control": "no-cache"})

    if ui_dir:
        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
