"""Deterministic session runtime: phases, prompting, logging, sequencing.

A session advances on integer tick counts with a fixed timestep; the clock
is always tick_index * dt (never accumulated), so replaying the same plan,
seed, and input trace yields byte-identical CSV artifacts.

Phase layout comes from the plan (Baseline / Exposure / Break). During
Exposure a motion-sickness rating prompt fires every fms_interval; a
prompt left unanswered when its phase ends expires with a logged event,
which keeps pending_fms confined to Exposure while the prompt count stays
exactly floor(duration / interval).

Sessions are either active (locomotion providers consume controller
input) or passive (the camera follows a stimulus schedule). Pose, event,
and effect streams are logged at log_rate and written on finalize
together with a kinematic summary.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .environment.paths import build_path, place_collectibles, pose_at
from .environment.scenes import SceneDescription, load_scene
from .environment.terrain import generate_terrain
from .features import default_registry
from .geom import look_rotation, qconj, qmul, rotation_vector_deg, vec3
from .locomotion import (
    IDLE_INPUT,
    ProviderSpec,
    RigState,
    StepperState,
    TraceSampler,
    configure_handler,
)
from .susceptibility import SensitivityConfig, build_sensitivity_schedule, schedule_pose
from .vision import (
    ColorCfg,
    ColorDeltas,
    DofCfg,
    EffectSample,
    FovRestrictorCfg,
    PoseSample,
    SnapperCfg,
    SnapperState,
    color_weights,
    dof_blur,
    effects_to_csv,
    fov_restriction,
    kinematics_from_trace,
    snapper_step,
)

PHASE_KINDS = ("Baseline", "Exposure", "Break")

EVENT_KINDS = ("PhaseStart", "FmsPrompt", "FmsResponse", "CoinCollected", "TargetHit",
               "Teleport", "Snap", "IndicatorShown", "Custom")

POSE_FIELDS = ("t", "px", "py", "pz", "qw", "qx", "qy", "qz")
EVENT_FIELDS = ("t", "kind", "payload_json")

# Summary classifier thresholds: a logged step counts as linear acceleration
# on an axis when |a_axis| exceeds ACCEL_EPS, and as rotation about an axis
# when |omega_axis| exceeds OMEGA_EPS.
ACCEL_EPS = 0.1    # m/s^2
OMEGA_EPS = 1.0    # deg/s

LINEAR_AXES = ("lateral", "vertical", "longitudinal")   # world x, y, z
ROTATION_AXES = ("pitch", "yaw", "roll")                # about world x, y, z

NAVIGATION_NAMES = {
    "ContinuousMove": "Standard control",
    "Teleport": "Teleportation",
    "GrabMove": "Grab movement",
    "ContinuousTurn": "Standard control",
    "SnapTurn": "Snap turning",
    "PathFollow": "Passive",
}


class SessionError(RuntimeError):
    pass


class PlanError(ValueError):
    pass


@dataclass(frozen=True)
class PhaseSpec:
    kind: str
    duration: float

    def __post_init__(self):
        if self.kind not in PHASE_KINDS:
            raise PlanError(f"unknown phase kind {self.kind!r}")
        if self.duration <= 0:
            raise PlanError("phase duration must be positive")


@dataclass(frozen=True)
class EventRecord:
    t: float
    kind: str
    payload: dict

    def __post_init__(self):
        if self.kind not in EVENT_KINDS:
            raise PlanError(f"unknown event kind {self.kind!r}")


@dataclass
class SessionPlan:
    name: str = "session"
    scene: object = "forest_simple"       # name, path, or SceneDescription
    seed: int = 0
    dt: float = 1.0 / 90.0
    log_rate: float = 50.0
    phases: tuple[PhaseSpec, ...] = (PhaseSpec("Baseline", 300.0),
                                     PhaseSpec("Exposure", 1200.0))
    fms_interval: float = 60.0
    fms_scale_min: int = 0
    fms_scale_max: int = 20
    coin_count: int | None = None
    pickup_radius: float = 0.5
    providers: dict = field(default_factory=lambda: {"left": [], "right": []})
    provider_values: dict = field(default_factory=dict)
    passive: SensitivityConfig | None = None
    input_trace: str | None = None
    auto_fms: int | None = None

    def __post_init__(self):
        if self.dt <= 0 or self.log_rate <= 0:
            raise PlanError("dt and log_rate must be positive")
        if self.fms_interval <= 0:
            raise PlanError("fms_interval must be positive")
        if self.fms_scale_min >= self.fms_scale_max:
            raise PlanError("fms scale must be a non-empty range")
        if self.coin_count is not None and self.coin_count < 0:
            raise PlanError("coin_count must be >= 0")
        if not self.phases:
            raise PlanError("plan needs at least one phase")
        log_every = 1.0 / (self.log_rate * self.dt)
        if abs(log_every - round(log_every)) > 1e-9 or round(log_every) < 1:
            raise PlanError("log_rate must divide the tick rate")
        for phase in self.phases:
            self._ticks_of(phase.duration, "phase duration")
        self._ticks_of(self.fms_interval, "fms_interval")

    def _ticks_of(self, seconds: float, label: str) -> int:
        ticks = seconds / self.dt
        if abs(ticks - round(ticks)) > 1e-6 or round(ticks) < 1:
            raise PlanError(f"{label} {seconds!r} is not a whole number of ticks")
        return int(round(ticks))

    @property
    def log_every(self) -> int:
        return int(round(1.0 / (self.log_rate * self.dt)))


def plan_from_json(doc: dict) -> SessionPlan:
    """Build a SessionPlan from its JSON file form."""
    phases: list[PhaseSpec] = []
    if "phases" in doc:
        phases = [PhaseSpec(p["kind"], float(p["duration"])) for p in doc["phases"]]
    else:
        if doc.get("baseline_duration"):
            phases.append(PhaseSpec("Baseline", float(doc["baseline_duration"])))
        phases.append(PhaseSpec("Exposure", float(doc.get("exposure_duration", 1200.0))))
        if doc.get("rest_duration"):
            phases.append(PhaseSpec("Break", float(doc["rest_duration"])))
    passive = None
    if doc.get("passive"):
        body = dict(doc["passive"])
        if "orders" in body:
            body["orders"] = tuple(tuple(o) for o in body["orders"])
        passive = SensitivityConfig(**body)
    return SessionPlan(
        name=doc.get("name", "session"),
        scene=doc.get("scene", "forest_simple"),
        seed=int(doc.get("seed", 0)),
        dt=float(doc.get("dt", 1.0 / 90.0)),
        log_rate=float(doc.get("log_rate", 50.0)),
        phases=tuple(phases),
        fms_interval=float(doc.get("fms_interval", 60.0)),
        fms_scale_min=int(doc.get("fms_scale_min", 0)),
        fms_scale_max=int(doc.get("fms_scale_max", 20)),
        coin_count=doc.get("coin_count"),
        pickup_radius=float(doc.get("pickup_radius", 0.5)),
        providers=doc.get("providers", {"left": [], "right": []}),
        provider_values=doc.get("provider_values", {}),
        passive=passive,
        input_trace=doc.get("input_trace"),
        auto_fms=doc.get("auto_fms"),
    )


def load_plan(path: str | Path) -> SessionPlan:
    with open(path, encoding="utf-8") as f:
        return plan_from_json(json.load(f))


@dataclass
class Collectible:
    index: int
    position: np.ndarray
    collected: bool = False


class SessionState:
    """Single-writer session: step with tick(), query snapshots freely."""

    def __init__(self, plan: SessionPlan):
        self.plan = plan
        if isinstance(plan.scene, SceneDescription):
            self.scene_desc = plan.scene
        else:
            self.scene_desc = load_scene(plan.scene)
        self.registry = default_registry()
        self.scene = self.scene_desc.instantiate(self.registry)

        self.path_table = None
        if self.scene_desc.path is not None:
            self.path_table = build_path(self.scene_desc.path)
        self.heightmap = None
        if self.scene_desc.terrain is not None:
            self.heightmap = generate_terrain(self.scene_desc.terrain)

        self.collectibles: list[Collectible] = []
        coin_count = plan.coin_count
        jitter = 1.0
        if self.scene_desc.collectibles:
            jitter = float(self.scene_desc.collectibles.get("jitter", 1.0))
            if coin_count is None:
                coin_count = int(self.scene_desc.collectibles.get("count", 0))
        coin_count = coin_count or 0
        if coin_count > 0 and self.path_table is not None:
            placed = place_collectibles(self.path_table, coin_count, plan.seed, jitter)
            self.collectibles = [Collectible(i, pos)
                                 for i, pos in enumerate(placed.positions)]

        self.provider_set = configure_handler(
            [self._provider_entry(name) for name in plan.providers.get("left", [])],
            [self._provider_entry(name) for name in plan.providers.get("right", [])])

        self.schedule = None
        if plan.passive is not None:
            self.schedule = build_sensitivity_schedule(plan.passive, plan.seed)

        rig = RigState()
        follows_path = any(spec.kind == "PathFollow" for spec in
                           (*self.provider_set.left, *self.provider_set.right))
        if follows_path and self.path_table is not None:
            # Start on the path so the first step is a normal advance, not a jump.
            pos, tangent = pose_at(self.path_table, 0.0)
            flat = vec3(tangent[0], 0.0, tangent[2])
            if np.linalg.norm(flat) > 1e-12:
                rig = RigState(position=pos, heading=look_rotation(flat))
            else:
                rig = RigState(position=pos)
        self.stepper = StepperState(rig=rig)
        self.tick_index = 0
        self.phase_index = 0
        self.phase_start_tick = 0
        self.pending_fms = False
        self.fms_prompt_tick = 0
        self.complete = False
        self.finalized = False

        self.pose_log: list[tuple] = []
        self.event_log: list[EventRecord] = []
        self.effect_log: list[EffectSample] = []

        self._phase_ticks = [plan._ticks_of(p.duration, "phase") for p in plan.phases]
        self._interval_ticks = plan._ticks_of(plan.fms_interval, "fms_interval")
        self._last_segment = -1
        self._fov = self._initial_fov()
        self._snapper = SnapperState()
        self._opacity = 0.0
        self._color = ColorDeltas(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
        self._blur = 0.0
        self._prev_velocity = vec3(0, 0, 0)
        self._prev_omega_vec = vec3(0, 0, 0)

        self._log_event("PhaseStart", {"phase": self.phase.kind, "index": 0})
        self._log_pose()
        self._log_effect_sample()

    def _provider_entry(self, name) -> tuple:
        if isinstance(name, (tuple, list)):
            return tuple(name)
        params = dict(self.plan.provider_values.get(name, {}))
        if name == "PathFollow":
            params.setdefault("path", "scene")
        return (name, params)

    def _initial_fov(self) -> float:
        cfg = self._fov_cfg()
        return cfg.fov_max if cfg is not None else self._camera_fov()

    def _camera_fov(self) -> float:
        camera = self.scene.roles["camera"]
        if camera.has("Camera"):
            return float(camera.attachment("Camera").values["fov"])
        return 110.0

    def _enabled_values(self, type_id: str) -> dict | None:
        camera = self.scene.roles["camera"]
        if camera.has(type_id) and camera.attachment(type_id).enabled:
            return camera.attachment(type_id).values
        return None

    def _fov_cfg(self) -> FovRestrictorCfg | None:
        values = self._enabled_values("FovRestrictor")
        if values is None:
            return None
        return FovRestrictorCfg(fov_max=values["fov_max"], fov_min=values["fov_min"],
                                gain=values["gain"], rate_limit=values["rate_limit"],
                                dynamic=values["dynamic"],
                                include_angular=values["include_angular"],
                                angular_gain=values["angular_gain"])

    # -- clock / phase ----------------------------------------------------

    @property
    def clock(self) -> float:
        return self.tick_index * self.plan.dt

    @property
    def phase(self) -> PhaseSpec:
        return self.plan.phases[self.phase_index]

    @property
    def rig(self) -> RigState:
        return self.stepper.rig

    def _log_event(self, kind: str, payload: dict):
        self.event_log.append(EventRecord(self.clock, kind, payload))

    def _log_pose(self):
        p = self.stepper.rig.position
        q = self.stepper.rig.heading
        self.pose_log.append((self.clock, p[0], p[1], p[2], q[0], q[1], q[2], q[3]))

    def _update_effects(self, speed: float, omega: float, a_lin: float, a_rot: float):
        """Advance effect state one tick; sampled into the log at log_rate."""
        cfg = self._fov_cfg()
        if cfg is not None:
            self._fov = fov_restriction(cfg, speed, self._fov, self.plan.dt, omega)
        self._opacity = 0.0
        snap_values = self._enabled_values("VisionSnapper")
        if snap_values is not None:
            snap_cfg = SnapperCfg(omega_threshold=snap_values["omega_threshold"],
                                  fade_out=snap_values["fade_out"],
                                  hold=snap_values["hold"],
                                  fade_in=snap_values["fade_in"])
            self._snapper, self._opacity = snapper_step(snap_cfg, self._snapper, omega,
                                                        self.plan.dt)
        color_values = self._enabled_values("ColorManipulation")
        if color_values is not None:
            color_cfg = ColorCfg(hue_delta_r=color_values["hue_r"],
                                 hue_delta_g=color_values["hue_g"],
                                 hue_delta_b=color_values["hue_b"],
                                 hue_delta_w=color_values["hue_w"],
                                 saturation_delta=color_values["saturation_delta"],
                                 contrast_delta=color_values["contrast_delta"],
                                 k_lin=color_values["k_lin"], k_rot=color_values["k_rot"])
            self._color = color_weights(color_cfg, a_lin, a_rot)
        else:
            self._color = ColorDeltas(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
        self._blur = 0.0
        dof_values = self._enabled_values("DepthOfField")
        if dof_values is not None:
            dof_cfg = DofCfg(focus_distance=dof_values["focus_distance"],
                             max_blur=dof_values["max_blur"],
                             dynamic=dof_values["dynamic"])
            depth = self._nearest_coin_depth()
            if depth is not None:
                self._blur = dof_blur(dof_cfg, depth)

    def _log_effect_sample(self):
        self.effect_log.append(EffectSample(t=self.clock, fov=self._fov,
                                            opacity=self._opacity, color=self._color,
                                            blur=self._blur))

    def _nearest_coin_depth(self) -> float | None:
        best = None
        pos = self.stepper.rig.position
        for coin in self.collectibles:
            if coin.collected:
                continue
            d = float(np.linalg.norm(coin.position - pos))
            if d > 0 and (best is None or d < best):
                best = d
        return best

    # -- stepping ----------------------------------------------------------

    def tick(self, inputs: dict | None = None):
        """Advance exactly one fixed timestep."""
        if self.finalized:
            raise SessionError("session already finalized")
        if self.complete:
            raise SessionError("session already complete")
        inputs = inputs or {}
        prev_pos = self.stepper.rig.position.copy()
        prev_heading = self.stepper.rig.heading.copy()
        dt = self.plan.dt

        if self.schedule is not None:
            self._passive_step()
            new_events = ()
        else:
            self.stepper = self._active_step(inputs, dt)
            new_events = self.stepper.events

        self.tick_index += 1
        for kind, payload in new_events:
            self._log_event(kind, payload)

        # Backward-difference kinematics for the effect computers.
        velocity = (self.stepper.rig.position - prev_pos) / dt
        speed = float(np.linalg.norm(velocity))
        omega_vec = rotation_vector_deg(qmul(self.stepper.rig.heading,
                                             qconj(prev_heading))) / dt
        omega = float(np.linalg.norm(omega_vec))
        a_lin = float(np.linalg.norm(velocity - self._prev_velocity) / dt)
        a_rot = float(np.linalg.norm(omega_vec - self._prev_omega_vec) / dt)
        self._prev_velocity = velocity
        self._prev_omega_vec = omega_vec

        self._collect_coins()
        self._update_effects(speed, omega, a_lin, a_rot)

        elapsed = self.tick_index - self.phase_start_tick
        if (self.phase.kind == "Exposure" and elapsed > 0
                and elapsed % self._interval_ticks == 0):
            self.pending_fms = True
            self.fms_prompt_tick = self.tick_index
            self._log_event("FmsPrompt", {"phase_elapsed_s": elapsed * dt})

        if self.tick_index % self.plan.log_every == 0:
            self._log_pose()
            self._log_effect_sample()

        if elapsed >= self._phase_ticks[self.phase_index]:
            self._advance_phase()

    def _active_step(self, inputs: dict, dt: float) -> StepperState:
        from .locomotion import step as locomotion_step
        surfaces = [("plane", 0.0)]
        if self.heightmap is not None:
            surfaces.insert(0, ("terrain", self.heightmap))
        return locomotion_step(self.stepper, self.provider_set, inputs, dt,
                               path_table=self.path_table, surfaces=surfaces)

    def _passive_step(self):
        """Pose the rig from the stimulus schedule (runs during Exposure)."""
        next_clock = (self.tick_index + 1) * self.plan.dt
        phase_start = self.phase_start_tick * self.plan.dt
        if self.phase.kind != "Exposure":
            return
        ts = min(next_clock - phase_start, self.schedule.end)
        pos, rot = schedule_pose(self.schedule, ts)
        self.stepper = StepperState(rig=RigState(position=pos, heading=rot),
                                    prev_inputs=self.stepper.prev_inputs,
                                    teleport_armed=self.stepper.teleport_armed,
                                    path_s=self.stepper.path_s)
        starts = [seg.start for seg in self.schedule.segments]
        idx = int(np.searchsorted(starts, ts, side="right")) - 1
        if idx != self._last_segment:
            seg = self.schedule.segments[idx]
            if seg.kind == "Indicator":
                self.event_log.append(EventRecord(next_clock, "IndicatorShown",
                                                  {"axis": seg.axis}))
            self._last_segment = idx

    def _collect_coins(self):
        pos = self.stepper.rig.position
        for coin in self.collectibles:
            if coin.collected:
                continue
            dx = pos[0] - coin.position[0]
            dz = pos[2] - coin.position[2]
            if np.hypot(dx, dz) <= self.plan.pickup_radius:
                coin.collected = True
                self._log_event("CoinCollected", {"coin": coin.index})

    def _advance_phase(self):
        if self.pending_fms:
            self.pending_fms = False
            self._log_event("Custom", {"event": "fms_prompt_expired"})
        self.phase_index += 1
        self.phase_start_tick = self.tick_index
        if self.phase_index >= len(self.plan.phases):
            self.phase_index = len(self.plan.phases) - 1
            self.complete = True
            self._log_event("Custom", {"event": "session_complete"})
        else:
            self._log_event("PhaseStart", {"phase": self.phase.kind,
                                           "index": self.phase_index})

    # -- commands ----------------------------------------------------------

    def submit_fms(self, rating: int, source: str = "participant"):
        if not self.pending_fms:
            raise SessionError("no pending rating prompt")
        rating = int(rating)
        if not (self.plan.fms_scale_min <= rating <= self.plan.fms_scale_max):
            raise SessionError(f"rating {rating} outside "
                               f"[{self.plan.fms_scale_min}, {self.plan.fms_scale_max}]")
        latency = (self.tick_index - self.fms_prompt_tick) * self.plan.dt
        self.pending_fms = False
        self._log_event("FmsResponse", {"rating": rating, "latency_s": latency,
                                        "source": source})

    def submit_hit(self, payload: dict | None = None):
        if self.finalized:
            raise SessionError("session already finalized")
        self._log_event("TargetHit", dict(payload or {}))

    def stop(self):
        if not self.complete:
            if self.pending_fms:
                self.pending_fms = False
                self._log_event("Custom", {"event": "fms_prompt_expired"})
            self.complete = True
            self._log_event("Custom", {"event": "session_stopped"})

    # -- finalize ----------------------------------------------------------

    def pose_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(POSE_FIELDS)
        for row in self.pose_log:
            writer.writerow([repr(float(v)) for v in row])
        return buf.getvalue()

    def events_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(EVENT_FIELDS)
        for rec in self.event_log:
            writer.writerow([repr(float(rec.t)), rec.kind,
                             json.dumps(rec.payload, sort_keys=True)])
        return buf.getvalue()

    def effects_csv(self) -> str:
        return effects_to_csv(self.effect_log)

    def summary(self) -> dict:
        log_dt = 1.0 / self.plan.log_rate
        poses = [PoseSample(t=row[0], position=np.array(row[1:4]),
                            orientation=np.array(row[4:8]))
                 for row in self.pose_log]
        breakdown = {f"linear_{axis}": 0.0 for axis in LINEAR_AXES}
        breakdown.update({f"rotation_{axis}": 0.0 for axis in ROTATION_AXES})
        mean_speed = 0.0
        mean_omega = 0.0
        optic_flow = 0.0
        if len(poses) >= 3:
            kin = kinematics_from_trace(poses, log_dt)
            speeds = np.array([k.speed for k in kin])
            omegas = np.array([k.omega for k in kin])
            mean_speed = float(np.mean(speeds))
            mean_omega = float(np.mean(omegas))
            optic_flow = float(np.mean(omegas / 90.0 + speeds / 1.0) / 2.0)
            axis_index = {"lateral": 0, "vertical": 1, "longitudinal": 2,
                          "pitch": 0, "yaw": 1, "roll": 2}
            for k in kin:
                for axis in LINEAR_AXES:
                    if abs(k.linear_accel[axis_index[axis]]) > ACCEL_EPS:
                        breakdown[f"linear_{axis}"] += log_dt
                for axis in ROTATION_AXES:
                    if abs(k.angular_velocity[axis_index[axis]]) > OMEGA_EPS:
                        breakdown[f"rotation_{axis}"] += log_dt
        fms = [(rec.t, rec.payload["rating"]) for rec in self.event_log
               if rec.kind == "FmsResponse"]
        provider_kinds = [spec.kind for spec in
                          (*self.provider_set.left, *self.provider_set.right)]
        passive = self.schedule is not None or "PathFollow" in provider_kinds
        if passive:
            navigation = "Passive"
        else:
            navigation = next((NAVIGATION_NAMES[k] for k in provider_kinds
                               if k in ("ContinuousMove", "Teleport", "GrabMove")),
                              "None")
        return {
            "name": self.plan.name,
            "scene": self.scene_desc.name,
            "seed": self.plan.seed,
            "phases": [{"kind": p.kind, "duration_s": p.duration}
                       for p in self.plan.phases],
            "elapsed_s": self.clock,
            "coins_collected": sum(1 for c in self.collectibles if c.collected),
            "coin_count": len(self.collectibles),
            "fms_prompt_count": sum(1 for rec in self.event_log
                                    if rec.kind == "FmsPrompt"),
            "fms_responses": [{"t": t, "rating": r} for t, r in fms],
            "mean_fms": float(np.mean([r for _, r in fms])) if fms else None,
            "mean_linear_speed_mps": mean_speed,
            "mean_angular_speed_dps": mean_omega,
            "optic_flow_proxy": optic_flow,
            "motion_breakdown_s": breakdown,
            "control_type": "Passive locomotion" if passive else "Active locomotion",
            "navigation_type": navigation,
            "vision_features": {
                type_id: dict(self.scene.roles["camera"].attachment(type_id).values)
                for type_id in sorted(self.scene.roles["camera"].enabled_types())
                if type_id != "Camera"},
        }


@dataclass(frozen=True)
class RunArtifacts:
    out_dir: Path
    pose_path: Path
    events_path: Path
    effects_path: Path
    summary_path: Path
    summary: dict


def finalize(state: SessionState, out_dir: str | Path) -> RunArtifacts:
    """Write pose/event/effect CSVs and the summary; marks the session done."""
    if not state.complete:
        raise SessionError("session still running; stop it before finalizing")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    pose_path = out / "pose.csv"
    events_path = out / "events.csv"
    effects_path = out / "effects.csv"
    summary_path = out / "summary.json"
    pose_path.write_text(state.pose_csv(), encoding="utf-8")
    events_path.write_text(state.events_csv(), encoding="utf-8")
    effects_path.write_text(state.effects_csv(), encoding="utf-8")
    summary = state.summary()
    summary_path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n",
                            encoding="utf-8")
    state.finalized = True
    return RunArtifacts(out_dir=out, pose_path=pose_path, events_path=events_path,
                        effects_path=effects_path, summary_path=summary_path,
                        summary=summary)


def start_session(plan: SessionPlan) -> SessionState:
    return SessionState(plan)


def run_headless(plan: SessionPlan, out_dir: str | Path,
                 trace_rows: list | None = None) -> RunArtifacts:
    """Run a plan to completion without a service; used by the CLI."""
    state = start_session(plan)
    sampler = TraceSampler(trace_rows) if trace_rows else None
    while not state.complete:
        inputs = sampler.at(state.clock) if sampler else {}
        state.tick(inputs)
        if state.pending_fms and plan.auto_fms is not None:
            state.submit_fms(plan.auto_fms, source="scripted")
    return finalize(state, out_dir)


# -- experiment sets -------------------------------------------------------

_OPS = {
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    "==": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
}


@dataclass(frozen=True)
class SetNode:
    node_id: str
    scene: str
    plan: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SetEdge:
    source: str
    target: str
    condition: dict | None = None   # {"metric", "op", "value"} or None (always)


@dataclass(frozen=True)
class ExperimentSet:
    nodes: tuple[SetNode, ...]
    edges: tuple[SetEdge, ...]

    def __post_init__(self):
        ids = [n.node_id for n in self.nodes]
        if len(set(ids)) != len(ids):
            raise PlanError("duplicate node ids in experiment set")
        for edge in self.edges:
            if edge.source not in ids or edge.target not in ids:
                raise PlanError(f"edge {edge.source!r}->{edge.target!r} references "
                                f"unknown nodes")

    def node(self, node_id: str) -> SetNode:
        for n in self.nodes:
            if n.node_id == node_id:
                return n
        raise PlanError(f"unknown node {node_id!r}")


def evaluate_condition(condition: dict | None, results: dict) -> bool:
    if condition is None:
        return True
    metric = condition["metric"]
    op = condition["op"]
    if op not in _OPS:
        raise PlanError(f"unknown condition operator {op!r}")
    if metric not in results:
        return False
    value = results[metric]
    if value is None:
        return False
    return bool(_OPS[op](value, condition["value"]))


def next_node(experiment_set: ExperimentSet, current: str,
              results: dict) -> SetNode | None:
    """First matching edge in list order picks the successor; no match ends the set."""
    experiment_set.node(current)
    for edge in experiment_set.edges:
        if edge.source == current and evaluate_condition(edge.condition, results):
            return experiment_set.node(edge.target)
    return None


def experiment_set_from_json(doc: dict) -> ExperimentSet:
    nodes = tuple(SetNode(node_id=n["id"], scene=n.get("scene", "forest_simple"),
                          plan=n.get("plan", {}))
                  for n in doc["nodes"])
    edges = tuple(SetEdge(source=e["from"], target=e["to"],
                          condition=e.get("condition"))
                  for e in doc["edges"])
    return ExperimentSet(nodes=nodes, edges=edges)
