"""Deterministic rig kinematics: six locomotion providers plus the handler
that composes them.

The rig is a position on the xz plane (y preserved unless a provider sets
it) and a yaw-only heading quaternion. All providers are pure transition
functions stepped at a fixed timestep; identical inputs give bit-identical
trajectories, which the replay tests rely on.

Provider composition follows the handler algorithm: clear whatever was
active, drop entries that do not conform to the provider contract (with a
diagnostic), instantiate the survivors, and enable each side's actions.
Within one side's list, earlier providers consume their bound actions
first, so e.g. a ContinuousTurn listed before a SnapTurn on the same stick
leaves the SnapTurn idle.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .geom import (
    IDENTITY_QUAT,
    look_rotation,
    qmul,
    qnorm,
    qrotate,
    vec3,
    yaw_quat,
)

PROVIDER_KINDS = (
    "ContinuousMove",
    "Teleport",
    "GrabMove",
    "ContinuousTurn",
    "SnapTurn",
    "PathFollow",
)

# Actions each provider binds, used for first-consumer conflict resolution.
_ACTIONS = {
    "ContinuousMove": ("joystick",),
    "Teleport": ("joystick",),
    "GrabMove": ("grip", "controller_pose"),
    "ContinuousTurn": ("joystick_x",),
    "SnapTurn": ("joystick_x",),
    "PathFollow": (),
}

# joystick implies both axes.
_ACTION_OVERLAP = {
    "joystick": {"joystick", "joystick_x"},
    "joystick_x": {"joystick", "joystick_x"},
    "grip": {"grip"},
    "controller_pose": {"controller_pose"},
}


class LocomotionError(ValueError):
    pass


@dataclass(frozen=True)
class RigState:
    """Rig root pose. heading is a yaw-only unit quaternion."""

    position: np.ndarray = field(default_factory=lambda: vec3(0, 0, 0))
    heading: np.ndarray = field(default_factory=lambda: IDENTITY_QUAT.copy())

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float))
        object.__setattr__(self, "heading", qnorm(np.asarray(self.heading, dtype=float)))


@dataclass(frozen=True)
class ControllerInput:
    side: str = "left"
    joystick: tuple[float, float] = (0.0, 0.0)
    grip: bool = False
    trigger: bool = False
    validate_button: bool = False
    controller_position: np.ndarray = field(default_factory=lambda: vec3(0, 0, 0))
    controller_rotation: np.ndarray = field(default_factory=lambda: IDENTITY_QUAT.copy())

    def __post_init__(self):
        jx, jy = self.joystick
        if not (np.isfinite(jx) and np.isfinite(jy)):
            raise LocomotionError("non-finite joystick input")
        object.__setattr__(self, "joystick", (float(jx), float(jy)))
        object.__setattr__(self, "controller_position",
                           np.asarray(self.controller_position, dtype=float))
        object.__setattr__(self, "controller_rotation",
                           qnorm(np.asarray(self.controller_rotation, dtype=float)))


IDLE_INPUT = ControllerInput()


@dataclass(frozen=True)
class ProviderSpec:
    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in PROVIDER_KINDS:
            raise LocomotionError(f"unknown provider kind {self.kind!r}")
        for key, value in self.params.items():
            if key in ("speed", "turn_rate", "snap_angle", "follow_speed") and value <= 0:
                raise LocomotionError(f"{self.kind}.{key} must be positive")
        if self.kind == "PathFollow" and "path" not in self.params:
            raise LocomotionError("PathFollow requires a path reference in params['path']")

    def param(self, key: str, default):
        return self.params.get(key, default)


@dataclass(frozen=True)
class ProviderSet:
    left: tuple[ProviderSpec, ...] = ()
    right: tuple[ProviderSpec, ...] = ()
    diagnostics: tuple[str, ...] = ()


def configure_handler(left: list, right: list) -> ProviderSet:
    """Build a ProviderSet from raw per-side entries.

    Entries may be ProviderSpec instances or (kind, params) pairs. Anything
    else does not conform to the provider contract and is filtered out with
    a diagnostic instead of raising.
    """
    diagnostics: list[str] = []

    def conform(entries: list, side: str) -> tuple[ProviderSpec, ...]:
        kept = []
        for i, entry in enumerate(entries):
            if isinstance(entry, ProviderSpec):
                kept.append(entry)
                continue
            if (isinstance(entry, tuple) and len(entry) == 2
                    and entry[0] in PROVIDER_KINDS and isinstance(entry[1], dict)):
                kept.append(ProviderSpec(entry[0], entry[1]))
                continue
            diagnostics.append(f"{side}[{i}]: {entry!r} does not conform, removed")
        return tuple(kept)

    return ProviderSet(left=conform(list(left), "left"),
                       right=conform(list(right), "right"),
                       diagnostics=tuple(diagnostics))


@dataclass(frozen=True)
class StepperState:
    """Per-session provider memory carried between ticks."""

    rig: RigState
    prev_inputs: dict = field(default_factory=dict)       # side -> ControllerInput
    teleport_armed: dict = field(default_factory=dict)    # side -> bool
    path_s: float = 0.0
    events: tuple = ()                                    # (kind, payload) emitted this tick


def _heading_frame_move(rig: RigState, jx: float, jy: float, speed: float,
                        dt: float) -> RigState:
    # Clamp stick magnitude to 1 so per-step displacement never exceeds speed*dt.
    mag = np.hypot(jx, jy)
    if mag > 1.0:
        jx, jy = jx / mag, jy / mag
    local = vec3(jx, 0.0, jy)
    world = qrotate(rig.heading, local)
    world[1] = 0.0
    return replace(rig, position=rig.position + world * (speed * dt))


def _ray_plane(origin, direction, plane_y):
    if direction[1] == 0.0:
        return None
    t = (plane_y - origin[1]) / direction[1]
    if t <= 0.0:
        return None
    return origin + direction * t


def teleport_resolve(origin: np.ndarray, direction: np.ndarray,
                     surfaces: list) -> np.ndarray | None:
    """First intersection of a ray with the given surfaces, or None.

    Surfaces are ("plane", y) or ("terrain", heightmap). Terrain hits are
    located by marching then bisecting until |y - h(x,z)| < 1e-9.
    """
    origin = np.asarray(origin, dtype=float)
    direction = np.asarray(direction, dtype=float)
    n = float(np.sqrt(np.dot(direction, direction)))
    if n == 0.0:
        return None
    direction = direction / n

    from .environment.terrain import terrain_height

    best_t = None
    best_point = None
    for surface in surfaces:
        kind = surface[0]
        if kind == "plane":
            hit = _ray_plane(origin, direction, float(surface[1]))
            if hit is None:
                continue
            t = float((hit - origin) @ direction)
        elif kind == "terrain":
            heightmap = surface[1]

            def clearance(t: float) -> float | None:
                p = origin + direction * t
                ex, ez = heightmap.extent
                if not (0.0 <= p[0] <= ex and 0.0 <= p[2] <= ez):
                    return None
                return p[1] - terrain_height(heightmap, p[0], p[2])

            # March until the ray drops below the surface, then bisect.
            step = max(heightmap.cell_size * 0.25, 1e-3)
            t_lo, c_lo = None, None
            t_hit = None
            t_cur = step
            for _ in range(100000):
                c = clearance(t_cur)
                if c is not None:
                    if c <= 0.0:
                        lo = t_lo if c_lo is not None else max(t_cur - step, 0.0)
                        hi = t_cur
                        t_hit = hi
                        for _ in range(200):
                            mid = 0.5 * (lo + hi)
                            cm = clearance(mid)
                            if cm is not None and abs(cm) < 1e-9:
                                t_hit = mid
                                break
                            if cm is None or cm > 0.0:
                                lo = mid
                            else:
                                hi = mid
                                t_hit = mid
                        break
                    t_lo, c_lo = t_cur, c
                elif c_lo is not None:
                    break
                t_cur += step
            if t_hit is None:
                continue
            t = t_hit
        else:
            raise LocomotionError(f"unknown surface kind {surface[0]!r}")
        if t is not None and (best_t is None or t < best_t):
            best_t = t
            best_point = origin + direction * t
    return best_point


def step(state: StepperState, provider_set: ProviderSet,
         inputs: dict, dt: float, path_table=None,
         surfaces: list | None = None) -> StepperState:
    """Advance the rig one fixed timestep.

    inputs maps side -> ControllerInput; missing sides idle. Returns the
    next StepperState with any one-shot events (snap, teleport) attached.
    """
    if dt <= 0.0:
        raise LocomotionError("dt must be positive")
    rig = state.rig
    path_s = state.path_s
    teleport_armed = dict(state.teleport_armed)
    events = []

    for side in ("left", "right"):
        cur = inputs.get(side, IDLE_INPUT)
        prev = state.prev_inputs.get(side, IDLE_INPUT)
        consumed: set[str] = set()
        providers = provider_set.left if side == "left" else provider_set.right
        for spec in providers:
            needs = _ACTIONS[spec.kind]
            if any(consumed & _ACTION_OVERLAP[a] for a in needs):
                continue
            jx, jy = cur.joystick

            if spec.kind == "ContinuousMove":
                if jx != 0.0 or jy != 0.0:
                    rig = _heading_frame_move(rig, jx, jy, spec.param("speed", 2.0), dt)
                consumed.update(needs)

            elif spec.kind == "ContinuousTurn":
                if jx != 0.0:
                    rate = spec.param("turn_rate", 60.0)
                    rig = replace(rig, heading=qnorm(qmul(yaw_quat(jx * rate * dt),
                                                          rig.heading)))
                consumed.update(needs)

            elif spec.kind == "SnapTurn":
                threshold = spec.param("threshold", 0.7)
                angle = spec.param("snap_angle", 30.0)
                prev_jx = prev.joystick[0]
                if prev_jx < threshold <= jx:
                    rig = replace(rig, heading=qnorm(qmul(yaw_quat(angle), rig.heading)))
                    events.append(("Snap", {"side": side, "angle": angle}))
                elif prev_jx > -threshold >= jx:
                    rig = replace(rig, heading=qnorm(qmul(yaw_quat(-angle), rig.heading)))
                    events.append(("Snap", {"side": side, "angle": -angle}))
                consumed.update(needs)

            elif spec.kind == "Teleport":
                threshold = spec.param("threshold", 0.7)
                armed = teleport_armed.get(side, False)
                if jy > threshold:
                    teleport_armed[side] = True
                elif armed:
                    # Release commits: cast from the controller pose.
                    teleport_armed[side] = False
                    ray_dir = qrotate(qmul(rig.heading, cur.controller_rotation), vec3(0, 0, 1))
                    ray_origin = rig.position + qrotate(rig.heading, cur.controller_position)
                    target = teleport_resolve(ray_origin, ray_dir,
                                              surfaces if surfaces is not None
                                              else [("plane", 0.0)])
                    if target is not None:
                        rig = replace(rig, position=target)
                        events.append(("Teleport", {"side": side,
                                                    "target": [float(v) for v in target]}))
                consumed.update(needs)

            elif spec.kind == "GrabMove":
                if cur.grip and prev.grip:
                    delta_local = cur.controller_position - prev.controller_position
                    rig = replace(rig,
                                  position=rig.position - qrotate(rig.heading, delta_local))
                consumed.update(needs)

            elif spec.kind == "PathFollow":
                if path_table is None:
                    raise LocomotionError("PathFollow is active but no path table was given")
                path_s += spec.param("follow_speed", 5.0) * dt
                from .environment.paths import pose_at
                s_query = path_s
                if not path_table.spec.closed:
                    s_query = min(s_query, path_table.total_length)
                pos, tangent = pose_at(path_table, s_query)
                flat = vec3(tangent[0], 0.0, tangent[2])
                heading = (look_rotation(flat) if np.linalg.norm(flat) > 1e-12
                           else rig.heading)
                rig = replace(rig, position=pos, heading=heading)

    prev_inputs = {side: inputs.get(side, IDLE_INPUT) for side in ("left", "right")}
    return StepperState(rig=rig, prev_inputs=prev_inputs,
                        teleport_armed=teleport_armed, path_s=path_s,
                        events=tuple(events))


TRACE_FIELDS = ("t", "side", "jx", "jy", "grip", "trigger", "validate",
                "cpx", "cpy", "cpz", "cqw", "cqx", "cqy", "cqz")


def load_input_trace(source) -> list[tuple[float, ControllerInput]]:
    """Parse an input trace CSV into (t, ControllerInput) rows sorted by t."""
    if isinstance(source, (str, Path)):
        with open(source, newline="", encoding="utf-8") as f:
            return load_input_trace(f)
    reader = csv.DictReader(source)
    missing = set(TRACE_FIELDS) - set(reader.fieldnames or ())
    if missing:
        raise LocomotionError(f"input trace missing columns: {sorted(missing)}")
    rows = []
    for rec in reader:
        rows.append((float(rec["t"]), ControllerInput(
            side=rec["side"],
            joystick=(float(rec["jx"]), float(rec["jy"])),
            grip=rec["grip"].strip() in ("1", "true", "True"),
            trigger=rec["trigger"].strip() in ("1", "true", "True"),
            validate_button=rec["validate"].strip() in ("1", "true", "True"),
            controller_position=vec3(float(rec["cpx"]), float(rec["cpy"]), float(rec["cpz"])),
            controller_rotation=np.array([float(rec["cqw"]), float(rec["cqx"]),
                                          float(rec["cqy"]), float(rec["cqz"])]),
        )))
    rows.sort(key=lambda r: r[0])
    return rows


def trace_to_csv(rows: list[tuple[float, ControllerInput]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TRACE_FIELDS)
    for t, ci in rows:
        q = ci.controller_rotation
        p = ci.controller_position
        writer.writerow([repr(float(t)), ci.side,
                         repr(ci.joystick[0]), repr(ci.joystick[1]),
                         int(ci.grip), int(ci.trigger), int(ci.validate_button),
                         repr(float(p[0])), repr(float(p[1])), repr(float(p[2])),
                         repr(float(q[0])), repr(float(q[1])), repr(float(q[2])),
                         repr(float(q[3]))])
    return buf.getvalue()


class TraceSampler:
    """Sample-and-hold view of an input trace: latest row per side at time t."""

    def __init__(self, rows: list[tuple[float, ControllerInput]]):
        self._by_side: dict[str, list[tuple[float, ControllerInput]]] = {"left": [], "right": []}
        for t, ci in rows:
            if ci.side not in self._by_side:
                raise LocomotionError(f"unknown controller side {ci.side!r}")
            self._by_side[ci.side].append((t, ci))
        self._times = {side: np.array([t for t, _ in entries])
                       for side, entries in self._by_side.items()}

    def at(self, t: float) -> dict[str, ControllerInput]:
        out = {}
        for side, entries in self._by_side.items():
            if not entries:
                continue
            idx = int(np.searchsorted(self._times[side], t, side="right")) - 1
            if idx >= 0:
                out[side] = entries[idx][1]
        return out
