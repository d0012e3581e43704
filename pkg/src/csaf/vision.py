"""Pure parameter computers for the vision comfort techniques.

Every function here maps rig kinematics to effect parameters a renderer
would consume (field of view, fade opacity, color deltas, blur). Nothing
draws; the outputs stream to CSV for plotting or downstream tooling.

Kinematics are derived from a pose trace by central finite differences;
angular rates come from world-frame quaternion deltas. Interior samples
only: the first and last pose have no two-sided neighborhood.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .geom import IDENTITY_QUAT, compose_pose, qconj, qmul, rotation_vector_deg

SNAPPER_STATES = ("Idle", "FadingOut", "Black", "FadingIn")


class VisionError(ValueError):
    pass


@dataclass(frozen=True)
class PoseSample:
    t: float
    position: np.ndarray
    orientation: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float))
        object.__setattr__(self, "orientation", np.asarray(self.orientation, dtype=float))


@dataclass(frozen=True)
class KinematicsSample:
    t: float
    linear_velocity: np.ndarray    # m/s
    linear_accel: np.ndarray       # m/s^2
    angular_velocity: np.ndarray   # deg/s, components about x/y/z
    angular_accel: np.ndarray      # deg/s^2

    @property
    def speed(self) -> float:
        return float(np.linalg.norm(self.linear_velocity))

    @property
    def omega(self) -> float:
        return float(np.linalg.norm(self.angular_velocity))


def kinematics_from_trace(poses: list[PoseSample], dt: float) -> list[KinematicsSample]:
    """Central-difference kinematics at the interior samples of a uniform trace."""
    if len(poses) < 3:
        raise VisionError("need at least 3 pose samples")
    for a, b in zip(poses, poses[1:]):
        if abs((b.t - a.t) - dt) > 1e-6:
            raise VisionError(f"non-uniform timestamps at t={a.t!r}")

    positions = np.array([p.position for p in poses])
    vel = (positions[2:] - positions[:-2]) / (2.0 * dt)
    acc = (positions[2:] - 2.0 * positions[1:-1] + positions[:-2]) / (dt * dt)

    omegas = []
    for i in range(1, len(poses) - 1):
        dq = qmul(poses[i + 1].orientation, qconj(poses[i - 1].orientation))
        omegas.append(rotation_vector_deg(dq) / (2.0 * dt))
    omegas = np.array(omegas)

    # Angular acceleration by one-sided differences over the omega series.
    alphas = np.zeros_like(omegas)
    if len(omegas) > 1:
        alphas[1:-1] = (omegas[2:] - omegas[:-2]) / (2.0 * dt)
        alphas[0] = (omegas[1] - omegas[0]) / dt
        alphas[-1] = (omegas[-1] - omegas[-2]) / dt

    return [KinematicsSample(t=poses[i + 1].t,
                             linear_velocity=vel[i],
                             linear_accel=acc[i],
                             angular_velocity=omegas[i],
                             angular_accel=alphas[i])
            for i in range(len(poses) - 2)]


@dataclass(frozen=True)
class FovRestrictorCfg:
    fov_max: float = 110.0
    fov_min: float = 60.0
    gain: float = 10.0           # degrees removed per m/s
    rate_limit: float = 0.2      # deg/s
    dynamic: bool = True
    include_angular: bool = False
    angular_gain: float = 0.0    # degrees removed per deg/s

    def __post_init__(self):
        if self.fov_min > self.fov_max:
            raise VisionError("fov_min must not exceed fov_max")
        if self.rate_limit <= 0:
            raise VisionError("rate_limit must be positive")


def fov_restriction(cfg: FovRestrictorCfg, speed: float, prev_fov: float,
                    dt: float, omega: float = 0.0) -> float:
    """Next field of view, moving toward the speed target at most rate_limit*dt."""
    if cfg.dynamic:
        drive = cfg.gain * speed
        if cfg.include_angular:
            drive += cfg.angular_gain * omega
        target = min(cfg.fov_max, max(cfg.fov_min, cfg.fov_max - drive))
    else:
        target = cfg.fov_min
    max_step = cfg.rate_limit * dt
    delta = target - prev_fov
    if abs(delta) > max_step:
        delta = max_step if delta > 0 else -max_step
    return min(cfg.fov_max, max(cfg.fov_min, prev_fov + delta))


@dataclass(frozen=True)
class SnapperCfg:
    omega_threshold: float = 30.0
    fade_out: float = 0.1
    hold: float = 0.2
    fade_in: float = 0.3

    def __post_init__(self):
        if self.omega_threshold <= 0:
            raise VisionError("omega_threshold must be positive")
        if min(self.fade_out, self.hold, self.fade_in) < 0:
            raise VisionError("durations must be non-negative")


@dataclass(frozen=True)
class SnapperState:
    phase: str = "Idle"
    elapsed: float = 0.0

    def __post_init__(self):
        if self.phase not in SNAPPER_STATES:
            raise VisionError(f"unknown snapper phase {self.phase!r}")


def snapper_step(cfg: SnapperCfg, state: SnapperState, omega: float,
                 dt: float) -> tuple[SnapperState, float]:
    """One timestep of the fade-to-black machine; returns (state, opacity)."""
    phase, elapsed = state.phase, state.elapsed

    if phase == "Idle":
        if omega > cfg.omega_threshold:
            phase, elapsed = "FadingOut", 0.0
    if phase != "Idle":
        elapsed += dt

    if phase == "FadingOut" and elapsed >= cfg.fade_out:
        phase, elapsed = "Black", elapsed - cfg.fade_out
    if phase == "Black":
        if omega > cfg.omega_threshold:
            elapsed = 0.0   # keep holding while still rotating fast
        if elapsed >= cfg.hold:
            phase, elapsed = "FadingIn", elapsed - cfg.hold
    if phase == "FadingIn":
        if omega > cfg.omega_threshold:
            # Re-trigger: fade back out from the current opacity level.
            opacity_now = 1.0 - min(1.0, elapsed / cfg.fade_in) if cfg.fade_in > 0 else 0.0
            elapsed = opacity_now * cfg.fade_out
            phase = "FadingOut"
        elif elapsed >= cfg.fade_in:
            phase, elapsed = "Idle", 0.0

    if phase == "Idle":
        opacity = 0.0
    elif phase == "FadingOut":
        opacity = min(1.0, elapsed / cfg.fade_out) if cfg.fade_out > 0 else 1.0
    elif phase == "Black":
        opacity = 1.0
    else:
        opacity = 1.0 - min(1.0, elapsed / cfg.fade_in) if cfg.fade_in > 0 else 0.0
    return SnapperState(phase, elapsed), float(opacity)


@dataclass(frozen=True)
class ColorCfg:
    hue_delta_r: float = 0.0
    hue_delta_g: float = 0.0
    hue_delta_b: float = 0.0
    hue_delta_w: float = 0.0
    saturation_delta: float = 0.0
    contrast_delta: float = 0.0
    k_lin: float = 0.0           # weight per m/s^2
    k_rot: float = 0.0           # weight per deg/s^2

    def __post_init__(self):
        if self.k_lin < 0 or self.k_rot < 0:
            raise VisionError("gains must be non-negative")


@dataclass(frozen=True)
class ColorDeltas:
    hue_r: float
    hue_g: float
    hue_b: float
    hue_w: float
    saturation: float
    contrast: float
    weight: float


def color_weights(cfg: ColorCfg, a_lin: float, a_rot: float) -> ColorDeltas:
    """Scale the configured deltas by w = clamp(k_lin*a_lin + k_rot*a_rot, 0, 1)."""
    if a_lin < 0 or a_rot < 0:
        raise VisionError("acceleration magnitudes must be non-negative")
    w = min(1.0, max(0.0, cfg.k_lin * a_lin + cfg.k_rot * a_rot))
    return ColorDeltas(hue_r=w * cfg.hue_delta_r, hue_g=w * cfg.hue_delta_g,
                       hue_b=w * cfg.hue_delta_b, hue_w=w * cfg.hue_delta_w,
                       saturation=w * cfg.saturation_delta,
                       contrast=w * cfg.contrast_delta, weight=w)


@dataclass(frozen=True)
class DofCfg:
    focus_distance: float = 2.0
    max_blur: float = 1.0
    dynamic: bool = True

    def __post_init__(self):
        if self.focus_distance <= 0:
            raise VisionError("focus_distance must be positive")


def dof_blur(cfg: DofCfg, object_depth: float) -> float:
    """Blur grows linearly with defocus distance and saturates at max_blur."""
    if object_depth <= 0:
        raise VisionError("object_depth must be positive")
    return cfg.max_blur * min(1.0, abs(object_depth - cfg.focus_distance)
                              / cfg.focus_distance)


@dataclass(frozen=True)
class RestFrameCfg:
    model: str = "nose"
    offset_position: np.ndarray = field(default_factory=lambda: np.array([0.0, -0.06, 0.12]))
    offset_rotation: np.ndarray = field(default_factory=lambda: IDENTITY_QUAT.copy())

    def __post_init__(self):
        if self.model not in ("nose", "hat"):
            raise VisionError(f"unknown rest-frame model {self.model!r}")
        object.__setattr__(self, "offset_position",
                           np.asarray(self.offset_position, dtype=float))
        object.__setattr__(self, "offset_rotation",
                           np.asarray(self.offset_rotation, dtype=float))


def rest_frame_pose(head_position: np.ndarray, head_rotation: np.ndarray,
                    cfg: RestFrameCfg) -> tuple[np.ndarray, np.ndarray]:
    """World pose of the rest-frame prop: rigidly attached in the head frame."""
    return compose_pose(np.asarray(head_position, dtype=float),
                        np.asarray(head_rotation, dtype=float),
                        cfg.offset_position, cfg.offset_rotation)


@dataclass(frozen=True)
class PixelizeCfg:
    # Computed for completeness; HMD pipelines ignore it (advisory only).
    screen_height: int = 270


def pixelize_resolution(cfg: PixelizeCfg, native: tuple[int, int]) -> tuple[int, int]:
    """Downscaled (width, height) preserving the native aspect ratio."""
    nw, nh = native
    if cfg.screen_height <= 0:
        raise VisionError("screen_height must be positive")
    if cfg.screen_height > nh:
        raise VisionError("screen_height exceeds native height")
    height = int(cfg.screen_height)
    width = int(round(nw * (height / nh)))
    return width, height


EFFECT_FIELDS = ("t", "fov", "opacity", "hue_r", "hue_g", "hue_b", "hue_w",
                 "sat", "con", "blur")


@dataclass(frozen=True)
class EffectSample:
    t: float
    fov: float
    opacity: float
    color: ColorDeltas
    blur: float


def effects_to_csv(samples: list[EffectSample]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(EFFECT_FIELDS)
    for s in samples:
        writer.writerow([repr(float(s.t)), repr(float(s.fov)), repr(float(s.opacity)),
                         repr(float(s.color.hue_r)), repr(float(s.color.hue_g)),
                         repr(float(s.color.hue_b)), repr(float(s.color.hue_w)),
                         repr(float(s.color.saturation)), repr(float(s.color.contrast)),
                         repr(float(s.blur))])
    return buf.getvalue()
