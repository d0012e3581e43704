"""Generators and scorers for the two personal susceptibility tests.

The motion-sensitivity battery builds a gap-free stimulus schedule of
passive camera motion: for each of three axis orders, each axis gets
reps x [Indicator, full 360 degree Rotation, Pause], with a longer pause
between triples and an optional analogous translation block. The camera
pose at any time is a pure function of the schedule.

The rod-and-frame test generates a balanced, seeded-shuffled trial list
over the four (frame sign, rod sign) permutations and scores responses by
absolute angular error from the gravitational vertical.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace

import numpy as np

from .geom import (
    AXIS_X,
    AXIS_Y,
    AXIS_Z,
    IDENTITY_QUAT,
    qmul,
    qnorm,
    quat_from_axis_angle,
    vec3,
    wrap_angle_deg,
)

ROTATION_AXES = ("pitch", "roll", "yaw")
TRANSLATION_AXES = ("lateral", "vertical", "longitudinal")

# pitch is about x (lateral), roll about z (longitudinal), yaw about y (vertical).
_AXIS_VECTORS = {
    "pitch": AXIS_X, "roll": AXIS_Z, "yaw": AXIS_Y,
    "lateral": AXIS_X, "vertical": AXIS_Y, "longitudinal": AXIS_Z,
}

# The translation block mirrors the rotation orders axis-for-axis.
_ROTATION_TO_TRANSLATION = {"pitch": "lateral", "roll": "longitudinal", "yaw": "vertical"}

DEFAULT_ORDERS = (
    ("pitch", "roll", "yaw"),
    ("roll", "yaw", "pitch"),
    ("yaw", "pitch", "roll"),
)

SEGMENT_KINDS = ("Indicator", "Rotation", "Translation", "Pause", "MenuReturn")


class SusceptibilityError(ValueError):
    pass


@dataclass(frozen=True)
class SensitivityConfig:
    reps_per_axis: int = 1
    turn_duration: float = 10.0
    pause_after_turn: float = 2.0
    pause_between_triples: float = 5.0
    indicator_duration: float = 1.0
    orders: tuple = DEFAULT_ORDERS
    include_translation: bool = False
    translation_distance: float = 4.0
    translation_duration: float = 4.0
    alternate_direction: bool = True
    shuffle_orders: bool = False

    def __post_init__(self):
        if self.reps_per_axis < 1:
            raise SusceptibilityError("reps_per_axis must be >= 1")
        for name in ("turn_duration", "pause_after_turn", "pause_between_triples",
                     "indicator_duration", "translation_distance", "translation_duration"):
            if getattr(self, name) <= 0:
                raise SusceptibilityError(f"{name} must be positive")
        orders = tuple(tuple(order) for order in self.orders)
        for order in orders:
            if sorted(order) != sorted(ROTATION_AXES):
                raise SusceptibilityError(f"order {order!r} is not a permutation "
                                          f"of {ROTATION_AXES}")
        object.__setattr__(self, "orders", orders)


@dataclass(frozen=True)
class StimulusSegment:
    kind: str
    start: float
    duration: float
    axis: str = ""
    magnitude: float = 0.0   # signed total: degrees for Rotation, metres for Translation

    def __post_init__(self):
        if self.kind not in SEGMENT_KINDS:
            raise SusceptibilityError(f"unknown segment kind {self.kind!r}")

    @property
    def end(self) -> float:
        return self.start + self.duration


@dataclass(frozen=True)
class StimulusSchedule:
    segments: tuple[StimulusSegment, ...]
    # Pose at each segment start, precomputed so schedule_pose is O(log n).
    start_positions: tuple = ()
    start_orientations: tuple = ()

    @property
    def end(self) -> float:
        return self.segments[-1].end if self.segments else 0.0


def build_sensitivity_schedule(cfg: SensitivityConfig, seed: int = 0) -> StimulusSchedule:
    orders = list(cfg.orders)
    if cfg.shuffle_orders:
        np.random.default_rng(seed).shuffle(orders)

    segments: list[StimulusSegment] = []
    t = 0.0

    def emit(kind: str, duration: float, axis: str = "", magnitude: float = 0.0):
        nonlocal t
        segments.append(StimulusSegment(kind, t, duration, axis, magnitude))
        t += duration

    def block(kind: str, axis_orders: list, duration: float, magnitude: float):
        for i, order in enumerate(axis_orders):
            if i > 0:
                emit("Pause", cfg.pause_between_triples)
            for axis in order:
                for rep in range(cfg.reps_per_axis):
                    sign = -1.0 if (cfg.alternate_direction and rep % 2 == 1) else 1.0
                    emit("Indicator", cfg.indicator_duration, axis)
                    emit(kind, duration, axis, sign * magnitude)
                    emit("Pause", cfg.pause_after_turn)

    block("Rotation", orders, cfg.turn_duration, 360.0)
    if cfg.include_translation:
        emit("Pause", cfg.pause_between_triples)
        translation_orders = [tuple(_ROTATION_TO_TRANSLATION[a] for a in order)
                              for order in orders]
        block("Translation", translation_orders, cfg.translation_duration,
              cfg.translation_distance)
    emit("MenuReturn", 0.0)

    return _with_start_poses(tuple(segments))


def _with_start_poses(segments: tuple[StimulusSegment, ...]) -> StimulusSchedule:
    positions = []
    orientations = []
    pos = vec3(0, 0, 0)
    rot = IDENTITY_QUAT.copy()
    for seg in segments:
        positions.append(pos.copy())
        orientations.append(rot.copy())
        if seg.kind == "Rotation":
            rot = qnorm(qmul(quat_from_axis_angle(_AXIS_VECTORS[seg.axis], seg.magnitude),
                             rot))
        elif seg.kind == "Translation":
            pos = pos + _AXIS_VECTORS[seg.axis] * seg.magnitude
    return StimulusSchedule(segments=segments,
                            start_positions=tuple(positions),
                            start_orientations=tuple(orientations))


def schedule_pose(schedule: StimulusSchedule, t: float) -> tuple[np.ndarray, np.ndarray]:
    """Camera (position, orientation) at time t within the schedule."""
    if not schedule.segments:
        raise SusceptibilityError("empty schedule")
    if t < 0.0 or t > schedule.end:
        raise SusceptibilityError(f"t={t!r} outside schedule [0, {schedule.end!r}]")

    starts = [seg.start for seg in schedule.segments]
    idx = int(np.searchsorted(starts, t, side="right")) - 1
    # Skip zero-duration markers unless t is exactly the schedule end.
    while idx < len(schedule.segments) - 1 and schedule.segments[idx].end < t:
        idx += 1
    seg = schedule.segments[idx]
    pos = schedule.start_positions[idx].copy()
    rot = schedule.start_orientations[idx].copy()

    if seg.duration > 0.0:
        frac = (t - seg.start) / seg.duration
        frac = min(1.0, max(0.0, frac))
        if seg.kind == "Rotation":
            rot = qnorm(qmul(quat_from_axis_angle(_AXIS_VECTORS[seg.axis],
                                                  seg.magnitude * frac), rot))
        elif seg.kind == "Translation":
            pos = pos + _AXIS_VECTORS[seg.axis] * (seg.magnitude * frac)
    return pos, rot


SCHEDULE_FIELDS = ("start", "duration", "kind", "axis", "magnitude")


def schedule_to_csv(schedule: StimulusSchedule) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SCHEDULE_FIELDS)
    for seg in schedule.segments:
        writer.writerow([repr(float(seg.start)), repr(float(seg.duration)),
                         seg.kind, seg.axis, repr(float(seg.magnitude))])
    return buf.getvalue()


def schedule_from_csv(text: str) -> StimulusSchedule:
    reader = csv.DictReader(io.StringIO(text))
    segments = tuple(StimulusSegment(kind=rec["kind"], start=float(rec["start"]),
                                     duration=float(rec["duration"]), axis=rec["axis"],
                                     magnitude=float(rec["magnitude"]))
                     for rec in reader)
    return _with_start_poses(segments)


PERMUTATIONS = ((1, 1), (1, -1), (-1, 1), (-1, -1))


@dataclass(frozen=True)
class RftConfig:
    frame_tilt: float = 18.0
    rod_tilt: float = 27.0
    repetitions_per_permutation: int = 4
    rod_step: float = 1.0    # degrees per unit of joystick input

    def __post_init__(self):
        if self.frame_tilt <= 0 or self.rod_tilt <= 0:
            raise SusceptibilityError("tilts must be positive")
        if self.repetitions_per_permutation < 1:
            raise SusceptibilityError("repetitions_per_permutation must be >= 1")


@dataclass(frozen=True)
class RftTrial:
    index: int
    frame_sign: int
    rod_sign: int
    frame_angle: float
    rod_start_angle: float


@dataclass(frozen=True)
class RftTrialState:
    trial: RftTrial
    rod_angle: float
    committed: bool = False


@dataclass(frozen=True)
class RftResponse:
    trial_index: int
    final_rod_angle: float


@dataclass(frozen=True)
class RftResult:
    errors: tuple[float, ...]
    mean_error: float
    std_error: float


def generate_rft_trials(cfg: RftConfig, seed: int) -> list[RftTrial]:
    """Balanced trial list over the four sign permutations, seeded-shuffled."""
    pairs = [perm for perm in PERMUTATIONS
             for _ in range(cfg.repetitions_per_permutation)]
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(pairs))
    return [RftTrial(index=i,
                     frame_sign=pairs[j][0], rod_sign=pairs[j][1],
                     frame_angle=pairs[j][0] * cfg.frame_tilt,
                     rod_start_angle=pairs[j][1] * cfg.rod_tilt)
            for i, j in enumerate(order)]


def start_trial(trial: RftTrial) -> RftTrialState:
    return RftTrialState(trial=trial, rod_angle=trial.rod_start_angle)


def rotate_rod(cfg: RftConfig, state: RftTrialState, inp: float,
               validate: bool = False) -> RftTrialState:
    """Apply one joystick input to the rod; validate commits the trial."""
    if state.committed:
        raise SusceptibilityError("trial already committed")
    angle = wrap_angle_deg(state.rod_angle + inp * cfg.rod_step, half_range=90.0)
    return replace(state, rod_angle=angle, committed=validate)


def score_rft(trials: list[RftTrial], responses: list[RftResponse]) -> RftResult:
    if len(trials) != len(responses):
        raise SusceptibilityError(f"{len(trials)} trials but {len(responses)} responses")
    by_index = {r.trial_index: r for r in responses}
    if sorted(by_index) != sorted(t.index for t in trials):
        raise SusceptibilityError("responses do not match trial indices")
    errors = tuple(abs(wrap_angle_deg(by_index[t.index].final_rod_angle, half_range=90.0))
                   for t in trials)
    mean = float(np.mean(errors))
    std = float(np.std(errors, ddof=1)) if len(errors) > 1 else 0.0
    return RftResult(errors=errors, mean_error=mean, std_error=std)


RFT_FIELDS = ("trial", "frame_sign", "rod_sign", "response_deg", "abs_error_deg")


def rft_results_to_csv(trials: list[RftTrial], responses: list[RftResponse],
                       result: RftResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RFT_FIELDS)
    by_index = {r.trial_index: r for r in responses}
    for trial, error in zip(trials, result.errors):
        writer.writerow([trial.index, trial.frame_sign, trial.rod_sign,
                         repr(float(by_index[trial.index].final_rod_angle)),
                         repr(float(error))])
    return buf.getvalue()
