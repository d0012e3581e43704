"""Standardized study report: schema, validation, prefill, rendering.

The report captures what a cybersickness study should disclose for
meta-analysis: demographics, experiment settings (including the per-session
breakdown of linear acceleration and rotation time), the comfort techniques
applied, and hardware. It renders either as canonical JSON (the report.v1
schema, a lossless round trip) or as a three-column Markdown document with
one row per disclosed feature.

Optional entries ("If any" rows) are nullable fields, not empty strings,
so presence is machine-checkable; absent values render as not applicable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

SCHEMA_ID = "report.v1"

CONTROL_TYPES = ("Passive locomotion", "Active locomotion")
LINEAR_AXES = ("lateral", "vertical", "longitudinal")
ROTATION_AXES = ("pitch", "roll", "yaw")

NOT_APPLICABLE = "If any - not applicable"


class ReportError(ValueError):
    pass


@dataclass(frozen=True)
class Violation:
    path: str
    message: str

    def __str__(self):
        return f"{self.path}: {self.message}"


@dataclass(frozen=True)
class AgeStats:
    min: float
    max: float
    mean: float
    std: float


@dataclass(frozen=True)
class Demographics:
    participants: int
    females: int
    experienced: int
    inexperienced: int
    age: AgeStats


@dataclass(frozen=True)
class BreakdownEntry:
    kind: str        # "linear" or "rotation"
    axis: str
    minutes: float

    def label(self) -> str:
        if self.kind == "linear":
            return f"Linear acceleration along {self.axis}"
        return f"Rotation along {self.axis.capitalize()} axis"


@dataclass(frozen=True)
class ExperimentSettings:
    design: str
    sessions: int
    exposure_min: float
    baseline_min: float | None = None
    break_min: float | None = None
    motion_breakdown: tuple = ()              # one tuple of BreakdownEntry per session
    vr_content: str = ""
    control_type: str = "Active locomotion"
    navigation_per_session: tuple = ()
    optic_flow: float | None = None


@dataclass(frozen=True)
class Technique:
    name: str
    apply_condition: str = ""
    details: str = ""


@dataclass(frozen=True)
class Hardware:
    hmd: str | None = None
    fov: float | None = None


@dataclass(frozen=True)
class StandardReport:
    demographics: Demographics
    experiment: ExperimentSettings
    techniques: tuple = ()
    hardware: Hardware = field(default_factory=Hardware)


def validate_report(report: StandardReport) -> list[Violation]:
    """All invariant violations, each with the offending field path."""
    v: list[Violation] = []
    d = report.demographics
    for name in ("participants", "females", "experienced", "inexperienced"):
        if getattr(d, name) < 0:
            v.append(Violation(f"demographics.{name}", "must be >= 0"))
    if d.females > d.participants:
        v.append(Violation("demographics.females", "exceeds participants"))
    if d.experienced + d.inexperienced > d.participants:
        v.append(Violation("demographics.experienced",
                           "experienced + inexperienced exceeds participants"))
    if d.age.min > d.age.max:
        v.append(Violation("demographics.age.min", "exceeds age.max"))
    if not (d.age.min <= d.age.mean <= d.age.max):
        v.append(Violation("demographics.age.mean", "outside [min, max]"))
    if d.age.std < 0:
        v.append(Violation("demographics.age.std", "must be >= 0"))

    e = report.experiment
    if e.sessions < 1:
        v.append(Violation("experiment.sessions", "must be >= 1"))
    if e.exposure_min <= 0:
        v.append(Violation("experiment.exposure_min", "must be positive"))
    if e.baseline_min is not None and e.baseline_min <= 0:
        v.append(Violation("experiment.baseline_min", "must be positive when present"))
    if e.break_min is not None and e.break_min <= 0:
        v.append(Violation("experiment.break_min", "must be positive when present"))
    if e.control_type not in CONTROL_TYPES:
        v.append(Violation("experiment.control_type",
                           f"must be one of {CONTROL_TYPES}"))
    if e.navigation_per_session and len(e.navigation_per_session) != e.sessions:
        v.append(Violation("experiment.navigation_per_session",
                           "length must equal sessions"))
    if e.motion_breakdown and len(e.motion_breakdown) != e.sessions:
        v.append(Violation("experiment.motion_breakdown",
                           "length must equal sessions"))
    for i, session in enumerate(e.motion_breakdown):
        for j, entry in enumerate(session):
            path = f"experiment.motion_breakdown[{i}][{j}]"
            if entry.kind not in ("linear", "rotation"):
                v.append(Violation(path + ".kind", "must be linear or rotation"))
            elif entry.axis not in (LINEAR_AXES if entry.kind == "linear"
                                    else ROTATION_AXES):
                v.append(Violation(path + ".axis", f"unknown axis {entry.axis!r}"))
            if entry.minutes < 0:
                v.append(Violation(path + ".minutes", "must be >= 0"))
    if e.optic_flow is not None and e.optic_flow < 0:
        v.append(Violation("experiment.optic_flow", "must be >= 0 when present"))

    for i, tech in enumerate(report.techniques):
        if not tech.name:
            v.append(Violation(f"reduction_techniques[{i}].name", "must be non-empty"))
    if report.hardware.fov is not None and report.hardware.fov <= 0:
        v.append(Violation("hardware.fov", "must be positive when present"))
    return v


# -- JSON (machine) form -----------------------------------------------------


def report_to_dict(report: StandardReport) -> dict:
    d, e = report.demographics, report.experiment
    return {
        "schema": SCHEMA_ID,
        "demographics": {
            "participants": d.participants, "females": d.females,
            "experienced": d.experienced, "inexperienced": d.inexperienced,
            "age": {"min": d.age.min, "max": d.age.max,
                    "mean": d.age.mean, "std": d.age.std},
        },
        "experiment": {
            "design": e.design, "sessions": e.sessions,
            "baseline_min": e.baseline_min, "exposure_min": e.exposure_min,
            "break_min": e.break_min,
            "motion_breakdown": [[{"kind": b.kind, "axis": b.axis, "minutes": b.minutes}
                                  for b in session] for session in e.motion_breakdown],
            "vr_content": e.vr_content, "control_type": e.control_type,
            "navigation_per_session": list(e.navigation_per_session),
            "optic_flow": e.optic_flow,
        },
        "reduction_techniques": [{"name": t.name, "apply_condition": t.apply_condition,
                                  "details": t.details} for t in report.techniques],
        "hardware": {"hmd": report.hardware.hmd, "fov": report.hardware.fov},
    }


def report_from_dict(doc: dict) -> StandardReport:
    if doc.get("schema") != SCHEMA_ID:
        raise ReportError(f"unsupported report schema {doc.get('schema')!r}")
    dd = doc["demographics"]
    ed = doc["experiment"]
    return StandardReport(
        demographics=Demographics(
            participants=int(dd["participants"]), females=int(dd["females"]),
            experienced=int(dd["experienced"]), inexperienced=int(dd["inexperienced"]),
            age=AgeStats(min=float(dd["age"]["min"]), max=float(dd["age"]["max"]),
                         mean=float(dd["age"]["mean"]), std=float(dd["age"]["std"]))),
        experiment=ExperimentSettings(
            design=ed["design"], sessions=int(ed["sessions"]),
            baseline_min=ed.get("baseline_min"),
            exposure_min=float(ed["exposure_min"]),
            break_min=ed.get("break_min"),
            motion_breakdown=tuple(
                tuple(BreakdownEntry(kind=b["kind"], axis=b["axis"],
                                     minutes=float(b["minutes"])) for b in session)
                for session in ed.get("motion_breakdown", [])),
            vr_content=ed.get("vr_content", ""),
            control_type=ed.get("control_type", "Active locomotion"),
            navigation_per_session=tuple(ed.get("navigation_per_session", [])),
            optic_flow=ed.get("optic_flow")),
        techniques=tuple(Technique(name=t["name"],
                                   apply_condition=t.get("apply_condition", ""),
                                   details=t.get("details", ""))
                         for t in doc.get("reduction_techniques", [])),
        hardware=Hardware(hmd=doc.get("hardware", {}).get("hmd"),
                          fov=doc.get("hardware", {}).get("fov")),
    )


def load_report(path) -> StandardReport:
    with open(path, encoding="utf-8") as f:
        return report_from_dict(json.load(f))


# -- rendering ----------------------------------------------------------------


def _fmt(value: float) -> str:
    return f"{value:g}"


def format_age(age: AgeStats) -> str:
    return (f"{_fmt(age.min)}-{_fmt(age.max)} "
            f"(M: {_fmt(age.mean)}, Std: {_fmt(age.std)})")


def format_breakdown(breakdown: tuple) -> str:
    parts = []
    for i, session in enumerate(breakdown):
        if not session:
            continue
        entries = ", ".join(f"{b.label()} - {_fmt(b.minutes)} min" for b in session)
        parts.append(f"S{i + 1}: {entries}")
    return "; ".join(parts) if parts else NOT_APPLICABLE


def format_navigation(navigation: tuple) -> str:
    if not navigation:
        return NOT_APPLICABLE
    return ", ".join(f"S{i + 1}. {name}" for i, name in enumerate(navigation))


def _document_rows(report: StandardReport) -> list[tuple[str, str, str]]:
    d, e = report.demographics, report.experiment

    def opt(value, suffix=""):
        return NOT_APPLICABLE if value is None else f"{_fmt(value)}{suffix}"

    rows = [
        ("Basic Demographics", "", ""),
        ("Number of participants", "Total number of participants",
         str(d.participants)),
        ("Number of Female", "Total number of females among participants",
         str(d.females)),
        ("Number of experienced Users", "Total number of experienced Users of VR",
         str(d.experienced)),
        ("Number of inexperienced Users", "Total number of inexperienced Users of VR",
         str(d.inexperienced)),
        ("Age range", "Report of age with range, mean and std", format_age(d.age)),
        ("Experiment settings", "", ""),
        ("Experiment design",
         "The experiment design refers to the overall structure and plan for "
         "conducting a scientific experiment", e.design or NOT_APPLICABLE),
        ("Number of Sessions",
         "Total number of sessions that each participant experienced",
         f"{e.sessions} ({', '.join(f'S{i + 1}' for i in range(e.sessions))})"),
        ("Duration of baseline (If any)",
         "Total time of each session without VR exposure", opt(e.baseline_min, " min")),
        ("Duration of the experiment (per session)",
         "Total time of each session during VR exposure", opt(e.exposure_min, " min")),
        ("Break between sessions/exposure (If any)",
         "Gap between each session or each period of exposure",
         opt(e.break_min, " minutes")),
        ("Break down of linear acceleration and rotation in time "
         "(If passive navigation)",
         "Duration of time in linear acceleration and rotation",
         format_breakdown(e.motion_breakdown)),
        ("VR content", "VR Game or 360 video with names if any",
         e.vr_content or NOT_APPLICABLE),
        ("Control type", "Passive locomotion or Active locomotion with controllers",
         e.control_type),
        ("Navigation type (per session)", "Navigation type in each session",
         format_navigation(e.navigation_per_session)),
        ("Optic Flow magnitude (per session if available)",
         "If available, provide the mean or median of optic flow magnitude",
         opt(e.optic_flow)),
        ("Cybersickness reduction techniques (if any)", "", ""),
    ]
    if report.techniques:
        for tech in report.techniques:
            rows.extend([
                ("Name of the Techniques", "Describe the technique in short", tech.name),
                ("Apply condition", "When will the techniques be applied",
                 tech.apply_condition or NOT_APPLICABLE),
                ("Details of the techniques", "Parameters of the technique",
                 tech.details or NOT_APPLICABLE),
            ])
    else:
        rows.extend([
            ("Name of the Techniques", "Describe the technique in short",
             NOT_APPLICABLE),
            ("Apply condition", "When will the techniques be applied", NOT_APPLICABLE),
            ("Details of the techniques", "Parameters of the technique",
             NOT_APPLICABLE),
        ])
    rows.extend([
        ("Hardware settings", "", ""),
        ("HMD device", "Head-mounted display model",
         report.hardware.hmd or NOT_APPLICABLE),
        ("Related FOV", "Field of view of the device in degrees",
         opt(report.hardware.fov)),
    ])
    return rows


def render_report(report: StandardReport, format: str = "machine") -> bytes:
    """Canonical JSON ("machine") or a three-column Markdown table ("document")."""
    violations = validate_report(report)
    if violations:
        raise ReportError("report does not validate: "
                          + "; ".join(str(v) for v in violations))
    if format == "machine":
        text = json.dumps(report_to_dict(report), indent=2, sort_keys=True) + "\n"
        return text.encode("utf-8")
    if format == "document":
        lines = ["# Standardized data report", ""]
        lines.append("| List of provided features | Explanation | Example |")
        lines.append("| --- | --- | --- |")
        for label, explanation, value in _document_rows(report):
            if explanation == "" and value == "":
                lines.append(f"| **{label}** | | |")
            else:
                lines.append(f"| {label} | {explanation} | {value} |")
        lines.append("")
        return "\n".join(lines).encode("utf-8")
    raise ReportError(f"unknown render format {format!r}")


# -- prefill from run summaries ----------------------------------------------

_TECHNIQUE_BUILDERS = {
    "FovRestrictor": lambda values: Technique(
        name="FOV reduction",
        apply_condition=("Active when linear acceleration/deceleration"
                         if values.get("dynamic", True) else "Always active"),
        details=(f"FOV reduction size (minimum {_fmt(values['fov_min'])} degrees) "
                 f"and speed ({_fmt(values['rate_limit'])} degrees/s)")),
    "VisionSnapper": lambda values: Technique(
        name="Vision snapper",
        apply_condition=(f"Active when angular speed exceeds "
                         f"{_fmt(values['omega_threshold'])} degrees/s"),
        details=(f"fade out {_fmt(values['fade_out'])} s, hold {_fmt(values['hold'])} s, "
                 f"fade in {_fmt(values['fade_in'])} s")),
    "ColorManipulation": lambda values: Technique(
        name="Color manipulation",
        apply_condition="Active during linear/rotational acceleration",
        details="hue, saturation and contrast deltas scaled by acceleration"),
    "DepthOfField": lambda values: Technique(
        name="Depth-of-field blur",
        apply_condition="Active per object depth",
        details=(f"focus distance {_fmt(values['focus_distance'])} m, "
                 f"max blur {_fmt(values['max_blur'])}")),
    "RestFrames": lambda values: Technique(
        name="Rest frame",
        apply_condition="Always visible",
        details=f"{values.get('model', 'nose')} model fixed in the head frame"),
    "Pixelize": lambda values: Technique(
        name="Pixelize",
        apply_condition="Advisory only (not applied on a headset)",
        details=f"screen height {_fmt(values['screen_height'])} px"),
}


def from_session(summaries: list[dict], demographics: Demographics,
                 hardware: Hardware, design: str = "",
                 vr_content: str = "Customized VR game",
                 break_min: float | None = None) -> StandardReport:
    """Prefill experiment settings from runtime summaries, one per session."""
    if not summaries:
        raise ReportError("at least one session summary is required")

    def phase_minutes(summary: dict, kind: str) -> float | None:
        total = sum(p["duration_s"] for p in summary["phases"] if p["kind"] == kind)
        return total / 60.0 if total > 0 else None

    first = summaries[0]
    breakdown = []
    for summary in summaries:
        entries = []
        seconds = summary["motion_breakdown_s"]
        for axis in LINEAR_AXES:
            if seconds.get(f"linear_{axis}", 0.0) > 0:
                entries.append(BreakdownEntry("linear", axis,
                                              seconds[f"linear_{axis}"] / 60.0))
        for axis in ROTATION_AXES:
            if seconds.get(f"rotation_{axis}", 0.0) > 0:
                entries.append(BreakdownEntry("rotation", axis,
                                              seconds[f"rotation_{axis}"] / 60.0))
        breakdown.append(tuple(entries))

    techniques = []
    seen = set()
    for summary in summaries:
        for type_id, values in sorted(summary.get("vision_features", {}).items()):
            if type_id in seen or type_id not in _TECHNIQUE_BUILDERS:
                continue
            seen.add(type_id)
            techniques.append(_TECHNIQUE_BUILDERS[type_id](values))

    optic = [s.get("optic_flow_proxy") for s in summaries
             if s.get("optic_flow_proxy") is not None]
    experiment = ExperimentSettings(
        design=design,
        sessions=len(summaries),
        baseline_min=phase_minutes(first, "Baseline"),
        exposure_min=phase_minutes(first, "Exposure") or 0.0,
        break_min=break_min,
        motion_breakdown=tuple(breakdown),
        vr_content=vr_content,
        control_type=first["control_type"],
        navigation_per_session=tuple(s["navigation_type"] for s in summaries),
        optic_flow=float(sum(optic) / len(optic)) if optic else None,
    )
    return StandardReport(demographics=demographics, experiment=experiment,
                          techniques=tuple(techniques), hardware=hardware)
