"""Command-line surface: headless runs, test batteries, reports, serving.

Exit codes: 0 success, 1 runtime failure, 2 parse/usage failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from .locomotion import load_input_trace
from .report import load_report, render_report, validate_report
from .runtime import PlanError, load_plan, plan_from_json, run_headless
from .susceptibility import (
    RftConfig,
    RftResponse,
    SensitivityConfig,
    build_sensitivity_schedule,
    generate_rft_trials,
    rft_results_to_csv,
    schedule_to_csv,
    score_rft,
)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_PARSE = 2


def _resolve_plan(ref: str):
    path = Path(ref)
    if path.exists():
        return load_plan(path)
    candidate = resources.files("csaf.data") / "plans" / f"{ref}.plan.json"
    if candidate.is_file():
        return plan_from_json(json.loads(candidate.read_text(encoding="utf-8")))
    raise FileNotFoundError(f"no plan file or bundled plan named {ref!r}")


def _cmd_run(args) -> int:
    try:
        plan = _resolve_plan(args.plan)
        if args.seed is not None:
            plan.seed = args.seed
        trace_rows = load_input_trace(args.trace) if args.trace else None
    except (OSError, ValueError, PlanError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        artifacts = run_headless(plan, args.out, trace_rows)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"wrote {artifacts.pose_path}")
    print(f"wrote {artifacts.events_path}")
    print(f"wrote {artifacts.effects_path}")
    print(f"wrote {artifacts.summary_path}")
    return EXIT_OK


def _cmd_rft(args) -> int:
    cfg = RftConfig()
    trials = generate_rft_trials(cfg, args.seed)
    # Scripted responder: small seeded residual error around vertical.
    rng = np.random.default_rng(args.seed)
    responses = [RftResponse(trial_index=t.index,
                             final_rod_angle=float(rng.normal(0.0, 2.0)))
                 for t in trials]
    result = score_rft(trials, responses)
    text = rft_results_to_csv(trials, responses, result)
    try:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text, encoding="utf-8")
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"wrote {args.out} ({len(trials)} trials, "
          f"mean error {result.mean_error:.3f} deg)")
    return EXIT_OK


def _cmd_sensitivity(args) -> int:
    try:
        if args.config:
            with open(args.config, encoding="utf-8") as f:
                body = json.load(f)
            if "orders" in body:
                body["orders"] = tuple(tuple(o) for o in body["orders"])
            cfg = SensitivityConfig(**body)
        else:
            cfg = SensitivityConfig()
    except (OSError, TypeError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    schedule = build_sensitivity_schedule(cfg, args.seed)
    try:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(schedule_to_csv(schedule), encoding="utf-8")
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"wrote {args.out} ({len(schedule.segments)} segments, "
          f"{schedule.end:.1f} s)")
    return EXIT_OK


def _cmd_report(args) -> int:
    try:
        report = load_report(args.file)
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    if args.action == "validate":
        violations = validate_report(report)
        if violations:
            for v in violations:
                print(str(v), file=sys.stderr)
            return EXIT_RUNTIME
        print("ok")
        return EXIT_OK
    rendered = render_report(report, format=args.format)
    if args.out:
        Path(args.out).write_bytes(rendered)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(rendered.decode("utf-8"))
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app
    app = create_app(scene=args.scene, ui_dir=args.ui)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="csaf",
                                     description="Headless cybersickness "
                                                 "experiment engine")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a session plan to completion")
    p_run.add_argument("--plan", default="coin_demo",
                       help="plan file path or bundled plan name")
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--out", default="out", help="artifact directory")
    p_run.add_argument("--trace", default=None, help="controller input trace CSV")
    p_run.set_defaults(func=_cmd_run)

    p_rft = sub.add_parser("rft", help="emit a rod-and-frame trial battery")
    p_rft.add_argument("--seed", type=int, default=0)
    p_rft.add_argument("--out", default="rft.csv")
    p_rft.set_defaults(func=_cmd_rft)

    p_sens = sub.add_parser("sensitivity", help="emit a motion-sensitivity schedule")
    p_sens.add_argument("--config", default=None, help="JSON config file")
    p_sens.add_argument("--seed", type=int, default=0)
    p_sens.add_argument("--out", default="sensitivity.csv")
    p_sens.set_defaults(func=_cmd_sensitivity)

    p_rep = sub.add_parser("report", help="validate or render a report file")
    p_rep.add_argument("action", choices=("validate", "render"))
    p_rep.add_argument("file")
    p_rep.add_argument("--format", choices=("machine", "document"),
                       default="document")
    p_rep.add_argument("--out", default=None)
    p_rep.set_defaults(func=_cmd_report)

    p_serve = sub.add_parser("serve", help="start the HTTP gateway")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--scene", default="forest_simple")
    p_serve.add_argument("--ui", default=None, help="static panel asset directory")
    p_serve.set_defaults(func=_cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code not in (0, None) else EXIT_OK
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
