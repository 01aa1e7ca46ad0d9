"""Command line entry points.

Exit codes: 0 success, 2 scenario errors, 3 acceptance-threshold failures
when --assert is passed.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import harness
from .scenario import ScenarioError, load_scenario
from .supervisor import EpisodeRunner

EXIT_OK = 0
EXIT_SCENARIO = 2
EXIT_ASSERT = 3

SAFETY_BOUND_S = 1.0 / 60.0 + 1.0 / 500.0


def _write_out(path: str | None, text: str) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        print(text)


def _cmd_experiment(args: argparse.Namespace) -> int:
    failures: list[str] = []
    if args.kind == "hand":
        report = harness.run_hand_trials(
            trials=args.trials, seed=args.seed, scenario_dir=args.scenario,
            miss_rate=args.miss_rate,
        )
        doc = report.to_dict("hand")
        _write_out(args.out, harness.report_json(doc))
        if args.require:
            if args.miss_rate == 0.0 and report.accuracy != 1.0:
                failures.append(f"detection rate {report.accuracy} != 1.0")
            if report.precision != 1.0:
                failures.append(f"precision {report.precision} != 1.0")
            bad = [l for l in report.latencies if l > SAFETY_BOUND_S + 1e-9]
            if bad:
                failures.append(f"{len(bad)} latencies above {SAFETY_BOUND_S:.6f}s")
            if report.latencies and not (
                0.002 <= report.latency_mean_s <= SAFETY_BOUND_S
            ):
                failures.append(f"mean latency {report.latency_mean_s} out of range")
    elif args.kind == "knife":
        report, csv_rows = harness.run_knife_trials(
            trials=args.trials, seed=args.seed, scenario_dir=args.scenario
        )
        doc = report.to_dict("knife")
        _write_out(args.out, harness.report_json(doc))
        if args.csv:
            Path(args.csv).write_text(harness.knife_csv(csv_rows), encoding="utf-8")
        if args.require:
            if report.true_positives != args.trials:
                failures.append(
                    f"{report.true_positives}/{args.trials} contacts detected"
                )
            if report.false_positives != 0:
                failures.append(f"{report.false_positives} false positives")
    else:  # uncertainty
        table = harness.run_uncertainty_table(scenario_dir=args.scenario)
        _write_out(args.out, harness.report_json(table))
        if args.require:
            for kind, fam in table["families"].items():
                if not fam["strictly_increasing_psi"]:
                    failures.append(f"{kind} psi not strictly increasing")
    if failures:
        for f in failures:
            print(f"ASSERT FAIL: {f}", file=sys.stderr)
        return EXIT_ASSERT
    return EXIT_OK


def _cmd_run(args: argparse.Namespace) -> int:
    from .uncertainty import assessment_report

    scenario = load_scenario(args.scenario)
    runner = EpisodeRunner(scenario)
    log = runner.run()
    if args.log:
        log.save(args.log)
    summary = {
        "final_state": log.final_state(),
        "entries": len(log.entries),
        "t_end": log.entries[-1].t if log.entries else 0.0,
    }
    if runner.assessment is not None:
        summary["assessment"] = json.loads(
            assessment_report(
                runner.plan.plan_id, runner.assessment, scenario.cfg.pixel_pitch
            )
        )
    print(json.dumps(summary, sort_keys=True))
    return EXIT_OK


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .wire import create_app

    scenario = load_scenario(args.scenario)
    app = create_app(scenario)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def _cmd_calibrate_beta(args: argparse.Namespace) -> int:
    try:
        pairs = json.loads(Path(args.pairs).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        print(f"cannot read pairs: {exc}", file=sys.stderr)
        return EXIT_SCENARIO
    doc = harness.calibrate_beta_from_pairs(pairs)
    _write_out(args.out, harness.report_json(doc))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cobot-cell",
        description="Simulated collaborative cutting workcell and its "
        "safety/transparency supervisor",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    exp = sub.add_parser("experiment", help="run component evaluation trials")
    exp.add_argument("kind", choices=["hand", "knife", "uncertainty"])
    exp.add_argument("--scenario", help="directory with scenario templates")
    exp.add_argument("--trials", type=int, default=50)
    exp.add_argument("--seed", type=int, default=0)
    exp.add_argument("--out", help="report JSON path (default: stdout)")
    exp.add_argument("--csv", help="knife contact CSV path")
    exp.add_argument("--miss-rate", type=float, default=0.0,
                     help="detector-miss fault injection probability")
    exp.add_argument("--assert", dest="require", action="store_true",
                     help="exit 3 unless acceptance thresholds hold")
    exp.set_defaults(func=_cmd_experiment)

    run_p = sub.add_parser("run", help="run one scenario episode")
    run_p.add_argument("--scenario", required=True)
    run_p.add_argument("--log", help="episode JSONL output path")
    run_p.set_defaults(func=_cmd_run)

    serve_p = sub.add_parser("serve", help="serve the operator wire protocol")
    serve_p.add_argument("--scenario", required=True)
    serve_p.add_argument("--port", type=int, default=8750)
    serve_p.add_argument("--host", default="127.0.0.1")
    serve_p.set_defaults(func=_cmd_serve)

    cal = sub.add_parser("calibrate-beta", help="fit beta from (d, psi) pairs")
    cal.add_argument("--pairs", required=True, help="JSON list of {d, psi}")
    cal.add_argument("--out")
    cal.set_defaults(func=_cmd_calibrate_beta)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return EXIT_SCENARIO


if __name__ == "__main__":
    sys.exit(main())
