"""Command line entry point.

``specloop run`` executes an experiment grid over a corpus directory;
``specloop report`` recomputes the report files from persisted records.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import TemplateStore
from .errors import SpecloopError
from .metrics import emit_reports
from .oracle import HttpChatOracle, HttpOracleSettings, Oracle, ReplayOracle
from .refine import Paradigm, RunLimits, RunOutcome, RunRecord
from .runner import ExperimentPlan, load_dataset, run_experiment
from .verifier import FramaCSettings, FramaCVerifier, MockVerifier, Verifier

_PARADIGMS = {"delete": Paradigm.DELETION, "modify": Paradigm.MODIFICATION}


def _build_oracle(persona: str) -> Oracle:
    if persona == "http":
        return HttpChatOracle(HttpOracleSettings.from_env())
    path = Path(persona.removeprefix("replay:"))
    if path.is_dir():
        return ReplayOracle(path)
    raise SpecloopError(
        f"oracle persona {persona!r} is neither 'http' nor a replay directory")


def _build_verifier(args: argparse.Namespace) -> Verifier:
    if args.verifier == "framac":
        return FramaCVerifier(FramaCSettings(
            executable=args.framac_path,
            prover=args.prover,
            prover_timeout=args.prover_timeout,
            wall_budget=args.verifier_wall_budget,
            max_processes=args.verifier_processes,
        ))
    if args.mock_fixtures:
        return MockVerifier.from_file(args.mock_fixtures)
    return MockVerifier()


def _add_run_parser(subparsers) -> None:
    p = subparsers.add_parser("run", help="execute an experiment grid")
    p.add_argument("--dataset", required=True, help="corpus directory")
    p.add_argument("--configs", default="CB,CV,CA,CF",
                   help="comma-separated configuration names")
    p.add_argument("--paradigms", default="delete,modify",
                   help="comma-separated refinement paradigms (delete, modify)")
    p.add_argument("--runs", type=int, default=5,
                   help="independent runs per cell")
    p.add_argument("--oracle", required=True,
                   help="'http' (settings from ORACLE_* env vars) or a replay "
                        "fixture directory")
    p.add_argument("--verifier", choices=("framac", "mock"), default="framac")
    p.add_argument("--max-iters", type=int, default=5,
                   help="repair iteration budget (modification paradigm)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--run-wall-budget", type=float, default=3600.0,
                   help="per-run wall budget in seconds")
    p.add_argument("--workers", type=int, default=0,
                   help="concurrent runs (0 = one per processor)")
    p.add_argument("--templates", default=None,
                   help="directory overriding the bundled prompt templates")
    p.add_argument("--mock-fixtures", default=None,
                   help="JSON verdict/rule file for the mock verifier")
    p.add_argument("--framac-path", default="frama-c")
    p.add_argument("--prover", default="alt-ergo")
    p.add_argument("--prover-timeout", type=int, default=10)
    p.add_argument("--verifier-wall-budget", type=float, default=120.0)
    p.add_argument("--verifier-processes", type=int, default=4)


def _add_report_parser(subparsers) -> None:
    p = subparsers.add_parser("report", help="recompute reports from records")
    p.add_argument("--records", required=True, help="records.jsonl file")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--configs", default="CB,CV,CA,CF")


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="specloop")
    subparsers = parser.add_subparsers(dest="command", required=True)
    _add_run_parser(subparsers)
    _add_report_parser(subparsers)
    args = parser.parse_args(argv)

    try:
        if args.command == "run":
            return _cmd_run(args)
        return _cmd_report(args)
    except SpecloopError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _cmd_run(args: argparse.Namespace) -> int:
    corpus = load_dataset(args.dataset)
    configs = tuple(name.strip() for name in args.configs.split(",") if name.strip())
    paradigms = tuple(_PARADIGMS[p.strip()]
                      for p in args.paradigms.split(",") if p.strip())
    plan = ExperimentPlan(
        configs=configs,
        paradigms=paradigms,
        runs_per_cell=args.runs,
        limits=RunLimits(max_repair_iterations=args.max_iters,
                         wall_budget=args.run_wall_budget),
        oracle_id=args.oracle,
        verifier_id=args.verifier,
        workers=args.workers,
    )
    oracle = _build_oracle(args.oracle)
    verifier = _build_verifier(args)
    templates = TemplateStore(args.templates) if args.templates else None

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if isinstance(oracle, HttpChatOracle):
        # decoding parameters belong in the run log for reproducibility
        (out / "oracle_settings.json").write_text(
            json.dumps(oracle.settings.record(), indent=2, sort_keys=True) + "\n",
            encoding="utf-8")

    records = run_experiment(plan, corpus, oracle, verifier,
                             out_dir=args.out, templates=templates)
    emit_reports(records, args.out, persona=args.oracle, configs=configs)

    errored = sum(1 for r in records if r.outcome is RunOutcome.ERRORED)
    verified = sum(1 for r in records if r.outcome is RunOutcome.VERIFIED)
    print(f"{len(records)} records: {verified} verified, {errored} errored; "
          f"reports in {Path(args.out) / 'report'}")
    return 1 if errored else 0


def _cmd_report(args: argparse.Namespace) -> int:
    records_path = Path(args.records)
    records = []
    with records_path.open(encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(RunRecord.from_dict(json.loads(line)))
    configs = tuple(name.strip() for name in args.configs.split(",") if name.strip())
    emit_reports(records, args.out, configs=configs)
    print(f"reports in {Path(args.out) / 'report'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
