"""Run a full experiment grid over the bundled toy corpus with a replay
oracle and the mock verifier, then print the metric table and report files.

Run from the repository root:  python3 demos/04_experiment_and_metrics.py
"""

import json
import sys
import tempfile
from pathlib import Path

from specloop import (
    MockVerifier,
    ReplayOracle,
    RunLimits,
    build_table,
    load_dataset,
    render_table,
    run_experiment,
)
from specloop.metrics import emit_reports
from specloop.runner import ExperimentPlan

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))
import toyworld  # reuses the deterministic toy scenario shipped with the tests

corpus = load_dataset(Path(__file__).resolve().parent.parent
                      / "tests" / "fixtures" / "toy_corpus")
print(f"loaded {len(corpus)} programs in "
      f"{len({p.category for p in corpus})} categories")

with tempfile.TemporaryDirectory(prefix="specloop-demo-") as tmp:
    tmp = Path(tmp)
    persona = toyworld.build_persona(tmp / "persona", corpus)
    plan = ExperimentPlan(runs_per_cell=2,
                          limits=RunLimits(max_repair_iterations=5))
    records = run_experiment(
        plan, corpus,
        ReplayOracle(persona),
        MockVerifier(always_failing=toyworld.ALWAYS_FAILING),
        out_dir=tmp / "out",
    )
    print(f"executed {len(records)} runs "
          f"({len(corpus)} programs x 4 configs x 2 paradigms x 2 runs)")

    summary = emit_reports(records, tmp / "out", persona="replay")
    print("\nper-cell metrics:")
    for cell in summary["cells"]:
        print(f"  {cell['config']}/{cell['paradigm']}: "
              f"csccr={cell['csccr']:.2f} nvp={cell['nvp']} "
              f"nsvp={cell['nsvp']} nvtc={cell['nvtc']:.1f} "
              f"errored={cell['errored']}")

    print("\nverified-set regions (deletion paradigm):")
    print(json.dumps(summary["venn"]["delete"]["regions"], indent=2))

    print("\nmetric table:")
    print(render_table(build_table({"replay": records})))

    report_dir = tmp / "out" / "report"
    print("report files written:",
          ", ".join(sorted(p.name for p in report_dir.iterdir())))
