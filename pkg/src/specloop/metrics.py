"""Metric suite over run records: compliance ratio, verification counts,
tool-call and runtime costs, plus the derived quantities (reduction rate,
improvement ratio, verified-set intersections, optimal-configuration
proportions) and report emission.

Conventions, matching the reference results these metrics mirror:

* the compliance ratio is computed over samples (program x run); a strict
  per-program variant (all runs compliant) is emitted alongside;
* tool-call and runtime metrics are the mean over runs of the per-run
  dataset total;
* errored runs count as not verified, keep their real tool calls and
  elapsed time in the cost metrics, and are tallied separately.
"""

from __future__ import annotations

import itertools
import json
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import IncompleteGrid, UndefinedMetric
from .refine import Paradigm, RunOutcome, RunRecord

_CONFIG_ORDER = ("CB", "CV", "CA", "CF")
_METRIC_COLUMNS = ("nvp", "nsvp", "nvtc", "rt")


# --------------------------------------------------------------------------
# Grid validation
# --------------------------------------------------------------------------

def _grid(records: Sequence[RunRecord]) -> tuple[list[str], list[int]]:
    """Validate that records form a full program x run grid; return the
    program ids and run indexes."""
    if not records:
        raise IncompleteGrid("no records in cell")
    runs_by_program: dict[str, set[int]] = defaultdict(set)
    for r in records:
        if r.run_index in runs_by_program[r.program_id]:
            raise IncompleteGrid(
                f"duplicate record for {r.program_id!r} run {r.run_index}")
        runs_by_program[r.program_id].add(r.run_index)
    index_sets = {frozenset(v) for v in runs_by_program.values()}
    if len(index_sets) != 1:
        raise IncompleteGrid("programs cover different run indexes")
    runs = sorted(next(iter(index_sets)))
    return sorted(runs_by_program), runs


def _is_verified(record: RunRecord) -> bool:
    return record.outcome is RunOutcome.VERIFIED


# --------------------------------------------------------------------------
# Core metrics
# --------------------------------------------------------------------------

def csccr(records: Sequence[RunRecord]) -> float:
    """Share of samples whose initially proposed specification complied
    with the configuration's construct constraints."""
    _grid(records)
    return sum(1 for r in records if r.compliant) / len(records)


def csccr_per_program(records: Sequence[RunRecord]) -> float:
    """Strict per-program variant: share of programs compliant in every run."""
    programs, _ = _grid(records)
    ok = {p: True for p in programs}
    for r in records:
        if not r.compliant:
            ok[r.program_id] = False
    return sum(ok.values()) / len(programs)


def verified_program_set(records: Sequence[RunRecord]) -> frozenset[str]:
    """Programs verified in at least one run."""
    _grid(records)
    return frozenset(r.program_id for r in records if _is_verified(r))


def nvp(records: Sequence[RunRecord]) -> int:
    """Number of programs verified in at least one of the N runs."""
    return len(verified_program_set(records))


def nsvp(records: Sequence[RunRecord]) -> int:
    """Number of programs verified in at least two of the N runs."""
    _grid(records)
    wins: dict[str, int] = defaultdict(int)
    for r in records:
        if _is_verified(r):
            wins[r.program_id] += 1
    return sum(1 for count in wins.values() if count >= 2)


def nvtc(records: Sequence[RunRecord]) -> float:
    """Mean over runs of the total verifier calls across the dataset,
    including the initial check of every guess-verify-refine loop."""
    _, runs = _grid(records)
    totals = {idx: 0 for idx in runs}
    for r in records:
        totals[r.run_index] += r.tool_calls
    return sum(totals.values()) / len(runs)


def rt(records: Sequence[RunRecord]) -> float:
    """Mean over runs of the total elapsed seconds across the dataset
    (generation start through verification end, per program)."""
    _, runs = _grid(records)
    totals = {idx: 0.0 for idx in runs}
    for r in records:
        totals[r.run_index] += r.elapsed
    return sum(totals.values()) / len(runs)


def reduction_rate(nvp_value: float, nsvp_value: float) -> float:
    """Relative loss when requiring stable verification: (NVP-NSVP)/NVP."""
    if nvp_value < nsvp_value or nsvp_value < 0:
        raise ValueError("expected nvp >= nsvp >= 0")
    if nvp_value == 0:
        return 0.0
    return (nvp_value - nsvp_value) / nvp_value

def improvement_ratio(modify_value: float, delete_value: float) -> float:
    """Relative change of the modification paradigm over deletion."""
    if delete_value == 0:
        raise UndefinedMetric("improvement ratio undefined for a zero baseline")
    return (modify_value - delete_value) / delete_value


def sample_distribution(records: Sequence[RunRecord]) -> dict[str, int]:
    """Quadrant counts over samples: compliance x verification outcome.
    Errored samples land in the failed quadrants and are also tallied."""
    _grid(records)
    dist = {
        "compliant_verified": 0,
        "compliant_failed": 0,
        "noncompliant_verified": 0,
        "noncompliant_failed": 0,
        "errored": 0,
    }
    for r in records:
        side = "compliant" if r.compliant else "noncompliant"
        state = "verified" if _is_verified(r) else "failed"
        dist[f"{side}_{state}"] += 1
        if r.outcome is RunOutcome.ERRORED:
            dist["errored"] += 1
    return dist


# --------------------------------------------------------------------------
# Cell aggregation
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class CellMetrics:
    config_name: str
    paradigm: Paradigm
    csccr: float
    csccr_per_program: float
    nvp: int
    nsvp: int
    nvtc: float
    rt: float
    reduction_rate: float
    verified_program_set: frozenset[str]
    errored: int

    def value(self, column: str) -> float:
        return getattr(self, column)

    def to_dict(self, distribution: dict | None = None) -> dict:
        data = {
            "config": self.config_name,
            "paradigm": self.paradigm.value,
            "csccr": round(self.csccr, 4),
            "csccr_per_program": round(self.csccr_per_program, 4),
            "nvp": self.nvp,
            "nsvp": self.nsvp,
            "nvtc": round(self.nvtc, 4),
            "rt": round(self.rt, 4),
            "reduction_rate": round(self.reduction_rate, 4),
            "verified_programs": sorted(self.verified_program_set),
            "errored": self.errored,
        }
        if distribution is not None:
            data["distribution"] = distribution
        return data


def compute_cell(records: Sequence[RunRecord]) -> CellMetrics:
    cells = {(r.config_name, r.paradigm) for r in records}
    if len(cells) != 1:
        raise IncompleteGrid(f"records span {len(cells)} cells, expected exactly 1")
    config_name, paradigm = next(iter(cells))
    n = nvp(records)
    s = nsvp(records)
    return CellMetrics(
        config_name=config_name,
        paradigm=paradigm,
        csccr=csccr(records),
        csccr_per_program=csccr_per_program(records),
        nvp=n,
        nsvp=s,
        nvtc=nvtc(records),
        rt=rt(records),
        reduction_rate=reduction_rate(n, s),
        verified_program_set=verified_program_set(records),
        errored=sum(1 for r in records if r.outcome is RunOutcome.ERRORED),
    )


def split_cells(records: Iterable[RunRecord]) -> dict[tuple[str, Paradigm], list[RunRecord]]:
    cells: dict[tuple[str, Paradigm], list[RunRecord]] = defaultdict(list)
    for r in records:
        cells[(r.config_name, r.paradigm)].append(r)
    return dict(cells)


# --------------------------------------------------------------------------
# Verified-set algebra and optimal-configuration proportions
# --------------------------------------------------------------------------

def venn_sets(records: Iterable[RunRecord],
              configs: Sequence[str] = ("CB", "CV", "CA"),
              paradigm: Paradigm = Paradigm.DELETION) -> dict:
    """Exclusive region cardinalities of the verified-program sets for the
    named configurations under one paradigm, plus the raw sets."""
    cells = split_cells(records)
    sets: dict[str, frozenset[str]] = {}
    for name in configs:
        cell = cells.get((name, paradigm))
        if cell is None:
            raise IncompleteGrid(f"no records for {name} under {paradigm.value}")
        sets[name] = verified_program_set(cell)
    regions: dict[str, int] = {}
    for k in range(1, len(configs) + 1):
        for members in itertools.combinations(configs, k):
            inside = frozenset.intersection(*(sets[m] for m in members))
            outside = frozenset.union(
                frozenset(),
                *(sets[m] for m in configs if m not in members))
            regions["&".join(members)] = len(inside - outside)
    return {
        "configs": list(configs),
        "paradigm": paradigm.value,
        "sets": {name: sorted(programs) for name, programs in sets.items()},
        "regions": regions,
    }


def optimal_config_proportions(records: Iterable[RunRecord],
                               metric: str = "nvtc",
                               configs: Sequence[str] = ("CB", "CV", "CA"),
                               paradigm: Paradigm = Paradigm.DELETION) -> dict[str, float]:
    """For each program, the configuration minimizing the per-program mean
    of the metric wins; ties split fractionally. Proportions sum to 1."""
    if metric not in ("nvtc", "rt"):
        raise ValueError("metric must be 'nvtc' or 'rt'")
    field = "tool_calls" if metric == "nvtc" else "elapsed"
    cells = split_cells(records)
    per_config: dict[str, dict[str, float]] = {}
    program_sets = []
    for name in configs:
        cell = cells.get((name, paradigm))
        if cell is None:
            raise IncompleteGrid(f"no records for {name} under {paradigm.value}")
        programs, runs = _grid(cell)
        totals: dict[str, float] = defaultdict(float)
        for r in cell:
            totals[r.program_id] += getattr(r, field)
        per_config[name] = {p: totals[p] / len(runs) for p in programs}
        program_sets.append(set(programs))
    if any(s != program_sets[0] for s in program_sets):
        raise IncompleteGrid("configurations cover different program sets")
    shares = {name: 0.0 for name in configs}
    programs = sorted(program_sets[0])
    for p in programs:
        means = {name: per_config[name][p] for name in configs}
        best = min(means.values())
        winners = [name for name in configs if means[name] == best]
        for name in winners:
            shares[name] += 1.0 / len(winners)
    return {name: shares[name] / len(programs) for name in configs}


# --------------------------------------------------------------------------
# Benchmark-table assembly (per-persona rows, Average, Improvement Ratio)
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class MetricsTable:
    personas: tuple[str, ...]
    configs: tuple[str, ...]
    # cells[persona][(config, paradigm)] -> CellMetrics
    cells: Mapping[str, Mapping[tuple[str, Paradigm], CellMetrics]]
    average_exclude: tuple[str, ...] = ()

    def average(self, config: str, paradigm: Paradigm, column: str) -> float:
        rows = [
            self.cells[p][(config, paradigm)].value(column)
            for p in self.personas if p not in self.average_exclude
        ]
        if not rows:
            raise UndefinedMetric("no personas contribute to the average")
        return sum(rows) / len(rows)

    def improvement(self, config: str, column: str) -> float:
        return improvement_ratio(
            self.average(config, Paradigm.MODIFICATION, column),
            self.average(config, Paradigm.DELETION, column),
        )


def build_table(persona_records: Mapping[str, Iterable[RunRecord]],
                configs: Sequence[str] = _CONFIG_ORDER,
                average_exclude: Sequence[str] = ()) -> MetricsTable:
    cells: dict[str, dict[tuple[str, Paradigm], CellMetrics]] = {}
    for persona, records in persona_records.items():
        cells[persona] = {
            key: compute_cell(cell_records)
            for key, cell_records in split_cells(records).items()
        }
    return MetricsTable(
        personas=tuple(persona_records),
        configs=tuple(configs),
        cells=cells,
        average_exclude=tuple(average_exclude),
    )


def render_table(table: MetricsTable) -> str:
    """Human-readable table: one section per paradigm with per-persona rows
    and an Average row, then the modification-over-deletion improvement."""
    label_w = max([len(p) for p in table.personas] + [len("Improvement Ratio")]) + 2
    col_w = 10

    def fmt(value: float, column: str) -> str:
        text = f"{value:g}" if column in ("nvp", "nsvp") else f"{value:.2f}"
        return text.rjust(col_w)

    header_top = " " * label_w + "".join(
        ("| " + name).ljust(1 + 4 * col_w + 1) for name in table.configs)
    header_sub = " " * label_w + "".join(
        "|" + "".join(c.upper().rjust(col_w) for c in _METRIC_COLUMNS) + " "
        for _ in table.configs)

    out: list[str] = []
    for paradigm in (Paradigm.DELETION, Paradigm.MODIFICATION):
        out.append(f"=== {paradigm.name.title()} paradigm ===")
        out.append(header_top)
        out.append(header_sub)
        for persona in table.personas:
            row = persona.ljust(label_w)
            for config in table.configs:
                cell = table.cells[persona].get((config, paradigm))
                row += "|"
                if cell is None:
                    row += "-".rjust(col_w) * 4 + " "
                else:
                    row += "".join(fmt(cell.value(c), c) for c in _METRIC_COLUMNS) + " "
            out.append(row)
        row = "Average".ljust(label_w)
        for config in table.configs:
            row += "|" + "".join(
                fmt(table.average(config, paradigm, c), c) for c in _METRIC_COLUMNS) + " "
        out.append(row)
        out.append("")
    row = "Improvement Ratio".ljust(label_w)
    for config in table.configs:
        row += "|"
        for column in _METRIC_COLUMNS:
            try:
                row += f"{table.improvement(config, column) * 100:.2f}%".rjust(col_w)
            except UndefinedMetric:
                row += "-".rjust(col_w)
        row += " "
    out.append(row)
    return "\n".join(out) + "\n"


# --------------------------------------------------------------------------
# Report emission
# --------------------------------------------------------------------------

def summarize(records: Sequence[RunRecord],
              configs: Sequence[str] = _CONFIG_ORDER) -> dict:
    """Machine-readable consolidated summary: one object per cell plus
    verified-set algebra and optimal-configuration proportions where the
    three comparison configurations are present."""
    cells = split_cells(records)
    cell_objects = []
    for paradigm in (Paradigm.DELETION, Paradigm.MODIFICATION):
        for config in configs:
            cell = cells.get((config, paradigm))
            if cell is None:
                continue
            metrics = compute_cell(cell)
            cell_objects.append(metrics.to_dict(sample_distribution(cell)))
    summary: dict = {"cells": cell_objects}

    venn_configs = [c for c in ("CB", "CV", "CA") if c in configs]
    for paradigm in (Paradigm.DELETION, Paradigm.MODIFICATION):
        if len(venn_configs) == 3 and all(
                (c, paradigm) in cells for c in venn_configs):
            key = paradigm.value
            summary.setdefault("venn", {})[key] = venn_sets(
                records, venn_configs, paradigm)
            summary.setdefault("optimal_nvtc", {})[key] = _rounded(
                optimal_config_proportions(records, "nvtc", venn_configs, paradigm))
            summary.setdefault("optimal_rt", {})[key] = _rounded(
                optimal_config_proportions(records, "rt", venn_configs, paradigm))
    return summary


def _rounded(proportions: dict[str, float]) -> dict[str, float]:
    return {k: round(v, 4) for k, v in proportions.items()}


def emit_reports(records: Sequence[RunRecord], out_dir: str | Path,
                 persona: str = "oracle",
                 configs: Sequence[str] = _CONFIG_ORDER) -> dict:
    """Write the consolidated summary, the human-readable table and the
    plotting data files under out_dir/report. Returns the summary dict."""
    out = Path(out_dir) / "report"
    out.mkdir(parents=True, exist_ok=True)
    summary = summarize(records, configs)
    (out / "summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")

    paradigms = {r.paradigm for r in records}
    if len(paradigms) == 2:
        table = build_table({persona: records}, configs=configs)
        (out / "table.txt").write_text(render_table(table), encoding="utf-8")

    for name in ("venn", "optimal_nvtc", "optimal_rt"):
        if name in summary:
            (out / f"{name}.json").write_text(
                json.dumps(summary[name], indent=2, sort_keys=True) + "\n",
                encoding="utf-8")
    distribution = {
        f"{config}/{paradigm.value}": sample_distribution(cell)
        for (config, paradigm), cell in sorted(
            split_cells(records).items(),
            key=lambda kv: (kv[0][1].value, kv[0][0]))
    }
    (out / "sample_distribution.json").write_text(
        json.dumps(distribution, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return summary
