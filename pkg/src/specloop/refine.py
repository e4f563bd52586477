"""Guess-verify-refine loop for one (program, configuration, paradigm) run.

Deletion removes the annotations blamed for failing goals until the program
verifies or the set is exhausted; modification asks the oracle for a full
replacement set until the program verifies or the iteration budget runs out.
"""

from __future__ import annotations

import json
import re
import time
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import IO

from .acsl import (
    GLOBAL,
    Annotation,
    ConstructKind,
    FunctionContract,
    Loop,
    SpecificationSet,
)
from .config import (
    Configuration,
    TemplateStore,
    build_generation_prompt,
    build_repair_prompt,
    check_compliance,
)
from .errors import OracleError, UnmappableFailure
from .oracle import Oracle
from .verifier import (
    GoalResult,
    GoalStatus,
    ReportStatus,
    Verifier,
    VerifierReport,
    map_failures_to_annotations,
    _goal_kind_hint,
)


class Paradigm(Enum):
    DELETION = "delete"
    MODIFICATION = "modify"


@dataclass(frozen=True)
class RunLimits:
    max_repair_iterations: int = 5
    wall_budget: float = 3600.0  # per-run, seconds

    def __post_init__(self) -> None:
        if self.max_repair_iterations < 1 or self.wall_budget <= 0:
            raise ValueError("run limits must be positive")


class RunOutcome(Enum):
    VERIFIED = "Verified"
    EXHAUSTED = "Exhausted"
    ERRORED = "Errored"


@dataclass(frozen=True)
class RunRecord:
    program_id: str
    config_name: str
    paradigm: Paradigm
    run_index: int
    compliant: bool
    outcome: RunOutcome
    tool_calls: int
    elapsed: float
    iterations: int
    final_spec: SpecificationSet
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "program_id": self.program_id,
            "config": self.config_name,
            "paradigm": self.paradigm.value,
            "run_index": self.run_index,
            "compliant": self.compliant,
            "outcome": self.outcome.value,
            "tool_calls": self.tool_calls,
            "elapsed": round(self.elapsed, 6),
            "iterations": self.iterations,
            "final_spec": [_annotation_to_dict(a) for a in self.final_spec],
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RunRecord":
        return cls(
            program_id=data["program_id"],
            config_name=data["config"],
            paradigm=Paradigm(data["paradigm"]),
            run_index=data["run_index"],
            compliant=data["compliant"],
            outcome=RunOutcome(data["outcome"]),
            tool_calls=data["tool_calls"],
            elapsed=data["elapsed"],
            iterations=data["iterations"],
            final_spec=SpecificationSet(
                _annotation_from_dict(a) for a in data["final_spec"]),
            error=data.get("error"),
        )


def _annotation_to_dict(a: Annotation) -> dict:
    if isinstance(a.anchor, FunctionContract):
        anchor = {"kind": "function", "function": a.anchor.function}
    elif isinstance(a.anchor, Loop):
        anchor = {"kind": "loop", "function": a.anchor.function,
                  "ordinal": a.anchor.ordinal}
    else:
        anchor = {"kind": "global"}
    return {"construct": a.kind.value, "text": a.text, "anchor": anchor}


def _annotation_from_dict(d: dict) -> Annotation:
    raw = d["anchor"]
    if raw["kind"] == "function":
        anchor = FunctionContract(raw["function"])
    elif raw["kind"] == "loop":
        anchor = Loop(raw["function"], raw["ordinal"])
    else:
        anchor = GLOBAL
    return Annotation(ConstructKind(d["construct"]), d["text"], anchor)


class RunLogger:
    """Appends one structured line per verifier call for post-hoc audit."""

    def __init__(self, stream: IO[str] | None = None, path: str | Path | None = None):
        self._owned = path is not None
        self._stream = open(path, "a", encoding="utf-8") if path else stream

    def log(self, attempt: int, report: VerifierReport, spec_size: int) -> None:
        if self._stream is None:
            return
        proved = sum(1 for g in report.goals if g.status is GoalStatus.PROVED)
        self._stream.write(json.dumps({
            "attempt": attempt,
            "status": report.status.value,
            "goals_proved": proved,
            "goals_total": len(report.goals),
            "spec_size": spec_size,
            "elapsed": round(report.wall_time, 6),
        }, sort_keys=True) + "\n")
        self._stream.flush()

    def close(self) -> None:
        if self._owned and self._stream is not None:
            self._stream.close()


# --------------------------------------------------------------------------
# Refinement steps
# --------------------------------------------------------------------------

def refine_delete(spec: SpecificationSet, report: VerifierReport) -> SpecificationSet:
    """Deletion step: drop the annotations blamed for the failure.

    Always removes at least one annotation, so the specification set
    shrinks strictly. When no failing goal maps to an annotation, the most
    recently added annotation of the failing goal's kind (or the last
    annotation overall) is removed instead. Removing a predicate or logic
    function also removes lemmas/axioms that reference its name, keeping
    the woven result well-formed.
    """
    if not spec:
        raise ValueError("refine_delete requires a non-empty specification set")
    try:
        doomed = list(map_failures_to_annotations(report, spec))
    except UnmappableFailure:
        doomed = [_tie_break_annotation(spec, report)]
    doomed = _close_over_dependents(spec, doomed)
    return spec.without(doomed)


def _tie_break_annotation(spec: SpecificationSet, report: VerifierReport) -> Annotation:
    failing_kinds = {k for k in
                     (_goal_kind_hint(g.goal_name) for g in report.failing_goals())
                     if k is not None}
    for ann in reversed(spec.annotations):
        if ann.kind in failing_kinds:
            return ann
    return spec.annotations[-1]


def _close_over_dependents(spec: SpecificationSet,
                           doomed: list[Annotation]) -> list[Annotation]:
    removed_names = [
        name for ann in doomed
        if ann.kind in (ConstructKind.PREDICATE, ConstructKind.LOGIC)
        and (name := ann.declared_name())
    ]
    if not removed_names:
        return doomed
    doomed_keys = {a.key() for a in doomed}
    extra = []
    for ann in spec.annotations:
        if ann.key() in doomed_keys:
            continue
        if ann.kind in (ConstructKind.LEMMA, ConstructKind.AXIOM) and any(
                re.search(rf"\b{re.escape(n)}\b", ann.text) for n in removed_names):
            extra.append(ann)
    return doomed + extra


def refine_modify(program, spec: SpecificationSet, report: VerifierReport,
                  oracle: Oracle, config: Configuration, *,
                  attempt_index: int,
                  templates: TemplateStore | None = None) -> SpecificationSet:
    """Modification step: ask the oracle for a full replacement set given
    the verifier feedback. Oracle errors propagate to the run outcome."""
    prompt = build_repair_prompt(program, spec, report, config, templates)
    response = oracle.repair(program, spec, report, prompt,
                             config_name=config.name, attempt_index=attempt_index)
    return response.extracted


# --------------------------------------------------------------------------
# One complete run
# --------------------------------------------------------------------------

def run_once(program, config: Configuration, paradigm: Paradigm,
             oracle: Oracle, verifier: Verifier,
             limits: RunLimits = RunLimits(), *,
             run_index: int = 1,
             templates: TemplateStore | None = None,
             logger: RunLogger | None = None) -> RunRecord:
    """Execute propose -> verify -> (refine -> verify)* and record the outcome.

    Compliance is judged once, on the initially proposed set. Every verifier
    call is counted, including tool errors and timeouts. Oracle and tool
    errors end the run with an Errored record; they are never raised.
    """
    logger = logger or RunLogger()
    started = time.perf_counter()
    tool_calls = 0
    iterations = 0

    def record(outcome: RunOutcome, spec: SpecificationSet,
               compliant: bool = False, error: str | None = None) -> RunRecord:
        return RunRecord(
            program_id=program.id,
            config_name=config.name,
            paradigm=paradigm,
            run_index=run_index,
            compliant=compliant,
            outcome=outcome,
            tool_calls=tool_calls,
            elapsed=time.perf_counter() - started,
            iterations=iterations,
            final_spec=spec,
            error=error,
        )

    empty = SpecificationSet()
    try:
        prompt = build_generation_prompt(program, config, templates)
        response = oracle.propose(program, prompt, config_name=config.name)
    except OracleError as exc:
        return record(RunOutcome.ERRORED, empty,
                      error=f"{type(exc).__name__}: {exc}")

    spec = response.extracted
    compliant = check_compliance(spec, config).compliant

    while True:
        report = verifier.verify(program, spec)
        tool_calls += 1
        logger.log(iterations, report, len(spec))

        if report.status is ReportStatus.VERIFIED:
            return record(RunOutcome.VERIFIED, spec, compliant)
        if report.status is ReportStatus.TOOL_ERROR:
            return record(RunOutcome.ERRORED, spec, compliant,
                          error=f"ToolError: {_head(report.raw_output)}")
        if time.perf_counter() - started > limits.wall_budget:
            return record(RunOutcome.EXHAUSTED, spec, compliant,
                          error="wall budget exceeded")

        if paradigm is Paradigm.DELETION:
            spec = refine_delete(spec, _as_failed(report))
            iterations += 1
            if not spec:
                return record(RunOutcome.EXHAUSTED, spec, compliant)
        else:
            if iterations >= limits.max_repair_iterations:
                return record(RunOutcome.EXHAUSTED, spec, compliant)
            try:
                spec = refine_modify(program, spec, _as_failed(report), oracle,
                                     config, attempt_index=iterations + 1,
                                     templates=templates)
            except OracleError as exc:
                return record(RunOutcome.ERRORED, spec, compliant,
                              error=f"{type(exc).__name__}: {exc}")
            iterations += 1


def _as_failed(report: VerifierReport) -> VerifierReport:
    """Present a Timeout report to the refinement step as a failure with a
    synthetic timeout goal, so both paradigms can still make progress."""
    if report.status is ReportStatus.FAILED:
        return report
    goals = report.goals
    if not any(g.status is not GoalStatus.PROVED for g in goals):
        goals = (*goals, GoalResult("wall_clock_budget", GoalStatus.TIMEOUT))
    return replace(report, status=ReportStatus.FAILED, goals=goals)


def _head(text: str, limit: int = 400) -> str:
    text = (text or "").strip()
    return text[:limit]
