"""Verifier gateway: run a deductive verifier on a woven program and map
its per-goal results back to annotations.

Two adapters ship: a Frama-C/WP subprocess adapter and a fixture-backed mock
for tests. Both produce the same VerifierReport shape.
"""

from __future__ import annotations

import hashlib
import json
import re
import subprocess
import tempfile
import threading
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

from .acsl import (
    Annotation,
    ConstructKind,
    FunctionContract,
    Global,
    Loop,
    SpecificationSet,
    parse_annotations,
    weave,
)
from .errors import AnchorNotFound, UnmappableFailure, VerifierNotInstalled


class GoalStatus(Enum):
    PROVED = "Proved"
    UNKNOWN = "Unknown"
    TIMEOUT = "Timeout"


class ReportStatus(Enum):
    VERIFIED = "Verified"
    FAILED = "Failed"
    TOOL_ERROR = "ToolError"
    TIMEOUT = "Timeout"


@dataclass(frozen=True)
class GoalResult:
    goal_name: str
    status: GoalStatus
    source_annotation: Annotation | None = None
    source_line: int | None = None


@dataclass(frozen=True)
class VerifierReport:
    status: ReportStatus
    goals: tuple[GoalResult, ...]
    raw_output: str = ""
    wall_time: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "goals", tuple(self.goals))
        all_proved = bool(self.goals) and all(
            g.status is GoalStatus.PROVED for g in self.goals)
        if self.status is ReportStatus.VERIFIED and not all_proved:
            raise ValueError("Verified report requires non-empty, all-proved goals")
        if self.status is ReportStatus.FAILED and not any(
                g.status is not GoalStatus.PROVED for g in self.goals):
            raise ValueError("Failed report requires at least one unproved goal")

    def failing_goals(self) -> tuple[GoalResult, ...]:
        return tuple(g for g in self.goals if g.status is not GoalStatus.PROVED)


def report_from_goals(goals: Sequence[GoalResult], raw_output: str = "",
                      wall_time: float = 0.0) -> VerifierReport:
    """Classify a goal list into a Verified/Failed/ToolError report.

    Zero goals means the specification generated no proof obligation at all
    (e.g. axioms only), which cannot establish anything: reported as a tool
    error rather than a vacuous success.
    """
    goals = tuple(goals)
    if not goals:
        return VerifierReport(ReportStatus.TOOL_ERROR, (),
                              raw_output or "verifier produced no proof goals",
                              wall_time)
    if all(g.status is GoalStatus.PROVED for g in goals):
        return VerifierReport(ReportStatus.VERIFIED, goals, raw_output, wall_time)
    return VerifierReport(ReportStatus.FAILED, goals, raw_output, wall_time)


class Verifier(ABC):
    """Adapter interface: one call = one external verifier invocation."""

    @abstractmethod
    def verify(self, program, spec: SpecificationSet) -> VerifierReport:
        ...


# --------------------------------------------------------------------------
# Canonical specification key (mock verdict-table lookup)
# --------------------------------------------------------------------------

def _anchor_sort_key(annotation: Annotation) -> tuple:
    a = annotation.anchor
    if isinstance(a, Global):
        return (0, "", 0)
    if isinstance(a, FunctionContract):
        return (1, a.function, 0)
    return (2, a.function, a.ordinal)


def spec_key(spec: SpecificationSet) -> str:
    """SHA-256 over the canonicalized annotation list (sorted by kind,
    anchor, text). Stable across annotation ordering and spans."""
    rows = sorted(
        (ann.kind.value, *_anchor_sort_key(ann), ann.text)
        for ann in spec
    )
    payload = json.dumps(rows, separators=(",", ":")).encode("utf-8")
    return hashlib.sha256(payload).hexdigest()


# --------------------------------------------------------------------------
# Failure mapping
# --------------------------------------------------------------------------

_KIND_HINTS = (
    (("lemma",), ConstructKind.LEMMA),
    (("loop_invariant", "loop invariant"), ConstructKind.LOOP_INVARIANT),
    (("loop_assigns", "loop assigns"), ConstructKind.LOOP_ASSIGNS),
    (("loop_variant", "loop variant", "variant", "decrease", "positive"),
     ConstructKind.LOOP_VARIANT),
    (("loop_inv",), ConstructKind.LOOP_INVARIANT),
    (("assigns",), ConstructKind.ASSIGNS),
    (("ensures", "post"), ConstructKind.ENSURES),
    (("requires", "pre"), ConstructKind.REQUIRES),
    (("behavior",), ConstructKind.BEHAVIOR),
)


def _goal_kind_hint(goal_name: str) -> ConstructKind | None:
    low = goal_name.lower()
    for needles, kind in _KIND_HINTS:
        if any(n in low for n in needles):
            return kind
    return None


def map_failures_to_annotations(report: VerifierReport,
                                spec: SpecificationSet) -> list[Annotation]:
    """Resolve a failed report's unproved goals to the annotations that
    produced them (the erroneous subset of the specification).

    Resolution order per goal: explicit linkage from the adapter, declared
    name embedded in the goal name, source-line within an annotation span,
    then clause-kind category (most recent annotation of that kind not
    known to have proved). Raises UnmappableFailure when no failing goal
    resolves at all.
    """
    if report.status is not ReportStatus.FAILED:
        raise ValueError("map_failures_to_annotations requires a Failed report")

    by_key = {a.key(): a for a in spec.annotations}
    proved_keys = {
        g.source_annotation.key()
        for g in report.goals
        if g.status is GoalStatus.PROVED and g.source_annotation is not None
    }
    named = [(a.declared_name(), a) for a in spec.annotations]

    resolved: dict[tuple, Annotation] = {}
    for goal in report.failing_goals():
        ann = _resolve_one(goal, spec, by_key, named, proved_keys)
        if ann is not None:
            resolved[ann.key()] = ann

    if not resolved:
        raise UnmappableFailure(
            "no failing goal could be mapped to an annotation: "
            + ", ".join(g.goal_name for g in report.failing_goals()))
    return [a for a in spec.annotations if a.key() in resolved]


def _resolve_one(goal: GoalResult, spec: SpecificationSet,
                 by_key: dict, named: list, proved_keys: set) -> Annotation | None:
    if goal.source_annotation is not None:
        hit = by_key.get(goal.source_annotation.key())
        if hit is not None:
            return hit
    for name, ann in named:
        if name and re.search(rf"\b{re.escape(name)}\b", goal.goal_name):
            return ann
    if goal.source_line is not None:
        for ann in spec.annotations:
            if ann.span.contains_line(goal.source_line):
                return ann
    kind = _goal_kind_hint(goal.goal_name)
    if kind is not None:
        candidates = [a for a in spec.annotations
                      if a.kind is kind and a.key() not in proved_keys]
        if candidates:
            return candidates[-1]
    return None


# --------------------------------------------------------------------------
# Mock adapter
# --------------------------------------------------------------------------

_GOAL_SLUGS = {
    ConstructKind.REQUIRES: "requires",
    ConstructKind.ENSURES: "ensures",
    ConstructKind.ASSIGNS: "assigns",
    ConstructKind.BEHAVIOR: "behavior",
    ConstructKind.LOOP_INVARIANT: "loop_invariant",
    ConstructKind.LOOP_VARIANT: "loop_variant",
    ConstructKind.LOOP_ASSIGNS: "loop_assigns",
    ConstructKind.PREDICATE: "predicate",
    ConstructKind.LOGIC: "logic",
    ConstructKind.LEMMA: "lemma",
}


def _mock_goal_name(annotation: Annotation, ordinal: int) -> str:
    slug = _GOAL_SLUGS[annotation.kind]
    name = annotation.declared_name()
    anchor = annotation.anchor
    if isinstance(anchor, FunctionContract):
        scope = anchor.function
    elif isinstance(anchor, Loop):
        scope = f"{anchor.function}_loop{anchor.ordinal}"
    else:
        scope = "global"
    if name:
        return f"typed_{slug}_{name}"
    return f"typed_{scope}_{slug}_{ordinal}"


class MockVerifier(Verifier):
    """Deterministic stand-in for the external verifier.

    Two layers, checked in order:

    * a verdict table mapping (program id, canonical spec key) to a stored
      report, returned verbatim;
    * a rule form: one goal per non-axiom annotation, failing iff the
      annotation text matches an always-failing rule (exact text or
      substring). Axioms are admitted and generate no goal.
    """

    def __init__(self, verdicts: dict | None = None,
                 always_failing: Iterable[str] = (),
                 wall_time: float = 0.0):
        self._verdicts = verdicts or {}
        self._rules = tuple(always_failing)
        self._wall_time = wall_time
        self.calls = 0
        self._lock = threading.Lock()

    @classmethod
    def from_file(cls, path: str | Path) -> "MockVerifier":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(verdicts=data.get("verdicts", {}),
                   always_failing=data.get("always_failing", ()),
                   wall_time=data.get("wall_time", 0.0))

    def _fails(self, annotation: Annotation) -> bool:
        return any(rule == annotation.text or rule in annotation.text
                   for rule in self._rules)

    def verify(self, program, spec: SpecificationSet) -> VerifierReport:
        with self._lock:
            self.calls += 1
        program_id = getattr(program, "id", str(program))
        stored = self._verdicts.get(program_id, {}).get(spec_key(spec))
        if stored is not None:
            return _rehydrate_report(stored, spec)
        goals = []
        for ordinal, ann in enumerate(spec.annotations, start=1):
            if ann.kind is ConstructKind.AXIOM:
                continue
            status = GoalStatus.UNKNOWN if self._fails(ann) else GoalStatus.PROVED
            goals.append(GoalResult(
                goal_name=_mock_goal_name(ann, ordinal),
                status=status,
                source_annotation=ann,
                source_line=ann.span.start_line,
            ))
        return report_from_goals(goals, raw_output="mock verifier (rule mode)",
                                 wall_time=self._wall_time)


def _rehydrate_report(stored: dict, spec: SpecificationSet) -> VerifierReport:
    by_text = {a.text: a for a in spec.annotations}
    goals = []
    for g in stored.get("goals", ()):
        goals.append(GoalResult(
            goal_name=g["goal_name"],
            status=GoalStatus(g["status"]),
            source_annotation=by_text.get(g.get("annotation_text", "")),
            source_line=g.get("source_line"),
        ))
    return VerifierReport(
        status=ReportStatus(stored["status"]),
        goals=tuple(goals),
        raw_output=stored.get("raw_output", "stored verdict"),
        wall_time=stored.get("wall_time", 0.0),
    )


# --------------------------------------------------------------------------
# Frama-C/WP adapter
# --------------------------------------------------------------------------

@dataclass
class FramaCSettings:
    executable: str = "frama-c"
    prover: str = "alt-ergo"
    prover_timeout: int = 10     # per-goal prover budget, seconds
    wall_budget: float = 120.0   # per-invocation wall clock, seconds
    max_processes: int = 4
    extra_args: tuple[str, ...] = ()


# `[wp] [Valid] typed_f_ensures (Qed)` and friends
_WP_BRACKET = re.compile(
    r"\[wp\]\s+\[(Valid|Unsuccess|Timeout|Unknown|Failed|Stuck)\]\s+(\S+)")
# `[wp] [Alt-Ergo] Goal typed_f_ensures : Unsuccess (...)`
_WP_PROVER = re.compile(
    r"\[wp\]\s+\[[^\]]+\]\s+Goal\s+(\S+)\s*:\s*(Valid|Unsuccess|Timeout|Unknown|Failed)")
# `Goal Post-condition (file woven.c, line 12) in 'func':`
_WP_GOAL_HEADER = re.compile(r"^\s*Goal\s+(.+?):\s*$")
_WP_GOAL_LINE = re.compile(r"\(file [^,)]+,\s*line\s+(\d+)\)")
_WP_PROVE_TRUE = re.compile(r"Prove:\s*true\.")
_WP_PROVER_RETURNS = re.compile(r"Prover\s+\S+\s+returns\s+(\w+)")
_WP_SUMMARY = re.compile(r"Proved goals:\s*(\d+)\s*/\s*(\d+)")

_STATUS_WORDS = {
    "Valid": GoalStatus.PROVED,
    "Timeout": GoalStatus.TIMEOUT,
    "Unsuccess": GoalStatus.UNKNOWN,
    "Unknown": GoalStatus.UNKNOWN,
    "Failed": GoalStatus.UNKNOWN,
    "Stuck": GoalStatus.UNKNOWN,
}


def parse_wp_output(output: str) -> tuple[list[GoalResult], tuple[int, int] | None]:
    """Extract per-goal results and the proved/total summary from WP console
    output. Handles both the bracketed per-goal lines and the goal-block
    format; a goal reported by several provers is proved if any prover
    validated it."""
    best: dict[str, GoalStatus] = {}
    lines_by_goal: dict[str, int | None] = {}

    def record(name: str, status: GoalStatus, line: int | None = None) -> None:
        prev = best.get(name)
        if prev is None or _better(status, prev):
            best[name] = status
        if name not in lines_by_goal or lines_by_goal[name] is None:
            lines_by_goal[name] = line

    for m in _WP_BRACKET.finditer(output):
        record(m.group(2), _STATUS_WORDS[m.group(1)])
    for m in _WP_PROVER.finditer(output):
        record(m.group(1), _STATUS_WORDS[m.group(2)])

    lines = output.splitlines()
    i = 0
    while i < len(lines):
        header = _WP_GOAL_HEADER.match(lines[i])
        if header:
            desc = header.group(1).strip()
            line_m = _WP_GOAL_LINE.search(desc)
            goal_line = int(line_m.group(1)) if line_m else None
            status = GoalStatus.UNKNOWN
            j = i + 1
            while j < len(lines) and not _WP_GOAL_HEADER.match(lines[j]):
                if _WP_PROVE_TRUE.search(lines[j]):
                    status = GoalStatus.PROVED
                    break
                pm = _WP_PROVER_RETURNS.search(lines[j])
                if pm:
                    word = pm.group(1)
                    status = _STATUS_WORDS.get(word, GoalStatus.UNKNOWN)
                    if status is GoalStatus.PROVED:
                        break
                j += 1
            record(desc, status, goal_line)
            i = j if j > i + 1 else i + 1
        else:
            i += 1

    summary_m = None
    for summary_m in _WP_SUMMARY.finditer(output):
        pass
    summary = (int(summary_m.group(1)), int(summary_m.group(2))) if summary_m else None

    goals = [GoalResult(name, status, source_line=lines_by_goal.get(name))
             for name, status in best.items()]
    return goals, summary


def _better(a: GoalStatus, b: GoalStatus) -> bool:
    order = {GoalStatus.UNKNOWN: 0, GoalStatus.TIMEOUT: 1, GoalStatus.PROVED: 2}
    return order[a] > order[b]


class FramaCVerifier(Verifier):
    """Runs Frama-C with the WP plugin on a temporary woven file.

    Each invocation uses an isolated temporary directory; concurrent
    invocations are capped by a process semaphore.
    """

    def __init__(self, settings: FramaCSettings | None = None):
        self.settings = settings or FramaCSettings()
        self._slots = threading.Semaphore(self.settings.max_processes)

    def verify(self, program, spec: SpecificationSet) -> VerifierReport:
        started = time.perf_counter()
        try:
            woven = weave(program.source, spec)
        except AnchorNotFound as exc:
            return VerifierReport(ReportStatus.TOOL_ERROR, (),
                                  f"weave failed: {exc}",
                                  time.perf_counter() - started)
        with self._slots, tempfile.TemporaryDirectory(prefix="specloop-wp-") as tmp:
            path = Path(tmp) / "woven.c"
            path.write_text(woven, encoding="utf-8")
            woven_spans = parse_annotations(woven, file=str(path))
            cmd = [
                self.settings.executable, "-wp",
                "-wp-prover", self.settings.prover,
                "-wp-timeout", str(self.settings.prover_timeout),
                *self.settings.extra_args,
                str(path),
            ]
            try:
                proc = subprocess.run(
                    cmd, capture_output=True, text=True,
                    timeout=self.settings.wall_budget, cwd=tmp,
                )
            except FileNotFoundError as exc:
                raise VerifierNotInstalled(
                    f"cannot execute {self.settings.executable!r}") from exc
            except subprocess.TimeoutExpired as exc:
                partial = (exc.stdout or b"")
                if isinstance(partial, bytes):
                    partial = partial.decode("utf-8", "replace")
                return VerifierReport(ReportStatus.TIMEOUT, (), partial,
                                      time.perf_counter() - started)
        wall = time.perf_counter() - started
        output = proc.stdout + ("\n" + proc.stderr if proc.stderr else "")
        goals, summary = parse_wp_output(output)
        goals = _link_goals(goals, spec, woven_spans)
        if not goals and summary is not None:
            proved, total = summary
            if total > 0 and proved == total:
                goals = [GoalResult(f"goal_{i+1}", GoalStatus.PROVED)
                         for i in range(total)]
            elif total > proved:
                goals = [GoalResult(f"goal_{i+1}", GoalStatus.PROVED)
                         for i in range(proved)]
                goals += [GoalResult(f"unidentified_goal_{i+1}", GoalStatus.UNKNOWN)
                          for i in range(total - proved)]
        if not goals:
            if proc.returncode != 0:
                return VerifierReport(ReportStatus.TOOL_ERROR, (), output, wall)
            return report_from_goals((), raw_output=output, wall_time=wall)
        return report_from_goals(goals, raw_output=output, wall_time=wall)


def _link_goals(goals: list[GoalResult], spec: SpecificationSet,
                woven_spans: SpecificationSet) -> list[GoalResult]:
    """Attach source annotations to parsed goals via declared names and
    woven line spans."""
    span_by_key = {a.key(): a.span for a in woven_spans.annotations}
    named = [(a.declared_name(), a) for a in spec.annotations]
    linked = []
    for goal in goals:
        ann = None
        for name, cand in named:
            if name and re.search(rf"\b{re.escape(name)}\b", goal.goal_name):
                ann = cand
                break
        if ann is None and goal.source_line is not None:
            for cand in spec.annotations:
                span = span_by_key.get(cand.key())
                if span is not None and span.contains_line(goal.source_line):
                    ann = cand
                    break
        linked.append(GoalResult(goal.goal_name, goal.status, ann, goal.source_line))
    return linked
