"""Experiment runner: load a program corpus and execute the full grid of
configurations x paradigms x N runs, persisting one record per run.

Records are appended to a line-delimited file as runs finish, so an
interrupted experiment resumes by skipping already-persisted cells.
"""

from __future__ import annotations

import json
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .acsl import declared_functions
from .config import TemplateStore, canonical_config
from .errors import DuplicateId, EmptyCorpus, MissingTargetFunction
from .oracle import Oracle
from .refine import Paradigm, RunLimits, RunLogger, RunRecord, run_once
from .verifier import Verifier


@dataclass(frozen=True)
class Program:
    id: str
    source: str
    target_function: str
    category: str

    def __post_init__(self) -> None:
        if self.target_function not in declared_functions(self.source):
            raise MissingTargetFunction(
                f"program {self.id!r}: function {self.target_function!r} "
                f"is not defined in the source")


def load_dataset(directory: str | Path) -> list[Program]:
    """Load a corpus laid out as <root>/<category>/<program-id>.c.

    An optional sibling <program-id>.json manifest may name the target
    function; by default the last function defined in the file is the
    target. Programs are ordered by id.
    """
    root = Path(directory)
    programs: dict[str, Program] = {}
    for path in sorted(root.glob("*/*.c")):
        program_id = path.stem
        if program_id in programs:
            raise DuplicateId(
                f"program id {program_id!r} appears in category "
                f"{programs[program_id].category!r} and {path.parent.name!r}")
        source = path.read_text(encoding="utf-8")
        manifest = path.with_suffix(".json")
        if manifest.is_file():
            target = json.loads(manifest.read_text(encoding="utf-8"))["target_function"]
        else:
            functions = declared_functions(source)
            if not functions:
                raise MissingTargetFunction(
                    f"program {program_id!r}: no function definition found")
            target = functions[-1]
        programs[program_id] = Program(
            id=program_id, source=source,
            target_function=target, category=path.parent.name,
        )
    if not programs:
        raise EmptyCorpus(f"no .c files under {root}")
    return [programs[k] for k in sorted(programs)]


@dataclass(frozen=True)
class ExperimentPlan:
    configs: tuple[str, ...] = ("CB", "CV", "CA", "CF")
    paradigms: tuple[Paradigm, ...] = (Paradigm.DELETION, Paradigm.MODIFICATION)
    runs_per_cell: int = 5
    limits: RunLimits = field(default_factory=RunLimits)
    oracle_id: str = "default"
    verifier_id: str = "mock"
    workers: int = 0  # 0 = one worker per processor

    def __post_init__(self) -> None:
        if not self.configs or not self.paradigms or self.runs_per_cell < 1:
            raise ValueError("plan needs configs, paradigms and a positive run count")

    def worker_count(self) -> int:
        return self.workers if self.workers > 0 else (os.cpu_count() or 1)

    def cells(self, corpus: Sequence[Program]) -> list[tuple[Program, str, Paradigm, int]]:
        return [
            (program, config, paradigm, run_index)
            for program in corpus
            for config in self.configs
            for paradigm in self.paradigms
            for run_index in range(1, self.runs_per_cell + 1)
        ]


def _record_key(record: RunRecord) -> tuple[str, str, str, int]:
    return (record.program_id, record.config_name,
            record.paradigm.value, record.run_index)


class RecordStore:
    """Append-only JSONL persistence with a single serialized writer."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()

    def load(self) -> list[RunRecord]:
        if not self.path.is_file():
            return []
        records = []
        with self.path.open(encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    records.append(RunRecord.from_dict(json.loads(line)))
        return records

    def append(self, record: RunRecord) -> None:
        line = json.dumps(record.to_dict(), sort_keys=True)
        with self._lock:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(line + "\n")


def run_experiment(plan: ExperimentPlan, corpus: Sequence[Program],
                   oracle: Oracle, verifier: Verifier,
                   out_dir: str | Path | None = None,
                   templates: TemplateStore | None = None) -> list[RunRecord]:
    """Execute every (program, config, paradigm, run) cell of the plan.

    With an out_dir, records persist to records.jsonl and per-run verifier
    logs to run_logs/; already-persisted cells are skipped on restart.
    Individual run errors become Errored records, never exceptions.
    """
    if not corpus:
        raise EmptyCorpus("experiment needs a non-empty corpus")

    store = RecordStore(Path(out_dir) / "records.jsonl") if out_dir else None
    done: dict[tuple, RunRecord] = {}
    if store:
        for record in store.load():
            done[_record_key(record)] = record

    log_dir = None
    if out_dir:
        log_dir = Path(out_dir) / "run_logs"
        log_dir.mkdir(parents=True, exist_ok=True)

    pending = [
        cell for cell in plan.cells(corpus)
        if (cell[0].id, cell[1], cell[2].value, cell[3]) not in done
    ]

    def execute(cell) -> RunRecord:
        program, config_name, paradigm, run_index = cell
        logger = RunLogger()
        if log_dir is not None:
            name = f"{program.id}-{config_name}-{paradigm.value}-r{run_index}.jsonl"
            logger = RunLogger(path=log_dir / name)
        try:
            record = run_once(
                program, canonical_config(config_name), paradigm,
                oracle, verifier, plan.limits,
                run_index=run_index, templates=templates, logger=logger,
            )
        finally:
            logger.close()
        if store:
            store.append(record)
        return record

    workers = plan.worker_count()
    if workers > 1 and pending:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            fresh = list(pool.map(execute, pending))
    else:
        fresh = [execute(cell) for cell in pending]

    for record in fresh:
        done[_record_key(record)] = record
    ordered = plan.cells(corpus)
    return [done[(p.id, c, par.value, idx)] for p, c, par, idx in ordered]
