"""Syntactic-construct configurations and compliance checking.

A configuration names a permitted construct set and an optional mandatory
set. Four canonical configurations ship (CB, CV, CA, CF); arbitrary
(permitted, mandatory) pairs are accepted mechanically.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .acsl import (
    ALL_CONSTRUCTS,
    BASIC_CONSTRUCTS,
    ConstructKind,
    SpecificationSet,
)
from .errors import MissingTemplate, UnknownConfiguration

_VERIFIABLE_LOGIC = frozenset({
    ConstructKind.PREDICATE,
    ConstructKind.LOGIC,
    ConstructKind.LEMMA,
})

_AXIOM_LOGIC = frozenset({
    ConstructKind.PREDICATE,
    ConstructKind.LOGIC,
    ConstructKind.AXIOM,
})


@dataclass(frozen=True)
class Configuration:
    """A named pair of permitted and mandatory construct sets."""
    name: str
    permitted: frozenset[ConstructKind]
    mandatory: frozenset[ConstructKind] = frozenset()

    def __post_init__(self) -> None:
        if not self.mandatory <= self.permitted:
            raise ValueError("mandatory constructs must be permitted")


_CANONICAL = {
    "CB": Configuration("CB", BASIC_CONSTRUCTS),
    "CV": Configuration("CV", BASIC_CONSTRUCTS | _VERIFIABLE_LOGIC, _VERIFIABLE_LOGIC),
    "CA": Configuration("CA", BASIC_CONSTRUCTS | _AXIOM_LOGIC,
                        frozenset({ConstructKind.AXIOM})),
    "CF": Configuration("CF", ALL_CONSTRUCTS),
}

CANONICAL_NAMES = ("CB", "CV", "CA", "CF")


def canonical_config(name: str) -> Configuration:
    """One of the four canonical configurations by name."""
    try:
        return _CANONICAL[name]
    except KeyError:
        raise UnknownConfiguration(
            f"unknown configuration {name!r}; expected one of {CANONICAL_NAMES}") from None


@dataclass(frozen=True)
class ComplianceVerdict:
    compliant: bool
    forbidden_used: frozenset[ConstructKind]
    mandatory_missing: bool


def check_compliance(spec: SpecificationSet, config: Configuration) -> ComplianceVerdict:
    """Decide whether a specification set respects a configuration.

    Compliant iff every used construct is permitted and, when the
    configuration has a mandatory set, at least one mandatory construct is
    used. An empty set is therefore compliant under CB/CF but not CV/CA.
    """
    used = spec.constr()
    forbidden = frozenset(used - config.permitted)
    mandatory_missing = bool(config.mandatory) and not (used & config.mandatory)
    return ComplianceVerdict(
        compliant=not forbidden and not mandatory_missing,
        forbidden_used=forbidden,
        mandatory_missing=mandatory_missing,
    )


# --------------------------------------------------------------------------
# Prompt templates
# --------------------------------------------------------------------------

_MANDATORY_INSTRUCTIONS = {
    "CV": ("Your specification MUST define at least one of: a predicate, a "
           "logic function, or a lemma. Abstract the function's semantics "
           "into predicates/logic functions and state helper lemmas that the "
           "verifier can discharge."),
    "CA": ("Your specification MUST state at least one axiom (inside an "
           "axiomatic block). Axioms are admitted without proof, so state "
           "only properties you are certain hold."),
}


def mandatory_instruction(config: Configuration) -> str:
    """Instruction text enforcing the mandatory construct set, if any."""
    if not config.mandatory:
        return ""
    canned = _MANDATORY_INSTRUCTIONS.get(config.name)
    if canned is not None:
        return canned
    keywords = ", ".join(sorted(k.keyword for k in config.mandatory))
    return f"Your specification MUST use at least one of: {keywords}."


def permitted_keywords(config: Configuration) -> str:
    """Comma-separated ACSL keywords permitted by a configuration."""
    order = [
        ConstructKind.REQUIRES, ConstructKind.ENSURES, ConstructKind.ASSIGNS,
        ConstructKind.LOOP_INVARIANT, ConstructKind.LOOP_VARIANT,
        ConstructKind.LOOP_ASSIGNS, ConstructKind.BEHAVIOR,
        ConstructKind.PREDICATE, ConstructKind.LOGIC,
        ConstructKind.LEMMA, ConstructKind.AXIOM,
    ]
    return ", ".join(k.keyword for k in order if k in config.permitted)


class TemplateStore:
    """Loads prompt templates, one file per configuration per phase.

    Files are named `<phase>-<config>.txt` (phase is `generate` or
    `repair`). The default store reads the templates bundled with the
    package; point it at a directory to override them.
    """

    def __init__(self, directory: str | Path | None = None):
        self._directory = Path(directory) if directory is not None else None

    def load(self, phase: str, config_name: str) -> str:
        filename = f"{phase}-{config_name}.txt"
        if self._directory is not None:
            path = self._directory / filename
            if not path.is_file():
                raise MissingTemplate(f"no template file {path}")
            return path.read_text(encoding="utf-8")
        ref = resources.files("specloop").joinpath("templates", filename)
        if not ref.is_file():
            raise MissingTemplate(f"no bundled template {filename}")
        return ref.read_text(encoding="utf-8")


_DEFAULT_STORE = TemplateStore()


def build_generation_prompt(program, config: Configuration,
                            template_store: TemplateStore | None = None) -> str:
    """Instantiate the generation prompt for a program under a configuration.

    Deterministic for fixed inputs: the template's {program},
    {permitted_keywords} and {mandatory_instruction} placeholders are filled
    from the program source and the configuration.
    """
    store = template_store or _DEFAULT_STORE
    template = store.load("generate", config.name)
    return template.format(
        program=_program_source(program),
        permitted_keywords=permitted_keywords(config),
        mandatory_instruction=mandatory_instruction(config),
    )


def build_repair_prompt(program, spec: SpecificationSet, report,
                        config: Configuration,
                        template_store: TemplateStore | None = None) -> str:
    """Instantiate the repair prompt from the current specification set and
    the verifier feedback (failing goal names and raw output excerpt)."""
    store = template_store or _DEFAULT_STORE
    template = store.load("repair", config.name)
    return template.format(
        program=_program_source(program),
        permitted_keywords=permitted_keywords(config),
        mandatory_instruction=mandatory_instruction(config),
        current_spec=_render_spec(spec),
        verifier_feedback=_render_feedback(report),
    )


def _program_source(program) -> str:
    return program.source if hasattr(program, "source") else str(program)


def _render_spec(spec: SpecificationSet) -> str:
    return "\n".join(a.text for a in spec)


def _render_feedback(report) -> str:
    lines = [f"verification status: {report.status.value}"]
    for goal in report.goals:
        if goal.status.value != "Proved":
            lines.append(f"failed goal: {goal.goal_name} ({goal.status.value})")
    excerpt = (report.raw_output or "").strip()
    if excerpt:
        lines.append("verifier output (excerpt):")
        lines.append(excerpt[-2000:])
    return "\n".join(lines)
