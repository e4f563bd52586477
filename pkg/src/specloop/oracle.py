"""Oracle gateway: propose and repair specifications through a pluggable
interface.

Three implementations: a live HTTP chat-completion client, a deterministic
replay oracle backed by fixture files, and a scripted oracle wrapping a
callable (handy for tests and demos).
"""

from __future__ import annotations

import os
import re
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable

from .acsl import SpecificationSet, parse_annotations
from .errors import (
    EmptyCompletion,
    FixtureMissing,
    NoAnnotationsFound,
    OracleUnavailable,
)


class OraclePhase(Enum):
    GENERATE = "generate"
    REPAIR = "repair"


@dataclass(frozen=True)
class OracleRequest:
    phase: OraclePhase
    program_id: str
    config_name: str
    attempt_index: int  # 0 for the initial proposal, then 1, 2, ... per repair
    prompt: str


@dataclass(frozen=True)
class OracleResponse:
    raw_completion: str
    extracted: SpecificationSet
    latency: float

    def __post_init__(self) -> None:
        if self.latency < 0:
            raise ValueError("latency must be non-negative")


def _respond(raw_completion: str, latency: float) -> OracleResponse:
    try:
        extracted = extract_spec(raw_completion)
    except NoAnnotationsFound as exc:
        raise EmptyCompletion(str(exc)) from exc
    return OracleResponse(raw_completion, extracted, latency)


class Oracle(ABC):
    """Completion source for both phases. Implementations must be safe for
    concurrent in-flight requests; per-run sequencing (propose before
    repair, attempt ordering) is the caller's job."""

    @abstractmethod
    def complete(self, request: OracleRequest) -> str:
        """Return the raw completion for a request."""

    def propose(self, program, prompt: str, *, config_name: str,
                attempt_index: int = 0) -> OracleResponse:
        request = OracleRequest(OraclePhase.GENERATE, _program_id(program),
                                config_name, attempt_index, prompt)
        started = time.perf_counter()
        raw = self.complete(request)
        return _respond(raw, time.perf_counter() - started)

    def repair(self, program, spec: SpecificationSet, report, prompt: str, *,
               config_name: str, attempt_index: int) -> OracleResponse:
        request = OracleRequest(OraclePhase.REPAIR, _program_id(program),
                                config_name, attempt_index, prompt)
        started = time.perf_counter()
        raw = self.complete(request)
        return _respond(raw, time.perf_counter() - started)


def _program_id(program) -> str:
    return getattr(program, "id", str(program))


# --------------------------------------------------------------------------
# Completion -> SpecificationSet
# --------------------------------------------------------------------------

_FENCE = re.compile(r"```[^\n`]*\n(.*?)```", re.DOTALL)


def extract_spec(raw_completion: str) -> SpecificationSet:
    """Pull the specification out of an oracle completion.

    Fenced code blocks are concatenated and parsed; absent any fence, the
    whole completion is parsed if it contains annotation comments.
    Annotations outside recognized regions are ignored. Raises
    NoAnnotationsFound for prose-only completions.
    """
    blocks = [m.group(1) for m in _FENCE.finditer(raw_completion)]
    if blocks:
        text = "\n".join(blocks)
    elif "/*@" in raw_completion or "//@" in raw_completion:
        text = raw_completion
    else:
        raise NoAnnotationsFound("completion contains no annotation region")
    spec = parse_annotations(text, file="<completion>")
    if not spec:
        raise NoAnnotationsFound("no annotations found in completion")
    return spec


# --------------------------------------------------------------------------
# Implementations
# --------------------------------------------------------------------------

class ReplayOracle(Oracle):
    """Deterministic oracle replaying stored completions.

    Fixture layout (one root directory per persona):

        <root>/<program_id>/<config>/<phase>-<attempt>.txt

    e.g. ``prog1/CB/generate-0.txt``, ``prog1/CB/repair-1.txt``. Files are
    loaded eagerly, so the oracle is read-only afterwards and safe to share
    across threads.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self._fixtures: dict[tuple[str, str, str, int], str] = {}
        for path in sorted(self.root.glob("*/*/*.txt")):
            phase, _, attempt = path.stem.partition("-")
            if phase not in ("generate", "repair") or not attempt.isdigit():
                continue
            key = (path.parent.parent.name, path.parent.name, phase, int(attempt))
            self._fixtures[key] = path.read_text(encoding="utf-8")

    def complete(self, request: OracleRequest) -> str:
        key = (request.program_id, request.config_name,
               request.phase.value, request.attempt_index)
        try:
            return self._fixtures[key]
        except KeyError:
            raise FixtureMissing(
                f"no replay fixture for {key} under {self.root}") from None


class ScriptedOracle(Oracle):
    """Oracle backed by a callable request -> completion text."""

    def __init__(self, script: Callable[[OracleRequest], str]):
        self._script = script

    def complete(self, request: OracleRequest) -> str:
        return self._script(request)


class SplitOracle(Oracle):
    """Routes the two phases to distinct oracle personas."""

    def __init__(self, generate: Oracle, repair: Oracle):
        self._generate = generate
        self._repair = repair

    def complete(self, request: OracleRequest) -> str:
        target = (self._generate if request.phase is OraclePhase.GENERATE
                  else self._repair)
        return target.complete(request)


@dataclass
class HttpOracleSettings:
    base_url: str
    model: str
    api_key: str = ""
    temperature: float = 0.0
    max_tokens: int = 4096
    timeout: float = 120.0
    retries: int = 3          # transport retries before OracleUnavailable
    backoff: float = 1.0      # initial backoff, doubled per retry

    @classmethod
    def from_env(cls) -> "HttpOracleSettings":
        base_url = os.environ.get("ORACLE_BASE_URL", "")
        if not base_url:
            raise OracleUnavailable("ORACLE_BASE_URL is not set")
        return cls(
            base_url=base_url,
            model=os.environ.get("ORACLE_MODEL", ""),
            api_key=os.environ.get("ORACLE_API_KEY", ""),
            temperature=float(os.environ.get("ORACLE_TEMPERATURE", "0")),
        )

    def record(self) -> dict:
        """Decoding parameters worth persisting into run logs (no secrets)."""
        return {
            "base_url": self.base_url,
            "model": self.model,
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
        }


class HttpChatOracle(Oracle):
    """Chat-completion client for an OpenAI-style endpoint.

    Transport failures are retried with exponential backoff; after the
    retry budget the request fails with OracleUnavailable so the run is
    recorded as errored rather than failed-verification.
    """

    def __init__(self, settings: HttpOracleSettings, session=None):
        self.settings = settings
        if session is None:
            import requests
            session = requests.Session()
        self._session = session

    def complete(self, request: OracleRequest) -> str:
        url = self.settings.base_url.rstrip("/") + "/chat/completions"
        headers = {"Content-Type": "application/json"}
        if self.settings.api_key:
            headers["Authorization"] = f"Bearer {self.settings.api_key}"
        payload = {
            "model": self.settings.model,
            "messages": [{"role": "user", "content": request.prompt}],
            "temperature": self.settings.temperature,
            "max_tokens": self.settings.max_tokens,
        }
        delay = self.settings.backoff
        last_error: Exception | None = None
        for _ in range(self.settings.retries):
            try:
                resp = self._session.post(url, json=payload, headers=headers,
                                          timeout=self.settings.timeout)
                resp.raise_for_status()
                data = resp.json()
                content = data["choices"][0]["message"]["content"]
                if not (content or "").strip():
                    raise EmptyCompletion(
                        f"empty completion for {request.program_id}")
                return content
            except EmptyCompletion:
                raise
            except Exception as exc:  # transport, HTTP or schema trouble
                last_error = exc
                time.sleep(delay)
                delay *= 2
        raise OracleUnavailable(
            f"oracle transport failed after {self.settings.retries} retries: "
            f"{last_error}")
