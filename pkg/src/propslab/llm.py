"""Completion providers: OpenAI-compatible HTTP, recorded replay, and scripted optimisers.

Scripted providers read everything they need (rank, range, step size,
orientation, history) from the rendered prompt text, so an end-to-end run
against them exercises the same in-context protocol a real model sees.
"""

from __future__ import annotations

import hashlib
import json
import os
import random
import re
import threading
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, List, Optional, Tuple

import httpx
import numpy as np

from .errors import (
    AuthMissing,
    ProviderError,
    ProviderRefusal,
    ReplayExhausted,
    TransportError,
    UnparseablePrompt,
)
from .prompt.history import HISTORY_LINE, format_number, parse_history_line

PROVIDER_KINDS = ("http", "replay", "scripted")
STRATEGIES = ("gaussian-hill-climb", "mu-plus-lambda")


@dataclass(frozen=True)
class ProviderConfig:
    kind: str = "scripted"
    base_url: Optional[str] = None
    model: Optional[str] = None
    api_key_env: str = "PROPS_API_KEY"
    temperature: Optional[float] = None  # None leaves the provider default
    max_retries: int = 5
    backoff_base: float = 1.0
    backoff_cap: float = 60.0
    timeout: float = 120.0
    split_system: bool = False
    scripted_strategy: str = "mu-plus-lambda"
    strategy_seed: int = 0
    mu: int = 5
    replay_path: Optional[str] = None

    def __post_init__(self):
        problems = self.problems()
        if problems:
            raise ValueError("; ".join(problems))

    def problems(self) -> List[str]:
        out = []
        if self.kind not in PROVIDER_KINDS:
            out.append(f"provider.kind must be one of {PROVIDER_KINDS}, got {self.kind!r}")
        if self.kind == "http" and not (self.base_url and self.model):
            out.append("http provider needs base_url and model")
        if self.kind == "replay" and not self.replay_path:
            out.append("replay provider needs replay_path")
        if self.kind == "scripted" and self.scripted_strategy not in STRATEGIES:
            out.append(f"scripted_strategy must be one of {STRATEGIES}")
        if self.max_retries < 0:
            out.append("max_retries must be >= 0")
        if self.mu < 1:
            out.append("mu must be >= 1")
        return out

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class Exchange:
    prompt: str
    response: str
    latency: float
    attempt: int

    def to_json(self) -> str:
        return json.dumps(asdict(self))


class Transcript:
    """Append-only, thread-safe log of exchanges; optionally mirrored to a JSONL file."""

    def __init__(self, path=None):
        self._items: List[Exchange] = []
        self._lock = threading.Lock()
        self.path = Path(path) if path is not None else None

    def append(self, ex: Exchange) -> None:
        with self._lock:
            self._items.append(ex)
            if self.path is not None:
                with self.path.open("a", encoding="utf-8") as fh:
                    fh.write(ex.to_json() + "\n")

    def __len__(self):
        return len(self._items)

    def __iter__(self):
        return iter(list(self._items))

    def __getitem__(self, i):
        return self._items[i]


def load_exchanges(path) -> List[Exchange]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                out.append(Exchange(**json.loads(line)))
    return out


# providers


class HttpProvider:
    def __init__(self, config: ProviderConfig, transport=None, sleep: Callable[[float], None] = time.sleep,
                 rng: Optional[random.Random] = None):
        self.config = config
        self._transport = transport
        self._sleep = sleep
        self._rng = rng or random.Random()

    def _messages(self, prompt: str):
        if self.config.split_system:
            # first paragraph as the system message, the rest as the user turn
            head, sep, tail = prompt.partition("\n\n")
            if sep:
                return [{"role": "system", "content": head}, {"role": "user", "content": tail}]
        return [{"role": "user", "content": prompt}]

    def backoff(self, attempt: int) -> float:
        """Full-jitter exponential delay before retry number ``attempt`` (1-based)."""
        ceiling = min(self.config.backoff_cap, self.config.backoff_base * 2 ** (attempt - 1))
        return self._rng.uniform(0.0, ceiling)

    def complete(self, prompt: str) -> Tuple[str, int]:
        cfg = self.config
        key = os.environ.get(cfg.api_key_env)
        if not key:
            raise AuthMissing(f"environment variable {cfg.api_key_env} is not set")
        body = {"model": cfg.model, "messages": self._messages(prompt)}
        if cfg.temperature is not None:
            body["temperature"] = cfg.temperature
        url = cfg.base_url.rstrip("/") + "/chat/completions"
        headers = {"Authorization": f"Bearer {key}"}
        last_error = None
        with httpx.Client(timeout=cfg.timeout, transport=self._transport) as client:
            for attempt in range(1, cfg.max_retries + 2):
                try:
                    resp = client.post(url, json=body, headers=headers)
                except httpx.TransportError as exc:
                    last_error = f"{type(exc).__name__}: {exc}"
                else:
                    if resp.status_code == 429 or resp.status_code >= 500:
                        last_error = f"HTTP {resp.status_code}"
                    elif resp.status_code >= 400:
                        raise ProviderError(f"HTTP {resp.status_code}: {resp.text[:200]}")
                    else:
                        return _completion_text(resp), attempt
                if attempt <= cfg.max_retries:
                    self._sleep(self.backoff(attempt))
        raise TransportError(f"gave up after {cfg.max_retries + 1} attempts ({last_error})")


def _completion_text(resp) -> str:
    try:
        content = resp.json()["choices"][0]["message"]["content"]
    except (ValueError, KeyError, IndexError, TypeError) as exc:
        raise ProviderRefusal(f"malformed completion payload: {exc}") from None
    if not content or not content.strip():
        raise ProviderRefusal("provider returned an empty completion")
    return content


class ReplayProvider:
    def __init__(self, config: ProviderConfig):
        self.config = config
        self._responses = [ex.response for ex in load_exchanges(config.replay_path)]
        self._cursor = 0
        self._lock = threading.Lock()

    def complete(self, prompt: str) -> Tuple[str, int]:
        with self._lock:
            if self._cursor >= len(self._responses):
                raise ReplayExhausted(f"all {len(self._responses)} recorded responses consumed")
            text = self._responses[self._cursor]
            self._cursor += 1
        return text, 1


class ScriptedProvider:
    def __init__(self, config: ProviderConfig):
        self.config = config

    def complete(self, prompt: str) -> Tuple[str, int]:
        return scripted_respond(self.config.scripted_strategy, prompt, self.config.strategy_seed,
                                mu=self.config.mu), 1


def make_provider(config: ProviderConfig, **kwargs):
    if config.kind == "http":
        return HttpProvider(config, **kwargs)
    if config.kind == "replay":
        return ReplayProvider(config)
    return ScriptedProvider(config)


def complete(provider, prompt: str, transcript: Optional[Transcript] = None) -> str:
    """One completion; the exchange is appended to ``transcript`` verbatim."""
    start = time.perf_counter()
    text, attempt = provider.complete(prompt)
    if transcript is not None:
        transcript.append(Exchange(prompt, text, time.perf_counter() - start, attempt))
    return text


# scripted strategies

_NUM = r"[-+]?\d+(?:\.\d+)?"
_RANK = re.compile(r"\*\*params\*\* is an array of (\d+) (float|int) numbers")
_RANGE = re.compile(r"values are in the range of \[(" + _NUM + r"), (" + _NUM + r")\] with (\d+) decimal place")
_ACTIONS = re.compile(r"should be an integer chosen from \[([-\d, ]+)\]")
_STEP = re.compile(r"step size of (" + _NUM + r")")


@dataclass
class PromptFacts:
    rank: int
    maximize: bool
    low: float = -6.0
    high: float = 6.0
    decimals: int = 1
    step: float = 1.0
    actions: Tuple[int, ...] = ()
    history: List[Tuple[Tuple[float, ...], float]] = field(default_factory=list)


def read_prompt(prompt: str) -> PromptFacts:
    m = _RANK.search(prompt)
    if m is None:
        raise UnparseablePrompt("prompt does not state the parameter count")
    facts = PromptFacts(rank=int(m.group(1)), maximize="global minimum" not in prompt)
    if m.group(2) == "int":
        a = _ACTIONS.search(prompt)
        if a is None:
            raise UnparseablePrompt("tabular prompt does not list its actions")
        facts.actions = tuple(int(x) for x in a.group(1).split(","))
        facts.decimals = 0
    else:
        r = _RANGE.search(prompt)
        if r is None:
            raise UnparseablePrompt("prompt does not state the parameter range")
        facts.low, facts.high, facts.decimals = float(r.group(1)), float(r.group(2)), int(r.group(3))
    s = _STEP.search(prompt)
    if s is not None:
        facts.step = float(s.group(1))
    for line in prompt.splitlines():
        if HISTORY_LINE.match(line):
            params, f = parse_history_line(line)
            if len(params) != facts.rank:
                raise UnparseablePrompt(f"history line has rank {len(params)}, prompt says {facts.rank}")
            facts.history.append((params, f))
    return facts


def _prompt_rng(seed: int, prompt: str) -> np.random.Generator:
    digest = hashlib.sha256(prompt.encode("utf-8")).digest()
    return np.random.default_rng([seed & 0xFFFFFFFFFFFFFFFF, int.from_bytes(digest[:8], "little")])


def ranked(facts: PromptFacts):
    """History sorted best first; ties keep the more recent entry ahead."""
    indexed = list(enumerate(facts.history))
    sign = -1.0 if facts.maximize else 1.0
    indexed.sort(key=lambda t: (sign * t[1][1], -t[0]))
    return [h for _, h in indexed]


def select_parents(facts: PromptFacts, mu: int):
    return [p for p, _ in ranked(facts)[:mu]]


def _propose(strategy: str, facts: PromptFacts, rng: np.random.Generator, mu: int) -> Tuple[np.ndarray, str]:
    if not facts.history:
        if facts.actions:
            return rng.choice(facts.actions, size=facts.rank).astype(float), "No history yet, so sampling uniformly."
        return rng.uniform(facts.low, facts.high, facts.rank), "No history yet, so sampling uniformly."

    if strategy == "gaussian-hill-climb":
        base = np.asarray(ranked(facts)[0][0])
        note = "Perturbing the best params seen so far"
    else:
        parents = select_parents(facts, mu)
        if len(parents) == 1:
            base = np.asarray(parents[0])
        else:
            i, j = rng.choice(len(parents), size=2, replace=False)
            base = 0.5 * (np.asarray(parents[i]) + np.asarray(parents[j]))
        note = f"Recombining two of the top {len(parents)} params and mutating"

    if facts.actions:
        x = base.round()
        flips = rng.random(facts.rank) < max(1.0 / facts.rank, 0.05)
        if not flips.any():
            flips[rng.integers(facts.rank)] = True
        x[flips] = rng.choice(facts.actions, size=int(flips.sum()))
        return x, note + " by re-drawing a few table entries."
    x = base + rng.normal(0.0, facts.step, facts.rank)
    return np.clip(x, facts.low, facts.high), note + f" with step {facts.step}."


def scripted_respond(strategy: str, prompt: str, seed: int = 0, mu: int = 5) -> str:
    """Two-line reply (params line, explanation) computed from the prompt text alone."""
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    facts = read_prompt(prompt)
    rng = _prompt_rng(seed, prompt)
    x, note = _propose(strategy, facts, rng, mu)
    if facts.actions:
        fields = [f"params[{i}]: {int(v)}" for i, v in enumerate(x)]
    else:
        fields = [f"params[{i}]: {format_number(v, facts.decimals)}" for i, v in enumerate(x)]
    return ", ".join(fields) + "\n" + note
