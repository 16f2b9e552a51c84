"""The prompted search loop: render history, ask the provider, evaluate, repeat."""

from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .envs import derive_seed, evaluate, make_env
from .errors import EmptyInput, ProviderError, ProviderFailure, ResponseParseError
from .llm import ProviderConfig, Transcript, complete, make_provider
from .numopt.objectives import ObjectiveSpec, eval_objective, grad_objective
from .numopt.optimizers import AdamState, adam_step
from .policies import layout_for, make_policy
from .prompt import (
    HistoryBuffer,
    HistoryEntry,
    PromptContext,
    env_description,
    env_hints,
    parse_response,
    render,
)

SEARCH_MODES = ("props", "props-plus", "props-plus-hints", "numopt")

# (optimum hint, step size) shown in the prompt for each environment
TASK_DEFAULTS: Dict[str, Tuple[float, float]] = {
    "cartpole": (500, 1.0),
    "mountain-car-c": (100, 1.0),
    "mountain-car-d": (-100, 1.0),
    "pong": (3, 1.0),
    "navigation": (5000, 1.0),
    "nim": (1, 1.0),
    "frozen-lake": (1.0, 1.0),
    "cliff-walking": (-13, 1.0),
    "maze": (1.0, 1.0),
}
NUMOPT_DEFAULTS = {"value_range": (0.0, 20.0), "decimals": 2, "optimum_hint": 0, "step_size": 0.5}
WARMUP_STEPS = 2


@dataclass(frozen=True)
class SearchConfig:
    env: Optional[str] = None
    policy: str = "linear"
    objective: Optional[ObjectiveSpec] = None
    provider: ProviderConfig = field(default_factory=ProviderConfig)
    mode: str = "props"
    max_iters: Optional[int] = None
    episodes_per_eval: int = 20
    history_maxlen: Optional[int] = None
    n_seed_examples: Optional[int] = None
    seed: int = 0
    value_range: Optional[Tuple[float, float]] = None
    decimals: Optional[int] = None
    optimum_hint: Optional[float] = None
    step_size: Optional[float] = None
    max_parse_retries: int = 3
    template: Optional[str] = None

    def __post_init__(self):
        if self.mode not in SEARCH_MODES:
            raise ValueError(f"mode must be one of {SEARCH_MODES}, got {self.mode!r}")
        if (self.mode == "numopt") != (self.objective is not None):
            raise ValueError("numopt mode needs an objective, policy modes need an env (and no objective)")
        if self.mode != "numopt" and self.env is None:
            raise ValueError("policy search needs an env")
        if self.max_iters is not None and self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.episodes_per_eval < 1:
            raise ValueError("episodes_per_eval must be >= 1")
        if self.n_seed_examples is not None and self.n_seed_examples < 0:
            raise ValueError("n_seed_examples must be >= 0")
        if self.history_maxlen is not None and self.history_maxlen < 1:
            raise ValueError("history_maxlen must be >= 1 or unbounded")
        if self.max_parse_retries < 0:
            raise ValueError("max_parse_retries must be >= 0")

    @property
    def iterations(self) -> int:
        if self.max_iters is not None:
            return self.max_iters
        return 100 if self.mode == "numopt" else 400

    @property
    def seed_examples(self) -> int:
        if self.n_seed_examples is not None:
            return self.n_seed_examples
        return 0 if self.mode == "numopt" else 5

    @property
    def target(self) -> str:
        if self.objective is not None:
            return f"{self.objective.function}{self.objective.dim}d"
        return self.env if self.policy == "linear" else f"{self.env}-{self.policy}"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["provider"] = self.provider.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SearchConfig":
        d = dict(d)
        d["provider"] = ProviderConfig(**d["provider"])
        if d.get("objective") is not None:
            d["objective"] = ObjectiveSpec(**d["objective"])
        for key in ("value_range",):
            if d.get(key) is not None:
                d[key] = tuple(d[key])
        return cls(**d)


def build_context(config: SearchConfig) -> PromptContext:
    """Prompt context for a run, with per-task defaults filled in."""
    if config.mode == "numopt":
        spec = config.objective
        return PromptContext(
            rank=spec.dim,
            mode="numopt-min",
            value_range=tuple(config.value_range or NUMOPT_DEFAULTS["value_range"]),
            decimals=NUMOPT_DEFAULTS["decimals"] if config.decimals is None else config.decimals,
            optimum_hint=NUMOPT_DEFAULTS["optimum_hint"] if config.optimum_hint is None else config.optimum_hint,
            step_size=NUMOPT_DEFAULTS["step_size"] if config.step_size is None else config.step_size,
            max_steps=config.iterations,
            template=config.template,
        )
    spec = make_env(config.env).spec
    layout = layout_for(config.policy, spec)
    tabular = config.policy == "tabular"
    optimum, step = TASK_DEFAULTS.get(config.env, (0, 1.0))
    description = hints = None
    if config.mode == "props":
        mode = "props-tabular" if tabular else "props-linear"
    else:
        mode = "props-plus"
        description = env_description(config.env, config.policy, layout)
        if config.mode == "props-plus-hints":
            hints = env_hints(config.env)
            if hints is None:
                raise ValueError(f"no hints available for {config.env!r}")
    return PromptContext(
        rank=layout.rank,
        mode=mode,
        value_range=tuple(config.value_range or (-6.0, 6.0)),
        decimals=(0 if tabular else 1) if config.decimals is None else config.decimals,
        optimum_hint=optimum if config.optimum_hint is None else config.optimum_hint,
        step_size=step if config.step_size is None else config.step_size,
        action_set=tuple(layout.action_set) if tabular else (),
        env_description=description,
        hints=hints,
        max_steps=config.iterations,
        template=config.template,
    )


@dataclass
class IterationRecord:
    iteration: int  # 0 for seed examples, 1.. for prompted (or warmup) steps
    kind: str  # seed | warmup | llm | fallback
    params: Tuple[float, ...]
    f: float
    eval_seed: Optional[int] = None
    prompt: Optional[str] = None
    response: Optional[str] = None
    explanation: str = ""
    range_violation: bool = False
    parse_retries: int = 0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["params"] = list(self.params)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "IterationRecord":
        d = dict(d)
        d["params"] = tuple(float(v) for v in d["params"])
        return cls(**d)


@dataclass
class RunRecord:
    config: SearchConfig
    maximize: bool
    steps: List[IterationRecord] = field(default_factory=list)
    complete: bool = False
    error: Optional[str] = None
    wall_time: float = 0.0

    @property
    def target(self) -> str:
        return self.config.target

    @property
    def iterations_completed(self) -> int:
        return sum(1 for s in self.steps if s.kind != "seed")

    def _better(self, a: float, b: float) -> bool:
        return a > b if self.maximize else a < b

    @property
    def best(self) -> Optional[IterationRecord]:
        best = None
        for s in self.steps:
            if best is None or self._better(s.f, best.f):
                best = s
        return best

    @property
    def best_f(self) -> float:
        b = self.best
        return math.nan if b is None else b.f

    @property
    def best_params(self) -> Optional[Tuple[float, ...]]:
        b = self.best
        return None if b is None else b.params

    def best_so_far(self) -> np.ndarray:
        fs = np.array([s.f for s in self.steps], dtype=float)
        if fs.size == 0:
            return fs
        return np.maximum.accumulate(fs) if self.maximize else np.minimum.accumulate(fs)

    @property
    def parse_failures(self) -> int:
        return sum(s.parse_retries for s in self.steps)

    @property
    def fallbacks(self) -> int:
        return sum(1 for s in self.steps if s.kind == "fallback")

    def file_stem(self) -> str:
        return f"{self.target}-{self.config.mode}-{self.config.seed}"

    def summary(self) -> dict:
        return {
            "target": self.target,
            "mode": self.config.mode,
            "seed": self.config.seed,
            "maximize": self.maximize,
            "best_f": self.best_f,
            "best_params": list(self.best_params) if self.best_params is not None else None,
            "iterations_completed": self.iterations_completed,
            "iterations_planned": self.config.iterations,
            "complete": self.complete,
            "error": self.error,
            "parse_failures": self.parse_failures,
            "fallbacks": self.fallbacks,
            "wall_time": self.wall_time,
        }

    def save(self, directory) -> Path:
        """Write ``<target>-<mode>-<seed>.jsonl`` (header + one line per step) and a summary JSON."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / f"{self.file_stem()}.jsonl"
        tmp = path.with_suffix(".jsonl.tmp")
        with tmp.open("w", encoding="utf-8") as fh:
            header = {"type": "header", "config": self.config.to_dict(), "maximize": self.maximize}
            fh.write(json.dumps(header) + "\n")
            for s in self.steps:
                fh.write(json.dumps({"type": "step", **s.to_dict()}) + "\n")
            fh.write(json.dumps({"type": "footer", **self.summary()}) + "\n")
        tmp.replace(path)
        (directory / f"{self.file_stem()}.summary.json").write_text(json.dumps(self.summary(), indent=2) + "\n")
        return path

    @classmethod
    def load(cls, path) -> "RunRecord":
        header, steps, footer = None, [], None
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                obj = json.loads(line)
                kind = obj.pop("type")
                if kind == "header":
                    header = obj
                elif kind == "step":
                    steps.append(IterationRecord.from_dict(obj))
                elif kind == "footer":
                    footer = obj
        if header is None or footer is None:
            raise ValueError(f"{path}: missing header or footer")
        rec = cls(SearchConfig.from_dict(header["config"]), header["maximize"], steps)
        rec.complete = footer["complete"]
        rec.error = footer.get("error")
        rec.wall_time = footer.get("wall_time", 0.0)
        return rec


@dataclass(frozen=True)
class Aggregate:
    n: int
    mean: float
    std: float  # sample standard deviation (ddof=1); 0 for a single record
    stderr: float


def aggregate(records: Sequence[RunRecord]) -> Aggregate:
    values = [r.best_f for r in records]
    if not values:
        raise EmptyInput("aggregate needs at least one record")
    arr = np.asarray(values, dtype=float)
    n = arr.size
    std = float(arr.std(ddof=1)) if n > 1 else 0.0
    return Aggregate(n, float(arr.mean()), std, std / math.sqrt(n))


# the loop


def _rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(derive_seed(seed, 1 << 40))


def _random_params(ctx: PromptContext, rng) -> np.ndarray:
    if ctx.tabular:
        return rng.choice(ctx.action_set, size=ctx.rank).astype(float)
    return rng.uniform(ctx.value_range[0], ctx.value_range[1], ctx.rank)


def _fallback_params(best: Tuple[float, ...], ctx: PromptContext, rng) -> np.ndarray:
    x = np.array(best, dtype=float)
    if ctx.tabular:
        flip = rng.integers(ctx.rank)
        x[flip] = rng.choice(ctx.action_set)
        return x
    return x + rng.normal(0.0, ctx.step_size, ctx.rank)


class _Evaluator:
    def __init__(self, config: SearchConfig):
        self.config = config
        if config.mode == "numopt":
            self.env = None
        else:
            self.env = make_env(config.env)
            self.spec = self.env.spec

    def __call__(self, params, eval_seed: Optional[int]) -> float:
        cfg = self.config
        if self.env is None:
            return eval_objective(cfg.objective, np.asarray(params))
        policy = make_policy(cfg.policy, self.spec, params)
        return evaluate(self.env, policy, cfg.episodes_per_eval, eval_seed)


def evaluation_seed(config: SearchConfig, index: int) -> int:
    """Seed of the ``index``-th evaluation (seed examples first, then iterations)."""
    return derive_seed(config.seed, index)


def _propose(provider, ctx, history, iteration, transcript, max_retries):
    prompt = render(ctx, history, iteration)
    text, retries = None, 0
    for _ in range(max_retries + 1):
        text = complete(provider, prompt, transcript)
        try:
            return prompt, text, parse_response(text, ctx), retries
        except ResponseParseError:
            retries += 1
    return prompt, text, None, retries


def _run(config: SearchConfig, provider=None, transcript: Optional[Transcript] = None,
         on_step=None) -> RunRecord:
    ctx = build_context(config)
    provider = provider or make_provider(config.provider)
    record = RunRecord(config, maximize=ctx.maximize)
    history = HistoryBuffer(maxlen=config.history_maxlen, rank=ctx.rank)
    rng = _rng(config.seed)
    evaluate_f = _Evaluator(config)
    started = time.perf_counter()
    eval_index = 0

    def add(step: IterationRecord):
        nonlocal eval_index
        eval_index += 1
        record.steps.append(step)
        history.push(HistoryEntry(step.params, step.f, step.iteration))
        if on_step is not None:
            on_step(record, step)

    def next_seed():
        return None if config.mode == "numopt" else evaluation_seed(config, eval_index)

    first = 1
    if config.mode == "numopt":
        x0 = np.random.default_rng(derive_seed(config.seed, 1 << 41)).uniform(
            ctx.value_range[0], ctx.value_range[1], ctx.rank)
        state = AdamState.init(x0)
        for i in range(1, min(WARMUP_STEPS, config.iterations) + 1):
            state = adam_step(state, grad_objective(config.objective, state.x))
            params = tuple(state.x.tolist())
            add(IterationRecord(i, "warmup", params, evaluate_f(params, None)))
        first = WARMUP_STEPS + 1
    else:
        for _ in range(config.seed_examples):
            params = tuple(_random_params(ctx, rng).tolist())
            s = next_seed()
            add(IterationRecord(0, "seed", params, evaluate_f(params, s), eval_seed=s))

    try:
        for i in range(first, config.iterations + 1):
            prompt, text, parsed, retries = _propose(provider, ctx, history, i, transcript,
                                                     config.max_parse_retries)
            if parsed is None:
                params = tuple(_fallback_params(record.best_params, ctx, rng).tolist()) if record.steps \
                    else tuple(_random_params(ctx, rng).tolist())
                kind, explanation, violation = "fallback", "", False
            else:
                params, kind = parsed.params, "llm"
                explanation, violation = parsed.explanation, parsed.range_violation
            s = next_seed()
            add(IterationRecord(i, kind, params, evaluate_f(params, s), eval_seed=s, prompt=prompt,
                                response=text, explanation=explanation, range_violation=violation,
                                parse_retries=retries))
    except ProviderError as exc:
        record.error = f"{type(exc).__name__}: {exc}"
        record.wall_time = time.perf_counter() - started
        raise ProviderFailure(record.error, record) from exc
    record.complete = True
    record.wall_time = time.perf_counter() - started
    return record


def run_policy_search(config: SearchConfig, provider=None, transcript: Optional[Transcript] = None,
                      on_step=None) -> RunRecord:
    if config.mode == "numopt":
        raise ValueError("use run_numopt for numopt configs")
    return _run(config, provider, transcript, on_step)


def run_numopt(config: SearchConfig, provider=None, transcript: Optional[Transcript] = None,
               on_step=None) -> RunRecord:
    if config.mode != "numopt":
        config = replace(config, mode="numopt")
    return _run(config, provider, transcript, on_step)


def run_search(config: SearchConfig, provider=None, transcript: Optional[Transcript] = None,
               on_step=None) -> RunRecord:
    runner = run_numopt if config.mode == "numopt" else run_policy_search
    return runner(config, provider, transcript, on_step)
