"""Declarative experiment files (TOML).

Schema::

    [experiment]
    name = "cartpole-sweep"
    output_dir = "runs/cartpole"      # relative paths resolve against the file
    parallelism = 2                   # concurrent trials
    seed = 0                          # global seed; trial seeds derive from it

    [defaults]                        # optional; applied to every row
    max_iters = 400
    episodes_per_eval = 20
    n_seed_examples = 5
    # history_maxlen = 10             # omit for an unbounded history

    [providers.hill]                  # named providers referenced by rows
    kind = "scripted"
    scripted_strategy = "mu-plus-lambda"

    [[rows]]
    env = "cartpole"                  # or: objective = "levy", dim = 2
    policy = "linear"                 # linear | tabular
    mode = "props"                    # props | props-plus | props-plus-hints | numopt
    provider = "hill"
    trials = 10
    label = "n10"                     # optional, distinguishes sweep rows
    overrides = { history_maxlen = 10 }
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Tuple

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ..envs import ENVIRONMENTS
from ..errors import ConfigParseError, UnsupportedCombination, ValidationError
from ..llm import ProviderConfig
from ..numopt.objectives import FUNCTIONS
from ..policies import POLICY_KINDS, layout_for
from ..search import SEARCH_MODES

SEARCH_KEYS = {
    "max_iters", "episodes_per_eval", "history_maxlen", "n_seed_examples", "value_range",
    "decimals", "optimum_hint", "step_size", "max_parse_retries", "template_path",
}
PROVIDER_KEYS = set(ProviderConfig.__dataclass_fields__)
ROW_KEYS = {"env", "objective", "dim", "policy", "mode", "provider", "trials", "label", "overrides"}
EXPERIMENT_KEYS = {"name", "output_dir", "parallelism", "seed"}
POLICY_DEFAULTS = {"max_iters": 400, "episodes_per_eval": 20}


@dataclass(frozen=True)
class RowSpec:
    target: str  # env name or objective name
    mode: str
    provider: str
    trials: int
    policy: str = "linear"
    dim: Optional[int] = None
    label: str = ""
    overrides: Dict[str, object] = field(default_factory=dict)

    @property
    def is_numopt(self) -> bool:
        return self.mode == "numopt"

    @property
    def key(self) -> Tuple[str, str, str, str, str]:
        return (self.target_name, self.mode, self.provider, self.label, self.policy)

    @property
    def target_name(self) -> str:
        if self.is_numopt:
            return f"{self.target}{self.dim}d"
        return self.target if self.policy == "linear" else f"{self.target}-{self.policy}"

    @property
    def name(self) -> str:
        parts = [self.target_name, self.mode, self.provider]
        if self.label:
            parts.append(self.label)
        return "-".join(parts)


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    output_dir: Path
    rows: Tuple[RowSpec, ...]
    providers: Dict[str, ProviderConfig]
    parallelism: int = 1
    seed: int = 0
    source: Optional[Path] = None


def _problem_list(doc: dict, base: Path):
    problems: List[str] = []
    exp = doc.get("experiment")
    if not isinstance(exp, dict):
        problems.append("[experiment] table is required")
        exp = {}
    for k in exp:
        if k not in EXPERIMENT_KEYS:
            problems.append(f"experiment.{k}: unknown key")
    name = exp.get("name", "experiment")
    if not isinstance(name, str) or not name:
        problems.append("experiment.name: must be a non-empty string")
    parallelism = exp.get("parallelism", 1)
    if not isinstance(parallelism, int) or parallelism < 1:
        problems.append("experiment.parallelism: must be an integer >= 1")
    seed = exp.get("seed", 0)
    if not isinstance(seed, int) or seed < 0:
        problems.append("experiment.seed: must be a non-negative integer")
    out = exp.get("output_dir", "runs")
    if not isinstance(out, str):
        problems.append("experiment.output_dir: must be a string")
        out = "runs"
    output_dir = Path(out) if Path(out).is_absolute() else base / out

    providers: Dict[str, ProviderConfig] = {}
    raw_providers = doc.get("providers", {})
    if not isinstance(raw_providers, dict) or not raw_providers:
        problems.append("[providers] needs at least one named provider")
        raw_providers = {}
    for pname, pdata in raw_providers.items():
        if not isinstance(pdata, dict):
            problems.append(f"providers.{pname}: must be a table")
            continue
        unknown = set(pdata) - PROVIDER_KEYS
        for k in sorted(unknown):
            problems.append(f"providers.{pname}.{k}: unknown key")
        fields = {k: v for k, v in pdata.items() if k in PROVIDER_KEYS}
        try:
            providers[pname] = ProviderConfig(**fields)
        except (ValueError, TypeError) as exc:
            problems.append(f"providers.{pname}: {exc}")

    defaults = doc.get("defaults", {})
    if not isinstance(defaults, dict):
        problems.append("defaults: must be a table")
        defaults = {}
    for k in defaults:
        if k not in SEARCH_KEYS:
            problems.append(f"defaults.{k}: unknown key")

    rows: List[RowSpec] = []
    raw_rows = doc.get("rows")
    if not isinstance(raw_rows, list) or not raw_rows:
        problems.append("[[rows]] needs at least one entry")
        raw_rows = []
    seen = set()
    for i, r in enumerate(raw_rows):
        where = f"rows[{i}]"
        for k in r:
            if k not in ROW_KEYS:
                problems.append(f"{where}.{k}: unknown key")
        mode = r.get("mode", "props")
        if mode not in SEARCH_MODES:
            problems.append(f"{where}.mode: {mode!r} is not one of {SEARCH_MODES}")
        trials = r.get("trials", 1)
        if not isinstance(trials, int) or trials < 1:
            problems.append(f"{where}.trials: must be an integer >= 1, got {trials!r}")
        provider = r.get("provider")
        if provider is None and len(raw_providers) == 1:
            provider = next(iter(raw_providers))
        if provider not in raw_providers:
            problems.append(f"{where}.provider: {provider!r} is not a defined provider")
        policy = r.get("policy", "linear")
        dim = None
        if mode == "numopt":
            target = r.get("objective")
            if target not in FUNCTIONS:
                problems.append(f"{where}.objective: {target!r} is not one of {FUNCTIONS}")
            dim = r.get("dim", 2)
            if not isinstance(dim, int) or dim < 1:
                problems.append(f"{where}.dim: must be an integer >= 1")
        else:
            target = r.get("env")
            if target not in ENVIRONMENTS:
                problems.append(f"{where}.env: unknown environment {target!r}")
            elif policy not in POLICY_KINDS:
                problems.append(f"{where}.policy: {policy!r} is not one of {POLICY_KINDS}")
            else:
                try:
                    layout_for(policy, ENVIRONMENTS[target].spec)
                except UnsupportedCombination as exc:
                    problems.append(f"{where}.policy: {exc}")
        overrides = r.get("overrides", {})
        if not isinstance(overrides, dict):
            problems.append(f"{where}.overrides: must be a table")
            overrides = {}
        for k in overrides:
            if k not in SEARCH_KEYS:
                problems.append(f"{where}.overrides.{k}: unknown key")
        merged = dict(POLICY_DEFAULTS) if mode != "numopt" else {"max_iters": 100}
        merged.update({k: v for k, v in defaults.items() if k in SEARCH_KEYS})
        merged.update({k: v for k, v in overrides.items() if k in SEARCH_KEYS})
        for k in ("max_iters", "episodes_per_eval"):
            if k in merged and (not isinstance(merged[k], int) or merged[k] < 1):
                problems.append(f"{where}: {k} must be an integer >= 1")
        if "template_path" in merged:
            tp = Path(merged["template_path"])
            merged["template_path"] = str(tp if tp.is_absolute() else base / tp)
        row = RowSpec(str(target), mode, str(provider), trials if isinstance(trials, int) else 1,
                      policy=policy, dim=dim, label=str(r.get("label", "")), overrides=merged)
        if row.key in seen:
            problems.append(f"{where}: duplicate row {row.name}")
        seen.add(row.key)
        rows.append(row)
    config = ExperimentConfig(
        name=str(name), output_dir=output_dir, rows=tuple(rows), providers=providers,
        parallelism=parallelism if isinstance(parallelism, int) else 1,
        seed=seed if isinstance(seed, int) else 0,
    )
    return config, problems


def parse_config(text: str, base: Path = Path(".")) -> ExperimentConfig:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigParseError(str(exc)) from None
    config, problems = _problem_list(doc, base)
    if problems:
        raise ValidationError(problems)
    return config


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigParseError(f"{path}: {exc}") from None
    try:
        config = parse_config(text, path.resolve().parent)
    except ConfigParseError as exc:
        raise ConfigParseError(f"{path}: {exc}") from None
    return replace(config, source=path)
