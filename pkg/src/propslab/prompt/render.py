from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional, Tuple

from ..errors import TemplateVarMissing
from .history import format_history

MODES = ("props-linear", "props-tabular", "props-plus", "numopt-min")

_PLACEHOLDER = re.compile(r"\{\{\s*([A-Za-z_]\w*)\s*(?:-\s*(\d+)\s*)?\}\}")

_ASSETS = resources.files(__package__)


@dataclass(frozen=True)
class PromptContext:
    rank: int
    mode: str
    value_range: Tuple[float, float] = (-6.0, 6.0)
    decimals: int = 1
    optimum_hint: float = 0
    step_size: float = 1.0
    action_set: Tuple[int, ...] = ()
    env_description: Optional[str] = None
    hints: Optional[str] = None
    max_steps: int = 400
    template: Optional[str] = field(default=None, repr=False)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown prompt mode {self.mode!r}; expected one of {MODES}")
        if self.rank < 1:
            raise ValueError("rank must be >= 1")
        if self.decimals < 0:
            raise ValueError("decimals must be >= 0")
        low, high = self.value_range
        if not low < high:
            raise ValueError("value_range needs low < high")
        if self.mode == "props-tabular" and not self.action_set:
            raise ValueError("tabular prompts need a non-empty action_set")
        if self.mode == "props-plus" and not self.env_description:
            raise ValueError("props-plus prompts need an env_description")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")

    @property
    def tabular(self) -> bool:
        return bool(self.action_set)

    @property
    def maximize(self) -> bool:
        return self.mode != "numopt-min"


def template_name(ctx: PromptContext) -> str:
    if ctx.mode == "props-plus" and ctx.tabular:
        return "props-plus-tabular"
    return ctx.mode


def load_template(name: str) -> str:
    return _ASSETS.joinpath(f"templates/{name}.txt").read_text(encoding="utf-8")


def load_asset(kind: str, env_name: str) -> Optional[str]:
    """Text of ``assets/<kind>/<env_name>.txt`` without its trailing newline, or None."""
    path = _ASSETS.joinpath(f"assets/{kind}/{env_name}.txt")
    if not path.is_file():
        return None
    return path.read_text(encoding="utf-8").rstrip("\n")


def substitute(template: str, values: dict) -> str:
    def repl(m):
        name, offset = m.group(1), m.group(2)
        if name not in values:
            raise TemplateVarMissing(f"template variable {name!r} has no value")
        value = values[name]
        if offset is not None:
            value = int(value) - int(offset)
        return str(value)

    return _PLACEHOLDER.sub(repl, template)


def _scalar(v) -> str:
    if isinstance(v, float) and v.is_integer() and abs(v) >= 10:
        return str(int(v))
    return str(v)


def render(ctx: PromptContext, history, iteration: int) -> str:
    if not 1 <= iteration <= ctx.max_steps:
        raise ValueError(f"iteration {iteration} outside 1..{ctx.max_steps}")
    template = ctx.template if ctx.template is not None else load_template(template_name(ctx))
    low, high = ctx.value_range
    decimals = "1 decimal place" if ctx.decimals == 1 else f"{ctx.decimals} decimal places"
    values = {
        "rank": ctx.rank,
        "max_steps": ctx.max_steps,
        "low": float(low),
        "high": float(high),
        "decimal_places": decimals,
        "optimum": _scalar(ctx.optimum_hint),
        "step_size": _scalar(ctx.step_size),
        "actions": "[" + ", ".join(str(a) for a in ctx.action_set) + "]",
        "episode_reward_buffer_string": format_history(history, ctx.decimals),
        "step_number": iteration,
        "hints_block": f"\n# Important hints:\n{ctx.hints}\n" if ctx.hints else "",
    }
    if ctx.env_description is not None:
        values["env_description"] = ctx.env_description
    return substitute(template, values)


# Policy paragraphs for environment descriptions

FEATURE_NAMES = {
    "cartpole": ("cart_position", "cart_velocity", "pole_angle", "pole_angular_velocity"),
    "mountain-car-d": ("position", "velocity"),
    "mountain-car-c": ("position", "velocity"),
}


def _matrix_rows(obs_dim: int, n_out: int) -> str:
    rows = []
    for i in range(obs_dim):
        cells = ", ".join(f"params[{i * n_out + j}]" for j in range(n_out))
        rows.append(f"[{cells}]")
    return "W = [" + ",\n     ".join(rows) + "]"


def policy_description(env_name: str, kind: str, layout) -> str:
    if kind == "tabular":
        return (
            f"The policy is a tabular policy with {layout.rank} parameters and works as follows:\n"
            "action = params[state], i.e. params[s] is the action taken in state s.\n"
        )
    names = FEATURE_NAMES.get(env_name) or tuple(f"state[{i}]" for i in range(layout.obs_dim))
    split = layout.obs_dim * layout.n_out
    bias = "B = [" + ", ".join(f"params[{split + j}]" for j in range(layout.n_out)) + "]"
    if layout.discrete:
        rule = "action = argmax(state @ W + B), where"
    else:
        bounds = ", ".join(f"[{lo}, {hi}]" for lo, hi in zip(layout.low, layout.high))
        rule = f"action = state @ W + B, clipped to {bounds}, where"
    return (
        f"The policy is a linear policy with {layout.rank} parameters and works as follows:\n"
        f"{rule}\n"
        f"state = [{', '.join(names)}]\n"
        f"{_matrix_rows(layout.obs_dim, layout.n_out)}\n"
        f"{bias}\n"
    )


def env_description(env_name: str, kind: str, layout) -> str:
    text = load_asset("descriptions", env_name)
    if text is None:
        raise FileNotFoundError(f"no environment description asset for {env_name!r}")
    return substitute(text, {"policy_description": policy_description(env_name, kind, layout)})


def env_hints(env_name: str) -> Optional[str]:
    return load_asset("hints", env_name)


def read_template_file(path) -> str:
    return Path(path).read_text(encoding="utf-8")
