"""Reading model replies back into parameter vectors."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Tuple

from ..errors import (
    DuplicateIndex,
    IllegalTabularAction,
    MissingIndex,
    NonNumericValue,
    ResponseParseError,
)
from .render import PromptContext

_ASSIGN = re.compile(
    r"params\s*\[\s*(\d+)\s*\]\s*[:=]\s*"
    r"(?P<value>[-+]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][-+]?\d+)?(?![\w.]*\d))?",
    re.IGNORECASE,
)
_MARKDOWN = re.compile(r"[*`_]|^#+\s*|^>\s*", re.MULTILINE)
_EXPLANATION_LABEL = re.compile(r"^\s*(?:[-*]\s*)?(?:line\s*2|explanation|reasoning)\s*:\s*", re.IGNORECASE)


@dataclass(frozen=True)
class ParsedResponse:
    params: Tuple[float, ...]
    explanation: str
    range_violation: bool = False


def parse_response(text: str, ctx: PromptContext) -> ParsedResponse:
    """Pull ``params[i]: value`` assignments out of free-form model output.

    Separators may be ``;`` or ``,``; markdown emphasis and surrounding prose
    are ignored. Text after the last parameter line becomes the explanation.
    Values outside the advertised range are kept and flagged, never clipped.
    """
    clean = _MARKDOWN.sub("", text)
    values = {}
    last_end = None
    for m in _ASSIGN.finditer(clean):
        index = int(m.group(1))
        raw = m.group("value")
        if raw is None:
            raise NonNumericValue(f"params[{index}] has no numeric value")
        value = float(raw)
        if index >= ctx.rank:
            raise ResponseParseError(f"params[{index}] is beyond rank {ctx.rank}")
        if index in values and values[index] != value:
            raise DuplicateIndex(index)
        values[index] = value
        last_end = m.end()
    for i in range(ctx.rank):
        if i not in values:
            raise MissingIndex(i)
    params = tuple(values[i] for i in range(ctx.rank))

    if ctx.tabular:
        allowed = set(ctx.action_set)
        for i, v in enumerate(params):
            if not float(v).is_integer() or int(v) not in allowed:
                raise IllegalTabularAction(f"params[{i}] = {v} not in {sorted(allowed)}")
        params = tuple(float(int(v)) for v in params)
        violation = False
    else:
        low, high = ctx.value_range
        violation = any(v < low or v > high for v in params)

    rest = clean[last_end:]
    newline = rest.find("\n")
    rest = "" if newline < 0 else rest[newline + 1:]
    explanation = _EXPLANATION_LABEL.sub("", rest.strip(), count=1).strip()
    return ParsedResponse(params, explanation, violation)
