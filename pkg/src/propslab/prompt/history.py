from __future__ import annotations

import math
import re
from collections import deque
from dataclasses import dataclass
from typing import Iterator, List, Optional, Tuple

from ..errors import RankMismatch


@dataclass(frozen=True)
class HistoryEntry:
    params: Tuple[float, ...]
    f: float
    iteration: int

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(float(v) for v in self.params))
        if not math.isfinite(self.f):
            raise ValueError(f"f must be finite, got {self.f}")

    @property
    def rank(self) -> int:
        return len(self.params)


class HistoryBuffer:
    """In-context history. With ``maxlen`` set, the oldest entries are evicted first."""

    def __init__(self, maxlen: Optional[int] = None, rank: Optional[int] = None):
        if maxlen is not None and maxlen < 1:
            raise ValueError("maxlen must be >= 1 or None")
        self.maxlen = maxlen
        self.rank = rank
        self._entries: deque = deque(maxlen=maxlen)

    def push(self, entry: HistoryEntry) -> None:
        if self.rank is None:
            self.rank = entry.rank
        elif entry.rank != self.rank:
            raise RankMismatch(f"entry has rank {entry.rank}, buffer holds rank {self.rank}")
        self._entries.append(entry)

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[HistoryEntry]:
        return iter(self._entries)

    def __getitem__(self, i) -> HistoryEntry:
        return self._entries[i]

    @property
    def entries(self) -> List[HistoryEntry]:
        return list(self._entries)


def push(history: HistoryBuffer, entry: HistoryEntry) -> None:
    history.push(entry)


def format_number(value: float, decimals: int) -> str:
    text = f"{value:.{decimals}f}"
    if float(text) == 0.0:
        # avoid "-0.0" for tiny negatives
        text = f"{0.0:.{decimals}f}"
    return text


def format_entry(entry: HistoryEntry, decimals: int) -> str:
    fields = [f"params[{i}]: {format_number(v, decimals)}" for i, v in enumerate(entry.params)]
    fields.append(f"f(params): {format_number(entry.f, 2)}")
    return "; ".join(fields)


def format_history(history, decimals: int = 1) -> str:
    """One ``params[i]: v; ...; f(params): y`` line per entry, oldest first."""
    entries = list(history)
    if entries:
        rank = entries[0].rank
        for e in entries:
            if e.rank != rank:
                raise RankMismatch(f"history mixes rank {rank} and rank {e.rank}")
    return "\n".join(format_entry(e, decimals) for e in entries)


_NUM = r"[-+]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][-+]?\d+)?"
_PARAM_FIELD = re.compile(r"params\[(\d+)\]:\s*(" + _NUM + r")")
_F_FIELD = re.compile(r"f\(params\):\s*(" + _NUM + r")")
HISTORY_LINE = re.compile(r"^\s*params\[0\]:.*f\(params\):\s*" + _NUM + r"\s*$")


def parse_history_line(line: str) -> Tuple[Tuple[float, ...], float]:
    """Inverse of :func:`format_entry`, at printed precision."""
    fields = {int(i): float(v) for i, v in _PARAM_FIELD.findall(line)}
    f_match = _F_FIELD.search(line)
    if not fields or f_match is None:
        raise ValueError(f"not a history line: {line!r}")
    rank = max(fields) + 1
    if sorted(fields) != list(range(rank)):
        raise ValueError(f"history line has gaps in its indices: {line!r}")
    return tuple(fields[i] for i in range(rank)), float(f_match.group(1))
