"""Re-evaluate a persisted run and compare against the recorded values."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Tuple

import numpy as np

from ..envs import evaluate, make_env
from ..errors import PropsError, RecordCorrupt
from ..numopt.objectives import eval_objective
from ..policies import make_policy
from ..search import RunRecord


@dataclass
class ReplayReport:
    path: Path
    steps: int
    max_deviation: float
    mismatches: List[Tuple[int, float, float]] = field(default_factory=list)  # (step index, recorded, replayed)

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def text(self) -> str:
        lines = [f"{self.path}: {self.steps} evaluations replayed, max |f_recorded - f_replayed| = {self.max_deviation:.6g}"]
        for idx, rec, rep in self.mismatches[:20]:
            lines.append(f"  step {idx}: recorded {rec!r}, replayed {rep!r}")
        if len(self.mismatches) > 20:
            lines.append(f"  ... {len(self.mismatches) - 20} more")
        lines.append("OK" if self.ok else f"MISMATCH in {len(self.mismatches)} step(s)")
        return "\n".join(lines)


def _load(path: Path) -> RunRecord:
    try:
        return RunRecord.load(path)
    except (OSError, ValueError, KeyError, TypeError, json.JSONDecodeError) as exc:
        raise RecordCorrupt(f"{path}: {exc}") from None


def replay(path, tolerance: float = 0.0) -> ReplayReport:
    """Every environment here is seeded, so replayed values should match exactly."""
    path = Path(path)
    record = _load(path)
    cfg = record.config
    env = None if cfg.mode == "numopt" else make_env(cfg.env)
    worst = 0.0
    mismatches = []
    for i, step in enumerate(record.steps):
        try:
            if env is None:
                value = eval_objective(cfg.objective, np.asarray(step.params))
            else:
                if step.eval_seed is None:
                    raise RecordCorrupt(f"{path}: step {i} has no evaluation seed")
                policy = make_policy(cfg.policy, env.spec, step.params)
                value = evaluate(env, policy, cfg.episodes_per_eval, step.eval_seed)
        except RecordCorrupt:
            raise
        except PropsError as exc:
            raise RecordCorrupt(f"{path}: step {i} cannot be re-evaluated: {exc}") from None
        dev = abs(value - step.f)
        worst = max(worst, dev)
        if dev > tolerance:
            mismatches.append((i, step.f, value))
    return ReplayReport(path, len(record.steps), worst, mismatches)
