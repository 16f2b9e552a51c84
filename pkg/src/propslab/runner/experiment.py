"""Fan experiment rows out into trials, persist every record, aggregate per row."""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional

from ..envs import derive_seed
from ..errors import ProviderFailure
from ..llm import Transcript
from ..numopt.objectives import make_objective
from ..search import RunRecord, SearchConfig, aggregate, run_search
from .config import ExperimentConfig, RowSpec

log = logging.getLogger(__name__)

MANIFEST = "experiment.json"


@dataclass(frozen=True)
class MetricsRow:
    row: str
    target: str
    mode: str
    provider: str
    trials: int
    completed: int
    mean: float
    std: float
    stderr: float
    wall_time: float  # mean seconds per trial

    @property
    def flagged(self) -> bool:
        return self.completed < self.trials

    def cell(self) -> str:
        return f"{self.mean:.2f} ± {self.std:.2f}" + ("*" if self.flagged else "")


@dataclass
class ExperimentResult:
    records: Dict[str, List[RunRecord]] = field(default_factory=dict)
    metrics: List[MetricsRow] = field(default_factory=list)

    @property
    def all_complete(self) -> bool:
        return all(not m.flagged for m in self.metrics)


def trial_seed(global_seed: int, row_index: int, trial: int) -> int:
    return derive_seed(derive_seed(global_seed, row_index), trial)


def search_config(exp: ExperimentConfig, row: RowSpec, seed: int) -> SearchConfig:
    opts = dict(row.overrides)
    template_path = opts.pop("template_path", None)
    if template_path is not None:
        opts["template"] = Path(template_path).read_text(encoding="utf-8")
    if "value_range" in opts:
        opts["value_range"] = tuple(opts["value_range"])
    provider = exp.providers[row.provider]
    if provider.kind == "scripted":
        # a distinct strategy stream per trial
        provider = replace(provider, strategy_seed=seed)
    if row.is_numopt:
        objective = make_objective(row.target, row.dim, seed)
        return SearchConfig(objective=objective, mode="numopt", provider=provider, seed=seed, **opts)
    return SearchConfig(env=row.target, policy=row.policy, mode=row.mode, provider=provider, seed=seed, **opts)


def row_dir(exp: ExperimentConfig, row: RowSpec) -> Path:
    return exp.output_dir / row.name


def write_manifest(exp: ExperimentConfig) -> None:
    exp.output_dir.mkdir(parents=True, exist_ok=True)
    manifest = {
        "name": exp.name,
        "seed": exp.seed,
        "rows": [
            {"row": r.name, "target": r.target_name, "mode": r.mode, "provider": r.provider,
             "trials": r.trials, "label": r.label}
            for r in exp.rows
        ],
    }
    (exp.output_dir / MANIFEST).write_text(json.dumps(manifest, indent=2) + "\n")


def _run_trial(exp: ExperimentConfig, row: RowSpec, seed: int, resume: bool) -> RunRecord:
    cfg = search_config(exp, row, seed)
    directory = row_dir(exp, row)
    stem = f"{cfg.target}-{cfg.mode}-{seed}"
    path = directory / f"{stem}.jsonl"
    if resume and path.exists():
        try:
            rec = RunRecord.load(path)
            if rec.complete:
                log.info("skipping completed trial %s", path)
                return rec
        except (ValueError, KeyError, json.JSONDecodeError):
            log.warning("unreadable record %s; rerunning", path)
    directory.mkdir(parents=True, exist_ok=True)
    transcript_path = directory / f"{stem}.transcript.jsonl"
    transcript_path.unlink(missing_ok=True)
    holder = {}

    def keep(record, _step):
        holder["record"] = record

    try:
        rec = run_search(cfg, transcript=Transcript(transcript_path), on_step=keep)
    except ProviderFailure as exc:
        rec = exc.record
        log.error("trial %s aborted: %s", stem, exc)
    except Exception as exc:  # environment or evaluation error: fatal to this trial only
        rec = holder.get("record") or RunRecord(cfg, maximize=cfg.mode != "numopt")
        rec.error = f"{type(exc).__name__}: {exc}"
        log.error("trial %s failed: %s", stem, rec.error)
    rec.save(directory)
    return rec


def metrics_for(row_name: str, target: str, mode: str, provider: str, trials: int,
                records: List[RunRecord]) -> MetricsRow:
    done = [r for r in records if r.complete]
    usable = [r for r in records if r.steps]
    if usable:
        agg = aggregate(usable)
        mean, std, stderr = agg.mean, agg.std, agg.stderr
        wall = sum(r.wall_time for r in usable) / len(usable)
    else:
        mean = std = stderr = float("nan")
        wall = 0.0
    return MetricsRow(row_name, target, mode, provider, trials, len(done), mean, std, stderr, wall)


def run_experiment(exp: ExperimentConfig, resume: bool = False, parallelism: Optional[int] = None) -> ExperimentResult:
    write_manifest(exp)
    jobs = [
        (row, trial_seed(exp.seed, i, t))
        for i, row in enumerate(exp.rows)
        for t in range(row.trials)
    ]
    workers = parallelism or exp.parallelism
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [(row, pool.submit(_run_trial, exp, row, seed, resume)) for row, seed in jobs]
        result = ExperimentResult()
        for row, fut in futures:
            result.records.setdefault(row.name, []).append(fut.result())
    for row in exp.rows:
        recs = result.records.get(row.name, [])
        result.metrics.append(metrics_for(row.name, row.target_name, row.mode, row.provider, row.trials, recs))
    return result
