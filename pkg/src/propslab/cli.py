"""Command-line entry point: ``propslab <command> ...``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .envs import describe_envs
from .errors import PropsError
from .llm import ProviderConfig
from .numopt import BASELINES, FUNCTIONS, bench, make_objective, rows_to_csv
from .prompt import HistoryBuffer, HistoryEntry, render
from .search import SEARCH_MODES, SearchConfig, build_context


def _list_envs() -> int:
    rows = [("name", "observation", "action", "max_steps")] + [
        (n, o, a, str(m)) for n, o, a, m in describe_envs()
    ]
    widths = [max(len(r[i]) for r in rows) for i in range(4)]
    for r in rows:
        print("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())
    return 0


def cmd_run(args) -> int:
    from .runner import load_config, run_experiment

    exp = load_config(args.config)
    result = run_experiment(exp, resume=args.resume, parallelism=args.parallel)
    for m in result.metrics:
        print(f"{m.row}: {m.cell()}  ({m.completed}/{m.trials} trials complete)")
    return 0 if result.all_complete else 1


def cmd_summarize(args) -> int:
    from .runner import summarize

    s = summarize(args.directory, figures=not args.no_figures, out_dir=args.out)
    sys.stdout.write(s.table)
    print(f"csv: {s.csv_path}")
    for p in s.figure_paths:
        print(f"figure: {p}")
    return 0


def cmd_replay(args) -> int:
    from .runner import replay

    report = replay(args.record, tolerance=args.tolerance)
    print(report.text())
    return 0 if report.ok else 1


def cmd_bench(args) -> int:
    rows = bench(args.functions, args.dims, args.optimizers, args.trials, args.budget, args.seed)
    text = rows_to_csv(rows)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_render_prompt(args) -> int:
    provider = ProviderConfig()
    if args.objective:
        cfg = SearchConfig(objective=make_objective(args.objective, args.dim, args.seed), mode="numopt",
                           provider=provider, max_iters=args.max_iters)
    else:
        cfg = SearchConfig(env=args.env, policy=args.policy, mode=args.mode, provider=provider,
                           max_iters=args.max_iters)
    ctx = build_context(cfg)
    history = HistoryBuffer(rank=ctx.rank)
    rng = np.random.default_rng(args.seed)
    for i in range(args.examples):
        if ctx.tabular:
            params = rng.choice(ctx.action_set, size=ctx.rank)
        else:
            params = rng.uniform(*ctx.value_range, ctx.rank).round(ctx.decimals)
        history.push(HistoryEntry(tuple(params), float(rng.normal()), i + 1))
    sys.stdout.write(render(ctx, history, args.iteration))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="propslab", description="Prompted policy search experiments.")
    p.add_argument("--list-envs", action="store_true", help="list environments and exit")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command")

    r = sub.add_parser("run", help="run an experiment config (TOML)")
    r.add_argument("config")
    r.add_argument("--resume", action="store_true", help="skip trials whose complete record exists")
    r.add_argument("--parallel", type=int, default=None, help="override the configured worker count")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("summarize", help="tables, CSV and figures from an output directory")
    s.add_argument("directory")
    s.add_argument("--out", type=Path, default=None, help="where to write outputs (default: <dir>/summary)")
    s.add_argument("--no-figures", action="store_true")
    s.set_defaults(func=cmd_summarize)

    rp = sub.add_parser("replay", help="re-evaluate a run record and report deviations")
    rp.add_argument("record")
    rp.add_argument("--tolerance", type=float, default=0.0)
    rp.set_defaults(func=cmd_replay)

    b = sub.add_parser("bench", help="baseline optimizer table as CSV")
    b.add_argument("--functions", nargs="+", default=list(FUNCTIONS), choices=FUNCTIONS)
    b.add_argument("--dims", nargs="+", type=int, default=[2, 4, 8, 16])
    b.add_argument("--optimizers", nargs="+", default=list(BASELINES), choices=BASELINES)
    b.add_argument("--trials", type=int, default=50)
    b.add_argument("--budget", type=int, default=100)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out", default=None)
    b.set_defaults(func=cmd_bench)

    le = sub.add_parser("list-envs", help="list environments")
    le.set_defaults(func=lambda a: _list_envs())

    rn = sub.add_parser("render-prompt", help="print a rendered prompt")
    rn.add_argument("--env", default="cartpole")
    rn.add_argument("--policy", default="linear", choices=("linear", "tabular"))
    rn.add_argument("--mode", default="props", choices=[m for m in SEARCH_MODES if m != "numopt"])
    rn.add_argument("--objective", default=None, choices=FUNCTIONS, help="render the numopt prompt instead")
    rn.add_argument("--dim", type=int, default=2)
    rn.add_argument("--iteration", type=int, default=1)
    rn.add_argument("--examples", type=int, default=0, help="random history entries to include")
    rn.add_argument("--max-iters", type=int, default=None)
    rn.add_argument("--seed", type=int, default=0)
    rn.set_defaults(func=cmd_render_prompt)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.list_envs:
        return _list_envs()
    if not getattr(args, "func", None):
        parser.print_help()
        return 2
    try:
        return args.func(args)
    except PropsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
