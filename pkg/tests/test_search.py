import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from propslab.envs import derive_seed, evaluate, make_env
from propslab.envs.base import Env
from propslab.errors import EmptyInput, ProviderFailure, TransportError
from propslab.llm import Exchange, ProviderConfig, Transcript
from propslab.numopt import AdamState, ObjectiveSpec, adam_step, eval_objective, grad_objective, make_objective
from propslab.policies import make_policy
from propslab.prompt import HISTORY_LINE
from propslab.search import (
    RunRecord,
    SearchConfig,
    aggregate,
    build_context,
    evaluation_seed,
    run_numopt,
    run_policy_search,
    run_search,
)


def history_lines(prompt):
    return sum(1 for line in prompt.splitlines() if HISTORY_LINE.match(line))


def cliff_config(**kw):
    base = dict(env="cliff-walking", policy="tabular", max_iters=8, episodes_per_eval=1, seed=3)
    base.update(kw)
    return SearchConfig(**base)


class Canned:
    """Provider that answers from a fixed list, cycling."""

    def __init__(self, replies):
        self.replies = list(replies)
        self.prompts = []

    def complete(self, prompt):
        self.prompts.append(prompt)
        return self.replies[(len(self.prompts) - 1) % len(self.replies)], 1


class Broken:
    def __init__(self, after):
        self.after = after
        self.calls = 0

    def complete(self, prompt):
        self.calls += 1
        if self.calls > self.after:
            raise TransportError("connection reset")
        return "params[0]: 1.0, params[1]: 2.0, params[2]: 0.0\nok", 1


def test_config_defaults_and_validation():
    cfg = SearchConfig(env="cartpole")
    assert (cfg.iterations, cfg.seed_examples, cfg.episodes_per_eval, cfg.target) == (400, 5, 20, "cartpole")
    num = SearchConfig(objective=make_objective("salomon", 2, 0), mode="numopt")
    assert (num.iterations, num.seed_examples, num.target) == (100, 0, "salomon2d")
    with pytest.raises(ValueError):
        SearchConfig(env="cartpole", max_iters=0)
    with pytest.raises(ValueError):
        SearchConfig(env="cartpole", episodes_per_eval=0)
    with pytest.raises(ValueError):
        SearchConfig(env="cartpole", n_seed_examples=-1)
    with pytest.raises(ValueError):
        SearchConfig(env="cartpole", mode="numopt")
    with pytest.raises(ValueError):
        SearchConfig(env="cartpole", mode="chaos")


def test_config_round_trip():
    cfg = SearchConfig(objective=make_objective("levy", 3, 1), mode="numopt", value_range=(1.0, 2.0),
                       provider=ProviderConfig(strategy_seed=9))
    assert SearchConfig.from_dict(cfg.to_dict()) == cfg


def test_build_context_defaults():
    ctx = build_context(SearchConfig(env="cartpole", mode="props-plus"))
    assert (ctx.rank, ctx.mode, ctx.optimum_hint, ctx.decimals) == (10, "props-plus", 500, 1)
    tab = build_context(cliff_config())
    assert (tab.rank, tab.mode, tab.decimals, tab.action_set) == (48, "props-tabular", 0, (0, 1, 2, 3))
    assert build_context(cliff_config(mode="props-plus-hints")).hints
    with pytest.raises(ValueError):
        build_context(SearchConfig(env="cartpole", mode="props-plus-hints"))


def test_run_is_deterministic():
    a = run_policy_search(cliff_config())
    b = run_policy_search(cliff_config())
    assert a.steps == b.steps
    assert a.complete and a.best_f == b.best_f


def test_record_shape_and_seeds():
    rec = run_policy_search(cliff_config())
    kinds = [s.kind for s in rec.steps]
    assert kinds[:5] == ["seed"] * 5 and set(kinds[5:]) == {"llm"}
    assert [s.iteration for s in rec.steps[5:]] == list(range(1, 9))
    assert [s.eval_seed for s in rec.steps] == [derive_seed(3, j) for j in range(13)]
    assert rec.iterations_completed == 8
    # the first prompted step sees all five seed examples
    assert history_lines(rec.steps[5].prompt) == 5
    assert "iteration 1 out of 8" in rec.steps[5].prompt


def test_recorded_values_replay():
    rec = run_policy_search(cliff_config(env="frozen-lake", episodes_per_eval=5))
    env = make_env("frozen-lake")
    for s in rec.steps:
        assert evaluate(env, make_policy("tabular", env.spec, s.params), 5, s.eval_seed) == s.f


@pytest.mark.parametrize("maxlen", [1, 3, None])
def test_history_maxlen(maxlen):
    rec = run_policy_search(cliff_config(history_maxlen=maxlen, max_iters=10))
    for j, s in enumerate(rec.steps[5:]):
        entries_so_far = 5 + j
        expected = entries_so_far if maxlen is None else min(maxlen, entries_so_far)
        assert history_lines(s.prompt) == expected


def test_history_maxlen_one_shows_latest_only():
    rec = run_policy_search(cliff_config(history_maxlen=1))
    for prev, s in zip(rec.steps[4:], rec.steps[5:]):
        line = [ln for ln in s.prompt.splitlines() if HISTORY_LINE.match(ln)][0]
        assert line.startswith(f"params[0]: {int(prev.params[0])};")
        assert line.endswith(f"f(params): {prev.f:.2f}")


def test_episode_budget(monkeypatch):
    resets = []
    original = Env.reset

    def counting_reset(self, seed):
        resets.append(seed)
        return original(self, seed)

    monkeypatch.setattr(Env, "reset", counting_reset)
    cfg = SearchConfig(env="cartpole", max_iters=6, episodes_per_eval=4, n_seed_examples=2, seed=1)
    rec = run_policy_search(cfg)
    assert len(resets) == (cfg.seed_examples + rec.iterations_completed) * cfg.episodes_per_eval == 32


def test_best_so_far_monotone():
    rec = run_policy_search(SearchConfig(env="cartpole", max_iters=15, episodes_per_eval=2))
    bsf = rec.best_so_far()
    assert np.all(np.diff(bsf) >= 0)
    assert bsf[-1] == rec.best_f == max(s.f for s in rec.steps)


def test_parse_failures_then_fallback():
    bad = Canned(["I refuse to answer in the format."])
    transcript = Transcript()
    cfg = SearchConfig(env="cartpole", max_iters=2, episodes_per_eval=1, step_size=0.5)
    rec = run_policy_search(cfg, provider=bad, transcript=transcript)
    fallbacks = rec.steps[5:]
    assert [s.kind for s in fallbacks] == ["fallback", "fallback"]
    assert all(s.parse_retries == 4 for s in fallbacks)
    assert rec.parse_failures == 8 and rec.fallbacks == 2
    # every re-prompt repeats the identical prompt
    assert len(transcript) == 8 and len({ex.prompt for ex in list(transcript)[:4]}) == 1
    assert rec.complete


def test_retry_then_success():
    provider = Canned(["garbage", "params[0]: 0.5; params[1]: 0.5; params[2]: 0.5; params[3]: 0.5; "
                                  "params[4]: 0.5; params[5]: 0.5; params[6]: 0.5; params[7]: 0.5; "
                                  "params[8]: 0.5; params[9]: 9.0\nfine"])
    rec = run_policy_search(SearchConfig(env="cartpole", max_iters=1, episodes_per_eval=1), provider=provider)
    step = rec.steps[-1]
    assert step.kind == "llm" and step.parse_retries == 1
    assert step.range_violation and step.params[9] == 9.0
    assert step.explanation == "fine"


def test_provider_failure_keeps_partial_record():
    cfg = SearchConfig(env="mountain-car-c", max_iters=5, episodes_per_eval=1)
    with pytest.raises(ProviderFailure) as exc:
        run_policy_search(cfg, provider=Broken(after=2))
    rec = exc.value.record
    assert not rec.complete and rec.iterations_completed == 2 and "TransportError" in rec.error


def test_numopt_warmup_and_final_prompt():
    spec = make_objective("levy", 2, 5)
    cfg = SearchConfig(objective=spec, mode="numopt", seed=2)
    rec = run_numopt(cfg)
    assert len(rec.steps) == 100 and rec.steps[-1].iteration == 100
    assert [s.kind for s in rec.steps[:2]] == ["warmup", "warmup"]
    assert "iteration 100 out of 100" in rec.steps[-1].prompt
    assert "iteration 3 out of 100" in rec.steps[2].prompt
    # a bias-corrected Adam step moves each coordinate by at most lr
    x1, x2 = np.array(rec.steps[0].params), np.array(rec.steps[1].params)
    assert np.all(np.abs(x2 - x1) <= 0.5 + 1e-9)
    for s in rec.steps:
        assert s.f == eval_objective(spec, np.array(s.params))
    assert np.all(np.diff(rec.best_so_far()) <= 0)
    assert not rec.maximize


def test_numopt_warmup_matches_adam(monkeypatch):
    import propslab.search as search

    spec = make_objective("rastrigin", 3, 1)
    cfg = SearchConfig(objective=spec, mode="numopt", max_iters=3, seed=4)
    seen = []
    real_init = search.AdamState.init

    def spy(x):
        seen.append(np.array(x))
        return real_init(x)

    monkeypatch.setattr(search.AdamState, "init", staticmethod(spy))
    rec = run_numopt(cfg)
    x0 = seen[0]
    assert np.all((x0 >= 0) & (x0 <= 20))
    s1 = adam_step(AdamState.init(x0), grad_objective(spec, x0), lr=0.5)
    s2 = adam_step(s1, grad_objective(spec, s1.x), lr=0.5)
    assert np.array_equal(rec.steps[0].params, s1.x) and np.array_equal(rec.steps[1].params, s2.x)


def test_numopt_hill_climb_near_optimum():
    # the Adam warmup throws the start onto the r~1 ring; a pilot over these 20 seeds gave 18 at or below 0.3
    spec = ObjectiveSpec("salomon", (10.0, 10.0))
    hits = 0
    for seed in range(20):
        cfg = SearchConfig(objective=spec, mode="numopt", value_range=(9.0, 11.0), step_size=0.3, seed=seed,
                           provider=ProviderConfig(scripted_strategy="gaussian-hill-climb", strategy_seed=seed))
        hits += run_search(cfg).best_f <= 0.3
    assert hits >= 16


def test_aggregate_examples():
    def rec(f):
        r = RunRecord(SearchConfig(env="cartpole"), maximize=True)
        from propslab.search import IterationRecord

        r.steps.append(IterationRecord(1, "llm", (0.0,) * 10, f))
        return r

    one = aggregate([rec(478.27)])
    assert (one.n, one.mean, one.std, one.stderr) == (1, 478.27, 0.0, 0.0)
    two = aggregate([rec(0.0), rec(2.0)])
    assert two.mean == 1.0 and two.std == pytest.approx(math.sqrt(2)) and two.stderr == pytest.approx(1.0)
    assert aggregate([rec(5.0)] * 10).std == 0.0
    with pytest.raises(EmptyInput):
        aggregate([])


@given(st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=20))
def test_aggregate_matches_numpy(values):
    from propslab.search import IterationRecord

    recs = []
    for v in values:
        r = RunRecord(SearchConfig(env="cartpole"), maximize=True)
        r.steps.append(IterationRecord(1, "llm", (0.0,) * 10, v))
        recs.append(r)
    agg = aggregate(recs)
    assert agg.mean == pytest.approx(np.mean(values))
    assert agg.std == pytest.approx(np.std(values, ddof=1), abs=1e-9)


def test_record_save_load(tmp_path):
    rec = run_policy_search(cliff_config())
    path = rec.save(tmp_path)
    assert path.name == "cliff-walking-tabular-props-3.jsonl"
    assert (tmp_path / "cliff-walking-tabular-props-3.summary.json").exists()
    back = RunRecord.load(path)
    assert back.steps == rec.steps and back.config == rec.config and back.complete


def test_evaluation_seed():
    cfg = SearchConfig(env="cartpole", seed=11)
    assert evaluation_seed(cfg, 4) == derive_seed(11, 4)
