import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from propslab.errors import (
    DuplicateIndex,
    IllegalTabularAction,
    MissingIndex,
    NonNumericValue,
    RankMismatch,
    ResponseParseError,
    TemplateVarMissing,
)
from propslab.prompt import (
    HISTORY_LINE,
    HistoryBuffer,
    HistoryEntry,
    PromptContext,
    env_hints,
    format_entry,
    format_history,
    parse_history_line,
    parse_response,
    push,
    render,
    substitute,
    template_name,
)

from golden_cases import CASES, GOLDEN_DIR

LINEAR3 = PromptContext(rank=3, mode="props-linear")
TAB4 = PromptContext(rank=4, mode="props-tabular", decimals=0, action_set=(0, 1, 2, 3))


def entry(params, f=0.0, it=1):
    return HistoryEntry(tuple(params), f, it)


@pytest.mark.parametrize("name", sorted(CASES))
def test_golden_prompt_byte_exact(name):
    ctx, hist, it = CASES[name]()
    expected = (GOLDEN_DIR / name).read_bytes()
    assert render(ctx, hist, it).encode("utf-8") == expected


def test_props_plus_cartpole_contains_env_paragraph():
    ctx, hist, it = CASES["props-plus-cartpole.txt"]()
    text = render(ctx, hist, it)
    assert "# Environment:\nIn the cartpole environment" in text
    assert "a pole is attached by an un-actuated joint" in text
    assert "linear policy with 10 parameters" in text


def test_props_linear_empty_history():
    text = render(LINEAR3, HistoryBuffer(), 1)
    assert "Do not propose previously seen params." in text
    assert "You are a good global optimizer" in text
    assert "[-6.0, 6.0] with 1 decimal place." in text
    assert "params[2]: '" in text
    assert text.endswith("Now you are at iteration 1 out of 400. Please provide the results in the indicated format. "
                         "Do not provide any additional texts.\n")
    assert not any(HISTORY_LINE.match(line) for line in text.splitlines())


def test_render_is_pure():
    hist = HistoryBuffer()
    hist.push(entry([1, 2, 3], 4.0))
    assert render(LINEAR3, hist, 7) == render(LINEAR3, hist, 7)


@pytest.mark.parametrize("iteration", [0, 401])
def test_render_iteration_bounds(iteration):
    with pytest.raises(ValueError):
        render(LINEAR3, HistoryBuffer(), iteration)


def test_numopt_prompt():
    ctx = PromptContext(rank=2, mode="numopt-min", value_range=(0, 20), decimals=2, max_steps=100, step_size=0.5)
    text = render(ctx, HistoryBuffer(), 3)
    assert text.startswith("You are an optimization assistant")
    assert "global minimum" in text and "[0.0, 20.0] with 2 decimal places" in text
    assert "iteration 3 out of 100" in text


def test_hints_block():
    hints = env_hints("cliff-walking")
    assert hints
    ctx = PromptContext(rank=48, mode="props-tabular", decimals=0, action_set=(0, 1, 2, 3), hints=hints)
    assert f"# Important hints:\n{hints}\n" in render(ctx, HistoryBuffer(), 1)
    assert env_hints("cartpole") is None


def test_template_selection():
    assert template_name(LINEAR3) == "props-linear"
    plus_tab = PromptContext(rank=4, mode="props-plus", action_set=(0, 1), env_description="x")
    assert template_name(plus_tab) == "props-plus-tabular"


def test_context_validation():
    with pytest.raises(ValueError):
        PromptContext(rank=3, mode="props-plus")
    with pytest.raises(ValueError):
        PromptContext(rank=3, mode="props-tabular")
    with pytest.raises(ValueError):
        PromptContext(rank=3, mode="props-linear", value_range=(1, 1))
    with pytest.raises(ValueError):
        PromptContext(rank=3, mode="bogus")


def test_substitute():
    assert substitute("a {{ x }} b {{x - 1}}", {"x": 5}) == "a 5 b 4"
    with pytest.raises(TemplateVarMissing):
        substitute("{{ missing }}", {})
    # single pass: substituted text is not re-scanned
    assert substitute("{{ a }}", {"a": "{{ b }}"}) == "{{ b }}"


def test_custom_template_missing_var():
    ctx = PromptContext(rank=3, mode="props-linear", template="{{ rank }} {{ nonsense }}")
    with pytest.raises(TemplateVarMissing):
        render(ctx, HistoryBuffer(), 1)


# history


def test_format_entry_example():
    e = entry([-2.1, -1.6, -2.6], -116.18)
    assert format_entry(e, 1) == "params[0]: -2.1; params[1]: -1.6; params[2]: -2.6; f(params): -116.18"


def test_format_history_empty_and_mixed():
    assert format_history(HistoryBuffer()) == ""
    with pytest.raises(RankMismatch):
        format_history([entry([1.0]), entry([1.0, 2.0])])


def test_format_no_negative_zero():
    assert format_entry(entry([-0.01], -0.001), 1) == "params[0]: 0.0; f(params): 0.00"


finite = st.floats(-1e4, 1e4, allow_nan=False, allow_infinity=False)


@given(st.lists(finite, min_size=1, max_size=12), finite, st.integers(0, 4))
@settings(max_examples=300)
def test_history_round_trip(params, f, decimals):
    e = entry(params, f)
    line = format_entry(e, decimals)
    got_params, got_f = parse_history_line(line)
    assert got_params == tuple(float(f"{v:.{decimals}f}") for v in params)
    assert got_f == float(f"{f:.2f}")
    assert HISTORY_LINE.match(line)


def test_history_line_rejects_garbage():
    with pytest.raises(ValueError):
        parse_history_line("nothing to see")
    with pytest.raises(ValueError):
        parse_history_line("params[0]: 1; params[2]: 3; f(params): 1")


def test_push_maxlen_one():
    buf = HistoryBuffer(maxlen=1)
    push(buf, entry([1.0], 1, 1))
    push(buf, entry([2.0], 2, 2))
    assert [e.iteration for e in buf] == [2]


def test_push_unbounded_400():
    buf = HistoryBuffer()
    for i in range(400):
        buf.push(entry([float(i)], i, i + 1))
    assert len(buf) == 400


def test_push_maxlen_50_evicts_first_ten():
    buf = HistoryBuffer(maxlen=50)
    for i in range(1, 61):
        buf.push(entry([float(i)], i, i))
    assert [e.iteration for e in buf] == list(range(11, 61))


def test_push_rank_mismatch():
    buf = HistoryBuffer(rank=2)
    with pytest.raises(RankMismatch):
        buf.push(entry([1.0]))


@given(st.integers(1, 20), st.integers(0, 60))
def test_eviction_oldest_first(maxlen, n):
    buf = HistoryBuffer(maxlen=maxlen)
    for i in range(1, n + 1):
        oldest = buf[0].iteration if len(buf) == maxlen else None
        buf.push(entry([float(i)], 0.0, i))
        if oldest is not None:
            assert oldest not in [e.iteration for e in buf]
            assert min(e.iteration for e in buf) == oldest + 1
    assert len(buf) == min(maxlen, n)
    assert [e.iteration for e in buf] == list(range(max(1, n - maxlen + 1), n + 1))


def test_entry_rejects_non_finite():
    with pytest.raises(ValueError):
        entry([1.0], float("nan"))


# parsing


def test_parse_semicolons():
    got = parse_response("params[0]: 3.24; params[1]: 1.72; params[2]: 2.69", LINEAR3)
    assert got.params == (3.24, 1.72, 2.69)


def test_parse_commas_and_explanation():
    ctx = PromptContext(rank=2, mode="props-linear")
    got = parse_response("params[0]: 1.0, params[1]: 2.0\nBecause X", ctx)
    assert got.params == (1.0, 2.0)
    assert got.explanation == "Because X"


def test_parse_markdown_and_prose():
    text = ("Sure! Here is my proposal:\n**params[0]**: 3.24; `params[1]`: 1.72, PARAMS[2] = -2.69\n"
            "Explanation: moving toward the best region")
    got = parse_response(text, LINEAR3)
    assert got.params == (3.24, 1.72, -2.69)
    assert got.explanation == "moving toward the best region"


def test_parse_missing_index():
    with pytest.raises(MissingIndex) as exc:
        parse_response("params[0]: 1; params[1]: 2", LINEAR3)
    assert exc.value.index == 2


def test_parse_duplicates():
    ok = parse_response("params[0]: 1; params[0]: 1; params[1]: 2; params[2]: 3", LINEAR3)
    assert ok.params == (1.0, 2.0, 3.0)
    with pytest.raises(DuplicateIndex):
        parse_response("params[0]: 1; params[0]: 4; params[1]: 2; params[2]: 3", LINEAR3)


def test_parse_non_numeric():
    with pytest.raises(NonNumericValue):
        parse_response("params[0]: abc; params[1]: 2; params[2]: 3", LINEAR3)


def test_parse_index_out_of_range():
    with pytest.raises(ResponseParseError):
        parse_response("params[0]: 1; params[1]: 2; params[2]: 3; params[3]: 4", LINEAR3)


def test_parse_tabular():
    assert parse_response("params[0]: 0, params[1]: 3, params[2]: 2.0, params[3]: 1", TAB4).params == (0, 3, 2, 1)
    with pytest.raises(IllegalTabularAction):
        parse_response("params[0]: 0, params[1]: 4, params[2]: 2, params[3]: 1", TAB4)
    with pytest.raises(IllegalTabularAction):
        parse_response("params[0]: 0, params[1]: 1.5, params[2]: 2, params[3]: 1", TAB4)


def test_parse_range_violation_is_flagged_not_clipped():
    got = parse_response("params[0]: -10.7; params[1]: 0; params[2]: 0", LINEAR3)
    assert got.params[0] == -10.7 and got.range_violation


@given(st.lists(st.floats(-6, 6, allow_nan=False), min_size=3, max_size=3), st.sampled_from(["; ", ", "]))
def test_parse_round_trip(values, sep):
    text = sep.join(f"params[{i}]: {v:.1f}" for i, v in enumerate(values)) + "\nreason"
    assert parse_response(text, LINEAR3).params == tuple(float(f"{v:.1f}") for v in values)
