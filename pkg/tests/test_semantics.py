from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ptpn.semantics import (
    Computation,
    Delay,
    Fire,
    Marking,
    ReplayError,
    StepError,
    decompose_delta,
    delay_step,
    enabled_bindings,
    fire_step,
    fitting_delta,
    is_delta_computation,
    is_delta_form,
    is_detailed_delay,
    parse_marking,
    format_marking,
    run,
    split_delay,
    storage_rate,
)

# ---------------------------------------------------------------------------
# storage rate and delays
# ---------------------------------------------------------------------------


def test_storage_rate_worked_example(main):
    m = parse_marking(main, "white:2.4, blue:5.4, blue:3.1")
    assert storage_rate(main, m) == 1


def test_storage_rate_empty(main):
    assert storage_rate(main, Marking.of([])) == 0


def test_storage_rate_figure_marking(main):
    m = parse_marking(main, "red:7.93, red:1.08, white:2.32, blue:2.11, green:0.25, green:8.36, orange:4.21")
    assert storage_rate(main, m) == 3 * 2 + 1 + 0 + 2 * 2 + 0 == 11


def test_delay_step_pays_rate_times_duration(main):
    m = parse_marking(main, "white:2.4, blue:5.4, blue:3.1")
    m2, cost = delay_step(main, m, F(3, 2))
    assert cost == F(3, 2)
    assert m2 == parse_marking(main, "white:3.9, blue:6.9, blue:4.6")


def test_delay_step_simple(simple):
    m2, cost = delay_step(simple, parse_marking(simple, "red:0"), F(101, 100))
    assert cost == F(101, 100)
    assert m2 == parse_marking(simple, "red:101/100")


def test_delay_step_empty(main):
    m2, cost = delay_step(main, Marking.of([]), F(7))
    assert m2 == Marking.of([]) and cost == 0


def test_delay_step_rejects_nonpositive(main):
    with pytest.raises(StepError):
        delay_step(main, Marking.of([]), F(0))


@given(
    a=st.integers(1, 50),
    b=st.integers(1, 50),
    ages=st.lists(st.integers(0, 40), max_size=5),
)
def test_delay_additivity(main, a, b, ages):
    m = Marking.of([(i % 5, F(age, 7)) for i, age in enumerate(ages)])
    da, db = F(a, 13), F(b, 13)
    one, cost_one = delay_step(main, m, da + db)
    mid, cost_1 = delay_step(main, m, da)
    two, cost_2 = delay_step(main, mid, db)
    assert one == two
    assert cost_one == cost_1 + cost_2


# ---------------------------------------------------------------------------
# firing
# ---------------------------------------------------------------------------


def test_enabled_bindings_single(main):
    m = parse_marking(main, "red:2.0, blue:6.9")
    assert enabled_bindings(main, m, 0) == {parse_marking(main, "red:2")}


def test_enabled_bindings_age_outside(main):
    assert enabled_bindings(main, parse_marking(main, "red:0.5"), 0) == set()


def test_enabled_bindings_two_choices(main):
    m = parse_marking(main, "red:1.0, red:2.5")
    assert enabled_bindings(main, m, 0) == {
        parse_marking(main, "red:1"),
        parse_marking(main, "red:2.5"),
    }


def test_fire_step_worked_example(main):
    m = parse_marking(main, "red:2.0, blue:6.9")
    m2, cost = fire_step(
        main,
        m,
        0,
        parse_marking(main, "red:2"),
        parse_marking(main, "white:0.8, blue:3.1"),
    )
    assert cost == 2
    assert m2 == parse_marking(main, "white:0.8, blue:6.9, blue:3.1")


def test_fire_step_simple(simple):
    m2, cost = fire_step(
        simple,
        parse_marking(simple, "red:3/2"),
        0,
        parse_marking(simple, "red:3/2"),
        parse_marking(simple, "blue:0"),
    )
    assert cost == 0 and m2 == parse_marking(simple, "blue:0")


def test_fire_step_produced_out_of_interval(main):
    m = parse_marking(main, "red:2.0")
    with pytest.raises(StepError, match="produced-age-out-of-interval"):
        fire_step(
            main,
            m,
            0,
            parse_marking(main, "red:2"),
            parse_marking(main, "white:1.0, blue:3"),
        )


def test_fire_step_not_enabled(main):
    with pytest.raises(StepError, match="binding-not-enabled"):
        fire_step(
            main,
            parse_marking(main, "red:0.5"),
            0,
            parse_marking(main, "red:0.5"),
            parse_marking(main, "white:0.5, blue:3"),
        )


def test_fire_step_conserves_counts(main):
    m = parse_marking(main, "red:2.0, blue:6.9")
    m2, _ = fire_step(
        main, m, 0, parse_marking(main, "red:2"), parse_marking(main, "white:0.5, blue:3")
    )
    t = main.transitions[0]
    assert len(m2) == len(m) - len(t.inputs) + len(t.outputs)


# ---------------------------------------------------------------------------
# replay
# ---------------------------------------------------------------------------


def test_run_pi_total(main, pi_trace):
    result = run(main, pi_trace)
    assert result.total_cost == F(289, 10)
    assert result.guard_violations == ()
    assert len(pi_trace.steps) == 12
    assert result.final == parse_marking(main, "red:3/2, blue:28/5")


def test_run_delta_figure_total(main, delta_trace):
    result = run(main, delta_trace)
    assert result.total_cost == F(2009, 100)
    assert sum(result.step_costs, F(0)) == result.total_cost
    # This trace strays outside three arc intervals; the replay reports
    # them but still accounts every step cost.
    assert len(result.guard_violations) == 3


def test_run_empty(main):
    init = parse_marking(main, "red:0")
    result = run(main, Computation(init, ()))
    assert result.final == init and result.total_cost == 0


def test_run_structural_failure_indexed(main):
    comp = Computation(
        parse_marking(main, "red:0"),
        (Delay(F(1)), Fire(0, parse_marking(main, "red:2"), parse_marking(main, "white:0.5, blue:3"))),
    )
    with pytest.raises(ReplayError) as info:
        run(main, comp)
    assert info.value.index == 1


# ---------------------------------------------------------------------------
# δ-form toolkit
# ---------------------------------------------------------------------------


def test_delta_form_figure(delta_marking):
    assert is_delta_form(delta_marking, F(1, 5) - F(1, 1000))
    assert is_delta_form(delta_marking, F("0.15"))


def test_delta_form_half_fraction(main):
    assert not is_delta_form(parse_marking(main, "red:0.5"), F("0.15"))


def test_delta_form_m5(m5):
    assert is_delta_form(m5, F(1, 10))


def test_fitting_delta(m5, main):
    d = fitting_delta(m5)
    assert d is not None and is_delta_form(m5, d)
    assert fitting_delta(parse_marking(main, "red:0.5")) is None


def test_decompose_figure_groups(main, delta_marking):
    high, zero, low = decompose_delta(delta_marking, F("0.15"))
    def fracs(group):
        return sorted(a - int(a) for _, a in group.tokens)
    assert [fracs(g) for g in high] == [[F("0.91")], [F("0.93")], [F("0.97")] * 2]
    assert fracs(zero) == [F(0), F(0)]
    assert [fracs(g) for g in low] == [[F("0.02")] * 3, [F("0.03")], [F("0.06")]]


def test_decompose_single_token(main):
    high, zero, low = decompose_delta(parse_marking(main, "red:5"), F(1, 10))
    assert high == () and low == ()
    assert zero == parse_marking(main, "red:5")


def test_decompose_m5_matches_region_shape(m5):
    high, zero, low = decompose_delta(m5, F(1, 10))
    assert (len(high), len(zero), len(low)) == (3, 2, 3)
    assert [len(g) for g in high] == [2, 1, 2]
    assert [len(g) for g in low] == [2, 1, 1]


def test_decompose_is_partition(m5):
    high, zero, low = decompose_delta(m5, F(1, 10))
    rebuilt = Marking.of(
        [tok for g in high for tok in g.tokens]
        + list(zero.tokens)
        + [tok for g in low for tok in g.tokens]
    )
    assert rebuilt == m5


def test_decompose_requires_delta_form(main):
    with pytest.raises(ValueError):
        decompose_delta(parse_marking(main, "red:0.5"), F(1, 10))


def test_detailed_delay_landing(main):
    # A marking whose highest fractional class (.98) is about to land.
    m = parse_marking(
        main,
        "green:1.92, red:7.94, white:0.98, orange:1.98, white:2.01, blue:8.01, "
        "red:2.03, green:4.03, orange:4.03, orange:2.04, red:1.07",
    )
    assert is_detailed_delay(m, F(1, 50))
    assert not is_detailed_delay(m, F(1))


def test_detailed_delay_empty(main):
    assert is_detailed_delay(Marking.of([]), F(5))


def test_split_delay_single_token(simple):
    m = parse_marking(simple, "red:0")
    parts = split_delay(m, F(3))
    assert sum(parts) == 3
    cur = m
    for d in parts:
        assert is_detailed_delay(cur, d)
        cur = cur.aged(d)


def test_split_delay_empty(simple):
    assert split_delay(Marking.of([]), F(5)) == [F(5)]


def test_split_delay_m5(m5, main):
    parts = split_delay(m5, F(1))
    assert sum(parts) == 1
    # partial sums must include every class's crossing instant
    crossings = sorted({1 - (a - int(a)) for _, a in m5.tokens if a != int(a)})
    sums = []
    acc = F(0)
    for d in parts:
        acc += d
        sums.append(acc)
    assert set(crossings) <= set(sums)
    cur = m5
    total_direct = F(0)
    for d in parts:
        assert is_detailed_delay(cur, d)
        m2, c = delay_step(main, cur, d)
        cur, total_direct = m2, total_direct + c
    direct, cost = delay_step(main, m5, F(1))
    assert cur == direct and total_direct == cost


def test_delta_computation_figure(main, delta_trace):
    assert is_delta_computation(main, delta_trace, F(1, 20))


def test_delta_computation_pi_fails(main, pi_trace):
    assert not is_delta_computation(main, pi_trace, F(1, 20))


def test_delta_computation_empty(main):
    assert is_delta_computation(main, Computation(Marking.of([]), ()), F(1, 20))


def test_marking_literal_roundtrip(main):
    text = "red:0, blue:7/2"
    m = parse_marking(main, text)
    assert parse_marking(main, format_marking(main, m)) == m
