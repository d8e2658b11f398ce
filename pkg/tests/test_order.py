import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ptpn.order import (
    Basis,
    Configuration,
    Ordering,
    basis_from_json,
    basis_to_json,
    config_leq,
    cost_pad,
    member_upward,
    minimize,
    region_embeds,
)
from ptpn.regions import OMEGA, Region, mset

from oracle import all_regions
from test_regions import regions

RED, WHITE, BLUE, GREEN, ORANGE = range(5)


def cfg(region: Region, budget: int = 0) -> Configuration:
    return Configuration(region, budget)


# ---------------------------------------------------------------------------
# embeddings
# ---------------------------------------------------------------------------


@given(regions())
@settings(max_examples=60, deadline=None)
def test_embeds_reflexive(main, region):
    assert region_embeds(main, region, region, Ordering.ALL)
    assert region_embeds(main, region, region, Ordering.FREE)


def test_embeds_figure_pair_free(main):
    left = Region(
        (mset([(RED, 6), (GREEN, 4)]), mset([(WHITE, 1), (ORANGE, 2)])),
        mset([(BLUE, 1), (RED, 2)]),
        (mset([(GREEN, OMEGA)]), mset([(WHITE, 4)]), mset([(RED, 3)])),
    )
    right = Region(
        (mset([(RED, 6), (GREEN, 4)]), mset([(BLUE, 0)]), mset([(WHITE, 1), (ORANGE, 2)])),
        mset([(BLUE, 1), (RED, 2)]),
        (mset([(ORANGE, 2), (GREEN, OMEGA)]), mset([(WHITE, 4)]), mset([(RED, 3)])),
    )
    # the added tokens (blue:0 and orange:2) sit in storage-free places
    assert region_embeds(main, left, right, Ordering.FREE)
    assert region_embeds(main, left, right, Ordering.ALL)
    assert not region_embeds(main, right, left, Ordering.ALL)


def test_embeds_cost_token_free_vs_all(main):
    one = Region((), (), (mset([(RED, 3)]),))
    two = Region((), (), (mset([(RED, 3)]), mset([(RED, 3)])))
    assert region_embeds(main, one, two, Ordering.ALL)
    assert not region_embeds(main, one, two, Ordering.FREE)


def test_embeds_word_order_matters(main):
    ab = Region((), (), (mset([(RED, 1)]), mset([(RED, 2)])))
    ba = Region((), (), (mset([(RED, 2)]), mset([(RED, 1)])))
    assert not region_embeds(main, ab, ba, Ordering.ALL)
    assert not region_embeds(main, ba, ab, Ordering.ALL)


@given(regions(max_tokens=3), regions(max_tokens=3))
@settings(max_examples=100, deadline=None)
def test_free_implies_all(main, r1, r2):
    if region_embeds(main, r1, r2, Ordering.FREE):
        assert region_embeds(main, r1, r2, Ordering.ALL)


@given(regions(max_tokens=2), regions(max_tokens=3), regions(max_tokens=4))
@settings(max_examples=100, deadline=None)
def test_transitivity(main, r1, r2, r3):
    for ordering in Ordering:
        if region_embeds(main, r1, r2, ordering) and region_embeds(main, r2, r3, ordering):
            assert region_embeds(main, r1, r3, ordering)


@given(regions(max_tokens=3), regions(max_tokens=3))
@settings(max_examples=100, deadline=None)
def test_antisymmetry(main, r1, r2):
    for ordering in Ordering:
        if region_embeds(main, r1, r2, ordering) and region_embeds(main, r2, r1, ordering):
            assert r1 == r2


# ---------------------------------------------------------------------------
# configurations, minimization, membership
# ---------------------------------------------------------------------------


def test_config_leq_budgets(main, r4):
    assert config_leq(main, cfg(r4, 2), cfg(r4, 5), Ordering.ALL)
    assert config_leq(main, cfg(r4, 2), cfg(r4, 2), Ordering.ALL)
    assert not config_leq(main, cfg(r4, 5), cfg(r4, 2), Ordering.ALL)


def test_config_leq_needs_both(simple):
    small = Region((), (), (mset([(0, 1)]),))
    large = Region((), (), (mset([(0, 1)]), mset([(0, 1)])))
    assert not config_leq(simple, cfg(large, 0), cfg(small, 5), Ordering.ALL)
    assert not config_leq(simple, cfg(small, 5), cfg(large, 3), Ordering.ALL)
    assert config_leq(simple, cfg(small, 3), cfg(large, 5), Ordering.ALL)


def test_minimize_dedup(main, r4):
    basis = minimize(main, [cfg(r4, 1), cfg(r4, 1)], Ordering.ALL)
    assert basis.elements == (cfg(r4, 1),)


def test_minimize_drops_dominated(main, r4):
    bigger = Region(r4.high, mset(r4.zero + ((RED, 0),)), r4.low)
    basis = minimize(main, [cfg(bigger, 3), cfg(r4, 1)], Ordering.ALL)
    assert basis.elements == (cfg(r4, 1),)


def test_minimize_matches_pairwise_filter(main):
    rng = random.Random(7)
    pool = all_regions(main, 2)
    chosen = [cfg(rng.choice(pool), rng.randrange(3)) for _ in range(24)]
    basis = minimize(main, chosen, Ordering.ALL)
    brute = {
        c
        for c in set(chosen)
        if not any(
            d != c and config_leq(main, d, c, Ordering.ALL) for d in set(chosen)
        )
    }
    # mutually-dominating distinct elements cannot exist (antisymmetry)
    assert set(basis.elements) == brute


def test_minimize_idempotent_and_order_insensitive(main):
    rng = random.Random(3)
    pool = all_regions(main, 2)
    chosen = [cfg(rng.choice(pool), rng.randrange(3)) for _ in range(30)]
    b1 = minimize(main, chosen, Ordering.FREE)
    b2 = minimize(main, reversed(chosen), Ordering.FREE)
    assert b1 == b2
    assert minimize(main, b1.elements, Ordering.FREE) == b1


def test_member_upward_basics(main, r4):
    single = Basis((cfg(r4, 1),), Ordering.ALL)
    assert member_upward(main, cfg(r4, 1), single)
    assert member_upward(main, cfg(r4, 3), single)
    assert not member_upward(main, cfg(r4, 0), single)
    assert not member_upward(main, cfg(r4, 1), Basis((), Ordering.ALL))


def test_member_upward_r4_red_token(main, r4):
    red_low = Basis((cfg(Region((), (), (mset([(RED, 3)]),)), 0),), Ordering.ALL)
    assert member_upward(main, cfg(r4, 15), red_low)


@given(st.data())
@settings(max_examples=40, deadline=None)
def test_member_upward_iff_some_below(main, data):
    pool = all_regions(main, 2)
    rng = random.Random(data.draw(st.integers(0, 10**6)))
    chosen = [cfg(rng.choice(pool), rng.randrange(3)) for _ in range(12)]
    probe = cfg(rng.choice(pool), rng.randrange(3))
    basis = minimize(main, chosen, Ordering.ALL)
    expected = any(config_leq(main, c, probe, Ordering.ALL) for c in chosen)
    assert member_upward(main, probe, basis) == expected


def test_wqo_smoke(main):
    rng = random.Random(11)
    pool = all_regions(main, 2)
    for ordering in Ordering:
        seen: list[Configuration] = []
        found = False
        for _ in range(10_000):
            c = cfg(rng.choice(pool), rng.randrange(4))
            if any(config_leq(main, old, c, ordering) for old in seen):
                found = True
                break
            seen.append(c)
        assert found, f"no dominating pair under {ordering}"


# ---------------------------------------------------------------------------
# cost padding
# ---------------------------------------------------------------------------


def test_cost_pad_no_room(simple):
    c = cfg(Region((), ((0, 1),), ()), 1)
    assert cost_pad(simple, c) == set()


def test_cost_pad_free_region_budget_one(main):
    c = cfg(Region((), ((BLUE, 0),), ()), 1)
    assert cost_pad(main, c) == {c}


def test_cost_pad_simple_budget_two(simple):
    c = cfg(Region.empty(), 2)
    padded = cost_pad(simple, c)
    # empty region plus every single-token placement: 2 places x 4 values x
    # 3 parts, all free-incomparable because both places cost money
    assert c in padded
    assert len(padded) == 1 + 2 * 4 * 3
    assert all(p.region.size() <= 1 for p in padded)


def test_cost_pad_closure_equals_bruteforce(simple):
    c = cfg(Region.empty(), 2)
    padded = cost_pad(simple, c)
    basis = Basis(tuple(sorted(padded, key=Configuration.key)), Ordering.FREE)
    cost_places = set(simple.cost_places())
    for region in all_regions(simple, 2):
        x = cfg(region, 2)
        in_set = region_embeds(simple, c.region, region, Ordering.ALL) and (
            sum(1 for p, _ in region.tokens() if p in cost_places) < 2
        )
        assert member_upward(simple, x, basis) == in_set, region


def test_basis_json_roundtrip(main, r4):
    basis = minimize(main, [cfg(r4, 2), cfg(Region.empty(), 1)], Ordering.FREE)
    data = basis_to_json(main, basis)
    assert basis_from_json(main, data, Ordering.FREE) == basis
