"""Orderings on regions and configurations, and upward-closed set bases.

Two region orderings matter: the general one (bigger region = same region
plus any extra tokens) and the free one (extra tokens only in zero-cost
places). Configurations pair a region with a remaining cost budget; more
budget can only help, so budgets compare with <=. Upward-closed sets are
represented by their finite antichains of minimal elements.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Iterable

from .model import PTPN
from .regions import OMEGA, Region, mset, mset_leq, mset_sub, region_from_json, region_to_json


class Ordering(Enum):
    ALL = "all"
    FREE = "free"


@dataclass(frozen=True)
class Configuration:
    region: Region
    budget: int

    def key(self) -> tuple:
        return (self.budget, self.region.key())


@dataclass(frozen=True)
class Basis:
    """Finite antichain representing the upward closure of its elements."""

    elements: tuple[Configuration, ...]
    ordering: Ordering

    def __len__(self) -> int:
        return len(self.elements)


def _all_free(net: PTPN, tokens: Iterable) -> bool:
    return all(net.place_cost(p) == 0 for p, _ in tokens)


def region_embeds(net: PTPN, r1: Region, r2: Region, ordering: Ordering) -> bool:
    """Can ``r2`` be obtained from ``r1`` by adding tokens?

    Both multiset words must embed order-preservingly with multiset
    inclusion at matched positions and the zero classes must be included.
    Under the free ordering every token of ``r2`` outside the embedded image
    must sit in a place of cost 0.
    """
    if not _counts_fit(net, r1, r2, ordering):
        return False
    return _region_embeds_cached(net, r1, r2, ordering)


def _counts_fit(net: PTPN, r1: Region, r2: Region, ordering: Ordering) -> bool:
    """Cheap necessary condition: per-place token counts must allow embedding."""
    if r1.size() > r2.size():
        return False
    c1 = r1.place_counts()
    c2 = r2.place_counts()
    for p, n in c1.items():
        if n > c2.get(p, 0):
            return False
    if ordering is Ordering.FREE:
        for p, n in c2.items():
            if n != c1.get(p, 0) and net.place_cost(p) > 0:
                return False
    return True


@lru_cache(maxsize=1 << 18)
def _region_embeds_cached(net: PTPN, r1: Region, r2: Region, ordering: Ordering) -> bool:
    if not mset_leq(r1.zero, r2.zero):
        return False
    free = ordering is Ordering.FREE
    if free and not _all_free(net, mset_sub(r2.zero, r1.zero)):
        return False

    def word_embeds(u, w) -> bool:
        m, n = len(u), len(w)

        def skip(j: int) -> bool:
            return not free or _all_free(net, w[j])

        # memo[i][j]: can u[i:] embed into w[j:]
        memo: dict[tuple[int, int], bool] = {}

        def go(i: int, j: int) -> bool:
            if i == m:
                return all(skip(k) for k in range(j, n))
            if n - j < m - i:
                return False
            key = (i, j)
            if key not in memo:
                ok = False
                if mset_leq(u[i], w[j]) and (
                    not free or _all_free(net, mset_sub(w[j], u[i]))
                ):
                    ok = go(i + 1, j + 1)
                if not ok and skip(j):
                    ok = go(i, j + 1)
                memo[key] = ok
            return memo[key]

        return go(0, 0)

    return word_embeds(r1.high, r2.high) and word_embeds(r1.low, r2.low)


def config_leq(net: PTPN, c1: Configuration, c2: Configuration, ordering: Ordering) -> bool:
    if c1.budget > c2.budget:
        return False
    if not _counts_fit(net, c1.region, c2.region, ordering):
        return False
    return _region_embeds_cached(net, c1.region, c2.region, ordering)


def minimize(net: PTPN, configs: Iterable[Configuration], ordering: Ordering) -> Basis:
    """Antichain of minimal elements; same upward closure as the input."""
    kept: list[Configuration] = []
    for c in sorted(set(configs), key=Configuration.key):
        if any(config_leq(net, k, c, ordering) for k in kept):
            continue
        kept = [k for k in kept if not config_leq(net, c, k, ordering)]
        kept.append(c)
    return Basis(tuple(sorted(kept, key=Configuration.key)), ordering)


def member_upward(net: PTPN, c: Configuration, basis: Basis) -> bool:
    """Is ``c`` in the upward closure represented by ``basis``?"""
    return any(config_leq(net, b, c, basis.ordering) for b in basis.elements)


def insert_token_everywhere(region: Region, token: tuple[int, int]) -> set[Region]:
    """All regions obtained by adding one token at some position."""
    out = {Region(region.high, mset(region.zero + (token,)), region.low)}
    for attr in ("high", "low"):
        word = getattr(region, attr)
        for i in range(len(word)):
            joined = word[:i] + (mset(word[i] + (token,)),) + word[i + 1 :]
            out.add(Region(**{**_parts(region), attr: joined}))
        for gap in range(len(word) + 1):
            fresh = word[:gap] + ((token,),) + word[gap:]
            out.add(Region(**{**_parts(region), attr: fresh}))
    return out


def _parts(region: Region) -> dict:
    return {"high": region.high, "zero": region.zero, "low": region.low}


def _cost_token_count(net: PTPN, region: Region) -> int:
    return sum(1 for p, _ in region.tokens() if net.place_cost(p) > 0)


def cost_pad(net: PTPN, c: Configuration) -> set[Configuration]:
    """Intersect the upward closure of ``c`` with the budget-bounded core set.

    The core set holds configurations whose regions contain only cost-place
    tokens, fewer of them than the budget. The result is the free-minimal
    basis of everything above ``c`` whose cost-token count stays below
    ``c.budget``: ``c`` itself plus every way of adding cost-place tokens
    while the count bound holds, or nothing when ``c`` already exceeds it.
    """
    bound = c.budget
    if _cost_token_count(net, c.region) >= bound:
        return set()
    values = tuple(range(net.cmax + 1)) + (OMEGA,)
    cost_tokens = [(p, v) for p in net.cost_places() for v in values]
    regions = {c.region}
    frontier = {c.region}
    while frontier:
        nxt: set[Region] = set()
        for r in frontier:
            if _cost_token_count(net, r) + 1 >= bound:
                continue
            for tok in cost_tokens:
                nxt |= insert_token_everywhere(r, tok)
        nxt -= regions
        regions |= nxt
        frontier = nxt
    padded = {Configuration(r, c.budget) for r in regions}
    return set(minimize(net, padded, Ordering.FREE).elements)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def basis_to_json(net: PTPN, basis: Basis) -> list[dict]:
    return [
        {"region": region_to_json(net, c.region), "budget": c.budget}
        for c in basis.elements
    ]


def basis_from_json(net: PTPN, items: list[dict], ordering: Ordering) -> Basis:
    configs = [
        Configuration(region_from_json(net, item["region"]), int(item["budget"]))
        for item in items
    ]
    return Basis(tuple(sorted(configs, key=Configuration.key)), ordering)
