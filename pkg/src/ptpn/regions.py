"""Region encoding of δ-form markings and the symbolic transition relation.

A region is a three-part word of multisets over (place, value) tokens:

* ``high`` — classes with high fractional parts, increasing left to right;
* ``zero`` — the single (possibly empty) class of integer-aged tokens;
* ``low``  — classes with small positive fractional parts, increasing.

Token values are integer parts clipped at the net's ``cmax``: ages at or
beyond ``cmax + 1`` are indistinguishable by any arc interval and collapse
to the single value ``OMEGA``.

The timed behaviour is captured by four successor kinds: a small delay that
just pushes the zero class into ``low`` (type I), the landing of the highest
class on the next integer (type II), and delays close to one time unit where
a suffix of ``low`` crosses the next integer, either without landing
(type III) or with one chosen class landing exactly (type IV). Discrete
firing removes interval-compatible tokens and inserts produced tokens at
every compatible position.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterable, Iterator, Optional

from .model import Interval, PTPN, interval_contains
from .semantics import Marking, _check_delta, decompose_delta, is_delta_form

OMEGA = -1  # token value for ages >= cmax + 1; printed as "w"

Token = tuple[int, int]  # (place id, value or OMEGA)
Mset = tuple[Token, ...]  # canonically sorted
Word = tuple[Mset, ...]


def mset(tokens: Iterable[Token]) -> Mset:
    return tuple(sorted(tokens))


def mset_leq(a: Mset, b: Mset) -> bool:
    rest = list(b)
    for tok in a:
        if tok in rest:
            rest.remove(tok)
        else:
            return False
    return True


def mset_sub(a: Mset, b: Mset) -> Mset:
    rest = list(a)
    for tok in b:
        rest.remove(tok)
    return mset(rest)


@dataclass(frozen=True)
class Region:
    high: Word
    zero: Mset
    low: Word

    def __post_init__(self) -> None:
        for word in (self.high, self.low):
            for ms in word:
                if not ms:
                    raise ValueError("empty class in region word")
        # regions are hashed constantly (memo tables, bases); cache the hash
        object.__setattr__(self, "_hash", hash((self.high, self.zero, self.low)))
        counts: dict[int, int] = {}
        for p, _ in self.tokens():
            counts[p] = counts.get(p, 0) + 1
        object.__setattr__(self, "_counts", counts)
        object.__setattr__(self, "_size", sum(counts.values()))

    def __hash__(self) -> int:
        return self._hash

    @staticmethod
    def empty() -> "Region":
        return Region((), (), ())

    def tokens(self) -> Iterator[Token]:
        for ms in self.high:
            yield from ms
        yield from self.zero
        for ms in self.low:
            yield from ms

    def size(self) -> int:
        return self._size

    def count(self, pid: int) -> int:
        return self._counts.get(pid, 0)

    def place_counts(self) -> dict[int, int]:
        return self._counts

    def key(self) -> tuple:
        """Canonical total-order key (used for deterministic iteration)."""
        return (self.high, self.zero, self.low)


def value_of(age: Fraction, cmax: int) -> int:
    if age >= cmax + 1:
        return OMEGA
    return age.numerator // age.denominator


def inc_value(value: int, cmax: int) -> int:
    """Value after the token reaches its next integer age (ω-saturating)."""
    if value == OMEGA or value + 1 > cmax:
        return OMEGA
    return value + 1


def dec_values(value: int, cmax: int) -> tuple[int, ...]:
    """Preimages of ``value`` under ``inc_value``; empty for value 0."""
    if value == OMEGA:
        return (cmax, OMEGA)
    if value == 0:
        return ()
    return (value - 1,)


def inc_mset(ms: Mset, cmax: int) -> Mset:
    return mset((p, inc_value(v, cmax)) for p, v in ms)


def inc_word(word: Word, cmax: int) -> Word:
    return tuple(inc_mset(ms, cmax) for ms in word)


def dec_mset_options(ms: Mset, cmax: int) -> list[Mset]:
    """All preimage multisets of ``ms`` under token-wise increment."""
    per_token = [dec_values(v, cmax) for _, v in ms]
    if any(not opts for opts in per_token):
        return []
    places = [p for p, _ in ms]
    out = {mset(zip(places, choice)) for choice in product(*per_token)}
    return sorted(out)


def dec_word_options(word: Word, cmax: int) -> list[Word]:
    per_mset = [dec_mset_options(ms, cmax) for ms in word]
    if any(not opts for opts in per_mset):
        return []
    return [tuple(choice) for choice in product(*per_mset)]


# ---------------------------------------------------------------------------
# Satisfaction, abstraction, concretization
# ---------------------------------------------------------------------------


def class_sat(part: str, value: int, interval: Interval) -> bool:
    """Do all ages of a token class lie in ``interval``?

    ``part`` is "H", "Z" or "L". An H token with value k has ages in
    (k, k+1) arbitrarily close to k+1; an L token ages in (k, k+1)
    arbitrarily close to k; a Z token has age exactly k. ω tokens have ages
    beyond every finite bound.
    """
    if value == OMEGA:
        return interval.hi is None
    if part == "Z":
        return interval_contains(interval, value)
    if part == "L":
        return interval.lo <= value and (interval.hi is None or value < interval.hi)
    if part == "H":
        return interval.lo <= value and (interval.hi is None or value + 1 <= interval.hi)
    raise ValueError(f"bad part {part!r}")


def abstract(net: PTPN, m: Marking, delta: Fraction) -> Region:
    """Region of a δ-form marking: groups map in order to high/zero/low."""
    high, zero, low = decompose_delta(m, delta)
    cmax = net.cmax

    def conv(group: Marking) -> Mset:
        return mset((p, value_of(a, cmax)) for p, a in group.tokens)

    return Region(tuple(conv(g) for g in high), conv(zero), tuple(conv(g) for g in low))


def satisfies(net: PTPN, m: Marking, region: Region, delta: Fraction) -> bool:
    _check_delta(delta)
    return is_delta_form(m, delta) and abstract(net, m, delta) == region


def concretize(net: PTPN, region: Region, delta: Fraction) -> Marking:
    """Canonical witness marking of a region.

    Low class j of n gets fractional part δ·j/(n+1), high class i of h gets
    1 - δ·(h+1-i)/(h+1), the zero class gets 0; ω tokens get age
    cmax + 1 + fraction.
    """
    _check_delta(delta)
    cmax = net.cmax
    tokens: list[tuple[int, Fraction]] = []

    def age(value: int, frac: Fraction) -> Fraction:
        base = cmax + 1 if value == OMEGA else value
        return base + frac

    h = len(region.high)
    for i, ms in enumerate(region.high, start=1):
        frac = 1 - Fraction(delta) * (h + 1 - i) / (h + 1)
        tokens.extend((p, age(v, frac)) for p, v in ms)
    tokens.extend((p, age(v, Fraction(0))) for p, v in region.zero)
    n = len(region.low)
    for j, ms in enumerate(region.low, start=1):
        frac = Fraction(delta) * j / (n + 1)
        tokens.extend((p, age(v, frac)) for p, v in ms)
    return Marking.of(tokens)


# ---------------------------------------------------------------------------
# Timed successors
# ---------------------------------------------------------------------------


def succ_type1(region: Region) -> Optional[Region]:
    """Zero class gains a positive fractional part: Z becomes leftmost in L."""
    if not region.zero:
        return None
    return Region(region.high, (), (region.zero,) + region.low)


def succ_type2(net: PTPN, region: Region) -> Optional[Region]:
    """Highest class lands on the next integer: rightmost H moves to Z, +1."""
    if region.zero or not region.high:
        return None
    return Region(region.high[:-1], inc_mset(region.high[-1], net.cmax), region.low)


def succ_typeB(net: PTPN, region: Region, kind: str, split: int) -> Region:
    """Delay close to one time unit; ``kind`` is "III" or "IV".

    Type III: ``split`` counts the low classes that do not cross the next
    integer (0..len(low)); the rest cross and become the new low part. Type
    IV: ``split`` selects the low class (0-based) that lands exactly on the
    integer and becomes the new zero class. In both kinds high classes cross
    (values increment) and the old zero class, if any, keeps its values,
    ending up between them and the surviving low prefix.
    """
    cmax = net.cmax
    zpart = (region.zero,) if region.zero else ()
    if kind == "III":
        if not 0 <= split <= len(region.low):
            raise ValueError(f"bad type III split {split}")
        left, right = region.low[:split], region.low[split:]
        return Region(inc_word(region.high, cmax) + zpart + left, (), inc_word(right, cmax))
    if kind == "IV":
        if not 0 <= split < len(region.low):
            raise ValueError(f"bad type IV split {split}")
        left, landed, right = region.low[:split], region.low[split], region.low[split + 1 :]
        return Region(
            inc_word(region.high, cmax) + zpart + left,
            inc_mset(landed, cmax),
            inc_word(right, cmax),
        )
    raise ValueError(f"bad kind {kind!r}")


def token_cost(net: PTPN, region: Region) -> int:
    """Cost of a one-time-unit delay: sum of place costs over all tokens."""
    return sum(net.place_cost(p) for p, _ in region.tokens())


def succ_B_all(net: PTPN, region: Region) -> list[tuple[Region, int, tuple]]:
    """All type III/IV successors with their costs and (kind, split) labels."""
    cost = token_cost(net, region)
    out = []
    for split in range(len(region.low) + 1):
        out.append((succ_typeB(net, region, "III", split), cost, ("type3", split)))
    for split in range(len(region.low)):
        out.append((succ_typeB(net, region, "IV", split), cost, ("type4", split)))
    return out


# ---------------------------------------------------------------------------
# Discrete successors
# ---------------------------------------------------------------------------

# A produced-token slot in a firing plan. Origins in plan words are the
# index of the surviving source class, or None for a freshly created class.
PlanWord = tuple[tuple[Mset, Optional[int]], ...]


@dataclass(frozen=True)
class FiringOutcome:
    region: Region
    consumed: tuple[tuple[str, int, Token], ...]  # (part, class index, token)
    high_plan: PlanWord
    zero_added: Mset
    low_plan: PlanWord


def _value_domain(cmax: int) -> tuple[int, ...]:
    return tuple(range(cmax + 1)) + (OMEGA,)


def _consumption_choices(region: Region, arcs):
    """Ways to delete one interval-compatible token per input arc."""
    positions: list[tuple[str, int, Token]] = []
    for i, ms in enumerate(region.high):
        positions.extend(("H", i, tok) for tok in set(ms))
    positions.extend(("Z", -1, tok) for tok in set(region.zero))
    for i, ms in enumerate(region.low):
        positions.extend(("L", i, tok) for tok in set(ms))

    def counts(region_part: str, idx: int) -> Mset:
        if region_part == "H":
            return region.high[idx]
        if region_part == "Z":
            return region.zero
        return region.low[idx]

    results: set[tuple] = set()

    def pick(arc_idx: int, chosen: tuple):
        if arc_idx == len(arcs):
            results.add(tuple(sorted(chosen)))
            return
        pid, interval = arcs[arc_idx]
        for part, idx, tok in positions:
            if tok[0] != pid or not class_sat(part, tok[1], interval):
                continue
            used = sum(1 for c in chosen if c[:2] == (part, idx) and c[2] == tok)
            if used >= counts(part, idx).count(tok):
                continue
            pick(arc_idx + 1, chosen + ((part, idx, tok),))

    pick(0, ())
    return sorted(results)


def _apply_consumption(region: Region, consumed) -> tuple[PlanWord, Mset, PlanWord]:
    """Remove consumed tokens; keep surviving classes with their origins."""
    high = [list(ms) for ms in region.high]
    zero = list(region.zero)
    low = [list(ms) for ms in region.low]
    for part, idx, tok in consumed:
        (high[idx] if part == "H" else zero if part == "Z" else low[idx]).remove(tok)
    hp = tuple((mset(ms), i) for i, ms in enumerate(high) if ms)
    lp = tuple((mset(ms), i) for i, ms in enumerate(low) if ms)
    return hp, mset(zero), lp


def _insertion_choices(
    hp: PlanWord, zadd: Mset, lp: PlanWord, arcs, cmax: int
) -> Iterator[tuple[PlanWord, Mset, PlanWord]]:
    """Insert one token per arc: into Z, into any class, or as a new class."""
    if not arcs:
        yield hp, zadd, lp
        return
    (pid, interval), rest = arcs[0], arcs[1:]
    seen: set[tuple] = set()

    def emit(h: PlanWord, z: Mset, low: PlanWord):
        state = (h, z, low)
        if state not in seen:
            seen.add(state)
            yield from _insertion_choices(h, z, low, rest, cmax)

    for v in _value_domain(cmax):
        tok = (pid, v)
        if class_sat("Z", v, interval):
            yield from emit(hp, mset(zadd + (tok,)), lp)
        for part in ("H", "L"):
            if not class_sat(part, v, interval):
                continue
            target = hp if part == "H" else lp
            for i in range(len(target)):
                joined = target[:i] + ((mset(target[i][0] + (tok,)), target[i][1]),) + target[i + 1 :]
                yield from emit(
                    joined if part == "H" else hp, zadd, joined if part == "L" else lp
                )
            for gap in range(len(target) + 1):
                fresh = target[:gap] + (((tok,), None),) + target[gap:]
                yield from emit(
                    fresh if part == "H" else hp, zadd, fresh if part == "L" else lp
                )


def fire_region_outcomes(net: PTPN, region: Region, tid: int) -> list[FiringOutcome]:
    """All symbolic firings of transition ``tid`` with full placement plans."""
    tr = net.transitions[tid]
    cmax = net.cmax
    outcomes: dict[Region, FiringOutcome] = {}
    for consumed in _consumption_choices(region, tr.inputs):
        hp0, zero_rest, lp0 = _apply_consumption(region, consumed)
        for hp, zadd, lp in _insertion_choices(hp0, (), lp0, tr.outputs, cmax):
            result = Region(
                tuple(ms for ms, _ in hp),
                mset(zero_rest + zadd),
                tuple(ms for ms, _ in lp),
            )
            outcomes.setdefault(
                result, FiringOutcome(result, consumed, hp, zadd, lp)
            )
    return [outcomes[k] for k in sorted(outcomes, key=Region.key)]


def fire_region(net: PTPN, region: Region, tid: int) -> set[Region]:
    """Regions reachable by firing ``tid``; empty when not symbolically enabled."""
    return {o.region for o in fire_region_outcomes(net, region, tid)}


def succ_A_labeled(net: PTPN, region: Region) -> list[tuple[Region, int, tuple]]:
    """Type I, type II and discrete successors with costs and labels."""
    out: list[tuple[Region, int, tuple]] = []
    s1 = succ_type1(region)
    if s1 is not None:
        out.append((s1, 0, ("type1",)))
    s2 = succ_type2(net, region)
    if s2 is not None:
        out.append((s2, 0, ("type2",)))
    for tr in net.transitions:
        for o in fire_region_outcomes(net, region, tr.id):
            out.append((o.region, tr.cost, ("fire", tr.id)))
    return out


def succ_A(net: PTPN, region: Region) -> set[tuple[Region, int]]:
    return {(r, c) for r, c, _ in succ_A_labeled(net, region)}


# ---------------------------------------------------------------------------
# Literals
# ---------------------------------------------------------------------------

_MSET_RE = re.compile(r"\{([^{}]*)\}")


def _mset_literal(net: PTPN, ms: Mset) -> str:
    items = ", ".join(
        f"{net.places[p].name}:{'w' if v == OMEGA else v}" for p, v in ms
    )
    return "{" + items + "}"


def region_to_literal(net: PTPN, region: Region) -> str:
    h = " ".join(_mset_literal(net, ms) for ms in region.high)
    l = " ".join(_mset_literal(net, ms) for ms in region.low)
    return f"H: [{h}] | Z: {_mset_literal(net, region.zero)} | L: [{l}]"


def _parse_mset(net: PTPN, text: str) -> Mset:
    toks = []
    text = text.strip()
    if text:
        for item in text.split(","):
            name, _, val = item.strip().partition(":")
            if not val:
                raise ValueError(f"bad region token {item!r}")
            val = val.strip()
            value = OMEGA if val == "w" else int(val)
            toks.append((net.place_named(name.strip()).id, value))
    return mset(toks)


def region_from_literal(net: PTPN, text: str) -> Region:
    m = re.match(r"\s*H:\s*\[(.*)\]\s*\|\s*Z:\s*\{(.*)\}\s*\|\s*L:\s*\[(.*)\]\s*$", text)
    if m is None:
        raise ValueError(f"bad region literal {text!r}")
    h_text, z_text, l_text = m.groups()

    def word(src: str) -> Word:
        return tuple(_parse_mset(net, inner) for inner in _MSET_RE.findall(src))

    return Region(word(h_text), _parse_mset(net, z_text), word(l_text))


def region_to_json(net: PTPN, region: Region) -> dict:
    def enc(ms: Mset) -> list[dict]:
        return [
            {"place": net.places[p].name, "value": "w" if v == OMEGA else v}
            for p, v in ms
        ]

    return {
        "h": [enc(ms) for ms in region.high],
        "z": enc(region.zero),
        "l": [enc(ms) for ms in region.low],
    }


def region_from_json(net: PTPN, obj: dict) -> Region:
    def dec(items: list[dict]) -> Mset:
        return mset(
            (
                net.place_named(item["place"]).id,
                OMEGA if item["value"] == "w" else int(item["value"]),
            )
            for item in items
        )

    return Region(
        tuple(dec(ms) for ms in obj["h"]),
        dec(obj["z"]),
        tuple(dec(ms) for ms in obj["l"]),
    )
