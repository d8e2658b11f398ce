"""Concrete semantics: markings, timed/discrete steps, replay, δ-form tools.

All ages, delays and costs are exact rationals (``fractions.Fraction``);
nothing here ever rounds. A marking is a finite multiset of (place, age)
tokens kept in a canonical sorted order so markings compare and hash by
value.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Optional, Sequence, Union

from .model import PTPN, Transition, interval_contains
from .netformat import format_rational, parse_rational

DELTA_SUP = Fraction(1, 5)  # admissible δ are 0 < δ < 1/5

Token = tuple[int, Fraction]


class StepError(ValueError):
    """A single step is not applicable (strict mode)."""

    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code


class ReplayError(ValueError):
    """A trace is structurally broken at a given step index."""

    def __init__(self, index: int, reason: str):
        super().__init__(f"step {index}: {reason}")
        self.index = index
        self.reason = reason


def _check_delta(delta: Fraction) -> None:
    if not 0 < delta < DELTA_SUP:
        raise ValueError(f"delta must be in (0, 1/5), got {delta}")


@dataclass(frozen=True)
class Marking:
    tokens: tuple[Token, ...]

    @staticmethod
    def of(pairs: Iterable[tuple[int, Union[Fraction, int, str]]]) -> "Marking":
        toks = tuple(sorted((pid, Fraction(age)) for pid, age in pairs))
        for pid, age in toks:
            if age < 0:
                raise ValueError(f"negative token age {age} in place {pid}")
        return Marking(toks)

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self) -> Iterator[Token]:
        return iter(self.tokens)

    def count(self, pid: int) -> int:
        return sum(1 for p, _ in self.tokens if p == pid)

    def contains(self, other: "Marking") -> bool:
        """Multiset inclusion."""
        mine = list(self.tokens)
        for tok in other.tokens:
            if tok in mine:
                mine.remove(tok)
            else:
                return False
        return True

    def add(self, other: "Marking") -> "Marking":
        return Marking(tuple(sorted(self.tokens + other.tokens)))

    def remove(self, other: "Marking") -> "Marking":
        mine = list(self.tokens)
        for tok in other.tokens:
            try:
                mine.remove(tok)
            except ValueError:
                raise StepError("binding-not-enabled", f"token {tok} not in marking") from None
        return Marking(tuple(mine))

    def aged(self, d: Fraction) -> "Marking":
        return Marking(tuple(sorted((p, a + d) for p, a in self.tokens)))


@dataclass(frozen=True)
class Delay:
    d: Fraction


@dataclass(frozen=True)
class Fire:
    transition: int
    consumed: Marking
    produced: Marking


Step = Union[Delay, Fire]


@dataclass(frozen=True)
class Computation:
    initial: Marking
    steps: tuple[Step, ...]


@dataclass(frozen=True)
class RunResult:
    final: Marking
    total_cost: Fraction
    step_costs: tuple[Fraction, ...]
    # Age-interval misses, as (step index, message). Structural problems
    # raise ReplayError instead; see `run`.
    guard_violations: tuple[tuple[int, str], ...]

    @property
    def ok(self) -> bool:
        return not self.guard_violations


def storage_rate(net: PTPN, m: Marking) -> int:
    """Cost per time unit of letting ``m`` sit still."""
    return sum(net.place_cost(p) for p, _ in m.tokens)


def delay_step(net: PTPN, m: Marking, d: Fraction) -> tuple[Marking, Fraction]:
    """Age every token by ``d`` and pay ``d x storage_rate``."""
    d = Fraction(d)
    if d <= 0:
        raise StepError("bad-delay", f"delay must be positive, got {d}")
    return m.aged(d), d * storage_rate(net, m)


def enabled_bindings(net: PTPN, m: Marking, tid: int) -> set[Marking]:
    """All multisets of tokens that can be consumed to fire transition ``tid``."""
    tr = net.transitions[tid]
    results: set[Marking] = set()

    def pick(arc_idx: int, used: list[int], chosen: list[Token]) -> None:
        if arc_idx == len(tr.inputs):
            results.add(Marking.of(chosen))
            return
        pid, interval = tr.inputs[arc_idx]
        for i, (p, age) in enumerate(m.tokens):
            if i in used or p != pid or not interval_contains(interval, age):
                continue
            pick(arc_idx + 1, used + [i], chosen + [(p, age)])

    pick(0, [], [])
    return results


def _arc_matching_ok(arcs: Sequence[tuple[int, object]], tokens: Sequence[Token]) -> bool:
    """Is there a perfect arc/token matching that respects every interval?"""

    def match(i: int, used: list[int]) -> bool:
        if i == len(arcs):
            return True
        pid, interval = arcs[i]
        for j, (p, age) in enumerate(tokens):
            if j in used or p != pid:
                continue
            if interval_contains(interval, age) and match(i + 1, used + [j]):
                return True
        return False

    return match(0, [])


def _structural_fire_check(net: PTPN, m: Marking, fire: Fire) -> Transition:
    if not 0 <= fire.transition < len(net.transitions):
        raise StepError("unknown-transition", f"no transition with id {fire.transition}")
    tr = net.transitions[fire.transition]
    for label, arcs, toks in (
        ("consumed", tr.inputs, fire.consumed),
        ("produced", tr.outputs, fire.produced),
    ):
        want: dict[int, int] = {}
        for pid, _ in arcs:
            want[pid] = want.get(pid, 0) + 1
        have: dict[int, int] = {}
        for pid, _ in toks.tokens:
            have[pid] = have.get(pid, 0) + 1
        if want != have:
            raise StepError(
                "arity-mismatch",
                f"{label} tokens {have} do not match arcs of {tr.name} {want}",
            )
    if not m.contains(fire.consumed):
        raise StepError("binding-not-enabled", f"consumed tokens not all present for {tr.name}")
    return tr


def fire_step(
    net: PTPN,
    m: Marking,
    tid: int,
    consumed: Marking,
    produced: Marking,
    check_guards: bool = True,
) -> tuple[Marking, int]:
    """Fire ``tid``: remove ``consumed``, add ``produced``, pay the firing cost.

    With ``check_guards`` every consumed age must lie in its input-arc
    interval and every produced age in its output-arc interval; violations
    raise. Structural problems (wrong arities, missing tokens) always raise.
    """
    fire = Fire(tid, consumed, produced)
    tr = _structural_fire_check(net, m, fire)
    if check_guards:
        if not _arc_matching_ok(tr.inputs, consumed.tokens):
            raise StepError(
                "binding-not-enabled", f"consumed ages violate input intervals of {tr.name}"
            )
        if not _arc_matching_ok(tr.outputs, produced.tokens):
            raise StepError(
                "produced-age-out-of-interval",
                f"produced ages violate output intervals of {tr.name}",
            )
    return m.remove(consumed).add(produced), tr.cost


def run(net: PTPN, computation: Computation) -> RunResult:
    """Replay a computation, folding the steps and summing exact costs.

    Structurally impossible steps (missing tokens, arity mismatches,
    nonpositive delays, unknown transitions) abort with ReplayError carrying
    the step index. Age-interval misses do not abort: they are collected in
    the result so the cost accounting of a complete trace is always
    reported. Use `fire_step` directly for strict single-step checking.
    """
    m = computation.initial
    costs: list[Fraction] = []
    violations: list[tuple[int, str]] = []
    for i, step in enumerate(computation.steps):
        try:
            if isinstance(step, Delay):
                m, cost = delay_step(net, m, step.d)
            else:
                tr = _structural_fire_check(net, m, step)
                if not _arc_matching_ok(tr.inputs, step.consumed.tokens):
                    violations.append((i, f"consumed ages violate input intervals of {tr.name}"))
                if not _arc_matching_ok(tr.outputs, step.produced.tokens):
                    violations.append((i, f"produced ages violate output intervals of {tr.name}"))
                m = m.remove(step.consumed).add(step.produced)
                cost = Fraction(tr.cost)
        except StepError as exc:
            raise ReplayError(i, str(exc)) from exc
        costs.append(Fraction(cost))
    return RunResult(m, sum(costs, Fraction(0)), tuple(costs), tuple(violations))


# ---------------------------------------------------------------------------
# δ-form toolkit
# ---------------------------------------------------------------------------


def _frac(age: Fraction) -> Fraction:
    return age - (age.numerator // age.denominator)


def is_delta_form(m: Marking, delta: Fraction) -> bool:
    """Every token's fractional part is below δ or above 1-δ (0 allowed)."""
    _check_delta(delta)
    return all(_frac(a) < delta or _frac(a) > 1 - delta for _, a in m.tokens)


def fitting_delta(m: Marking) -> Optional[Fraction]:
    """Some admissible δ for which ``m`` is in δ-form, or None."""
    worst = Fraction(0)
    for _, age in m.tokens:
        f = _frac(age)
        worst = max(worst, min(f, 1 - f))
    if worst >= DELTA_SUP:
        return None
    return (worst + DELTA_SUP) / 2


def decompose_delta(
    m: Marking, delta: Fraction
) -> tuple[tuple[Marking, ...], Marking, tuple[Marking, ...]]:
    """Group tokens by fractional part: high groups, the zero group, low groups.

    High groups (> 1-δ) and low groups (in (0, δ)) are ordered by increasing
    fractional part; within a group all fractional parts are equal. The
    concatenation of all groups is the input marking.
    """
    if not is_delta_form(m, delta):
        raise ValueError("marking is not in delta-form")
    groups: dict[Fraction, list[Token]] = {}
    for tok in m.tokens:
        groups.setdefault(_frac(tok[1]), []).append(tok)
    fracs = sorted(groups)
    high = tuple(Marking.of(groups[f]) for f in fracs if f > 1 - delta)
    zero = Marking.of(groups.get(Fraction(0), []))
    low = tuple(Marking.of(groups[f]) for f in fracs if 0 < f < delta)
    return high, zero, low


def is_detailed_delay(m: Marking, d: Fraction) -> bool:
    """At most one fractional-part class reaches or passes an integer in (0, d]."""
    if d <= 0:
        raise ValueError("delay must be positive")
    crossing = set()
    for _, age in m.tokens:
        f = _frac(age)
        if f > 0 and d >= 1 - f:
            crossing.add(f)
        elif f == 0 and d >= 1:
            crossing.add(f)
    return len(crossing) <= 1


def split_delay(m: Marking, d: Fraction) -> list[Fraction]:
    """Cut a delay at every integer-crossing instant of some token class.

    The returned positive delays sum to ``d``, each is detailed from its
    intermediate marking, and replaying them is cost- and marking-equivalent
    to the single delay.
    """
    d = Fraction(d)
    if d <= 0:
        raise ValueError("delay must be positive")
    instants: set[Fraction] = set()
    for _, age in m.tokens:
        f = _frac(age)
        first = Fraction(1) - f if f > 0 else Fraction(1)
        t = first
        while t < d:
            instants.add(t)
            t += 1
    bounds = [Fraction(0)] + sorted(instants) + [d]
    return [b - a for a, b in zip(bounds, bounds[1:])]


def is_delta_computation(net: PTPN, computation: Computation, delta: Fraction) -> bool:
    """Check the δ-form conditions along a trace.

    Every produced token age must be within δ of an integer, and every
    delay's fractional part must be below δ or above 1-δ. (The latter
    generalizes the single-unit delay windows so that delays slightly above
    an integer, which arise when consecutive short delays are merged, count
    as δ-delays too.) Structural replay failures propagate.
    """
    _check_delta(delta)
    run(net, computation)  # structural validation only
    for step in computation.steps:
        if isinstance(step, Delay):
            f = _frac(step.d)
            if not (f < delta or f > 1 - delta):
                return False
        else:
            for _, age in step.produced.tokens:
                f = _frac(age)
                if not (f < delta or f > 1 - delta):
                    return False
    return True


# ---------------------------------------------------------------------------
# Literals and traces
# ---------------------------------------------------------------------------


def parse_marking(net: PTPN, text: str) -> Marking:
    """Parse ``place:age`` pairs, e.g. ``red:0, blue:7/2``."""
    pairs = []
    text = text.strip()
    if text:
        for item in text.split(","):
            name, _, age = item.strip().partition(":")
            if not age:
                raise ValueError(f"bad marking item {item!r}: expected place:age")
            pairs.append((net.place_named(name.strip()).id, parse_rational(age)))
    return Marking.of(pairs)


def format_marking(net: PTPN, m: Marking) -> str:
    return ", ".join(f"{net.places[p].name}:{format_rational(a)}" for p, a in m.tokens)


def _tokens_from_json(net: PTPN, items: list[str]) -> Marking:
    return parse_marking(net, ", ".join(items))


def parse_trace(net: PTPN, text: str) -> Computation:
    """Read a JSON Lines trace.

    Each line is ``{"delay": "p/q"}`` or ``{"fire": "<t>", "consume": [...],
    "produce": [...]}`` with ages as ``place:p/q``. An optional leading
    ``{"init": [...]}`` record gives the initial marking (empty otherwise).
    """
    initial = Marking.of([])
    steps: list[Step] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValueError(f"trace line {lineno}: {exc}") from exc
        if "init" in obj:
            if steps:
                raise ValueError(f"trace line {lineno}: init record after steps")
            initial = _tokens_from_json(net, obj["init"])
        elif "delay" in obj:
            steps.append(Delay(parse_rational(str(obj["delay"]))))
        elif "fire" in obj:
            steps.append(
                Fire(
                    net.transition_named(obj["fire"]).id,
                    _tokens_from_json(net, obj.get("consume", [])),
                    _tokens_from_json(net, obj.get("produce", [])),
                )
            )
        else:
            raise ValueError(f"trace line {lineno}: expected init, delay or fire")
    return Computation(initial, tuple(steps))


def format_trace(net: PTPN, computation: Computation) -> str:
    def toks(m: Marking) -> list[str]:
        return [f"{net.places[p].name}:{format_rational(a)}" for p, a in m.tokens]

    lines = [json.dumps({"init": toks(computation.initial)})]
    for step in computation.steps:
        if isinstance(step, Delay):
            lines.append(json.dumps({"delay": format_rational(step.d)}))
        else:
            lines.append(
                json.dumps(
                    {
                        "fire": net.transitions[step.transition].name,
                        "consume": toks(step.consumed),
                        "produce": toks(step.produced),
                    }
                )
            )
    return "\n".join(lines) + "\n"
