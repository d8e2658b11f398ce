"""Net model for priced timed Petri nets.

A net is a set of places with per-token storage costs and a set of
transitions with firing costs. Every arc carries an age interval with
natural bounds (the upper bound may be unbounded). Token ages themselves
are nonnegative rationals; intervals only ever test membership.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Optional


class ModelError(ValueError):
    """Raised when a net or one of its components violates an invariant."""


@dataclass(frozen=True)
class Interval:
    """Age interval with natural endpoints; ``hi is None`` means unbounded."""

    lo: int
    hi: Optional[int]
    lo_closed: bool
    hi_closed: bool

    def __post_init__(self) -> None:
        if self.lo < 0 or (self.hi is not None and self.hi < 0):
            raise ModelError(f"negative interval bound in {self.text()}")
        if self.hi is None and self.hi_closed:
            raise ModelError("unbounded interval cannot be right-closed")
        if self.is_empty():
            raise ModelError(f"empty interval {self.text()}")

    def is_empty(self) -> bool:
        if self.hi is None:
            return False
        if self.lo < self.hi:
            return False
        return not (self.lo == self.hi and self.lo_closed and self.hi_closed)

    def text(self) -> str:
        left = "[" if self.lo_closed else "("
        right = "]" if self.hi_closed else ")"
        hi = "inf" if self.hi is None else str(self.hi)
        return f"{left}{self.lo},{hi}{right}"


def interval_contains(interval: Interval, age: Fraction | int) -> bool:
    """Membership test respecting open/closed ends; no upper bound if hi is ∞."""
    if interval.lo_closed:
        if age < interval.lo:
            return False
    elif age <= interval.lo:
        return False
    if interval.hi is None:
        return True
    if interval.hi_closed:
        return age <= interval.hi
    return age < interval.hi


@dataclass(frozen=True)
class Place:
    id: int
    name: str
    cost: int

    def __post_init__(self) -> None:
        if self.cost < 0:
            raise ModelError(f"place {self.name}: negative cost")


@dataclass(frozen=True)
class Transition:
    """Transition with multisets of interval-labeled input and output arcs.

    ``inputs`` and ``outputs`` are tuples of (place id, interval); the same
    pair may occur several times (arcs form a multiset).
    """

    id: int
    name: str
    cost: int
    inputs: tuple[tuple[int, Interval], ...]
    outputs: tuple[tuple[int, Interval], ...]

    def __post_init__(self) -> None:
        if self.cost < 0:
            raise ModelError(f"transition {self.name}: negative cost")


@dataclass(frozen=True)
class PTPN:
    places: tuple[Place, ...]
    transitions: tuple[Transition, ...]

    def __hash__(self) -> int:
        # nets key memo tables; hashing the full structure every time is hot
        return self._hash

    def __post_init__(self) -> None:
        if not self.places:
            raise ModelError("net has no places")
        object.__setattr__(self, "_hash", hash((self.places, self.transitions)))
        names: set[str] = set()
        for i, place in enumerate(self.places):
            if place.id != i:
                raise ModelError(f"place {place.name}: id {place.id} is not dense")
            if place.name in names:
                raise ModelError(f"duplicate name {place.name}")
            names.add(place.name)
        for i, tr in enumerate(self.transitions):
            if tr.id != i:
                raise ModelError(f"transition {tr.name}: id {tr.id} is not dense")
            if tr.name in names:
                raise ModelError(f"duplicate name {tr.name}")
            names.add(tr.name)
            for pid, _ in tr.inputs + tr.outputs:
                if not 0 <= pid < len(self.places):
                    raise ModelError(f"transition {tr.name}: unknown place id {pid}")

    @cached_property
    def cmax(self) -> int:
        """Maximum finite endpoint over all arc intervals, 0 for arcless nets."""
        best = 0
        for tr in self.transitions:
            for _, interval in tr.inputs + tr.outputs:
                best = max(best, interval.lo)
                if interval.hi is not None:
                    best = max(best, interval.hi)
        return best

    @cached_property
    def _place_index(self) -> dict[str, int]:
        return {p.name: p.id for p in self.places}

    def place_named(self, name: str) -> Place:
        try:
            return self.places[self._place_index[name]]
        except KeyError:
            raise ModelError(f"unknown place {name!r}") from None

    def transition_named(self, name: str) -> Transition:
        for tr in self.transitions:
            if tr.name == name:
                return tr
        raise ModelError(f"unknown transition {name!r}")

    def place_cost(self, pid: int) -> int:
        return self.places[pid].cost

    def free_places(self) -> tuple[int, ...]:
        """Places with storage cost 0."""
        return tuple(p.id for p in self.places if p.cost == 0)

    def cost_places(self) -> tuple[int, ...]:
        return tuple(p.id for p in self.places if p.cost > 0)


def cmax(net: PTPN) -> int:
    return net.cmax
