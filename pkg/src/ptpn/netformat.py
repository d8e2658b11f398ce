"""Line-oriented text format for nets, plus exact-rational literals.

Grammar (``#`` starts a comment, blank lines are ignored)::

    place <name> cost <nat>
    transition <name> cost <nat>
      in  <place> <interval>
      out <place> <interval>

``in``/``out`` lines attach to the most recent transition. Interval syntax is
``[a,b]``, ``[a,b)``, ``(a,b]`` or ``(a,b)`` where ``b`` is a natural or
``inf`` (only with a ``)`` end).
"""

from __future__ import annotations

import re
from fractions import Fraction

from .model import Interval, ModelError, Place, PTPN, Transition

# Distinct diagnostic codes, one per error family.
SYNTAX = "syntax"
UNKNOWN_PLACE = "unknown-place"
DUPLICATE_NAME = "duplicate-name"
EMPTY_INTERVAL = "empty-interval"


class NetFormatError(ValueError):
    def __init__(self, code: str, message: str, line: int = 0, col: int = 0):
        super().__init__(f"{code} at line {line}, col {col}: {message}")
        self.code = code
        self.line = line
        self.col = col


_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_.-]*$")
_INTERVAL = re.compile(r"([\[(])\s*(\d+)\s*,\s*(\d+|inf)\s*([\])])$")


def parse_rational(text: str) -> Fraction:
    """Parse ``p/q``, a decimal, or an integer into an exact Fraction."""
    return Fraction(text.strip())


def format_rational(value: Fraction | int) -> str:
    """Canonical ``p/q`` form (plain integer when the denominator is 1)."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def parse_interval(text: str, line: int = 0, col: int = 0) -> Interval:
    m = _INTERVAL.match(text.strip())
    if m is None:
        raise NetFormatError(SYNTAX, f"bad interval {text!r}", line, col)
    left, lo, hi, right = m.groups()
    hi_val = None if hi == "inf" else int(hi)
    if hi_val is None and right == "]":
        raise NetFormatError(SYNTAX, "interval to inf must be right-open", line, col)
    try:
        return Interval(int(lo), hi_val, left == "[", right == "]")
    except ModelError as exc:
        raise NetFormatError(EMPTY_INTERVAL, str(exc), line, col) from exc


def format_interval(interval: Interval) -> str:
    return interval.text()


def parse_net(text: str) -> PTPN:
    """Parse the textual net format; inverse of :func:`serialize_net`."""
    places: list[Place] = []
    names: set[str] = set()
    # Transition rows under construction: (name, cost, inputs, outputs).
    rows: list[tuple[str, int, list, list]] = []

    def err(code: str, message: str, line: int, col: int = 1):
        raise NetFormatError(code, message, line, col)

    def check_name(name: str, line: int, col: int) -> None:
        if not _NAME.match(name):
            err(SYNTAX, f"bad name {name!r}", line, col)
        if name in names:
            err(DUPLICATE_NAME, f"duplicate name {name}", line, col)
        names.add(name)

    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].rstrip()
        if not stripped.strip():
            continue
        fields = stripped.split()
        kind = fields[0]
        if kind == "place":
            if len(fields) != 4 or fields[2] != "cost":
                err(SYNTAX, "expected 'place <name> cost <nat>'", lineno)
            check_name(fields[1], lineno, stripped.find(fields[1]) + 1)
            if not fields[3].isdigit():
                err(SYNTAX, f"bad cost {fields[3]!r}", lineno, stripped.rfind(fields[3]) + 1)
            places.append(Place(len(places), fields[1], int(fields[3])))
        elif kind == "transition":
            if len(fields) != 4 or fields[2] != "cost":
                err(SYNTAX, "expected 'transition <name> cost <nat>'", lineno)
            check_name(fields[1], lineno, stripped.find(fields[1]) + 1)
            if not fields[3].isdigit():
                err(SYNTAX, f"bad cost {fields[3]!r}", lineno, stripped.rfind(fields[3]) + 1)
            rows.append((fields[1], int(fields[3]), [], []))
        elif kind in ("in", "out"):
            if not rows:
                err(SYNTAX, f"'{kind}' arc before any transition", lineno)
            if len(fields) != 3:
                err(SYNTAX, f"expected '{kind} <place> <interval>'", lineno)
            pname = fields[1]
            pids = {p.name: p.id for p in places}
            if pname not in pids:
                err(UNKNOWN_PLACE, f"unknown place {pname}", lineno, stripped.find(pname) + 1)
            interval = parse_interval(fields[2], lineno, stripped.find(fields[2]) + 1)
            arc = (pids[pname], interval)
            (rows[-1][2] if kind == "in" else rows[-1][3]).append(arc)
        else:
            err(SYNTAX, f"unknown directive {kind!r}", lineno)

    if not places:
        raise NetFormatError(SYNTAX, "net has no places", 0)
    transitions = tuple(
        Transition(i, name, cost, tuple(ins), tuple(outs))
        for i, (name, cost, ins, outs) in enumerate(rows)
    )
    return PTPN(tuple(places), transitions)


def serialize_net(net: PTPN) -> str:
    """Canonical text form; ``parse_net(serialize_net(n))`` equals ``n``."""
    lines = [f"place {p.name} cost {p.cost}" for p in net.places]
    for tr in net.transitions:
        lines.append(f"transition {tr.name} cost {tr.cost}")
        for pid, interval in tr.inputs:
            lines.append(f"  in  {net.places[pid].name} {format_interval(interval)}")
        for pid, interval in tr.outputs:
            lines.append(f"  out {net.places[pid].name} {format_interval(interval)}")
    return "\n".join(lines) + "\n"
