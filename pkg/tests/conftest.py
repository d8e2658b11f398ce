from fractions import Fraction as F
from pathlib import Path

import pytest

from ptpn.model import PTPN
from ptpn.netformat import parse_net
from ptpn.regions import OMEGA, Region, mset
from ptpn.semantics import Marking, parse_trace

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def simple() -> PTPN:
    return parse_net((DATA / "simple.net").read_text())


@pytest.fixture(scope="session")
def main() -> PTPN:
    return parse_net((DATA / "main.net").read_text())


def pid(net: PTPN, name: str) -> int:
    return net.place_named(name).id


@pytest.fixture(scope="session")
def m5(main) -> Marking:
    """Eleven tokens, fractional parts .95 .96 .97 | 0 | .01 .03 .04."""
    red, white, blue, green, orange = (pid(main, n) for n in
                                       ("red", "white", "blue", "green", "orange"))
    return Marking.of(
        [
            (red, F("6.95")),
            (red, F(5)),
            (red, F("3.04")),
            (green, F("4.95")),
            (green, F("8.01")),
            (white, F("1.97")),
            (white, F("4.03")),
            (orange, F("2.97")),
            (orange, F("2.01")),
            (blue, F("0.96")),
            (blue, F(1)),
        ]
    )


@pytest.fixture(scope="session")
def r4(main) -> Region:
    """The three-part region the marking above satisfies at delta = 0.1."""
    red, white, blue, green, orange = (pid(main, n) for n in
                                       ("red", "white", "blue", "green", "orange"))
    return Region(
        high=(mset([(red, 6), (green, 4)]), mset([(blue, 0)]), mset([(white, 1), (orange, 2)])),
        zero=mset([(blue, 1), (red, 5)]),
        low=(mset([(orange, 2), (green, OMEGA)]), mset([(white, 4)]), mset([(red, 3)])),
    )


@pytest.fixture(scope="session")
def pi_trace(main):
    return parse_trace(main, (DATA / "pi.jsonl").read_text())


@pytest.fixture(scope="session")
def delta_trace(main):
    return parse_trace(main, (DATA / "delta_form.jsonl").read_text())


@pytest.fixture(scope="session")
def delta_marking(main) -> Marking:
    """Marking in δ-form at δ = 0.2: fractions .91 .93 .97 | 0 | .02 .03 .06."""
    red, white, blue, green, orange = (pid(main, n) for n in
                                       ("red", "white", "blue", "green", "orange"))
    return Marking.of(
        [
            (red, F("7.93")),
            (red, F("1.06")),
            (red, F("2.02")),
            (white, F(2)),
            (white, F("0.97")),
            (blue, F(8)),
            (green, F("4.02")),
            (green, F("1.91")),
            (orange, F("2.03")),
            (orange, F("1.97")),
            (orange, F("4.02")),
        ]
    )
