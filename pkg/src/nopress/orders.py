"""Order AST, text parser and formatter.

Grammar (canonical text, case-insensitive on input):

    unit        := ("A"|"F") " " loc
    hold        := unit " H"
    move        := unit " - " loc [" VIA"]
    supp. hold  := unit " S " unit
    supp. move  := unit " S " unit " - " prov
    convoy      := unit " C " unit " - " prov
    retreat     := unit " R " loc
    disband     := unit " D"
    build       := ("A"|"F") " " loc " B"
    waive       := "WAIVE"

``loc`` is a location name, coast-qualified where the unit sits on a
split coast (``SPA/NC``); move and retreat destinations are likewise
coast-qualified for fleets. Support and convoy destinations are plain
provinces: support is coast-agnostic. A trailing ``VIA`` marks a move
that travels by convoy; parsing is purely syntactic, so a bare
non-adjacent move parses as a land move and is canonicalized to the
``VIA`` form during validation.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Union

from .errors import OrderSyntaxError
from .map import ARMY, FLEET, load_standard_map


@dataclass(frozen=True, order=True)
class UnitRef:
    """A unit named by kind and location, as it appears in order text."""
    kind: str
    loc: str

    @property
    def text(self) -> str:
        return f"{self.kind} {self.loc}"


@dataclass(frozen=True, order=True)
class Hold:
    unit: UnitRef


@dataclass(frozen=True, order=True)
class Move:
    unit: UnitRef
    dest: str
    via_convoy: bool = False


@dataclass(frozen=True, order=True)
class SupportHold:
    unit: UnitRef
    target: UnitRef


@dataclass(frozen=True, order=True)
class SupportMove:
    unit: UnitRef
    moving: UnitRef
    dest: str       # province, never coast-qualified


@dataclass(frozen=True, order=True)
class Convoy:
    unit: UnitRef   # the convoying fleet
    moving: UnitRef
    dest: str       # province


@dataclass(frozen=True, order=True)
class Retreat:
    unit: UnitRef
    dest: str


@dataclass(frozen=True, order=True)
class Disband:
    unit: UnitRef


@dataclass(frozen=True, order=True)
class Build:
    kind: str
    loc: str


@dataclass(frozen=True, order=True)
class Waive:
    pass


Order = Union[Hold, Move, SupportHold, SupportMove, Convoy, Retreat,
              Disband, Build, Waive]

WAIVE = Waive()

#: orders whose acting unit already stands on the board
UNIT_ORDERS = (Hold, Move, SupportHold, SupportMove, Convoy, Retreat, Disband)


def acting_loc(order: Order) -> str | None:
    """Location of the unit (or build site) the order acts from."""
    if isinstance(order, UNIT_ORDERS):
        return order.unit.loc
    if isinstance(order, Build):
        return order.loc
    return None


def format_order(order: Order) -> str:
    """Canonical text; inverse of :func:`parse_order` on canonical forms."""
    if isinstance(order, Hold):
        return f"{order.unit.text} H"
    if isinstance(order, Move):
        via = " VIA" if order.via_convoy else ""
        return f"{order.unit.text} - {order.dest}{via}"
    if isinstance(order, SupportHold):
        return f"{order.unit.text} S {order.target.text}"
    if isinstance(order, SupportMove):
        return f"{order.unit.text} S {order.moving.text} - {order.dest}"
    if isinstance(order, Convoy):
        return f"{order.unit.text} C {order.moving.text} - {order.dest}"
    if isinstance(order, Retreat):
        return f"{order.unit.text} R {order.dest}"
    if isinstance(order, Disband):
        return f"{order.unit.text} D"
    if isinstance(order, Build):
        return f"{order.kind} {order.loc} B"
    if isinstance(order, Waive):
        return "WAIVE"
    raise TypeError(f"not an order: {order!r}")


@lru_cache(maxsize=1)
def _known_locations() -> frozenset[str]:
    return frozenset(load_standard_map().names)


class _Tokens:
    def __init__(self, text: str):
        self.text = text
        self.toks = [(m.group(0).upper(), m.start())
                     for m in re.finditer(r"\S+", text)]
        self.i = 0

    def peek(self) -> str | None:
        return self.toks[self.i][0] if self.i < len(self.toks) else None

    def next(self, expectation: str) -> tuple[str, int]:
        if self.i >= len(self.toks):
            raise OrderSyntaxError(self.text, len(self.text), f"expected {expectation}")
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, literal: str):
        tok, pos = self.next(repr(literal))
        if tok != literal:
            raise OrderSyntaxError(self.text, pos, f"expected {literal!r}, got {tok!r}")

    def done(self):
        if self.i < len(self.toks):
            tok, pos = self.toks[self.i]
            raise OrderSyntaxError(self.text, pos, f"unexpected trailing {tok!r}")


def _location(toks: _Tokens, *, province_only: bool = False) -> str:
    tok, pos = toks.next("location")
    if "/" in tok:
        name, _, coast = tok.partition("/")
        if coast not in ("NC", "SC", "EC"):
            raise OrderSyntaxError(toks.text, pos, f"malformed coast tag {tok!r}")
        if province_only:
            tok = name  # support/convoy destinations are coast-agnostic
    if tok not in _known_locations():
        raise OrderSyntaxError(toks.text, pos, f"unknown province {tok!r}")
    return tok


def _unit(toks: _Tokens) -> UnitRef:
    kind, pos = toks.next("unit kind A or F")
    if kind not in (ARMY, FLEET):
        raise OrderSyntaxError(toks.text, pos, f"expected A or F, got {kind!r}")
    return UnitRef(kind, _location(toks))


def parse_order(text: str) -> Order:
    """Parse canonical-grammar order text (case-insensitive)."""
    toks = _Tokens(text)
    first = toks.peek()
    if first is None:
        raise OrderSyntaxError(text, 0, "empty order")
    if first == "WAIVE":
        toks.next("WAIVE")
        toks.done()
        return WAIVE

    unit = _unit(toks)
    verb, pos = toks.next("order verb")
    if verb == "H":
        toks.done()
        return Hold(unit)
    if verb == "B":
        toks.done()
        return Build(unit.kind, unit.loc)
    if verb == "D":
        toks.done()
        return Disband(unit)
    if verb == "-":
        dest = _location(toks)
        via = False
        if toks.peek() == "VIA":
            toks.next("VIA")
            via = True
        toks.done()
        return Move(unit, dest, via)
    if verb == "R":
        dest = _location(toks)
        toks.done()
        return Retreat(unit, dest)
    if verb == "S":
        other = _unit(toks)
        if toks.peek() == "-":
            toks.expect("-")
            dest = _location(toks, province_only=True)
            toks.done()
            return SupportMove(unit, other, dest)
        toks.done()
        return SupportHold(unit, other)
    if verb == "C":
        other = _unit(toks)
        toks.expect("-")
        dest = _location(toks, province_only=True)
        toks.done()
        return Convoy(unit, other, dest)
    raise OrderSyntaxError(text, pos, f"unknown order verb {verb!r}")
