import random

import pytest

from nopress.legal import Judgment, all_legal_orders, legal_orders, validate
from nopress.orders import (Build, Convoy, Disband, Hold, Move, Retreat,
                            SupportHold, SupportMove, UnitRef, WAIVE,
                            format_order, parse_order)
from nopress.state import Dislodged, Phase, Unit, make_state

from genstates import random_board
from oracles import enumerate_legal


def P(text):
    return parse_order(text)


def test_opening_includes_hold_and_all_moves(std_map, opening):
    for u in opening.units:
        legal = legal_orders(std_map, opening, u.loc)
        assert Hold(UnitRef(u.kind, u.loc)) in legal
        for d in std_map.adjacent(u.loc, u.kind):
            assert Move(UnitRef(u.kind, u.loc), d, False) in legal


def test_not_orderable_flag(std_map, opening):
    legal = legal_orders(std_map, opening, "BUR")
    assert legal == frozenset() and not legal.orderable
    legal2 = legal_orders(std_map, opening, "PAR")
    assert legal2.orderable


def test_no_foreign_orders(std_map, opening):
    for u in opening.units:
        for o in legal_orders(std_map, opening, u.loc):
            assert o.unit == UnitRef(u.kind, u.loc)


def test_convoyed_moves_need_fleet_presence(std_map):
    ref = UnitRef("A", "LON")
    # no fleet: no convoy moves offered
    state = make_state(Phase(1901, "S", "M"), [Unit("A", "LON", "ENGLAND")])
    assert not any(isinstance(o, Move) and o.via_convoy
                   for o in legal_orders(std_map, state, "LON"))
    # fleet in ENG: BRE, PIC, BEL, LON(skip: own), WAL reachable
    state2 = make_state(Phase(1901, "S", "M"),
                        [Unit("A", "LON", "ENGLAND"),
                         Unit("F", "ENG", "ENGLAND")])
    legal = legal_orders(std_map, state2, "LON")
    assert Move(ref, "BRE", True) in legal
    assert Move(ref, "BEL", True) in legal
    assert Move(ref, "LON", True) not in legal
    # chained fleets reach farther
    state3 = make_state(Phase(1901, "S", "M"),
                        [Unit("A", "LON", "ENGLAND"),
                         Unit("F", "ENG", "ENGLAND"),
                         Unit("F", "MAO", "FRANCE")])
    legal3 = legal_orders(std_map, state3, "LON")
    assert Move(ref, "POR", True) in legal3


def test_support_requires_reachable_destination(std_map):
    # STP cannot support anything into LON
    state = make_state(Phase(1901, "S", "M"),
                       [Unit("A", "STP", "RUSSIA"),
                        Unit("A", "PAR", "FRANCE")])
    legal = legal_orders(std_map, state, "STP")
    assert not any(isinstance(o, (SupportMove, SupportHold)) for o in legal)


def test_dislodged_unit_with_no_retreats_gets_disband_only(std_map):
    # army dislodged in TUN with NAF occupied and both seas standoffs/occupied
    units = [Unit("A", "NAF", "FRANCE"), Unit("F", "TYS", "ITALY"),
             Unit("A", "TUN", "ITALY")]
    state = make_state(Phase(1902, "S", "R"), units,
                       [Dislodged(Unit("A", "TUN", "FRANCE"), "ION")],
                       {}, frozenset())
    legal = legal_orders(std_map, state, "TUN")
    assert legal == {Disband(UnitRef("A", "TUN"))}


def test_retreat_excludes_standoff_occupied_origin(std_map):
    units = [Unit("A", "BUR", "GERMANY")]
    state = make_state(
        Phase(1902, "F", "R"), units,
        [Dislodged(Unit("A", "PAR", "FRANCE"), "BUR")],
        {}, frozenset({"PIC"}))
    legal = legal_orders(std_map, state, "PAR")
    dests = {o.dest for o in legal if isinstance(o, Retreat)}
    assert dests == {"BRE", "GAS"}  # not BUR (origin), not PIC (standoff)


def test_retreat_to_attacker_origin_allowed_after_convoyed_attack(std_map):
    state = make_state(
        Phase(1902, "F", "R"), [],
        [Dislodged(Unit("A", "PAR", "FRANCE"), None)],  # convoyed dislodger
        {}, frozenset())
    legal = legal_orders(std_map, state, "PAR")
    dests = {o.dest for o in legal if isinstance(o, Retreat)}
    assert dests == {"BRE", "BUR", "GAS", "PIC"}


def test_build_sites_and_kinds(std_map):
    # Russia owes builds; STP open: fleet builds must pick a coast
    units = [Unit("A", "MOS", "RUSSIA")]
    centers = {c: "RUSSIA" for c in ("MOS", "SEV", "STP", "WAR")}
    state = make_state(Phase(1901, "W", "A"), units, (), centers)
    legal = legal_orders(std_map, state, "STP")
    assert Build("A", "STP") in legal
    assert Build("F", "STP/NC") in legal and Build("F", "STP/SC") in legal
    assert Build("F", "STP") not in legal
    assert WAIVE in legal
    # landlocked home: no fleet
    legal_war = legal_orders(std_map, state, "WAR")
    assert legal_war == {Build("A", "WAR"), WAIVE}
    # occupied home is not a site
    assert not legal_orders(std_map, state, "MOS").orderable


def test_disband_candidates(std_map):
    units = [Unit("A", "PAR", "FRANCE"), Unit("A", "BUR", "FRANCE")]
    state = make_state(Phase(1901, "W", "A"), units, (), {"PAR": "FRANCE"})
    legal = legal_orders(std_map, state, "BUR")
    assert legal == {Disband(UnitRef("A", "BUR")), WAIVE}


# -- oracle equivalence ---------------------------------------------------------


def test_legal_orders_match_bruteforce_oracle_on_random_boards(std_map):
    rng = random.Random(99)
    for trial in range(60):
        state = random_board(std_map, rng, max_units=7)
        for u in state.units:
            got = legal_orders(std_map, state, u.loc)
            want = enumerate_legal(std_map, state, u.loc)
            assert got == want, (
                f"trial {trial} unit {u.text}: "
                f"extra={sorted(map(format_order, got - want))} "
                f"missing={sorted(map(format_order, want - got))}")


def test_legal_orders_match_oracle_opening(std_map, opening):
    for u in opening.units:
        assert legal_orders(std_map, opening, u.loc) == \
            enumerate_legal(std_map, opening, u.loc)


# -- validation -----------------------------------------------------------------


def test_validate_unreachable_support(std_map):
    state = make_state(Phase(1901, "S", "M"),
                       [Unit("A", "STP", "RUSSIA"), Unit("A", "PAR", "FRANCE"),
                        Unit("F", "LON", "ENGLAND")])
    [j] = validate(std_map, state, "RUSSIA", [P("A STP S A PAR - LON")])
    assert not j.valid
    assert j.reason == "unreachable_destination"
    assert j.effective == Hold(UnitRef("A", "STP"))


def test_validate_duplicates_first_wins(std_map, opening):
    js = validate(std_map, opening, "FRANCE",
                  [P("A PAR - BUR"), P("A PAR - PIC")])
    assert js[0].valid and not js[1].valid
    assert js[1].reason == "duplicate"


def test_validate_build_on_occupied_home(std_map):
    units = [Unit("A", "PAR", "FRANCE")]
    centers = {c: "FRANCE" for c in ("BRE", "MAR", "PAR")}
    state = make_state(Phase(1901, "W", "A"), units, (), centers)
    [j] = validate(std_map, state, "FRANCE", [P("A PAR B")])
    assert not j.valid and j.reason == "occupied"


def test_validate_foreign_unit(std_map, opening):
    [j] = validate(std_map, opening, "FRANCE", [P("A MUN - BUR")])
    assert not j.valid and j.reason == "foreign_unit"
    assert j.effective is None


def test_validate_canonicalizes_bare_convoy_move(std_map):
    state = make_state(Phase(1901, "S", "M"),
                       [Unit("A", "LON", "ENGLAND"),
                        Unit("F", "ENG", "ENGLAND")])
    [j] = validate(std_map, state, "ENGLAND", [P("A LON - BRE")])
    assert j.valid and j.reason == "canonicalized_via"
    assert j.effective == Move(UnitRef("A", "LON"), "BRE", True)


def test_validate_against_legal_sets_on_random_boards(std_map):
    rng = random.Random(7)
    for _ in range(25):
        state = random_board(std_map, rng, max_units=6)
        legal = all_legal_orders(std_map, state)
        for u in state.units:
            for o in sorted(legal[u.loc], key=str)[:8]:
                [j] = validate(std_map, state, u.power, [o])
                assert j.valid, (u, format_order(o), j.reason)


def test_round_trip_on_legal_orders_of_random_boards(std_map):
    rng = random.Random(314)
    for _ in range(50):
        state = random_board(std_map, rng, max_units=7)
        for orders in all_legal_orders(std_map, state).values():
            for o in orders:
                assert parse_order(format_order(o)) == o
