import pytest
from hypothesis import given, settings, strategies as st

from nopress.errors import OrderSyntaxError
from nopress.map import load_standard_map
from nopress.orders import (Build, Convoy, Disband, Hold, Move, Retreat,
                            SupportHold, SupportMove, UnitRef, WAIVE,
                            format_order, parse_order)

M = load_standard_map()


def rt(text):
    return format_order(parse_order(text))


def test_paper_example():
    o = parse_order("A MAR S A PAR - BUR")
    assert o == SupportMove(UnitRef("A", "MAR"), UnitRef("A", "PAR"), "BUR")


def test_simple_productions():
    assert parse_order("A PAR H") == Hold(UnitRef("A", "PAR"))
    assert parse_order("F SPA/NC - MAO") == Move(UnitRef("F", "SPA/NC"), "MAO")
    assert parse_order("A LON - BRE VIA") == Move(UnitRef("A", "LON"), "BRE", True)
    assert parse_order("F ENG C A LON - BRE") == \
        Convoy(UnitRef("F", "ENG"), UnitRef("A", "LON"), "BRE")
    assert parse_order("A PAR R BUR") == Retreat(UnitRef("A", "PAR"), "BUR")
    assert parse_order("F KIE D") == Disband(UnitRef("F", "KIE"))
    assert parse_order("F STP/NC B") == Build("F", "STP/NC")
    assert parse_order("WAIVE") == WAIVE


def test_format_examples():
    assert format_order(Hold(UnitRef("A", "PAR"))) == "A PAR H"
    assert format_order(Convoy(UnitRef("F", "ENG"), UnitRef("A", "LON"),
                               "BRE")) == "F ENG C A LON - BRE"
    assert format_order(WAIVE) == "WAIVE"


def test_case_insensitive_canonical_output():
    assert rt("a mar s a par - bur") == "A MAR S A PAR - BUR"
    assert rt("f spa/nc - mao") == "F SPA/NC - MAO"
    assert rt("a lon - bre via") == "A LON - BRE VIA"


def test_support_dest_coast_stripped():
    # support destinations are provinces; a coast tag is canonicalized away
    assert rt("F MAO S F WES - SPA/SC") == "F MAO S F WES - SPA"


def test_errors_carry_position():
    with pytest.raises(OrderSyntaxError) as e:
        parse_order("A PAR X")
    assert e.value.pos == 6
    with pytest.raises(OrderSyntaxError):
        parse_order("A XYZ H")
    with pytest.raises(OrderSyntaxError) as e2:
        parse_order("F SPA/WC - MAO")
    assert "coast" in str(e2.value)
    with pytest.raises(OrderSyntaxError):
        parse_order("")
    with pytest.raises(OrderSyntaxError):
        parse_order("A PAR H H")


# -- property: parse . format == identity --------------------------------------

locs = st.sampled_from(M.names)
provinces = st.sampled_from(M.provinces)
kinds = st.sampled_from("AF")
units = st.builds(UnitRef, kinds, locs)

orders = st.one_of(
    st.builds(Hold, units),
    st.builds(Move, units, locs, st.booleans()),
    st.builds(SupportHold, units, units),
    st.builds(SupportMove, units, units, provinces),
    st.builds(Convoy, units, units, provinces),
    st.builds(Retreat, units, locs),
    st.builds(Disband, units),
    st.builds(Build, kinds, locs),
    st.just(WAIVE),
)


@given(orders)
@settings(max_examples=300)
def test_round_trip(order):
    assert parse_order(format_order(order)) == order


@given(orders)
@settings(max_examples=300)
def test_format_parse_idempotent(order):
    text = format_order(order)
    assert format_order(parse_order(text.lower())) == text
