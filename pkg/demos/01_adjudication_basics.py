"""A tour of the adjudicator: supports, cuts, convoys, and paradoxes.

Run: python demos/01_adjudication_basics.py
"""

from nopress import (Phase, Unit, format_order, load_standard_map,
                     parse_order, resolve_movement, counterfactual_without)
from nopress.state import make_state

map = load_standard_map()
P = parse_order


def show(title, state, orders):
    print(f"\n=== {title}")
    res = resolve_movement(map, state, orders)
    for order, verdict in sorted(res.verdicts.items(),
                                 key=lambda kv: format_order(kv[0])):
        print(f"  {format_order(order):28s} {verdict.text}")
    for d in res.dislodgements:
        print(f"  dislodged: {d.unit.text} (attacker from {d.attacker_origin})")
    if res.standoffs:
        print(f"  standoffs: {sorted(res.standoffs)}")
    return res


# A supported attack beats a lone defender.
state = make_state(Phase(1901, "S", "M"),
                   [Unit("A", "PAR", "FRANCE"), Unit("A", "MAR", "FRANCE"),
                    Unit("A", "BUR", "GERMANY")])
orders = {"FRANCE": [P("A PAR - BUR"), P("A MAR S A PAR - BUR")],
          "GERMANY": [P("A BUR H")]}
show("2v1 dislodges", state, orders)

# Counterfactual analysis: what if the support had not been given?
without = counterfactual_without(map, state, orders, P("A MAR S A PAR - BUR"))
print("  without the support, the attack",
      "succeeds" if without.verdicts[P("A PAR - BUR")].success else "bounces")

# Cutting support from a third province.
state = make_state(Phase(1901, "S", "M"),
                   [Unit("A", "PAR", "FRANCE"), Unit("A", "MAR", "FRANCE"),
                    Unit("A", "BUR", "GERMANY"), Unit("A", "GAS", "GERMANY")])
show("support cut", state,
     {"FRANCE": [P("A PAR - BUR"), P("A MAR S A PAR - BUR")],
      "GERMANY": [P("A BUR H"), P("A GAS - MAR")]})

# Armies swap via convoy; overland they would bounce.
state = make_state(Phase(1901, "S", "M"),
                   [Unit("A", "BEL", "FRANCE"), Unit("A", "HOL", "GERMANY"),
                    Unit("F", "NTH", "ENGLAND")])
show("convoyed swap", state,
     {"FRANCE": [P("A BEL - HOL VIA")], "GERMANY": [P("A HOL - BEL")],
      "ENGLAND": [P("F NTH C A BEL - HOL")]})

# The classic convoy paradox resolves by failing the convoyed move.
state = make_state(Phase(1901, "S", "M"),
                   [Unit("A", "TUN", "ITALY"), Unit("F", "TYS", "ITALY"),
                    Unit("F", "NAP", "FRANCE"), Unit("F", "ION", "FRANCE")])
show("convoy paradox", state,
     {"ITALY": [P("A TUN - NAP VIA"), P("F TYS C A TUN - NAP")],
      "FRANCE": [P("F NAP S F ION - TYS"), P("F ION - TYS")]})
