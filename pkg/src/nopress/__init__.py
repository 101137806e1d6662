"""No Press Diplomacy research engine.

Rulebook-faithful adjudication on the standard map, order-language
parsing and legal-order generation, baseline bots, tournament and
TrueSkill evaluation, coalition analysis, observation encodings, and a
newline-JSON wire protocol for external agents.
"""

from .map import (ARMY, FLEET, POWERS, Location, MapGraph,
                  load_standard_map, normalized_adjacency)
from .state import (GameState, Phase, Unit, build_count, initial_state,
                    units_requiring_orders, update_ownership)
from .orders import (Build, Convoy, Disband, Hold, Move, Order, Retreat,
                     SupportHold, SupportMove, UnitRef, WAIVE, Waive,
                     format_order, parse_order)
from .legal import LegalSet, all_legal_orders, legal_orders, validate
from .adjudicator import (Resolution, Verdict, apply, counterfactual_without,
                          resolve_adjustments, resolve_movement,
                          resolve_retreats)
from .engine import (Game, Outcome, load_record, outcome, record_to_dict,
                     replay, reward, run_game, save_record, score, step)
from .bots import (AgentDecision, AgentObservation, DumbbotAgent,
                   ExternalAgent, GreedyAgent, HoldAgent, RandomAgent,
                   make_agent, observe)
from .features import (BOARD_WIDTH, PREV_ORDER_WIDTH, OrderVocabulary,
                       decode_ordering, encode_board, encode_prev_orders,
                       legality_mask, order_vocabulary)
from .rating import Rating, rate
from .tournament import rank_game, run_1v6, run_pool, trueskill_update
from .analysis import accuracy_metrics, coalition_metrics, dataset_stats

__version__ = "0.1.0"
