"""Board/previous-order tensors, the order vocabulary, and masks.

Run: python demos/05_encodings.py
"""

import numpy as np

from nopress import (POWERS, initial_state, load_standard_map,
                     normalized_adjacency, order_vocabulary, parse_order)
from nopress.features import (decode_ordering, encode_board,
                              encode_prev_orders, legality_mask)

map = load_standard_map()
state = initial_state(map)

board = encode_board(map, state)
print("board tensor:", board.shape, "one-hot row sums:",
      sorted(set(board.sum(axis=1))))

prev = encode_prev_orders(map, {"FRANCE": [parse_order("A PAR - BUR")]}, state)
row = prev[map.index["PAR"]]
print("PAR row after 'A PAR - BUR':", np.nonzero(row)[0].tolist())

adj = normalized_adjacency(map)
print("normalized adjacency:", adj.shape,
      "eigenvalue range [%.3f, %.3f]" % tuple(
          np.linalg.eigvalsh(adj)[[0, -1]]))

vocab = order_vocabulary(map)
print(f"order vocabulary: {len(vocab)} orders; "
      f"PAR candidates: {len(vocab.by_location['PAR'])}")

mask = legality_mask(vocab, state, "PAR", map)
print(f"PAR legality mask: {int(mask.sum())} legal at the opening:")
for i in np.nonzero(mask)[0]:
    print("   ", vocab.decode(int(i)))

units = [u.loc for u in state.units]
print("\ndecoder reading order of the 22 opening units:")
print("  ", " ".join(decode_ordering(map, units)))
