"""
What the intrinsic critic is paid
=================================

Run one exploratory episode and break each step's intrinsic reward into its
three parts: visit novelty, item-cell awareness and priority alignment.
"""

import numpy as np

from camiq import env as E
from camiq.critics import (CriticPair, IntrinsicWeights, alignment_reward, info_location_reward,
                           intrinsic_reward, novelty_reward, record_visit)
from camiq.layouts import default_pool

layout = default_pool()[1]
info = E.InformationSpace.create()
w = IntrinsicWeights()
critics = CriticPair(E.n_states(layout), E.N_ACTIONS)
item_cells = set(layout.item_cells.values())
rng = np.random.default_rng(3)

for episode in range(8):
    state = E.reset(layout, info)
    parts = np.zeros(3)
    while not state.done:
        s = E.state_index(state, layout)
        a = int(rng.integers(E.N_ACTIONS))
        tr = E.step(state, a, layout, info)
        s2 = E.state_index(tr.next_state, layout)
        on_item = tr.next_state.cell in item_cells
        record_visit(critics, s, a, on_item, s2)
        comp = (novelty_reward(critics.visits[s, a], w),
                info_location_reward(s2, critics.info_visits[s2], on_item, w),
                alignment_reward(tr.base_event, w))
        parts += comp
        state = tr.next_state
    mix = intrinsic_reward(tuple(parts), w)
    print(f"episode {episode}: {state.steps:3d} steps  novelty {parts[0]:6.2f}  "
          f"item cells {parts[1]:5.2f}  alignment {parts[2]:+4.0f}  mixed {mix:6.2f}")

# Counts are never reset, so the novelty paid per step shrinks as cells come round again.
