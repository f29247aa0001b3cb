"""
Walking the gridworld by hand
=============================

Load the bundled pool, take one layout, and step an agent along the shortest
route that collects X, Y and Z in order. Every transition reports an event and
the reward it paid.
"""

from camiq import env as E
from camiq.layouts import default_pool, format_layout

layout = default_pool()[0]
print(format_layout(layout))

info = E.InformationSpace.create("X→Y→Z")
A = E.Action
route = [A.DOWN, A.RIGHT, A.RIGHT, A.RIGHT, A.UP, A.COLLECT,    # around the ditch to X
         A.DOWN, A.LEFT, A.LEFT, A.LEFT, A.DOWN, A.COLLECT,       # back west to Y
         A.DOWN, A.RIGHT, A.RIGHT, A.COLLECT,                     # Z, one step short of T
         A.RIGHT]
state = E.reset(layout, info)
total = 0.0
for a in route:
    tr = E.step(state, a, layout, info)
    total += tr.reward
    print(f"{a.name:8s} -> cell {tr.next_state.cell}  {tr.event:34s} {tr.reward:+6.1f}")
    state = tr.next_state

print("collected:", info.collected_items(state.collected), "mission:", state.mission_success)

# An operator reorders the priorities at an episode boundary.
info = E.swap_priorities(info, "Y→Z→X", episode=1700)
print("new ordering:", "→".join(info.sequence), "history:", info.history)
print("return:", total)
