"""
Optimal returns for every layout and ordering
=============================================

Two independent routes to the same number: value iteration over the 128-state
(cell, progress) model, and breadth-first search through the items in order.
"""

from camiq.env import InformationSpace
from camiq.layouts import default_pool
from camiq.oracle import optimal_return, shortest_mission_moves, shortest_path_return

orderings = ["X→Y→Z", "Y→Z→X", "Z→X→Y"]
print("layout  " + "  ".join(f"{o:>14s}" for o in orderings))
for layout in default_pool():
    cells = []
    for o in orderings:
        info = InformationSpace.create(o)
        vi = optimal_return(layout, info)
        bfs = shortest_path_return(layout, info)
        assert vi == bfs
        cells.append(f"{vi:7.0f} ({shortest_mission_moves(layout, info):2d} mv)")
    print(f"{layout.layout_id:6s}  " + "  ".join(cells))
