"""Exact solvers for one fixed ordering, used to check learned policies.

Two independent routes: discounted value iteration over the (cell, mask) MDP, and
a breadth-first shortest route through the items in order.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np

from . import env as E


@dataclass
class MDPModel:
    """Deterministic tabular model: ``next_state[s, a]``, ``reward[s, a]``, ``terminal[s, a]``."""

    next_state: np.ndarray
    reward: np.ndarray
    terminal: np.ndarray


def build_model(layout: E.Layout, info: E.InformationSpace,
                rewards: E.RewardConfig = E.RewardConfig()) -> MDPModel:
    """One-step model with per-episode counters dropped (attempt limits, step limit).

    An optimal policy never repeats a collect or runs out of steps, so the optimum
    is the same as in the full environment. Masks that are not a prefix of the
    ordering cannot occur; their rows are zero-reward absorbing.
    """
    n = E.n_states(layout)
    nxt = np.zeros((n, E.N_ACTIONS), dtype=np.int64)
    rew = np.zeros((n, E.N_ACTIONS))
    term = np.zeros((n, E.N_ACTIONS), dtype=bool)
    free = replace(rewards, step_limit=10**9)
    for s in range(n):
        cell, mask = E.decode_index(s, layout)
        if mask & (mask + 1):
            nxt[s] = s
            term[s] = True
            continue
        for a in range(E.N_ACTIONS):
            tr = E.step(E.EnvState(cell, mask), a, layout, info, free)
            nxt[s, a] = E.state_index(tr.next_state, layout)
            rew[s, a] = tr.reward
            term[s, a] = tr.terminal
    return MDPModel(nxt, rew, term)


def value_iteration(model: MDPModel, gamma: float = 0.99, tol: float = 1e-12,
                    max_iter: int = 100_000) -> np.ndarray:
    """Optimal action values Q*(s, a) of the discounted model."""
    q = np.zeros(model.reward.shape)
    cont = gamma * ~model.terminal
    for _ in range(max_iter):
        v = q.max(axis=1)
        q_new = model.reward + cont * v[model.next_state]
        if np.max(np.abs(q_new - q)) < tol:
            return q_new
        q = q_new
    raise RuntimeError("value iteration did not converge")


def rollout_return(q: np.ndarray, layout: E.Layout, info: E.InformationSpace,
                   rewards: E.RewardConfig = E.RewardConfig()) -> Tuple[float, bool, int]:
    """Undiscounted (return, mission_success, steps) of the greedy policy in the real environment."""
    state = E.reset(layout, info)
    total = 0.0
    while not state.done:
        row = q[E.state_index(state, layout)].tolist()
        tr = E.step(state, row.index(max(row)), layout, info, rewards)
        total += tr.reward
        state = tr.next_state
    return total, state.mission_success, state.steps


def optimal_return(layout: E.Layout, info: Optional[E.InformationSpace] = None,
                   rewards: E.RewardConfig = E.RewardConfig(), gamma: float = 0.99) -> float:
    info = info or E.InformationSpace.create(items=layout.items)
    q = value_iteration(build_model(layout, info, rewards), gamma)
    return rollout_return(q, layout, info, rewards)[0]


def shortest_mission_moves(layout: E.Layout, info: E.InformationSpace) -> Optional[int]:
    """Fewest moves that visit the items in order and then the target, avoiding ditches."""
    waypoints = [layout.item_cells[k] for k in info.sequence] + [layout.target]
    total, here = 0, layout.start
    for goal in waypoints:
        d = _bfs(layout, here, goal)
        if d is None:
            return None
        total, here = total + d, goal
    return total


def _bfs(layout: E.Layout, src: E.Cell, dst: E.Cell) -> Optional[int]:
    # The target only ends the episode once everything is collected, so it is passable.
    seen = {src: 0}
    queue = deque([src])
    while queue:
        cell = queue.popleft()
        if cell == dst:
            return seen[cell]
        r, c = cell
        for nb in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
            if layout.in_bounds(nb) and nb not in layout.ditches and nb not in seen:
                seen[nb] = seen[cell] + 1
                queue.append(nb)
    return None


def shortest_path_return(layout: E.Layout, info: E.InformationSpace,
                         rewards: E.RewardConfig = E.RewardConfig()) -> Optional[float]:
    moves = shortest_mission_moves(layout, info)
    if moves is None:
        return None
    n_items = len(info.items)
    return moves * rewards.step_cost + n_items * rewards.collect_reward + rewards.mission_reward
