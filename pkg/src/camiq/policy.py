"""Action selection and the exploration-rate schedule.

All randomness comes from a caller-supplied ``numpy.random.Generator`` (PCG64 via
``numpy.random.default_rng``). Each selection draws one uniform for the branch
choice and, for the baseline's random branch only, one integer for the action.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .adaptation import RESET_SCOPES, BoostState, boosted_epsilon

AGENT_KINDS = ("baseline", "baseline_boosted", "camiq")


@dataclass(frozen=True)
class EpsilonSchedule:
    eps0: float = 1.0
    eps_min: float = 0.1
    horizon: int = 5000
    eps_max: float = 1.0
    boost: Optional[BoostState] = None

    def __post_init__(self):
        if not (self.eps_max >= self.eps0 >= self.eps_min >= 0):
            raise ValueError("EpsilonSchedule needs eps_max >= eps0 >= eps_min >= 0")
        if self.horizon < 1:
            raise ValueError("horizon must be positive")


@dataclass(frozen=True)
class AgentKind:
    name: str = "camiq"
    disable_novelty: bool = False
    disable_priority_components: bool = False
    disable_boost: bool = False
    disable_reset: bool = False
    reset_scope: str = "both"

    def __post_init__(self):
        if self.name not in AGENT_KINDS:
            raise ValueError(f"unknown agent kind {self.name!r}; expected one of {AGENT_KINDS}")
        if self.reset_scope not in RESET_SCOPES:
            raise ValueError(f"unknown reset scope {self.reset_scope!r}")
        if self.name != "camiq" and self.is_ablation:
            raise ValueError("ablation flags only apply to the camiq agent")

    @property
    def is_ablation(self) -> bool:
        return (self.disable_novelty or self.disable_priority_components or self.disable_boost
                or self.disable_reset or self.reset_scope != "both")


def linear_epsilon(schedule: EpsilonSchedule, episode: int) -> float:
    if episode >= schedule.horizon:
        return schedule.eps_min
    frac = max(episode, 0) / schedule.horizon
    return schedule.eps0 - (schedule.eps0 - schedule.eps_min) * frac


def epsilon_at(schedule: EpsilonSchedule, episode: int) -> float:
    """Linear decay, overridden upward by an active boost (never above ``eps_max``)."""
    eps = linear_epsilon(schedule, episode)
    if schedule.boost is not None:
        boosted = boosted_epsilon(schedule.boost, episode - schedule.boost.start_episode)
        if boosted is not None:
            eps = max(eps, boosted)
    return min(max(eps, schedule.eps_min), schedule.eps_max)


def clear_expired_boost(schedule: EpsilonSchedule, episode: int) -> EpsilonSchedule:
    b = schedule.boost
    if b is not None and episode - b.start_episode >= b.duration:
        return replace(schedule, boost=None)
    return schedule


def greedy(row: np.ndarray) -> int:
    """Argmax with lowest-index tie-break."""
    vals = row.tolist()
    return vals.index(max(vals))


def select_action_camiq(q_e: np.ndarray, q_i: np.ndarray, s: int, eps: float,
                        rng: np.random.Generator) -> int:
    if rng.random() < eps:
        return greedy(q_i[s])
    return greedy(q_e[s])


def select_action_baseline(q_e: np.ndarray, s: int, eps: float, rng: np.random.Generator) -> int:
    if rng.random() < eps:
        return int(rng.integers(q_e.shape[1]))
    return greedy(q_e[s])
