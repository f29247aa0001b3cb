"""Tabular extrinsic/intrinsic critics and the composite intrinsic reward."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .env import Event


@dataclass(frozen=True)
class IntrinsicWeights:
    beta1: float = 1.0
    beta2: float = 1.0
    beta3: float = 1.0
    beta4: float = 1.0
    w_novelty: float = 0.3
    w_info: float = 0.4
    w_align: float = 0.3

    def __post_init__(self):
        vals = (self.beta1, self.beta2, self.beta3, self.beta4, self.w_novelty, self.w_info, self.w_align)
        if min(vals) < 0:
            raise ValueError("intrinsic coefficients and weights must be non-negative")
        total = self.w_novelty + self.w_info + self.w_align
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"w_novelty + w_info + w_align must equal 1, got {total}")


@dataclass(frozen=True)
class LearningConfig:
    alpha: float = 0.1
    gamma: float = 0.99

    def __post_init__(self):
        if not 0 < self.alpha <= 1:
            raise ValueError(f"alpha={self.alpha} violates 0 < alpha <= 1")
        if not 0 <= self.gamma < 1:
            raise ValueError(f"gamma={self.gamma} violates 0 <= gamma < 1")


class CriticPair:
    """Q^E, Q^I, N(s, a) and N_info(s) for one agent."""

    def __init__(self, n_states: int, n_actions: int):
        self.q_extrinsic = np.zeros((n_states, n_actions))
        self.q_intrinsic = np.zeros((n_states, n_actions))
        self.visits = np.zeros((n_states, n_actions), dtype=np.int64)
        self.info_visits = np.zeros(n_states, dtype=np.int64)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.q_extrinsic.shape

    def copy(self) -> "CriticPair":
        out = CriticPair(*self.shape)
        out.q_extrinsic[:] = self.q_extrinsic
        out.q_intrinsic[:] = self.q_intrinsic
        out.visits[:] = self.visits
        out.info_visits[:] = self.info_visits
        return out

    def __eq__(self, other):
        if not isinstance(other, CriticPair):
            return NotImplemented
        return (
            np.array_equal(self.q_extrinsic, other.q_extrinsic)
            and np.array_equal(self.q_intrinsic, other.q_intrinsic)
            and np.array_equal(self.visits, other.visits)
            and np.array_equal(self.info_visits, other.info_visits)
        )

    def save(self, path) -> None:
        np.savez(path, q_extrinsic=self.q_extrinsic, q_intrinsic=self.q_intrinsic,
                 visits=self.visits, info_visits=self.info_visits)

    @classmethod
    def load(cls, path) -> "CriticPair":
        with np.load(path) as data:
            out = cls(*data["q_extrinsic"].shape)
            for name in ("q_extrinsic", "q_intrinsic", "visits", "info_visits"):
                getattr(out, name)[:] = data[name]
        return out


def _td_update(table: np.ndarray, s: int, a: int, r: float, s_next: int, terminal: bool,
               cfg: LearningConfig) -> float:
    n_states, n_actions = table.shape
    if not (0 <= s < n_states and 0 <= s_next < n_states and 0 <= a < n_actions):
        raise IndexError(f"(s={s}, a={a}, s_next={s_next}) outside table of shape {table.shape}")
    # Python max over a 5-element list is much cheaper than a numpy reduction.
    bootstrap = 0.0 if terminal else max(table[s_next].tolist())
    q = float(table[s, a])
    # (1 - a) q + a target == q + a (target - q), and is exact when alpha == 1.
    new = (1.0 - cfg.alpha) * q + cfg.alpha * (r + cfg.gamma * bootstrap)
    table[s, a] = new
    return new


def extrinsic_update(critics: CriticPair, s: int, a: int, r: float, s_next: int,
                     terminal: bool = False, cfg: LearningConfig = LearningConfig()) -> float:
    return _td_update(critics.q_extrinsic, s, a, r, s_next, terminal, cfg)


def intrinsic_update(critics: CriticPair, s: int, a: int, r_int: float, s_next: int,
                     terminal: bool = False, cfg: LearningConfig = LearningConfig()) -> float:
    return _td_update(critics.q_intrinsic, s, a, r_int, s_next, terminal, cfg)


def novelty_reward(n_sa: int, w: IntrinsicWeights = IntrinsicWeights()) -> float:
    if n_sa < 1:
        raise ValueError("novelty_reward needs a recorded visit (n_sa >= 1)")
    return w.beta1 / math.sqrt(n_sa)


def info_location_reward(s: int, n_info: int, is_info_cell: bool,
                         w: IntrinsicWeights = IntrinsicWeights()) -> float:
    if not is_info_cell:
        return 0.0
    if n_info < 1:
        raise ValueError(f"info cell state {s} has no recorded info visit")
    return w.beta2 / math.sqrt(n_info)


def alignment_reward(event: str, w: IntrinsicWeights = IntrinsicWeights()) -> float:
    if event == Event.COLLECTED_IN_ORDER:
        return w.beta3
    if event == Event.COLLECTED_OUT_OF_ORDER_REJECTED:
        return -w.beta4
    return 0.0


def intrinsic_reward(components: Tuple[float, float, float], w: IntrinsicWeights = IntrinsicWeights()) -> float:
    novelty, info, align = components
    return w.w_novelty * novelty + w.w_info * info + w.w_align * align


def record_visit(critics: CriticPair, s: int, a: int, is_info_cell: bool,
                 info_state: Optional[int] = None) -> None:
    """Count a visit to (s, a); ``info_state`` (default ``s``) is credited when it hosts an item."""
    critics.visits[s, a] += 1
    if is_info_cell:
        critics.info_visits[s if info_state is None else info_state] += 1


def dumps_table(table: np.ndarray) -> str:
    """Text dump, one row per state index and one column per action."""
    buf = io.StringIO()
    np.savetxt(buf, table, fmt="%.17g", delimiter=",")
    return buf.getvalue()


def loads_table(text: str) -> np.ndarray:
    return np.loadtxt(io.StringIO(text), delimiter=",", ndmin=2)
