"""Shift handling: detection, transient epsilon boost and selective critic reset."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .env import COLLECTION_ACTIONS

RESET_SCOPES = ("both", "intrinsic_only", "extrinsic_only")
MODES = ("explicit", "detected", "both")


@dataclass(frozen=True)
class AdaptationConfig:
    lambda_boost: float = 2.0
    eps_max: float = 1.0
    d_boost: int = 50
    lambda_reset: float = 0.5
    detector_window: int = 50
    detector_drop: float = 0.5
    mode: str = "explicit"

    def __post_init__(self):
        checks = [
            (self.lambda_boost >= 1, "lambda_boost >= 1"),
            (0 < self.lambda_reset <= 1, "0 < lambda_reset <= 1"),
            (0 <= self.eps_max <= 1, "eps_max <= 1"),
            (self.d_boost >= 1, "d_boost >= 1"),
            (self.detector_window >= 1, "detector_window >= 1"),
            (0 < self.detector_drop <= 1, "0 < detector_drop <= 1"),
            (self.mode in MODES, f"mode in {MODES}"),
        ]
        for ok, rule in checks:
            if not ok:
                raise ValueError(f"AdaptationConfig violates {rule}")


@dataclass(frozen=True)
class BoostState:
    start_episode: int
    eps_boosted: float
    duration: int


@dataclass(frozen=True)
class ShiftRecord:
    episode: int
    source: str  # "operator" or "detector"
    old_ordering: Tuple[str, ...]
    new_ordering: Tuple[str, ...]

    def to_line(self) -> str:
        return f"{self.episode}\t{self.source}\t{'→'.join(self.old_ordering)}->{'→'.join(self.new_ordering)}"

    @classmethod
    def from_line(cls, line: str) -> "ShiftRecord":
        ep, source, change = line.rstrip("\n").split("\t")
        old, new = change.split("->")
        return cls(int(ep), source, tuple(old.split("→")), tuple(new.split("→")))


def detect_shift(success_history: Sequence[bool], cfg: AdaptationConfig = AdaptationConfig()) -> bool:
    w = cfg.detector_window
    if len(success_history) < 2 * w:
        return False
    tail = np.asarray(success_history[-2 * w:], dtype=float)
    before, recent = tail[:w].mean(), tail[w:].mean()
    return bool(before > 0 and recent < (1.0 - cfg.detector_drop) * before)


def apply_boost(schedule, current_eps: float, cfg: AdaptationConfig, episode: int):
    """Return ``schedule`` with a boost of ``min(eps_max, current_eps * lambda_boost)`` starting now."""
    boosted = min(cfg.eps_max, current_eps * cfg.lambda_boost)
    return replace(schedule, boost=BoostState(episode, boosted, cfg.d_boost))


def boosted_epsilon(boost: BoostState, k: int) -> Optional[float]:
    """Boosted value ``k`` episodes after the boost, or ``None`` once it has expired."""
    if k < 0 or k >= boost.duration:
        return None
    return boost.eps_boosted * math.exp(-k / boost.duration)


def selective_reset(critics, collection_actions: Iterable[int] = COLLECTION_ACTIONS,
                    lambda_reset: float = 0.5, scope: str = "both") -> None:
    """Scale every Q(s, a) with a in ``collection_actions`` by ``lambda_reset``, in place."""
    cols = sorted(set(collection_actions))
    if not cols:
        raise ValueError("collection_actions must be non-empty")
    if scope not in RESET_SCOPES:
        raise ValueError(f"unknown reset scope {scope!r}")
    if scope in ("both", "extrinsic_only"):
        critics.q_extrinsic[:, cols] *= lambda_reset
    if scope in ("both", "intrinsic_only"):
        critics.q_intrinsic[:, cols] *= lambda_reset


@dataclass
class AdaptationState:
    """Per-agent bookkeeping for shift handling."""

    log: List[ShiftRecord] = field(default_factory=list)
    suppress_until: int = -1
