"""Search-and-rescue gridworld with an ordered, re-prioritisable set of items.

Cells are ``(row, col)`` tuples with row 0 at the top. The tabular state is the
pair (cell, progress mask). Bit ``j`` of the mask is set once the ``j``-th item of
the active ordering has been picked up; since out-of-order pickups are refused
the mask is always a prefix (0b0, 0b1, 0b11, ...). Which item sits behind each
bit depends on the ordering, which the agent never observes directly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from enum import IntEnum
from typing import Dict, FrozenSet, Iterable, Mapping, NamedTuple, Optional, Sequence, Tuple, Union

Cell = Tuple[int, int]


class Action(IntEnum):
    UP = 0
    DOWN = 1
    LEFT = 2
    RIGHT = 3
    COLLECT = 4


ACTIONS: Tuple[Action, ...] = tuple(Action)
N_ACTIONS = len(ACTIONS)
COLLECTION_ACTIONS: FrozenSet[int] = frozenset({int(Action.COLLECT)})

_MOVES: Dict[int, Cell] = {
    Action.UP: (-1, 0),
    Action.DOWN: (1, 0),
    Action.LEFT: (0, -1),
    Action.RIGHT: (0, 1),
}
_VALID_ACTIONS = frozenset(int(a) for a in Action)


class Event:
    """Outcome labels attached to every transition."""

    MOVED = "moved"
    BLOCKED = "blocked"
    DITCH = "ditch"
    COLLECTED_IN_ORDER = "collected_in_order"
    COLLECTED_OUT_OF_ORDER_REJECTED = "collected_out_of_order_rejected"
    ATTEMPT_LIMIT_EXCEEDED = "attempt_limit_exceeded"
    MISSION_COMPLETE = "mission_complete"
    STEP_LIMIT = "step_limit"

    ALL = (
        MOVED,
        BLOCKED,
        DITCH,
        COLLECTED_IN_ORDER,
        COLLECTED_OUT_OF_ORDER_REJECTED,
        ATTEMPT_LIMIT_EXCEEDED,
        MISSION_COMPLETE,
        STEP_LIMIT,
    )


class LayoutError(ValueError):
    """A layout violates one of its structural constraints."""


class EnvError(RuntimeError):
    """Illegal use of the environment (stepping a finished episode, bad action)."""


@dataclass(frozen=True)
class Layout:
    width: int
    height: int
    start: Cell
    target: Cell
    ditches: FrozenSet[Cell]
    item_cells: Mapping[str, Cell]
    layout_id: str = "layout"

    def __post_init__(self):
        object.__setattr__(self, "ditches", frozenset(tuple(c) for c in self.ditches))
        object.__setattr__(self, "item_cells", {k: tuple(v) for k, v in self.item_cells.items()})
        object.__setattr__(self, "start", tuple(self.start))
        object.__setattr__(self, "target", tuple(self.target))
        self.validate()

    def validate(self) -> None:
        def fail(msg):
            raise LayoutError(f"layout {self.layout_id!r}: {msg}")

        if self.width < 2 or self.height < 2:
            fail(f"grid must be at least 2x2, got {self.width}x{self.height}")
        if not self.item_cells:
            fail("at least one item is required")
        named = [("start", self.start), ("target", self.target)]
        named += [(f"item {k}", c) for k, c in self.item_cells.items()]
        named += [("ditch", c) for c in sorted(self.ditches)]
        for name, cell in named:
            if not self.in_bounds(cell):
                fail(f"{name} at {cell} is out of bounds")
        if self.start in self.ditches:
            fail("start must not be a ditch")
        if self.target in self.ditches:
            fail("target must not be a ditch")
        for k, c in self.item_cells.items():
            if c in self.ditches:
                fail(f"item {k} at {c} must not be placed on a ditch")
        # Overlaps cannot be drawn in the glyph format, so they are rejected here too.
        special = [self.start, self.target, *self.item_cells.values()]
        if len(set(special)) != len(special):
            fail("start, target and item cells must be pairwise distinct")

    def in_bounds(self, cell: Cell) -> bool:
        r, c = cell
        return 0 <= r < self.height and 0 <= c < self.width

    @property
    def n_cells(self) -> int:
        return self.width * self.height

    @property
    def items(self) -> Tuple[str, ...]:
        return tuple(sorted(self.item_cells))

    def item_at(self, cell: Cell) -> Optional[str]:
        for k, c in self.item_cells.items():
            if c == cell:
                return k
        return None

    def cell_index(self, cell: Cell) -> int:
        return cell[0] * self.width + cell[1]

    def cells(self) -> Iterable[Cell]:
        return itertools.product(range(self.height), range(self.width))


def _as_sequence(ordering, items: Sequence[str]) -> Tuple[str, ...]:
    """Normalise an ordering given as a rank mapping, a sequence or an ``"X→Y→Z"`` string."""
    if isinstance(ordering, str):
        parts = ordering.replace("->", "→").split("→")
        seq = tuple(p.strip() for p in parts if p.strip())
        if len(seq) == 1 and len(seq[0]) == len(items):
            seq = tuple(seq[0])
    elif isinstance(ordering, Mapping):
        ranks = sorted(ordering.values())
        if ranks != list(range(1, len(ordering) + 1)):
            raise ValueError(f"ranks {ranks} are not a permutation of 1..{len(ordering)}")
        seq = tuple(sorted(ordering, key=ordering.__getitem__))
    else:
        seq = tuple(ordering)
    if sorted(seq) != sorted(items):
        raise ValueError(f"ordering {seq} is not a permutation of items {tuple(items)}")
    return seq


@dataclass(frozen=True)
class InformationSpace:
    """Item set, priority values, active ordering and the feasible orderings.

    ``ordering`` maps item -> rank (1 is collected first). ``history`` holds one
    ``(episode, old_sequence, new_sequence)`` entry per priority update.
    """

    items: Tuple[str, ...]
    priorities: Mapping[str, float]
    ordering: Mapping[str, int]
    contexts: FrozenSet[Tuple[str, ...]]
    history: Tuple[Tuple[Optional[int], Tuple[str, ...], Tuple[str, ...]], ...] = ()

    def __post_init__(self):
        seq = _as_sequence(self.ordering, self.items)
        if any(self.priorities[k] <= 0 for k in self.items):
            raise ValueError("priorities must be positive")
        by_priority = tuple(sorted(self.items, key=lambda k: -self.priorities[k]))
        if by_priority != seq:
            raise ValueError(f"ordering {seq} is not induced by descending priorities")
        if seq not in self.contexts:
            raise ValueError(f"ordering {seq} is not among the feasible contexts")
        object.__setattr__(self, "_sequence", seq)

    @classmethod
    def create(cls, ordering="X→Y→Z", items: Sequence[str] = ("X", "Y", "Z"),
               contexts: Optional[Iterable] = None) -> "InformationSpace":
        items = tuple(items)
        seq = _as_sequence(ordering, items)
        if contexts is None:
            ctx = frozenset(itertools.permutations(items))
        else:
            ctx = frozenset(_as_sequence(c, items) for c in contexts)
        return cls(items, _priorities_for(seq), {k: i + 1 for i, k in enumerate(seq)}, ctx)

    @property
    def sequence(self) -> Tuple[str, ...]:
        return self._sequence

    def collected_items(self, mask: int) -> Tuple[str, ...]:
        return self._sequence[:bin(mask).count("1")]

    def next_required(self, mask: int) -> Optional[str]:
        k = bin(mask).count("1")
        return self._sequence[k] if k < len(self._sequence) else None

    @property
    def full_mask(self) -> int:
        return (1 << len(self.items)) - 1


def _priorities_for(seq: Sequence[str]) -> Dict[str, float]:
    n = len(seq)
    return {k: float(n - i) for i, k in enumerate(seq)}


def swap_priorities(info: InformationSpace, new_ordering, episode: Optional[int] = None) -> InformationSpace:
    """Replace the active ordering; priorities are remapped so rank 1 stays the largest."""
    seq = _as_sequence(new_ordering, info.items)
    if seq not in info.contexts:
        raise ValueError(f"ordering {'→'.join(seq)} is not a feasible context")
    return replace(
        info,
        priorities=_priorities_for(seq),
        ordering={k: i + 1 for i, k in enumerate(seq)},
        history=info.history + ((episode, info.sequence, seq),),
    )


@dataclass(frozen=True)
class RewardConfig:
    step_cost: float = -1.0
    ditch_penalty: float = -50.0
    collect_reward: float = 20.0
    out_of_order_penalty: float = -10.0
    mission_reward: float = 100.0
    action_limit_penalty: float = -5.0
    collect_attempt_limit: int = 3
    step_limit: int = 100

    def __post_init__(self):
        checks = [
            (self.step_cost <= 0, "step_cost <= 0"),
            (self.ditch_penalty < 0, "ditch_penalty < 0"),
            (self.collect_reward > 0, "collect_reward > 0"),
            (self.mission_reward > self.collect_reward, "mission_reward > collect_reward"),
            (self.collect_attempt_limit >= 1, "collect_attempt_limit >= 1"),
            (self.step_limit >= 1, "step_limit >= 1"),
        ]
        for ok, rule in checks:
            if not ok:
                raise ValueError(f"RewardConfig violates {rule}")

    def reward_for(self, event: str) -> float:
        """Reward paid for an action whose (pre-truncation) outcome is ``event``."""
        if event in (Event.MOVED, Event.BLOCKED):
            return self.step_cost
        if event == Event.DITCH:
            return self.step_cost + self.ditch_penalty
        if event == Event.MISSION_COMPLETE:
            return self.step_cost + self.mission_reward
        if event == Event.COLLECTED_IN_ORDER:
            return self.collect_reward
        if event == Event.COLLECTED_OUT_OF_ORDER_REJECTED:
            return self.out_of_order_penalty
        if event == Event.ATTEMPT_LIMIT_EXCEEDED:
            return self.action_limit_penalty
        raise ValueError(f"no reward component for event {event!r}")


class EnvState(NamedTuple):
    # A NamedTuple rather than a frozen dataclass: one is built every step.
    cell: Cell
    collected: int = 0
    steps: int = 0
    collect_attempts: Tuple[Tuple[Cell, int], ...] = ()
    done: bool = False
    mission_success: bool = False

    def attempts_at(self, cell: Cell) -> int:
        for c, n in self.collect_attempts:
            if c == cell:
                return n
        return 0


class Transition(NamedTuple):
    """Result of one step.

    ``base_event`` is the action's own outcome; it differs from ``event`` only
    when the step limit truncated the episode, and it alone determines ``reward``.
    """

    next_state: EnvState
    reward: float
    done: bool
    event: str
    base_event: str = ""

    @property
    def terminal(self) -> bool:
        """True for real terminations (no bootstrapping); step-limit truncation is not one."""
        return self.base_event in (Event.DITCH, Event.MISSION_COMPLETE)


def reset(layout: Layout, info: Optional[InformationSpace] = None, seed: Optional[int] = None) -> EnvState:
    """Start-of-episode state. The dynamics are deterministic, so ``seed`` does not affect it."""
    return EnvState(cell=layout.start)


def step(state: EnvState, action: int, layout: Layout, info: InformationSpace,
         rewards: RewardConfig = RewardConfig()) -> Transition:
    if state.done:
        raise EnvError("cannot step a finished episode; call reset()")
    if action not in _VALID_ACTIONS:
        raise EnvError(f"unknown action {action!r}")

    cell, mask = state.cell, state.collected
    attempts = state.collect_attempts
    done = success = False

    if action == Action.COLLECT:
        item = layout.item_at(cell)
        n = state.attempts_at(cell) + 1 if item is not None else 0
        if item is not None:
            attempts = tuple((c, k) for c, k in attempts if c != cell) + ((cell, n),)
        if item is None or n > rewards.collect_attempt_limit or item in info.collected_items(mask):
            event = Event.ATTEMPT_LIMIT_EXCEEDED
        elif info.next_required(mask) == item:
            event = Event.COLLECTED_IN_ORDER
            mask = (mask << 1) | 1
        else:
            event = Event.COLLECTED_OUT_OF_ORDER_REJECTED
    else:
        dr, dc = _MOVES[action]
        nxt = (cell[0] + dr, cell[1] + dc)
        if not layout.in_bounds(nxt):
            event = Event.BLOCKED
        else:
            cell = nxt
            if cell in layout.ditches:
                event, done = Event.DITCH, True
            elif cell == layout.target and mask == info.full_mask:
                event, done, success = Event.MISSION_COMPLETE, True, True
            else:
                event = Event.MOVED

    reward = rewards.reward_for(event)
    steps = state.steps + 1
    base_event = event
    if not done and steps >= rewards.step_limit:
        event, done = Event.STEP_LIMIT, True
    nxt_state = EnvState(cell, mask, steps, attempts, done, success)
    return Transition(nxt_state, reward, done, event, base_event)


def n_states(layout: Layout, n_items: Optional[int] = None) -> int:
    n_items = len(layout.item_cells) if n_items is None else n_items
    return layout.n_cells * (1 << n_items)


def state_index(state: EnvState, layout: Layout) -> int:
    """Bijection (cell, mask) -> [0, cells * 2**items)."""
    if not layout.in_bounds(state.cell):
        raise ValueError(f"cell {state.cell} is outside layout {layout.layout_id!r}")
    n_masks = 1 << len(layout.item_cells)
    if not 0 <= state.collected < n_masks:
        raise ValueError(f"mask {state.collected} out of range for {len(layout.item_cells)} items")
    return layout.cell_index(state.cell) * n_masks + state.collected


def decode_index(index: int, layout: Layout) -> Tuple[Cell, int]:
    n_masks = 1 << len(layout.item_cells)
    ci, mask = divmod(index, n_masks)
    return divmod(ci, layout.width), mask


def is_info_cell(cell: Cell, layout: Layout) -> bool:
    return cell in layout.item_cells.values()
