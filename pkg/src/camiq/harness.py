"""Training loops, scenarios, recovery metrics and aggregation across seeded runs."""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import env as E
from .adaptation import (
    AdaptationConfig,
    AdaptationState,
    ShiftRecord,
    apply_boost,
    detect_shift,
    selective_reset,
)
from .critics import (
    CriticPair,
    IntrinsicWeights,
    LearningConfig,
    alignment_reward,
    extrinsic_update,
    info_location_reward,
    intrinsic_reward,
    intrinsic_update,
    novelty_reward,
    record_visit,
)
from .layouts import default_pool
from .policy import (
    AgentKind,
    EpsilonSchedule,
    clear_expired_boost,
    epsilon_at,
    select_action_baseline,
    select_action_camiq,
)

XYZ = ("X", "Y", "Z")
YZX = ("Y", "Z", "X")
ZXY = ("Z", "X", "Y")

SCENARIOS = ("static", "single_shift", "multi_shift")

ABLATIONS: Tuple[Tuple[str, AgentKind], ...] = (
    ("Full CA-MIQ", AgentKind("camiq")),
    ("w/o Priority Alignment + Awareness", AgentKind("camiq", disable_priority_components=True)),
    ("w/o State Novelty", AgentKind("camiq", disable_novelty=True)),
    ("w/o Exploration Boost", AgentKind("camiq", disable_boost=True)),
    ("w/o Selective Reset", AgentKind("camiq", disable_reset=True)),
    ("Intrinsic Reset Only", AgentKind("camiq", reset_scope="intrinsic_only")),
    ("Extrinsic Reset Only", AgentKind("camiq", reset_scope="extrinsic_only")),
)


@dataclass(frozen=True)
class ScenarioSpec:
    episodes: int = 5000
    shift_schedule: Tuple[Tuple[int, Tuple[str, ...]], ...] = ()
    runs: int = 10
    layout_pool: Optional[Tuple[E.Layout, ...]] = None
    initial_ordering: Tuple[str, ...] = XYZ
    seed: int = 0

    def __post_init__(self):
        eps = [e for e, _ in self.shift_schedule]
        if any(b <= a for a, b in zip(eps, eps[1:])):
            raise ValueError("shift episodes must be strictly increasing")
        if eps and not (0 < eps[0] and eps[-1] < self.episodes):
            raise ValueError("shift episodes must lie inside (0, episodes)")
        if self.runs < 1 or self.episodes < 1:
            raise ValueError("runs and episodes must be positive")
        if self.layout_pool is not None:
            object.__setattr__(self, "layout_pool", tuple(self.layout_pool))
            if not self.layout_pool:
                raise ValueError("layout pool is empty")

    @property
    def pool(self) -> Tuple[E.Layout, ...]:
        return self.layout_pool if self.layout_pool is not None else tuple(default_pool())

    @classmethod
    def named(cls, scenario: str, **kw) -> "ScenarioSpec":
        schedules = {
            "static": (),
            "single_shift": ((1700, YZX),),
            "multi_shift": ((1700, YZX), (3500, ZXY)),
        }
        if scenario not in schedules:
            raise ValueError(f"unknown scenario {scenario!r}; expected one of {SCENARIOS}")
        return cls(shift_schedule=schedules[scenario], **kw)


@dataclass(frozen=True)
class AgentConfig:
    """Hyper-parameters shared by all agent kinds."""

    rewards: E.RewardConfig = E.RewardConfig()
    weights: IntrinsicWeights = IntrinsicWeights()
    learning: LearningConfig = LearningConfig()
    adaptation: AdaptationConfig = AdaptationConfig()
    eps0: float = 1.0
    eps_min: float = 0.1
    recovery_fraction: float = 0.8


@dataclass
class EpisodeRecord:
    episode: int
    total_reward: float
    mission_success: bool
    info_collection_success: bool
    steps: int
    epsilon_used: float


@dataclass
class Recovery:
    shift_episode: int
    recovered: bool
    recovery_time: Optional[int]
    degenerate_baseline: bool = False


@dataclass
class RunMetrics:
    agent: str
    seed: int
    layout_id: str
    records: List[EpisodeRecord]
    shifts: List[ShiftRecord] = field(default_factory=list)
    recovery: List[Recovery] = field(default_factory=list)
    detections: List[ShiftRecord] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "agent": self.agent,
            "seed": self.seed,
            "layout_id": self.layout_id,
            "records": [asdict(r) for r in self.records],
            "shifts": [asdict(s) for s in self.shifts],
            "recovery": [asdict(r) for r in self.recovery],
            "detections": [asdict(s) for s in self.detections],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunMetrics":
        def shift(x):
            return ShiftRecord(x["episode"], x["source"], tuple(x["old_ordering"]), tuple(x["new_ordering"]))

        return cls(
            d["agent"], d["seed"], d["layout_id"],
            [EpisodeRecord(**r) for r in d["records"]],
            [shift(s) for s in d["shifts"]],
            [Recovery(**r) for r in d["recovery"]],
            [shift(s) for s in d["detections"]],
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "RunMetrics":
        return cls.from_dict(json.loads(text))


class Agent:
    """Mutable learner bundle: critics, schedule, generator and adaptation bookkeeping."""

    def __init__(self, kind: AgentKind, n_states: int, horizon: int, rng: np.random.Generator,
                 cfg: AgentConfig = AgentConfig()):
        self.kind = kind
        self.cfg = cfg
        self.rng = rng
        self.critics = CriticPair(n_states, E.N_ACTIONS)
        self.schedule = EpsilonSchedule(cfg.eps0, cfg.eps_min, horizon, cfg.adaptation.eps_max)
        self.adapt = AdaptationState()
        w = cfg.weights
        # Ablated components are dropped, the remaining weights are left as they are.
        self._mix = (
            0.0 if kind.disable_novelty else w.w_novelty,
            0.0 if kind.disable_priority_components else w.w_info,
            0.0 if kind.disable_priority_components else w.w_align,
        )

    @property
    def is_camiq(self) -> bool:
        return self.kind.name == "camiq"

    def intrinsic(self, n_sa: int, s_next: int, n_info: int, info_cell: bool, event: str) -> float:
        w = self.cfg.weights
        parts = (
            novelty_reward(n_sa, w),
            info_location_reward(s_next, n_info, info_cell, w),
            alignment_reward(event, w),
        )
        wn, wi, wa = self._mix
        return wn * parts[0] + wi * parts[1] + wa * parts[2]


def on_shift(agent: Agent, episode: int, record: ShiftRecord) -> None:
    """Apply the kind-specific response to a priority shift at the start of ``episode``."""
    kind, acfg = agent.kind, agent.cfg.adaptation
    if kind.name == "baseline":
        return
    eps = epsilon_at(agent.schedule, episode)
    if kind.name == "baseline_boosted":
        agent.schedule = apply_boost(agent.schedule, eps, acfg, episode)
    else:
        if not kind.disable_boost:
            agent.schedule = apply_boost(agent.schedule, eps, acfg, episode)
        if not kind.disable_reset:
            selective_reset(agent.critics, E.COLLECTION_ACTIONS, acfg.lambda_reset, kind.reset_scope)
    agent.adapt.log.append(record)
    agent.adapt.suppress_until = episode + acfg.detector_window


def run_episode(agent: Agent, layout: E.Layout, info: E.InformationSpace, episode: int,
                eps: Optional[float] = None) -> EpisodeRecord:
    """Play and learn from one episode; ``eps`` overrides the schedule (0 gives greedy play)."""
    cfg = agent.cfg
    rewards, learning = cfg.rewards, cfg.learning
    critics = agent.critics
    q_e, q_i = critics.q_extrinsic, critics.q_intrinsic
    if eps is None:
        agent.schedule = clear_expired_boost(agent.schedule, episode)
        eps = epsilon_at(agent.schedule, episode)
    camiq = agent.is_camiq
    info_cells = set(layout.item_cells.values())

    state = E.reset(layout, info)
    s = E.state_index(state, layout)
    full = info.full_mask
    n_masks, width = full + 1, layout.width
    total = 0.0
    collected_all = False
    while not state.done:
        if camiq:
            a = select_action_camiq(q_e, q_i, s, eps, agent.rng)
        else:
            a = select_action_baseline(q_e, s, eps, agent.rng)
        tr = E.step(state, a, layout, info, rewards)
        nxt = tr.next_state
        s2 = (nxt.cell[0] * width + nxt.cell[1]) * n_masks + nxt.collected  # E.state_index, inlined
        terminal = tr.terminal
        if camiq:
            on_info = nxt.cell in info_cells
            record_visit(critics, s, a, on_info, s2)
            r_int = agent.intrinsic(critics.visits[s, a], s2, critics.info_visits[s2], on_info, tr.base_event)
            intrinsic_update(critics, s, a, r_int, s2, terminal, learning)
        extrinsic_update(critics, s, a, tr.reward, s2, terminal, learning)
        total += tr.reward
        if nxt.collected == full:
            collected_all = True
        state, s = nxt, s2
    return EpisodeRecord(episode, total, state.mission_success, collected_all, state.steps, eps)


def greedy_return(agent_or_critics, layout: E.Layout, info: E.InformationSpace,
                  rewards: E.RewardConfig = E.RewardConfig()) -> Tuple[float, bool]:
    """Undiscounted return of the extrinsic greedy policy from the start, without learning."""
    critics = getattr(agent_or_critics, "critics", agent_or_critics)
    q_e = critics.q_extrinsic
    state = E.reset(layout, info)
    total = 0.0
    while not state.done:
        a = int(np.argmax(q_e[E.state_index(state, layout)]))
        tr = E.step(state, a, layout, info, rewards)
        total += tr.reward
        state = tr.next_state
    return total, state.mission_success


def _seeds(run_seed: int):
    layout_ss, agent_ss = np.random.SeedSequence(run_seed).spawn(2)
    return np.random.default_rng(layout_ss), np.random.default_rng(agent_ss)


def pick_layout(pool: Sequence[E.Layout], run_seed: int) -> E.Layout:
    layout_rng, _ = _seeds(run_seed)
    return pool[int(layout_rng.integers(len(pool)))]


def run_training(spec: ScenarioSpec, kind: AgentKind, run_seed: int,
                 cfg: AgentConfig = AgentConfig(), layout: Optional[E.Layout] = None) -> RunMetrics:
    pool = spec.pool
    layout_rng, agent_rng = _seeds(run_seed)
    chosen = pool[int(layout_rng.integers(len(pool)))]
    layout = chosen if layout is None else layout
    info = E.InformationSpace.create(spec.initial_ordering, items=layout.items)
    agent = Agent(kind, E.n_states(layout), spec.episodes, agent_rng, cfg)
    acfg = cfg.adaptation
    schedule = dict(spec.shift_schedule)

    records: List[EpisodeRecord] = []
    shifts: List[ShiftRecord] = []
    detections: List[ShiftRecord] = []
    history: List[bool] = []
    for ep in range(spec.episodes):
        if ep in schedule:
            old = info.sequence
            info = E.swap_priorities(info, schedule[ep], episode=ep)
            rec = ShiftRecord(ep, "operator", old, info.sequence)
            shifts.append(rec)
            if acfg.mode in ("explicit", "both"):
                on_shift(agent, ep, rec)
        elif acfg.mode in ("detected", "both") and kind.name != "baseline" and ep >= agent.adapt.suppress_until:
            if detect_shift(history, acfg):
                rec = ShiftRecord(ep, "detector", info.sequence, info.sequence)
                detections.append(rec)
                on_shift(agent, ep, rec)
        record = run_episode(agent, layout, info, ep)
        records.append(record)
        history.append(record.info_collection_success)

    bounds = [e for e, _ in spec.shift_schedule] + [spec.episodes]
    recovery = [
        compute_recovery(records, e, bounds[i + 1], acfg.detector_window, cfg.recovery_fraction)
        for i, e in enumerate(bounds[:-1])
    ]
    return RunMetrics(kind_label(kind), run_seed, layout.layout_id, records, shifts, recovery, detections)


def train_static(kind: AgentKind, layout: E.Layout, episodes: int = 5000, run_seed: int = 0,
                 cfg: AgentConfig = AgentConfig(), info: Optional[E.InformationSpace] = None) -> Agent:
    """Train one agent on a fixed layout and ordering and hand it back for inspection."""
    info = info or E.InformationSpace.create(items=layout.items)
    _, agent_rng = _seeds(run_seed)
    agent = Agent(kind, E.n_states(layout), episodes, agent_rng, cfg)
    for ep in range(episodes):
        run_episode(agent, layout, info, ep)
    return agent


def kind_label(kind: AgentKind) -> str:
    for label, k in ABLATIONS[1:]:
        if k == kind:
            return label
    return kind.name


def compute_recovery(records: Sequence[EpisodeRecord], shift_episode: int, until: Optional[int] = None,
                     window: int = 50, fraction: float = 0.8) -> Recovery:
    """Episodes after ``shift_episode`` until the trailing mission-success rate regains
    ``fraction`` of the rate in the ``window`` episodes just before the shift.

    The search stops before ``until`` (next shift or horizon). The earliest possible
    recovery time is ``window``.
    """
    success = np.array([r.mission_success for r in records], dtype=float)
    until = len(records) if until is None else min(until, len(records))
    pre = success[max(0, shift_episode - window):shift_episode]
    if pre.size == 0 or pre.mean() == 0:
        return Recovery(shift_episode, False, None, degenerate_baseline=True)
    need = fraction * pre.mean()
    csum = np.concatenate(([0.0], np.cumsum(success)))
    for end in range(shift_episode + window, until + 1):
        if (csum[end] - csum[end - window]) / window >= need - 1e-12:
            return Recovery(shift_episode, True, end - shift_episode)
    return Recovery(shift_episode, False, None)


@dataclass
class SummaryTable:
    agent: str
    mission_success_pct: float
    info_collection_pct: float
    recovery_success_pct: Optional[float]  # over (run, shift) pairs
    mean_recovery_time: Optional[float]
    mean_reward_per_episode: float
    post_shift_mission_pct: Optional[float]
    runs: int
    runs_fully_recovered_pct: Optional[float]  # runs that recovered after every shift
    curve_mean: np.ndarray = field(repr=False)
    curve_stderr: np.ndarray = field(repr=False)

    COLUMNS = (
        "agent",
        "mission_success_pct",
        "info_collection_pct",
        "recovery_success_pct",
        "mean_recovery_time",
        "mean_reward_per_episode",
        "post_shift_mission_pct",
        "runs",
        "runs_fully_recovered_pct",
    )

    def row(self) -> Dict[str, object]:
        return {c: getattr(self, c) for c in self.COLUMNS}


def aggregate(runs: Sequence[RunMetrics], agent: Optional[str] = None) -> SummaryTable:
    if not runs:
        raise ValueError("cannot aggregate an empty list of runs")
    mission = np.array([[r.mission_success for r in m.records] for m in runs], dtype=float)
    collect = np.array([[r.info_collection_success for r in m.records] for m in runs], dtype=float)
    reward = np.array([[r.total_reward for r in m.records] for m in runs], dtype=float)
    pairs = [rec for m in runs for rec in m.recovery]
    times = [rec.recovery_time for rec in pairs if rec.recovered]
    first_shift = runs[0].shifts[0].episode if runs[0].shifts else None
    n = len(runs)
    stderr = reward.std(axis=0, ddof=1) / math.sqrt(n) if n > 1 else np.zeros(reward.shape[1])
    return SummaryTable(
        agent=agent or runs[0].agent,
        mission_success_pct=100.0 * mission.mean(),
        info_collection_pct=100.0 * collect.mean(),
        recovery_success_pct=100.0 * len(times) / len(pairs) if pairs else None,
        mean_recovery_time=float(np.mean(times)) if times else None,
        mean_reward_per_episode=float(reward.mean()),
        post_shift_mission_pct=100.0 * mission[:, first_shift:].mean() if first_shift is not None else None,
        runs=n,
        runs_fully_recovered_pct=(100.0 * sum(all(r.recovered for r in m.recovery) for m in runs) / n
                                  if pairs else None),
        curve_mean=reward.mean(axis=0),
        curve_stderr=stderr,
    )


def _train_job(args):
    return run_training(*args)


def run_many(spec: ScenarioSpec, kind: AgentKind, cfg: AgentConfig = AgentConfig(),
             workers: int = 1) -> List[RunMetrics]:
    """``spec.runs`` independent runs with seeds ``spec.seed + i``; results are in seed order."""
    jobs = [(spec, kind, spec.seed + i, cfg) for i in range(spec.runs)]
    if workers <= 1:
        return [_train_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(_train_job, jobs))


def run_ablation(spec: ScenarioSpec, cfg: AgentConfig = AgentConfig(),
                 workers: int = 1) -> List[Tuple[str, SummaryTable, List[RunMetrics]]]:
    """Full agent plus the six ablations, all on the same run seeds."""
    out = []
    for label, kind in ABLATIONS:
        runs = run_many(spec, kind, cfg, workers)
        out.append((label, aggregate(runs, label), runs))
    return out


def format_summary(tables: Sequence[SummaryTable]) -> str:
    """Tab-separated summary with a fixed column order."""
    lines = ["\t".join(SummaryTable.COLUMNS)]
    for t in tables:
        cells = []
        for v in t.row().values():
            if v is None:
                cells.append("NA")
            elif isinstance(v, float):
                cells.append(f"{v:.4f}")
            else:
                cells.append(str(v))
        lines.append("\t".join(cells))
    return "\n".join(lines) + "\n"


def format_curve(table: SummaryTable) -> str:
    lines = ["episode,mean_reward,stderr"]
    for ep, (m, se) in enumerate(zip(table.curve_mean, table.curve_stderr)):
        lines.append(f"{ep},{m:.6f},{se:.6f}")
    return "\n".join(lines) + "\n"


def format_events(runs: Sequence[RunMetrics]) -> str:
    lines = []
    for m in runs:
        for rec in sorted(m.shifts + m.detections, key=lambda r: (r.episode, r.source)):
            lines.append(f"{m.agent}\t{m.seed}\t{rec.to_line()}")
    return "\n".join(lines) + ("\n" if lines else "")
