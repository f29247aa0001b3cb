"""Command-line entry point: ``camiq run|ablate|layouts|oracle``.

Every run writes into ``--out``: the fully resolved ``config.json``, ``summary.tsv``,
one ``curve_<agent>.csv`` per agent and ``events.log``. Files are written to a
temporary name and renamed into place, so a failed run leaves no half-written file.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import re
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence

from . import env as E
from .adaptation import AdaptationConfig
from .critics import IntrinsicWeights, LearningConfig
from .harness import (
    AgentConfig,
    ScenarioSpec,
    SCENARIOS,
    aggregate,
    format_curve,
    format_events,
    format_summary,
    run_ablation,
    run_many,
)
from .layouts import format_layouts, load_layout_pool
from .oracle import optimal_return, shortest_mission_moves, shortest_path_return
from .policy import AGENT_KINDS, AgentKind

FULL_SCALE_RUNS = 100
_SECTIONS = {
    "rewards": E.RewardConfig,
    "weights": IntrinsicWeights,
    "learning": LearningConfig,
    "adaptation": AdaptationConfig,
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    scenario: str = "single_shift"
    agent: str = "all"
    runs: int = 10
    episodes: int = 5000
    seed: int = 0
    out: str = "out"
    workers: int = 1
    ablation: bool = False
    layouts: Optional[str] = None
    eps0: float = 1.0
    eps_min: float = 0.1
    recovery_fraction: float = 0.8
    rewards: E.RewardConfig = field(default_factory=E.RewardConfig)
    weights: IntrinsicWeights = field(default_factory=IntrinsicWeights)
    learning: LearningConfig = field(default_factory=LearningConfig)
    adaptation: AdaptationConfig = field(default_factory=AdaptationConfig)

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"scenario must be one of {SCENARIOS}, got {self.scenario!r}")
        if self.agent != "all" and self.agent not in AGENT_KINDS:
            raise ConfigError(f"agent must be 'all' or one of {AGENT_KINDS}, got {self.agent!r}")
        for name in ("runs", "episodes", "workers"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} >= 1 violated: {getattr(self, name)}")
        if not 0 < self.recovery_fraction <= 1:
            raise ConfigError("0 < recovery_fraction <= 1 violated")

    @property
    def agents(self) -> List[str]:
        return list(AGENT_KINDS) if self.agent == "all" else [self.agent]

    def agent_config(self) -> AgentConfig:
        return AgentConfig(self.rewards, self.weights, self.learning, self.adaptation,
                           self.eps0, self.eps_min, self.recovery_fraction)

    def scenario_spec(self) -> ScenarioSpec:
        pool = tuple(load_layout_pool(Path(self.layouts))) if self.layouts else None
        return ScenarioSpec.named(self.scenario, episodes=self.episodes, runs=self.runs,
                                  seed=self.seed, layout_pool=pool)

    def to_dict(self) -> Dict[str, Any]:
        return dataclasses.asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _build(cls, values: Mapping[str, Any], where: str):
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(values) - names)
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(unknown)}")
    try:
        return cls(**values)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from None


def parse_config(data: Optional[Mapping[str, Any]] = None, **overrides: Any) -> RunConfig:
    """Resolve a config mapping (as loaded from JSON) plus flag overrides into a RunConfig.

    Flag overrides whose value is None are ignored. Unknown keys are errors.
    """
    data = dict(data or {})
    data.update({k: v for k, v in overrides.items() if v is not None})
    top = {}
    for key, value in data.items():
        if key in _SECTIONS:
            if not isinstance(value, Mapping):
                raise ConfigError(f"section {key!r} must be an object")
            top[key] = _build(_SECTIONS[key], value, key)
        else:
            top[key] = value
    return _build(RunConfig, top, "config")


def load_config_file(path: Path) -> Dict[str, Any]:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return data


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def slug(label: str) -> str:
    return re.sub(r"[^a-z0-9]+", "_", label.lower()).strip("_")


def execute(cfg: RunConfig) -> Dict[str, str]:
    """Run everything the config asks for and return {file name: contents}."""
    spec = cfg.scenario_spec()
    acfg = cfg.agent_config()
    files = {"config.json": cfg.to_json()}
    if cfg.ablation:
        rows = run_ablation(spec, acfg, cfg.workers)
        tables = [t for _, t, _ in rows]
        for label, t, _ in rows:
            files[f"curve_{slug(label)}.csv"] = format_curve(t)
        files["events.log"] = "".join(format_events(runs) for _, _, runs in rows)
    else:
        tables, events = [], []
        for name in cfg.agents:
            runs = run_many(spec, AgentKind(name), acfg, cfg.workers)
            t = aggregate(runs, name)
            tables.append(t)
            files[f"curve_{name}.csv"] = format_curve(t)
            events.append(format_events(runs))
        files["events.log"] = "".join(events)
    files["summary.tsv"] = format_summary(tables)
    return files


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scenario", choices=SCENARIOS)
    p.add_argument("--agent", choices=("all",) + tuple(AGENT_KINDS))
    p.add_argument("--runs", type=int)
    p.add_argument("--episodes", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--config", type=Path, help="JSON file; flags override its values")
    p.add_argument("--out", type=str)
    p.add_argument("--workers", type=int, help="cap on parallel worker processes")
    p.add_argument("--layouts", type=str, help="layout pool file (default: bundled pool)")
    p.add_argument("--paper-scale", action="store_true", help=f"use {FULL_SCALE_RUNS} runs")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="camiq", description="Priority-shift gridworld experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="train agents on a scenario and write summary, curves and events")
    _add_run_flags(run)
    run.add_argument("--ablation", action="store_true", default=None,
                     help="run the full agent and its six ablations instead")
    ablate = sub.add_parser("ablate", help="full agent plus six ablations on paired seeds")
    _add_run_flags(ablate)
    lay = sub.add_parser("layouts", help="validate and print a layout pool")
    lay.add_argument("--file", type=Path)
    orc = sub.add_parser("oracle", help="optimal return of a layout under a fixed ordering")
    orc.add_argument("--layout", default="L1", help="layout id in the pool")
    orc.add_argument("--ordering", default="X→Y→Z")
    orc.add_argument("--file", type=Path)
    orc.add_argument("--gamma", type=float, default=0.99)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    data = load_config_file(args.config) if args.config else {}
    overrides = {k: getattr(args, k) for k in
                 ("scenario", "agent", "runs", "episodes", "seed", "out", "workers", "layouts")}
    if args.command == "ablate":
        overrides["ablation"] = True
        if args.scenario is None and "scenario" not in data:
            overrides["scenario"] = "multi_shift"
    else:
        overrides["ablation"] = args.ablation
    if args.paper_scale:
        overrides["runs"] = FULL_SCALE_RUNS
    return parse_config(data, **overrides)


def _cmd_run(args) -> int:
    cfg = config_from_args(args)
    files = execute(cfg)
    out = Path(cfg.out)
    for name, text in files.items():
        write_atomic(out / name, text)
    print(files["summary.tsv"], end="")
    return 0


def _cmd_layouts(args) -> int:
    pool = load_layout_pool(args.file)
    print(format_layouts(pool), end="")
    return 0


def _cmd_oracle(args) -> int:
    pool = {lay.layout_id: lay for lay in load_layout_pool(args.file)}
    if args.layout not in pool:
        raise ConfigError(f"no layout {args.layout!r}; pool has {', '.join(pool)}")
    layout = pool[args.layout]
    info = E.InformationSpace.create(args.ordering, items=layout.items)
    vi = optimal_return(layout, info, gamma=args.gamma)
    bfs = shortest_path_return(layout, info)
    print(f"layout\t{layout.layout_id}")
    print(f"ordering\t{'→'.join(info.sequence)}")
    print(f"optimal_return\t{vi:g}")
    print(f"shortest_route_return\t{bfs if bfs is None else format(bfs, 'g')}")
    print(f"shortest_moves\t{shortest_mission_moves(layout, info)}")
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {"run": _cmd_run, "ablate": _cmd_run, "layouts": _cmd_layouts, "oracle": _cmd_oracle}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"camiq: config error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"camiq: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
