"""
Three agents meet a priority shift
==================================

A small version of the single-shift experiment: two runs per agent on the
bundled pool. The ordering changes from X→Y→Z to Y→Z→X at episode 1700.
Pass a run count as the first argument for a bigger sample (10 runs take a
minute or so).
"""

import sys

from camiq.harness import ScenarioSpec, aggregate, format_summary, run_many
from camiq.policy import AgentKind

runs = int(sys.argv[1]) if len(sys.argv) > 1 else 2
spec = ScenarioSpec.named("single_shift", runs=runs, episodes=2500)
tables = []
for name in ("baseline", "baseline_boosted", "camiq"):
    results = run_many(spec, AgentKind(name))
    tables.append(aggregate(results, name))
    for m in results:
        r = m.recovery[0]
        print(f"{name:17s} seed {m.seed} layout {m.layout_id}  recovered {r.recovered!s:5s} "
              f"after {r.recovery_time} episodes")

print()
print(format_summary(tables), end="")
