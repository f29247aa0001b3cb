"""
Noticing a shift without being told
===================================

With ``mode="detected"`` the agent gets no operator notice. It watches its own
item-collection success and adapts when the recent window falls well below the
one before it.
"""

from camiq.adaptation import AdaptationConfig
from camiq.harness import AgentConfig, ScenarioSpec, run_training
from camiq.policy import AgentKind

spec = ScenarioSpec.named("single_shift", runs=1, episodes=2500)
cfg = AgentConfig(adaptation=AdaptationConfig(mode="detected"))
m = run_training(spec, AgentKind("camiq"), 0, cfg)

print("operator shifts (hidden from the agent):")
for rec in m.shifts:
    print("  ", rec.to_line())
print("detector triggers:")
for rec in m.detections:
    print("  ", rec.to_line())
print("recovery:", m.recovery[0])

# Early triggers are the detector reacting to noisy learning before the shift; each one
# still costs a boost and a partial reset, which is why explicit notice is the default.
