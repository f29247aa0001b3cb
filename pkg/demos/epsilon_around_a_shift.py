"""
Exploration rate around a priority shift
========================================

The linear schedule falls from 1.0 to 0.1 over the run. When a shift is
announced the rate is doubled (capped at 1) and decays back to the linear
value over 50 episodes.
"""

from camiq.adaptation import AdaptationConfig, apply_boost
from camiq.policy import EpsilonSchedule, epsilon_at

plain = EpsilonSchedule(horizon=5000)
boosted = apply_boost(plain, epsilon_at(plain, 1700), AdaptationConfig(), 1700)

for ep in (1690, 1699, 1700, 1705, 1710, 1725, 1740, 1749, 1750, 1800):
    a, b = epsilon_at(plain, ep), epsilon_at(boosted, ep)
    bar = "#" * int(round(b * 40))
    print(f"{ep:5d}  linear {a:.3f}  boosted {b:.3f}  {bar}")
