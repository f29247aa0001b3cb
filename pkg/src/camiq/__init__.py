"""Dual-critic tabular Q-learning with priority-aware exploration for a SAR gridworld."""

from .env import Action, InformationSpace, Layout, RewardConfig, reset, step, state_index, swap_priorities
from .layouts import default_pool, load_layout_pool

__version__ = "0.1.0"
