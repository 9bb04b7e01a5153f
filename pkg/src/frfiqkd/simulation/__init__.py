"""
仿真模块

信道模型与蒙特卡洛协议仿真
"""

from .channel import DegenerateScenarioError, analyze
from .protocol import IncompleteTableError, SimulationError, analyze_counts, run_simulation

__all__ = [
    'DegenerateScenarioError',
    'IncompleteTableError',
    'SimulationError',
    'analyze',
    'analyze_counts',
    'run_simulation'
]
