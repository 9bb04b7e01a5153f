"""
分析模块

参数扫描与图形预设
"""

from .sweeps import FIGURE_PRESETS, SweepError, SweepRunner, loss_threshold

__all__ = [
    'FIGURE_PRESETS',
    'SweepError',
    'SweepRunner',
    'loss_threshold'
]
