"""
安全性分析模块

两比特态化简、熵界与密钥率公式
"""

from .bounds import BoundsDomainError, evaluate_tensor, frfi_rate, rfi_rate, six_state_rate
from .qstate import BellDiagonalityError, UnphysicalStateError

__all__ = [
    'BellDiagonalityError',
    'BoundsDomainError',
    'UnphysicalStateError',
    'evaluate_tensor',
    'frfi_rate',
    'rfi_rate',
    'six_state_rate'
]
