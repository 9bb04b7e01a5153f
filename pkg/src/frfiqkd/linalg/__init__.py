"""
线性代数模块

3x3 实矩阵运算与单边 Jacobi 奇异值分解
"""

from .mat3 import Mat3Error, SVDConvergenceError, SVDFactors, svd3, svd3_factors

__all__ = [
    'Mat3Error',
    'SVDConvergenceError',
    'SVDFactors',
    'svd3',
    'svd3_factors'
]
