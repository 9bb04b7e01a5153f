"""
测试辅助函数
"""

import math

import numpy as np
from scipy.spatial.transform import Rotation


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """随机 SO(3) 矩阵（四元数归一化）"""
    return Rotation.from_quat(rng.standard_normal(4)).as_matrix()


def binary_entropy_reference(x: float) -> float:
    """独立的二元熵实现"""
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


def frfi_closed_form(q: float, v: float) -> float:
    """三个奇异值都等于 v 时的 FRFI 密钥率"""
    return (
        1.0
        - binary_entropy_reference(q)
        - (1.0 + v) / 2.0 * binary_entropy_reference((1.0 - v) / (2.0 * (1.0 + v)))
        - (1.0 - v) / 2.0
    )
