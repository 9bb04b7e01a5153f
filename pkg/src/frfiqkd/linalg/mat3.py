"""
3x3 实矩阵模块

提供 SO(3) 旋转、矩阵运算以及单边 Jacobi 奇异值分解
"""

import math
from typing import NamedTuple, Optional, Sequence, Union

import numpy as np
from numpy.typing import NDArray

from ..data.models import SingularTriple
from ..utils.config import get_config
from ..utils.logger import get_logger

logger = get_logger(__name__)

Mat3 = NDArray[np.float64]

# 范数低于 ZERO_COLUMN_SCALE·‖m‖ 的列视为数值零列
ZERO_COLUMN_SCALE = 16.0 * np.finfo(np.float64).eps


class Mat3Error(ValueError):
    """3x3 矩阵输入异常"""
    pass


class SVDConvergenceError(ArithmeticError):
    """Jacobi 迭代未在预算内收敛"""
    pass


class SVDFactors(NamedTuple):
    """m = u · diag(t1, t2, ±t3) · vᵗ，u 与 v 均属于 SO(3)"""
    u: Mat3
    singulars: SingularTriple
    v: Mat3
    flipped: bool

    @property
    def signed_diagonal(self) -> Mat3:
        """带符号的对角因子"""
        t1, t2, t3 = self.singulars.as_tuple()
        return diag(t1, t2, -t3 if self.flipped else t3)


def _freeze(array: np.ndarray) -> Mat3:
    array.setflags(write=False)
    return array


def as_mat3(values: Union[Sequence[float], np.ndarray]) -> Mat3:
    """转换为只读 3x3 矩阵，拒绝非有限值"""
    try:
        m = np.array(values, dtype=np.float64).reshape(3, 3)
    except (TypeError, ValueError) as e:
        raise Mat3Error(f"Cannot build a 3x3 matrix: {e}") from e
    if not np.all(np.isfinite(m)):
        raise Mat3Error("Matrix entries must be finite")
    return _freeze(m)


def identity() -> Mat3:
    return _freeze(np.eye(3))


def diag(a: float, b: float, c: float) -> Mat3:
    return as_mat3(np.diag([a, b, c]))


def rot_y(theta: float) -> Mat3:
    """绕 y 轴旋转，z 轴向 x 轴转过 theta"""
    if not math.isfinite(theta):
        raise Mat3Error(f"Angle must be finite, got {theta}")
    c, s = math.cos(theta), math.sin(theta)
    return as_mat3([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(phi: float) -> Mat3:
    """绕 z 轴旋转，x 轴向 y 轴转过 phi"""
    if not math.isfinite(phi):
        raise Mat3Error(f"Angle must be finite, got {phi}")
    c, s = math.cos(phi), math.sin(phi)
    return as_mat3([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def matmul(a: Mat3, b: Mat3) -> Mat3:
    return _freeze(np.asarray(a, dtype=np.float64) @ np.asarray(b, dtype=np.float64))


def transpose(a: Mat3) -> Mat3:
    return _freeze(np.array(np.asarray(a, dtype=np.float64).T))


def _complete_basis(u: np.ndarray, known: np.ndarray) -> np.ndarray:
    """用 Gram-Schmidt 补全零奇异值对应的正交列"""
    basis = [u[:, k] for k in range(3) if known[k]]
    for k in range(3):
        if known[k]:
            continue
        best, best_norm = None, -1.0
        for e in np.eye(3):
            r = e - sum((e @ q) * q for q in basis) if basis else e.copy()
            norm = np.linalg.norm(r)
            if norm > best_norm:
                best, best_norm = r, norm
        column = best / best_norm
        u[:, k] = column
        basis.append(column)
    return u


def _jacobi(m: np.ndarray, tolerance: float, max_sweeps: int):
    """单边 Jacobi：对列做平面旋转直到两两正交"""
    a = np.array(m, dtype=np.float64)
    v = np.eye(3)
    floor = (ZERO_COLUMN_SCALE * np.linalg.norm(a)) ** 2
    for sweep in range(1, max_sweeps + 1):
        rotated = False
        for p, q in ((0, 1), (0, 2), (1, 2)):
            ap, aq = a[:, p], a[:, q]
            alpha = ap @ ap
            beta = aq @ aq
            gamma = ap @ aq
            if min(alpha, beta) <= floor or abs(gamma) <= tolerance * math.sqrt(alpha * beta):
                continue
            rotated = True
            zeta = (beta - alpha) / (2.0 * gamma)
            t = math.copysign(1.0, zeta) / (abs(zeta) + math.sqrt(1.0 + zeta * zeta))
            c = 1.0 / math.sqrt(1.0 + t * t)
            s = c * t
            rotation = np.array([[c, s], [-s, c]])
            a[:, [p, q]] = a[:, [p, q]] @ rotation
            v[:, [p, q]] = v[:, [p, q]] @ rotation
        if not rotated:
            return a, v, sweep
    raise SVDConvergenceError(f"Jacobi SVD did not converge within {max_sweeps} sweeps")


def svd3_factors(m: Mat3, tolerance: Optional[float] = None,
                 max_sweeps: Optional[int] = None) -> SVDFactors:
    """
    奇异值分解（带因子）

    Args:
        m: 3x3 实矩阵
        tolerance: 列正交性的相对阈值，默认取配置
        max_sweeps: 最大扫描轮数，默认取配置

    Returns:
        SVDFactors，u、v 属于 SO(3)，行列式修正的符号并入最小奇异值轴
    """
    config = get_config()
    m = as_mat3(m)
    a, v, sweeps = _jacobi(
        m,
        config.svd_tolerance if tolerance is None else tolerance,
        config.svd_max_sweeps if max_sweeps is None else max_sweeps,
    )

    sigma = np.linalg.norm(a, axis=0)
    order = np.argsort(-sigma, kind="stable")
    sigma, a, v = sigma[order], a[:, order], v[:, order]

    known = sigma > ZERO_COLUMN_SCALE * np.linalg.norm(m)
    u = np.zeros((3, 3))
    u[:, known] = a[:, known] / sigma[known]
    if not np.all(known):
        u = _complete_basis(u, known)

    sign = 1.0
    if np.linalg.det(u) < 0:
        u[:, 2] = -u[:, 2]
        sign = -sign
    if np.linalg.det(v) < 0:
        v[:, 2] = -v[:, 2]
        sign = -sign

    det_sign = 1 if sign > 0 and sigma[2] > 0 else -1
    singulars = SingularTriple(t1=float(sigma[0]), t2=float(sigma[1]), t3=float(sigma[2]),
                               det_sign=det_sign)
    logger.debug("svd3 converged", sweeps=sweeps, singulars=singulars.as_tuple())
    return SVDFactors(u=_freeze(u), singulars=singulars, v=_freeze(v), flipped=sign < 0)


def svd3(m: Mat3) -> SingularTriple:
    """奇异值（降序）"""
    return svd3_factors(m).singulars
