"""
熵与密钥率模块

二元熵、量子失协下界、FRFI 密钥率，以及 RFI 与六态协议基线
"""

import math
from typing import Optional, Sequence

import numpy as np
from scipy.special import entr

from ..data.models import Basis, BellSpectrum, RateReport, SingularTriple
from ..linalg.mat3 import Mat3, as_mat3, svd3
from ..utils.logger import get_logger
from .qstate import project_singulars, spectrum_from_singulars

logger = get_logger(__name__)

DOMAIN_SLACK = 1e-12
_LN2 = math.log(2.0)


class BoundsDomainError(ValueError):
    """熵或密钥率公式的定义域异常"""
    pass


def _probability(x: float, name: str = "x") -> float:
    if not (-DOMAIN_SLACK <= x <= 1.0 + DOMAIN_SLACK):
        raise BoundsDomainError(f"{name}={x} outside [0, 1]")
    return min(max(x, 0.0), 1.0)


def binary_entropy(x: float) -> float:
    """h(x) = -x log2 x - (1-x) log2 (1-x)，h(0) = h(1) = 0"""
    x = _probability(float(x))
    if x == 0.0 or x == 1.0:
        return 0.0
    return float((entr(x) + entr(1.0 - x)) / _LN2)


def shannon_entropy(probabilities: Sequence[float]) -> float:
    """香农熵（比特），零概率项贡献 0"""
    p = np.clip(np.asarray(probabilities, dtype=np.float64), 0.0, 1.0)
    return float(entr(p).sum() / _LN2)


def _weighted_entropy(weight: float, numerator: float) -> float:
    """weight · h(numerator / weight)，权重为 0 时取极限值 0"""
    if weight <= 0.0:
        return 0.0
    return weight * binary_entropy(min(max(numerator / weight, 0.0), 1.0))


def discord_bound(l: BellSpectrum) -> float:
    """D(A|B) = 1 - (λ1+λ2) h(λ2/(λ1+λ2)) - (λ3+λ4) h(λ4/(λ3+λ4))"""
    return (
        1.0
        - _weighted_entropy(l.lambda1 + l.lambda2, l.lambda2)
        - _weighted_entropy(l.lambda3 + l.lambda4, l.lambda4)
    )


def frfi_rate(q: float, t: SingularTriple) -> float:
    """
    FRFI-QKD 渐近密钥率（未截断）

    R = 1 - h(Q) - (1+T1)/2 · h((1+T1-T2-T3)/(2(1+T1)))
              - (1-T1)/2 · h((1-T1-T2+T3)/(2(1-T1)))

    Args:
        q: 密钥基误码率
        t: 关联矩阵奇异值

    Returns:
        比特/脉冲，可能为负
    """
    q = _probability(q, "q")
    spectrum = spectrum_from_singulars(t)
    if t.det_sign > 0:
        # 正行列式时 T'_yy = +T3，直接按 Devetak-Winter 与失协下界计算
        return 1.0 - binary_entropy(q) - (1.0 - discord_bound(spectrum))

    t1, t2, t3 = t.as_tuple()
    return (
        1.0
        - binary_entropy(q)
        - _weighted_entropy((1.0 + t1) / 2.0, (1.0 + t1 - t2 - t3) / 4.0)
        - _weighted_entropy((1.0 - t1) / 2.0, (1.0 - t1 - t2 + t3) / 4.0)
    )


def rfi_rate(q: float, c_squared: float) -> float:
    """
    RFI-QKD 渐近密钥率（未截断）

    u = min(√(C²/2)/(1-Q), 1)，v = √(max(C²/2 - (1-Q)²u², 0))/Q，
    R = 1 - h(Q) - (1-Q) h((1+u)/2) - Q h((1+v)/2)
    """
    q = _probability(q, "q")
    if c_squared < 0.0:
        raise BoundsDomainError(f"c_squared={c_squared} must be nonnegative")
    if c_squared > 2.0 + 1e-9:
        raise BoundsDomainError(f"c_squared={c_squared} exceeds 2")
    half = min(c_squared, 2.0) / 2.0

    u = 1.0 if q >= 1.0 else min(math.sqrt(half) / (1.0 - q), 1.0)
    rate = 1.0 - binary_entropy(q) - (1.0 - q) * binary_entropy((1.0 + u) / 2.0)
    if q > 0.0:
        v = min(math.sqrt(max(half - (1.0 - q) ** 2 * u * u, 0.0)) / q, 1.0)
        rate -= q * binary_entropy((1.0 + v) / 2.0)
    return rate


def six_state_rate(t_zz: float, t_xx: float, t_yy: float) -> float:
    """
    六态协议密钥率：仅使用对角关联，不做参考系校正

    推断出的 λ 出现负值时按约定返回 0
    """
    if max(abs(t_zz), abs(t_xx), abs(t_yy)) > 1.0 + DOMAIN_SLACK:
        raise BoundsDomainError("Correlations must lie in [-1, 1]")
    lambdas = np.array([
        1 + t_zz + t_xx - t_yy,
        1 + t_zz - t_xx + t_yy,
        1 - t_zz + t_xx + t_yy,
        1 - t_zz - t_xx - t_yy,
    ]) / 4.0
    if np.any(lambdas < -DOMAIN_SLACK):
        return 0.0
    return 1.0 - shannon_entropy(lambdas)


def c_squared(tensor: Mat3) -> float:
    """x/y 子块四个元素的平方和"""
    block = np.asarray(tensor)[:2, :2]
    return float(np.sum(block * block))


def evaluate_tensor(
    q: float,
    tensor: Mat3,
    visibility: Optional[float] = None,
    eta: Optional[float] = None,
    gain: Optional[float] = None,
    r_frfi_stderr: Optional[float] = None,
    project: bool = False,
) -> RateReport:
    """
    由误码率与观测关联矩阵计算三种协议的密钥率

    project 为真时先把奇异值投影到物理集合（用于有统计涨落的经验估计）
    """
    tensor = as_mat3(tensor)
    singulars = svd3(tensor)
    if project:
        singulars = project_singulars(singulars)
    c2 = min(c_squared(tensor), 2.0)
    zz, xx, yy = (tensor[b.index, b.index] for b in (Basis.Z, Basis.X, Basis.Y))

    report = RateReport(
        qber=q,
        singulars=singulars,
        c_squared=c2,
        r_frfi_raw=frfi_rate(q, singulars),
        r_rfi_raw=rfi_rate(q, c2),
        r_sixstate_raw=six_state_rate(float(zz), float(xx), float(yy)),
        visibility=visibility,
        eta=eta,
        gain=gain,
        r_frfi_stderr=r_frfi_stderr,
    )
    logger.debug(
        "Evaluated key rates",
        qber=q,
        singulars=singulars.as_tuple(),
        r_frfi=report.r_frfi_raw,
        r_rfi=report.r_rfi_raw,
        r_sixstate=report.r_sixstate_raw,
    )
    return report
