"""
信道模型模块

把损耗、暗计数、失准与参考系旋转 (θ, φ) 映射为可观测的两比特统计量
"""

from typing import Union

import numpy as np

from ..data.models import Basis, ChannelScenario, RateReport, SingularTriple
from ..linalg.mat3 import Mat3, as_mat3, diag, matmul, rot_y, rot_z, svd3, transpose
from ..security.bounds import evaluate_tensor
from ..utils.logger import get_logger

logger = get_logger(__name__)

# 理想态 Φ+ 的关联张量
IDEAL_TENSOR = diag(1.0, -1.0, 1.0)

# 参考系旋转只作用在 Bob 一侧
FRAME_CONVENTION = "bob"

# outcome_distribution 的结果顺序
OUTCOMES = ((1, 1), (1, -1), (-1, 1), (-1, -1))


class DegenerateScenarioError(ValueError):
    """场景无探测事件，统计量无定义"""
    pass


def transmittance(loss_db: float) -> float:
    """η = 10^(-loss/10)"""
    if loss_db < 0:
        raise ValueError(f"loss_db={loss_db} must be nonnegative")
    return 10.0 ** (-loss_db / 10.0)


def detection_gain(eta: float, pd: float) -> float:
    """光子到达或两个探测器任一暗计数即产生探测事件"""
    return eta + (1.0 - eta) * (1.0 - (1.0 - pd) ** 2)


def conditional_visibility(eta: float, pd: float, ed: float) -> float:
    """探测事件条件下的可见度 v = η(1-2ed) / gain"""
    gain = detection_gain(eta, pd)
    if gain <= 0.0:
        raise DegenerateScenarioError(f"No detection events possible (eta={eta}, pd={pd})")
    return eta * (1.0 - 2.0 * ed) / gain


def frame_rotation(theta: float, phi: float) -> Mat3:
    """O(θ, φ) = rot_z(φ) · rot_y(θ)"""
    return matmul(rot_z(phi), rot_y(theta))


def _visibility(s: ChannelScenario) -> float:
    return conditional_visibility(transmittance(s.loss_db), s.dark_rate, s.misalignment)


def observed_tensor(s: ChannelScenario) -> Mat3:
    """T̂ = v · diag(1,-1,1) · O(θ,φ)ᵗ"""
    rotated = matmul(IDEAL_TENSOR, transpose(frame_rotation(s.theta_rad, s.phi_rad)))
    return as_mat3(_visibility(s) * np.asarray(rotated))


def qber(s: ChannelScenario) -> float:
    """Q = (1 - ⟨σz⊗σz⟩) / 2"""
    zz = observed_tensor(s)[Basis.Z.index, Basis.Z.index]
    return float(min(max((1.0 - zz) / 2.0, 0.0), 1.0))


def _basis(value: Union[Basis, str]) -> Basis:
    return value if isinstance(value, Basis) else Basis(value)


def outcome_distribution(
    s: ChannelScenario,
    basis_a: Union[Basis, str],
    basis_b: Union[Basis, str],
) -> np.ndarray:
    """
    探测条件下的结果分布

    Returns:
        依次为 (++, +-, -+, --) 的四个概率，P(a,b) = (1 + a·b·T̂) / 4
    """
    entry = observed_tensor(s)[_basis(basis_a).index, _basis(basis_b).index]
    return np.array([(1.0 + a * b * entry) / 4.0 for a, b in OUTCOMES])


def outcome_table(s: ChannelScenario) -> np.ndarray:
    """全部九个分组的结果分布，形状 (3, 3, 4)"""
    tensor = np.asarray(observed_tensor(s))
    signs = np.array([a * b for a, b in OUTCOMES], dtype=np.float64)
    return (1.0 + tensor[:, :, None] * signs[None, None, :]) / 4.0


def analyze(s: ChannelScenario) -> RateReport:
    """解析计算单一场景的密钥率报告"""
    eta = transmittance(s.loss_db)
    gain = detection_gain(eta, s.dark_rate)
    visibility = conditional_visibility(eta, s.dark_rate, s.misalignment)
    tensor = observed_tensor(s)
    singulars = svd3(tensor)
    # 物理关联张量的最大奇异值不超过 1
    SingularTriple.physical(*singulars.as_tuple(), det_sign=singulars.det_sign)
    report = evaluate_tensor(qber(s), tensor, visibility=visibility, eta=eta, gain=gain)
    logger.debug(
        "Analyzed scenario",
        theta=s.theta_rad,
        phi=s.phi_rad,
        loss_db=s.loss_db,
        qber=report.qber,
    )
    return report
