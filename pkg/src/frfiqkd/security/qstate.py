"""
两比特量子态模块

实现安全性分析中的化简：Pauli 展开、局域幺正对角化、旋转平均（twirl）、
σ_AB 构造以及 Bell 对角谱
"""

import math
from typing import Optional

import numpy as np
from scipy.spatial.transform import Rotation
from scipy.special import entr

from ..data.models import (
    BellSpectrum,
    LocalUnitaryPair,
    PauliDecomposition,
    SingularTriple,
    TwoQubitState,
)
from ..linalg.mat3 import Mat3, as_mat3, matmul, svd3_factors, transpose
from ..utils.logger import get_logger

logger = get_logger(__name__)

BELL_DIAGONAL_TOL = 1e-8
CLAMP_TOL = 1e-9

IDENTITY2 = np.eye(2, dtype=np.complex128)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
PAULI = (SIGMA_X, SIGMA_Y, SIGMA_Z)

# PAULI_PRODUCTS[i, j] = σ_i ⊗ σ_j，下标 0 为单位矩阵
_BASIS_1Q = (IDENTITY2,) + PAULI
PAULI_PRODUCTS = np.array([[np.kron(p, q) for q in _BASIS_1Q] for p in _BASIS_1Q])

# 列依次为 |Φ1⟩=(|00⟩+|11⟩)/√2, |Φ2⟩=(|00⟩-|11⟩)/√2, |Φ3⟩=(|01⟩+|10⟩)/√2, |Φ4⟩=(|01⟩-|10⟩)/√2
BELL_BASIS = np.array(
    [
        [1, 1, 0, 0],
        [0, 0, 1, 1],
        [0, 0, 1, -1],
        [1, -1, 0, 0],
    ],
    dtype=np.complex128,
) / math.sqrt(2.0)

# 将奇异值 (t1, t2, t3) 放到 (z, x, y) 轴上的循环置换，行列式为 +1
_AXIS_PERMUTATION = as_mat3([[0, 0, 1], [1, 0, 0], [0, 1, 0]])


class UnphysicalStateError(ValueError):
    """非物理态或非物理参数"""
    pass


class BellDiagonalityError(ValueError):
    """输入态不是 Bell 对角态"""
    pass


def pauli_decompose(s: TwoQubitState) -> PauliDecomposition:
    """Pauli 展开：a_i = Tr[ρ σ_i⊗I]，b_j = Tr[ρ I⊗σ_j]，t_ij = Tr[ρ σ_i⊗σ_j]"""
    coefficients = np.einsum("ijab,ba->ij", PAULI_PRODUCTS, s.rho).real
    return PauliDecomposition(a=coefficients[1:, 0], b=coefficients[0, 1:], t=coefficients[1:, 1:])


def reconstruct(d: PauliDecomposition) -> TwoQubitState:
    """由 Pauli 系数重建密度矩阵"""
    coefficients = np.zeros((4, 4))
    coefficients[0, 0] = 1.0
    coefficients[1:, 0] = d.a
    coefficients[0, 1:] = d.b
    coefficients[1:, 1:] = d.t
    rho = np.einsum("ij,ijab->ab", coefficients, PAULI_PRODUCTS) / 4.0
    rho = (rho + rho.conj().T) / 2.0

    min_eig = float(np.linalg.eigvalsh(rho).min())
    if min_eig < -1e-10:
        raise UnphysicalStateError(
            f"Decomposition does not describe a positive state (min eigenvalue {min_eig:.3e})"
        )
    return TwoQubitState(rho=rho)


def twirl(s: TwoQubitState) -> TwoQubitState:
    """(ρ + Σ_i σ_i⊗σ_i ρ σ_i⊗σ_i) / 4"""
    rho = s.rho.copy()
    for i in range(1, 4):
        p = PAULI_PRODUCTS[i, i]
        rho = rho + p @ s.rho @ p
    return TwoQubitState(rho=rho / 4.0)


def lift_rotation(o: Mat3) -> np.ndarray:
    """
    SO(3) 到 SU(2) 的提升

    由旋转矩阵取单位四元数 (w, x, y, z)，U = w·I - i(x σx + y σy + z σz)，
    满足 U σ_k U† = Σ_j O_jk σ_j。双覆盖的整体符号不影响共轭。
    """
    x, y, z, w = Rotation.from_matrix(np.asarray(o)).as_quat()
    return w * IDENTITY2 - 1j * (x * SIGMA_X + y * SIGMA_Y + z * SIGMA_Z)


def diagonalizing_unitaries(d: PauliDecomposition) -> LocalUnitaryPair:
    """
    求局域幺正 U_A ⊗ U_B 使关联张量对角化

    共轭后张量变为 O_A · t · O_Bᵗ；取 O_A = Pᵗ·Uᵗ、O_B = Pᵗ·Vᵗ，
    得到 T'_zz = t1 >= T'_xx = t2 >= |T'_yy| = t3。
    """
    if not np.any(d.t):
        return LocalUnitaryPair(u_a=IDENTITY2, u_b=IDENTITY2)

    factors = svd3_factors(d.t)
    permutation_t = transpose(_AXIS_PERMUTATION)
    o_a = matmul(permutation_t, transpose(factors.u))
    o_b = matmul(permutation_t, transpose(factors.v))
    return LocalUnitaryPair(u_a=lift_rotation(o_a), u_b=lift_rotation(o_b))


def conjugate(s: TwoQubitState, pair: LocalUnitaryPair, inverse: bool = False) -> TwoQubitState:
    """(U_A⊗U_B) ρ (U_A⊗U_B)†，inverse 时使用 U†"""
    w = pair.kron
    if inverse:
        w = w.conj().T
    rho = w @ s.rho @ w.conj().T
    return TwoQubitState(rho=(rho + rho.conj().T) / 2.0)


def bell_diagonal_form(s: TwoQubitState) -> TwoQubitState:
    """局域旋转后再 twirl 得到的 Bell 对角态 ρ̄"""
    pair = diagonalizing_unitaries(pauli_decompose(s))
    return twirl(conjugate(s, pair))


def sigma_of(s: TwoQubitState) -> TwoQubitState:
    """σ_AB = (U_A⊗U_B)† · twirl(U_A⊗U_B ρ U_A†⊗U_B†) · (U_A⊗U_B)"""
    pair = diagonalizing_unitaries(pauli_decompose(s))
    return conjugate(twirl(conjugate(s, pair)), pair, inverse=True)


def bell_spectrum(s: TwoQubitState) -> BellSpectrum:
    """Bell 对角态的本征值（降序）"""
    in_bell = BELL_BASIS.conj().T @ s.rho @ BELL_BASIS
    off_diagonal = np.max(np.abs(in_bell - np.diag(np.diag(in_bell))))
    if off_diagonal > BELL_DIAGONAL_TOL:
        raise BellDiagonalityError(
            f"State is not Bell diagonal (largest off-diagonal entry {off_diagonal:.3e})"
        )
    return BellSpectrum.from_values(np.diag(in_bell).real)


def spectrum_from_singulars(t: SingularTriple) -> BellSpectrum:
    """
    由奇异值反解 Bell 谱

    T'_zz = T1, T'_xx = T2, T'_yy = det_sign·T3；det_sign = -1 时
    λ1=(1+T1+T2+T3)/4, λ2=(1+T1-T2-T3)/4, λ3=(1-T1+T2-T3)/4, λ4=(1-T1-T2+T3)/4
    """
    t1, t2, t3 = t.as_tuple()
    t_yy = t.det_sign * t3
    values = np.array([
        1 + t1 + t2 - t_yy,
        1 + t1 - t2 + t_yy,
        1 - t1 + t2 + t_yy,
        1 - t1 - t2 - t_yy,
    ]) / 4.0
    values = np.sort(values)[::-1]

    if values[3] < -CLAMP_TOL:
        raise UnphysicalStateError(
            f"Singular values {t.as_tuple()} give negative Bell weight {values[3]:.3e}"
        )
    if values[3] < 0.0:
        logger.warning("Clamped small negative Bell weight", value=float(values[3]))
        values[3] = 0.0
        values = values / values.sum()
    return BellSpectrum.from_values(values)


def project_singulars(t: SingularTriple) -> SingularTriple:
    """
    将经验奇异值投影到物理集合

    在 Bell 权重空间做到概率单纯形的欧氏投影，再换算回奇异值。
    已物理的输入原样返回。
    """
    t1, t2, t3 = t.as_tuple()
    t_yy = t.det_sign * t3
    weights = np.array([
        1 + t1 + t2 - t_yy,
        1 + t1 - t2 + t_yy,
        1 - t1 + t2 + t_yy,
        1 - t1 - t2 - t_yy,
    ]) / 4.0
    if weights.min() >= -CLAMP_TOL:
        return t

    ordered = np.sort(weights)[::-1]
    cumulative = np.cumsum(ordered) - 1.0
    ranks = np.arange(1, 5)
    count = ranks[ordered - cumulative / ranks > 0][-1]
    shift = cumulative[count - 1] / count
    l1, l2, l3, l4 = np.maximum(weights - shift, 0.0)

    zz = l1 + l2 - l3 - l4
    xx = l1 - l2 + l3 - l4
    yy = -l1 + l2 + l3 - l4
    magnitudes = sorted((abs(zz), abs(xx), abs(yy)), reverse=True)
    det_sign = 1 if zz * xx * yy > 0 else -1
    logger.warning("Projected unphysical singular values", before=t.as_tuple(),
                   after=tuple(magnitudes))
    return SingularTriple(t1=magnitudes[0], t2=magnitudes[1], t3=magnitudes[2], det_sign=det_sign)


def von_neumann_entropy(s: TwoQubitState) -> float:
    """冯诺依曼熵（比特）"""
    eigenvalues = np.clip(np.linalg.eigvalsh(s.rho), 0.0, 1.0)
    return float(entr(eigenvalues).sum() / math.log(2.0))


def random_state(rng: Optional[np.random.Generator] = None) -> TwoQubitState:
    """随机密度矩阵：G·G† / Tr，G 为复高斯矩阵"""
    rng = rng or np.random.default_rng()
    g = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    rho = g @ g.conj().T
    rho = rho / np.trace(rho).real
    return TwoQubitState(rho=(rho + rho.conj().T) / 2.0)
