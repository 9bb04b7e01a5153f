"""
两比特量子态化简测试
"""

import math

import numpy as np
import pytest
from pydantic import ValidationError

from src.frfiqkd.data.models import PauliDecomposition, SingularTriple, TwoQubitState
from src.frfiqkd.linalg.mat3 import svd3
from src.frfiqkd.security.qstate import (
    PAULI,
    BellDiagonalityError,
    UnphysicalStateError,
    bell_diagonal_form,
    bell_spectrum,
    conjugate,
    diagonalizing_unitaries,
    lift_rotation,
    pauli_decompose,
    project_singulars,
    random_state,
    reconstruct,
    sigma_of,
    spectrum_from_singulars,
    twirl,
    von_neumann_entropy,
)
from tests.helpers import random_rotation


def _pure(vector):
    psi = np.asarray(vector, dtype=np.complex128)
    psi = psi / np.linalg.norm(psi)
    return TwoQubitState(rho=np.outer(psi, psi.conj()))


@pytest.fixture
def phi_plus():
    """|Φ+⟩ = (|00⟩ + |11⟩)/√2"""
    return _pure([1, 0, 0, 1])


class TestPauliDecomposition:
    """测试 Pauli 展开"""

    def test_phi_plus(self, phi_plus):
        """测试 Φ+ 的关联张量为 diag(1,-1,1)"""
        d = pauli_decompose(phi_plus)
        np.testing.assert_allclose(d.t, np.diag([1.0, -1.0, 1.0]), atol=1e-15)
        np.testing.assert_allclose(d.a, 0.0, atol=1e-15)
        np.testing.assert_allclose(d.b, 0.0, atol=1e-15)

    def test_product_state(self):
        """测试 |00⟩ 的局域 Bloch 矢量"""
        d = pauli_decompose(_pure([1, 0, 0, 0]))
        np.testing.assert_allclose(d.a, [0.0, 0.0, 1.0], atol=1e-15)
        np.testing.assert_allclose(d.b, [0.0, 0.0, 1.0], atol=1e-15)
        assert d.t[2, 2] == pytest.approx(1.0)

    def test_round_trip(self, rng):
        """测试展开后重建得到原密度矩阵"""
        for _ in range(50):
            state = random_state(rng)
            np.testing.assert_allclose(reconstruct(pauli_decompose(state)).rho, state.rho,
                                       atol=1e-10)

    def test_reconstruct_unphysical(self):
        """测试 t = I 不对应正定态"""
        d = PauliDecomposition(a=np.zeros(3), b=np.zeros(3), t=np.eye(3))
        with pytest.raises(UnphysicalStateError):
            reconstruct(d)


class TestStateValidation:
    """测试密度矩阵校验"""

    def test_rejects_non_psd(self):
        """测试拒绝非半正定矩阵"""
        with pytest.raises(ValidationError):
            TwoQubitState(rho=np.diag([0.6, 0.5, 0.1, -0.2]))

    def test_rejects_bad_trace(self):
        """测试拒绝迹不为 1"""
        with pytest.raises(ValidationError):
            TwoQubitState(rho=np.eye(4) / 2.0)

    def test_rejects_non_hermitian(self):
        """测试拒绝非厄米矩阵"""
        rho = np.eye(4, dtype=np.complex128) / 4.0
        rho[0, 1] = 0.1j
        with pytest.raises(ValidationError):
            TwoQubitState(rho=rho)

    def test_random_state_is_reproducible(self):
        """测试相同种子得到相同随机态"""
        a = random_state(np.random.default_rng(7))
        b = random_state(np.random.default_rng(7))
        np.testing.assert_array_equal(a.rho, b.rho)


class TestTwirl:
    """测试旋转平均"""

    def test_twirl_keeps_diagonal_correlations(self, rng):
        """测试 twirl 只保留关联张量对角元"""
        state = random_state(rng)
        original = pauli_decompose(state)
        twirled = pauli_decompose(twirl(state))
        np.testing.assert_allclose(twirled.t, np.diag(np.diag(original.t)), atol=1e-12)
        np.testing.assert_allclose(twirled.a, 0.0, atol=1e-12)
        np.testing.assert_allclose(twirled.b, 0.0, atol=1e-12)

    def test_twirl_of_bell_state(self, phi_plus):
        """测试 Bell 态在 twirl 下不变"""
        np.testing.assert_allclose(twirl(phi_plus).rho, phi_plus.rho, atol=1e-15)


class TestLocalUnitaries:
    """测试局域幺正"""

    def test_lift_rotation_conjugation(self, rng):
        """测试 U σ_k U† = Σ_j O_jk σ_j"""
        for _ in range(20):
            o = random_rotation(rng)
            u = lift_rotation(o)
            np.testing.assert_allclose(u @ u.conj().T, np.eye(2), atol=1e-12)
            for k in range(3):
                expected = sum(o[j, k] * PAULI[j] for j in range(3))
                np.testing.assert_allclose(u @ PAULI[k] @ u.conj().T, expected, atol=1e-12)

    def test_diagonalizing_unitaries(self, rng):
        """测试旋转后关联张量对角且 T'_zz >= T'_xx >= |T'_yy|"""
        for _ in range(20):
            state = random_state(rng)
            singulars = svd3(pauli_decompose(state).t)
            pair = diagonalizing_unitaries(pauli_decompose(state))
            rotated = pauli_decompose(conjugate(state, pair)).t
            t1, t2, t3 = singulars.as_tuple()
            expected = np.diag([t2, singulars.det_sign * t3, t1])
            np.testing.assert_allclose(rotated, expected, atol=1e-9)

    def test_conjugate_inverse(self, rng):
        """测试逆共轭还原原态"""
        state = random_state(rng)
        pair = diagonalizing_unitaries(pauli_decompose(state))
        restored = conjugate(conjugate(state, pair), pair, inverse=True)
        np.testing.assert_allclose(restored.rho, state.rho, atol=1e-12)

    def test_zero_tensor_uses_identity(self):
        """测试零关联张量取单位幺正"""
        pair = diagonalizing_unitaries(PauliDecomposition(a=np.zeros(3), b=np.zeros(3),
                                                          t=np.zeros((3, 3))))
        np.testing.assert_array_equal(pair.kron, np.eye(4))


class TestSigma:
    """测试 σ_AB 构造"""

    def test_sigma_keeps_tensor_and_drops_bloch(self, rng):
        """测试 σ_AB 关联张量不变且局域矢量为零"""
        for _ in range(20):
            state = random_state(rng)
            original = pauli_decompose(state)
            sigma = pauli_decompose(sigma_of(state))
            np.testing.assert_allclose(sigma.t, original.t, atol=1e-9)
            np.testing.assert_allclose(sigma.a, 0.0, atol=1e-9)
            np.testing.assert_allclose(sigma.b, 0.0, atol=1e-9)

    def test_spectrum_matches_singulars(self, rng):
        """测试由奇异值反解的 Bell 谱与 σ_AB 本征值一致"""
        for _ in range(50):
            state = random_state(rng)
            predicted = spectrum_from_singulars(svd3(pauli_decompose(state).t)).as_tuple()
            measured = bell_spectrum(bell_diagonal_form(state)).as_tuple()
            eigenvalues = np.sort(np.linalg.eigvalsh(sigma_of(state).rho))[::-1]
            np.testing.assert_allclose(predicted, measured, atol=1e-8)
            np.testing.assert_allclose(predicted, eigenvalues, atol=1e-8)


class TestBellSpectrum:
    """测试 Bell 谱"""

    def test_bell_state(self, phi_plus):
        """测试 Bell 态的谱为 (1,0,0,0)"""
        assert bell_spectrum(phi_plus).as_tuple() == pytest.approx((1.0, 0.0, 0.0, 0.0))

    def test_maximally_mixed(self):
        """测试最大混合态"""
        state = TwoQubitState(rho=np.eye(4) / 4.0)
        assert bell_spectrum(state).as_tuple() == pytest.approx((0.25,) * 4)

    def test_rejects_non_bell_diagonal(self):
        """测试拒绝非 Bell 对角态"""
        with pytest.raises(BellDiagonalityError):
            bell_spectrum(_pure([1, 0, 0, 0]))

    def test_from_unit_singulars(self):
        """测试 T = (1,1,1) 对应纯 Bell 态"""
        spectrum = spectrum_from_singulars(SingularTriple(t1=1.0, t2=1.0, t3=1.0))
        assert spectrum.as_tuple() == pytest.approx((1.0, 0.0, 0.0, 0.0))

    def test_from_zero_singulars(self):
        """测试 T = 0 对应最大混合态"""
        spectrum = spectrum_from_singulars(SingularTriple(t1=0.0, t2=0.0, t3=0.0))
        assert spectrum.as_tuple() == pytest.approx((0.25,) * 4)

    def test_werner_formula(self):
        """测试 t1=t2=t3=v 时 λ = ((1+3v)/4, (1-v)/4, (1-v)/4, (1-v)/4)"""
        v = 0.6
        spectrum = spectrum_from_singulars(SingularTriple(t1=v, t2=v, t3=v))
        expected = ((1 + 3 * v) / 4, (1 - v) / 4, (1 - v) / 4, (1 - v) / 4)
        assert spectrum.as_tuple() == pytest.approx(expected, abs=1e-15)

    def test_positive_determinant_branch(self):
        """测试正行列式时 T'_yy = +T3"""
        spectrum = spectrum_from_singulars(SingularTriple(t1=0.5, t2=0.3, t3=0.1, det_sign=1))
        values = sorted([
            (1 + 0.5 + 0.3 - 0.1) / 4,
            (1 + 0.5 - 0.3 + 0.1) / 4,
            (1 - 0.5 + 0.3 + 0.1) / 4,
            (1 - 0.5 - 0.3 - 0.1) / 4,
        ], reverse=True)
        assert spectrum.as_tuple() == pytest.approx(tuple(values), abs=1e-15)

    def test_unphysical_singulars(self):
        """测试非物理奇异值抛出异常"""
        with pytest.raises(UnphysicalStateError):
            spectrum_from_singulars(SingularTriple(t1=1.0, t2=1.0, t3=0.5))


class TestProjection:
    """测试奇异值物理投影"""

    def test_physical_input_unchanged(self):
        """测试物理输入原样返回"""
        t = SingularTriple(t1=0.9, t2=0.8, t3=0.7)
        assert project_singulars(t) is t

    def test_boundary_rounding_unchanged(self, mocker):
        """测试边界上舍入误差级的负权重不触发投影"""
        logger = mocker.patch("src.frfiqkd.security.qstate.logger")
        t = SingularTriple(t1=0.9, t2=0.8, t3=0.7 - 1e-12)
        assert project_singulars(t) is t
        logger.warning.assert_not_called()

    def test_projects_onto_simplex(self):
        """测试投影后 Bell 权重非负且和为 1"""
        projected = project_singulars(SingularTriple(t1=1.0, t2=1.0, t3=0.5))
        assert projected.as_tuple() == pytest.approx((5 / 6, 5 / 6, 2 / 3), abs=1e-12)
        assert projected.det_sign == -1
        spectrum = spectrum_from_singulars(projected)
        assert sum(spectrum.as_tuple()) == pytest.approx(1.0)
        assert spectrum.lambda4 >= 0.0


class TestEntropy:
    """测试冯诺依曼熵"""

    def test_pure_state(self, phi_plus):
        """测试纯态熵为 0"""
        assert von_neumann_entropy(phi_plus) == pytest.approx(0.0, abs=1e-12)

    def test_maximally_mixed(self):
        """测试最大混合态熵为 2 比特"""
        assert von_neumann_entropy(TwoQubitState(rho=np.eye(4) / 4.0)) == pytest.approx(2.0)

    def test_unitary_invariance(self, rng):
        """测试局域幺正不改变熵"""
        state = random_state(rng)
        assert von_neumann_entropy(sigma_of(state)) == pytest.approx(
            von_neumann_entropy(bell_diagonal_form(state)), abs=1e-10
        )
        assert not math.isnan(von_neumann_entropy(state))

    def test_sigma_entropy_not_below_state(self, rng):
        """测试 S(σ_AB) >= S(ρ_AB)"""
        for _ in range(50):
            state = random_state(rng)
            assert von_neumann_entropy(sigma_of(state)) >= von_neumann_entropy(state) - 1e-9
