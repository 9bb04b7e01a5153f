"""
性质自检模块

在随机两比特态上检查 Pauli 展开、twirl、σ_AB 与 SVD 化简之间的一致性，
供 `verify` 子命令调用
"""

from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, ValidationError

from ..data.models import TwoQubitState
from ..linalg.mat3 import svd3
from ..utils.logger import LoggerMixin
from .bounds import shannon_entropy
from .qstate import (
    bell_diagonal_form,
    bell_spectrum,
    pauli_decompose,
    random_state,
    reconstruct,
    sigma_of,
    spectrum_from_singulars,
    twirl,
    von_neumann_entropy,
)

ROUND_TRIP_TOL = 1e-10
SIGMA_TOL = 1e-9
SPECTRUM_TOL = 1e-8
ENTROPY_TOL = 1e-8


class PropertyFailure(BaseModel):
    """单个性质检查失败记录"""

    trial: int = Field(..., ge=0)
    name: str
    detail: str
    decomposition: Dict[str, Any] = Field(default_factory=dict)


class VerificationSummary(BaseModel):
    """自检汇总"""

    trials: int = Field(..., ge=1)
    seed: int
    checks: int = 0
    failures: List[PropertyFailure] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


class PropertyVerifier(LoggerMixin):
    """随机态性质检查器"""

    def __init__(self, seed: int = 0):
        self.seed = seed
        self.rng = np.random.Generator(np.random.Philox(seed))
        self.properties: List[Tuple[str, Callable[[TwoQubitState], Optional[str]]]] = [
            ("round_trip", self.check_round_trip),
            ("twirl", self.check_twirl),
            ("sigma_ab", self.check_sigma),
            ("svd_consistency", self.check_svd_consistency),
            ("entropy", self.check_entropy),
        ]

    @staticmethod
    def check_round_trip(state: TwoQubitState) -> Optional[str]:
        error = np.max(np.abs(reconstruct(pauli_decompose(state)).rho - state.rho))
        if error > ROUND_TRIP_TOL:
            return f"reconstruct(pauli_decompose(rho)) differs by {error:.3e}"
        return None

    @staticmethod
    def check_twirl(state: TwoQubitState) -> Optional[str]:
        original = pauli_decompose(state)
        twirled = pauli_decompose(twirl(state))
        expected = np.diag(np.diag(original.t))
        error = max(
            np.max(np.abs(twirled.t - expected)),
            np.max(np.abs(twirled.a)),
            np.max(np.abs(twirled.b)),
        )
        if error > SIGMA_TOL:
            return f"twirl left off-diagonal or local terms of size {error:.3e}"
        return None

    @staticmethod
    def check_sigma(state: TwoQubitState) -> Optional[str]:
        original = pauli_decompose(state)
        sigma = pauli_decompose(sigma_of(state))
        tensor_error = np.max(np.abs(sigma.t - original.t))
        bloch = max(np.max(np.abs(sigma.a)), np.max(np.abs(sigma.b)))
        if tensor_error > SIGMA_TOL:
            return f"sigma_AB correlation tensor differs by {tensor_error:.3e}"
        if bloch > SIGMA_TOL:
            return f"sigma_AB Bloch vectors of size {bloch:.3e}"
        return None

    @staticmethod
    def check_svd_consistency(state: TwoQubitState) -> Optional[str]:
        predicted = np.array(spectrum_from_singulars(svd3(pauli_decompose(state).t)).as_tuple())
        measured = np.array(bell_spectrum(bell_diagonal_form(state)).as_tuple())
        eigenvalues = np.sort(np.linalg.eigvalsh(sigma_of(state).rho))[::-1]
        error = max(np.max(np.abs(predicted - measured)), np.max(np.abs(predicted - eigenvalues)))
        if error > SPECTRUM_TOL:
            return f"Bell spectrum from singular values differs by {error:.3e}"
        return None

    @staticmethod
    def check_entropy(state: TwoQubitState) -> Optional[str]:
        sigma = sigma_of(state)
        spectrum = spectrum_from_singulars(svd3(pauli_decompose(state).t))
        error = abs(von_neumann_entropy(sigma) - shannon_entropy(spectrum.as_tuple()))
        if error > ENTROPY_TOL:
            return f"S(sigma_AB) differs from H(lambda) by {error:.3e}"
        return None

    def check_rejects_non_psd(self) -> Optional[str]:
        """构造非半正定矩阵，必须在模型校验时被拒绝"""
        rho = np.diag([0.6, 0.5, 0.1, -0.2]).astype(np.complex128)
        try:
            TwoQubitState(rho=rho)
        except ValidationError:
            return None
        return "non positive semidefinite matrix accepted as a state"

    def _describe(self, state: TwoQubitState) -> Dict[str, Any]:
        try:
            d = pauli_decompose(state)
        except (ValueError, ValidationError):
            return {"rho": np.round(state.rho, 12).tolist()}
        return {"a": d.a.tolist(), "b": d.b.tolist(), "t": d.t.tolist()}

    def run(self, trials: int) -> VerificationSummary:
        if trials < 1:
            raise ValueError(f"trials={trials} must be at least 1")

        summary = VerificationSummary(trials=trials, seed=self.seed)
        hook_failure = self.check_rejects_non_psd()
        summary.checks += 1
        if hook_failure:
            summary.failures.append(
                PropertyFailure(trial=0, name="rejects_non_psd", detail=hook_failure)
            )

        for trial in range(trials):
            state = random_state(self.rng)
            for name, check in self.properties:
                summary.checks += 1
                try:
                    detail = check(state)
                except (ValueError, ArithmeticError) as e:
                    detail = f"{type(e).__name__}: {e}"
                if detail is not None:
                    self.logger.warning("Property failed", trial=trial, property=name, detail=detail)
                    summary.failures.append(PropertyFailure(
                        trial=trial, name=name, detail=detail, decomposition=self._describe(state)
                    ))

        self.logger.info(
            "Verification finished", trials=trials, checks=summary.checks,
            failures=len(summary.failures),
        )
        return summary


def run_verification(trials: int, seed: int = 0) -> VerificationSummary:
    """在 trials 个随机态上运行全部性质检查"""
    return PropertyVerifier(seed).run(trials)
