"""
数据模型定义

使用Pydantic定义数据模型，确保类型安全和数据验证
"""

import math
from enum import Enum
from typing import Any, Dict, Iterator, Optional, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, computed_field, field_validator, model_validator

# 数值容差
HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
POSITIVITY_TOL = 1e-10
BLOCH_TOL = 1e-9
SPECTRUM_SUM_TOL = 1e-10
ORDER_TOL = 1e-12
MAX_GRID_POINTS = 10**6


# ============================================================================
# 枚举
# ============================================================================

class Basis(str, Enum):
    """测量基枚举"""
    X = "x"
    Y = "y"
    Z = "z"

    @property
    def index(self) -> int:
        """在关联矩阵中的行/列下标"""
        return "xyz".index(self.value)


class Protocol(str, Enum):
    """对比协议枚举"""
    FRFI = "frfi"
    RFI = "rfi"
    SIX_STATE = "sixstate"

    @property
    def column(self) -> str:
        """CSV 中截断后密钥率的列名"""
        return f"r_{self.value}"

    @property
    def per_pulse_column(self) -> str:
        """每发送脉冲密钥率的列名"""
        return f"{self.column}_per_pulse"


class SweepAxis(str, Enum):
    """扫描轴枚举"""
    LOSS_DB = "loss_db"
    THETA = "theta"
    PHI = "phi"

    @property
    def field_name(self) -> str:
        """对应 ChannelScenario 的字段名"""
        return {"loss_db": "loss_db", "theta": "theta_rad", "phi": "phi_rad"}[self.value]


class FigurePreset(str, Enum):
    """图形预设枚举"""
    FIG2 = "fig2"
    FIG3 = "fig3"
    FIG4 = "fig4"


# ============================================================================
# 线性代数与量子态
# ============================================================================

class SingularTriple(BaseModel):
    """关联矩阵奇异值（降序）"""

    model_config = ConfigDict(frozen=True)

    t1: float = Field(..., ge=0.0, allow_inf_nan=False)
    t2: float = Field(..., ge=0.0, allow_inf_nan=False)
    t3: float = Field(..., ge=0.0, allow_inf_nan=False)
    # 行列式符号；-1 对应 Φ+ 型关联（T'_yy = -T3）
    det_sign: int = Field(-1)

    @field_validator("det_sign")
    @classmethod
    def check_det_sign(cls, v: int) -> int:
        if v not in (-1, 1):
            raise ValueError(f"det_sign must be -1 or +1, got {v}")
        return v

    @model_validator(mode="after")
    def check_order(self) -> "SingularTriple":
        if not (self.t1 >= self.t2 >= self.t3):
            raise ValueError(f"Singular values not descending: {self.as_tuple()}")
        return self

    @classmethod
    def physical(cls, t1: float, t2: float, t3: float, det_sign: int = -1) -> "SingularTriple":
        """由物理关联张量构造，检查上界 t1 <= 1"""
        if t1 > 1.0 + BLOCH_TOL:
            raise ValueError(f"Largest singular value {t1} exceeds 1")
        return cls(t1=t1, t2=t2, t3=t3, det_sign=det_sign)

    def as_tuple(self) -> Tuple[float, float, float]:
        return (self.t1, self.t2, self.t3)


class BellSpectrum(BaseModel):
    """Bell 对角态本征值 λ1 >= λ2 >= λ3 >= λ4 >= 0"""

    model_config = ConfigDict(frozen=True)

    lambda1: float = Field(..., allow_inf_nan=False)
    lambda2: float = Field(..., allow_inf_nan=False)
    lambda3: float = Field(..., allow_inf_nan=False)
    lambda4: float = Field(..., allow_inf_nan=False)

    @model_validator(mode="after")
    def check_distribution(self) -> "BellSpectrum":
        values = self.as_tuple()
        if values[-1] < -ORDER_TOL:
            raise ValueError(f"Negative Bell eigenvalue: {values}")
        if any(values[k] < values[k + 1] - ORDER_TOL for k in range(3)):
            raise ValueError(f"Bell eigenvalues not descending: {values}")
        if abs(sum(values) - 1.0) > SPECTRUM_SUM_TOL:
            raise ValueError(f"Bell eigenvalues do not sum to 1: {values}")
        return self

    @classmethod
    def from_values(cls, values) -> "BellSpectrum":
        """排序后构造（对舍入产生的极小负值置零）"""
        ordered = sorted((max(float(v), 0.0) if v > -ORDER_TOL else float(v) for v in values),
                         reverse=True)
        return cls(lambda1=ordered[0], lambda2=ordered[1], lambda3=ordered[2], lambda4=ordered[3])

    def as_tuple(self) -> Tuple[float, float, float, float]:
        return (self.lambda1, self.lambda2, self.lambda3, self.lambda4)


class _ArrayModel(BaseModel):
    """承载 numpy 数组的只读模型基类"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)


def _readonly(array: np.ndarray) -> np.ndarray:
    array = np.array(array, copy=True)
    array.setflags(write=False)
    return array


class TwoQubitState(_ArrayModel):
    """两比特密度矩阵"""

    rho: np.ndarray

    @field_validator("rho", mode="before")
    @classmethod
    def check_density_matrix(cls, v: Any) -> np.ndarray:
        rho = np.asarray(v, dtype=np.complex128)
        if rho.shape != (4, 4):
            raise ValueError(f"Density matrix must be 4x4, got shape {rho.shape}")
        if not np.all(np.isfinite(rho)):
            raise ValueError("Density matrix has non-finite entries")
        if np.max(np.abs(rho - rho.conj().T)) > HERMITIAN_TOL:
            raise ValueError("Density matrix is not Hermitian")
        if abs(np.trace(rho) - 1.0) > TRACE_TOL:
            raise ValueError(f"Density matrix trace {np.trace(rho).real} != 1")
        min_eig = float(np.linalg.eigvalsh(rho).min())
        if min_eig < -POSITIVITY_TOL:
            raise ValueError(f"Density matrix not positive semidefinite (min eigenvalue {min_eig})")
        return _readonly(rho)


class PauliDecomposition(_ArrayModel):
    """Pauli 展开：局域 Bloch 矢量 a、b 与关联张量 t"""

    a: np.ndarray
    b: np.ndarray
    t: np.ndarray

    @field_validator("a", "b", mode="before")
    @classmethod
    def check_bloch(cls, v: Any) -> np.ndarray:
        vec = np.asarray(v, dtype=np.float64).reshape(3)
        if not np.all(np.isfinite(vec)):
            raise ValueError("Bloch vector has non-finite entries")
        if np.linalg.norm(vec) > 1.0 + BLOCH_TOL:
            raise ValueError(f"Bloch vector norm {np.linalg.norm(vec)} exceeds 1")
        return _readonly(vec)

    @field_validator("t", mode="before")
    @classmethod
    def check_tensor(cls, v: Any) -> np.ndarray:
        t = np.asarray(v, dtype=np.float64).reshape(3, 3)
        if not np.all(np.isfinite(t)):
            raise ValueError("Correlation tensor has non-finite entries")
        if np.max(np.abs(t)) > 1.0 + BLOCH_TOL:
            raise ValueError("Correlation tensor entry exceeds 1 in magnitude")
        return _readonly(t)


class LocalUnitaryPair(_ArrayModel):
    """局域幺正对 U_A ⊗ U_B"""

    u_a: np.ndarray
    u_b: np.ndarray

    @field_validator("u_a", "u_b", mode="before")
    @classmethod
    def check_unitary(cls, v: Any) -> np.ndarray:
        u = np.asarray(v, dtype=np.complex128).reshape(2, 2)
        if np.max(np.abs(u @ u.conj().T - np.eye(2))) > HERMITIAN_TOL:
            raise ValueError("Matrix is not unitary")
        return _readonly(u)

    @property
    def kron(self) -> np.ndarray:
        """U_A ⊗ U_B"""
        return np.kron(self.u_a, self.u_b)


# ============================================================================
# 信道场景与密钥率
# ============================================================================

class ChannelScenario(BaseModel):
    """信道场景"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    theta_rad: float = Field(0.0, allow_inf_nan=False, description="极角失准 θ")
    phi_rad: float = Field(0.0, allow_inf_nan=False, description="方位角失准 φ")
    loss_db: float = Field(0.0, ge=0.0, allow_inf_nan=False, description="总损耗（含探测效率）")
    dark_rate: float = Field(1e-6, ge=0.0, le=1.0, description="暗计数率 pd")
    misalignment: float = Field(0.015, ge=0.0, le=0.5, description="失准误码率 ed")

    def with_value(self, field_name: str, value: float) -> "ChannelScenario":
        """返回替换单个字段后的新场景（重新校验）"""
        data = self.model_dump()
        data[field_name] = float(value)
        return ChannelScenario.model_validate(data)


class RateReport(BaseModel):
    """单一场景的密钥率报告"""

    model_config = ConfigDict(frozen=True)

    qber: float = Field(..., ge=0.0, le=1.0)
    singulars: SingularTriple
    c_squared: float = Field(..., ge=0.0)
    r_frfi_raw: float
    r_rfi_raw: float
    r_sixstate_raw: float

    # 信道相关信息（经验报告可为空）
    visibility: Optional[float] = None
    eta: Optional[float] = None
    gain: Optional[float] = None
    r_frfi_stderr: Optional[float] = Field(None, ge=0.0)

    @field_validator("r_frfi_raw", "r_rfi_raw", "r_sixstate_raw")
    @classmethod
    def check_raw_rate(cls, v: float) -> float:
        if not math.isfinite(v) or v > 1.0 + ORDER_TOL:
            raise ValueError(f"Raw key rate {v} out of range")
        return v

    @computed_field
    @property
    def r_frfi(self) -> float:
        return max(0.0, self.r_frfi_raw)

    @computed_field
    @property
    def r_rfi(self) -> float:
        return max(0.0, self.r_rfi_raw)

    @computed_field
    @property
    def r_sixstate(self) -> float:
        return max(0.0, self.r_sixstate_raw)

    def clamped(self, protocol: Protocol) -> float:
        """截断后的密钥率"""
        return getattr(self, protocol.column)

    def per_pulse(self, protocol: Protocol) -> Optional[float]:
        """每发送脉冲的密钥率 = 增益 × 截断密钥率"""
        if self.gain is None:
            return None
        return self.gain * self.clamped(protocol)


class SweepSpec(BaseModel):
    """参数扫描描述"""

    model_config = ConfigDict(frozen=True)

    axis: SweepAxis
    start: float = Field(..., allow_inf_nan=False)
    stop: float = Field(..., allow_inf_nan=False)
    step: float = Field(..., gt=0.0, allow_inf_nan=False)
    scenario: ChannelScenario = Field(default_factory=ChannelScenario)

    @model_validator(mode="after")
    def check_grid(self) -> "SweepSpec":
        if self.start > self.stop:
            raise ValueError(f"Sweep start {self.start} greater than stop {self.stop}")
        if self.size > MAX_GRID_POINTS:
            raise ValueError(f"Sweep grid of {self.size} points exceeds {MAX_GRID_POINTS}")
        return self

    @property
    def size(self) -> int:
        """网格点数（含端点）"""
        return int(math.floor((self.stop - self.start) / self.step + 1e-9)) + 1

    def grid(self) -> np.ndarray:
        """升序网格"""
        return self.start + self.step * np.arange(self.size, dtype=np.float64)

    def scenarios(self) -> Iterator[ChannelScenario]:
        """按网格顺序生成场景"""
        for value in self.grid():
            yield self.scenario.with_value(self.axis.field_name, float(value))


# ============================================================================
# 蒙特卡洛计数与估计
# ============================================================================

class CountTable(_ArrayModel):
    """分组 G_{ξAξB} 的计数表，下标 (ξA, ξB, a, b)，结果下标 0 表示 +1"""

    counts: np.ndarray
    detected_pulses: int = Field(..., ge=0)
    emitted_pulses: int = Field(..., ge=0)
    metadata: Dict[str, Any] = Field(default_factory=dict)

    @field_validator("counts", mode="before")
    @classmethod
    def check_counts(cls, v: Any) -> np.ndarray:
        counts = np.asarray(v)
        if counts.shape != (3, 3, 2, 2):
            raise ValueError(f"Count table must have shape (3, 3, 2, 2), got {counts.shape}")
        if not np.issubdtype(counts.dtype, np.integer):
            raise ValueError("Counts must be integers")
        if np.any(counts < 0):
            raise ValueError("Counts must be nonnegative")
        return _readonly(counts.astype(np.int64))

    @model_validator(mode="after")
    def check_totals(self) -> "CountTable":
        total = int(self.counts.sum())
        if total != self.detected_pulses:
            raise ValueError(f"Counts sum {total} != detected pulses {self.detected_pulses}")
        if self.detected_pulses > self.emitted_pulses:
            raise ValueError("Detected pulses exceed emitted pulses")
        return self

    def cell(self, basis_a: Basis, basis_b: Basis) -> np.ndarray:
        """单个分组的 2x2 计数"""
        return self.counts[basis_a.index, basis_b.index]

    def merge(self, other: "CountTable") -> "CountTable":
        """
        合并两个分片的计数（结合律、交换律成立）

        元数据只保留两侧取值相同的键，merged_shards 累加
        """
        metadata = {
            key: value for key, value in self.metadata.items()
            if key != "merged_shards" and key in other.metadata and other.metadata[key] == value
        }
        metadata["merged_shards"] = self.metadata.get("merged_shards", 1) + other.metadata.get(
            "merged_shards", 1
        )
        return CountTable(
            counts=self.counts + other.counts,
            detected_pulses=self.detected_pulses + other.detected_pulses,
            emitted_pulses=self.emitted_pulses + other.emitted_pulses,
            metadata=metadata,
        )

    def to_frame(self) -> pd.DataFrame:
        """36 行长表"""
        rows = []
        for basis_a in Basis:
            for basis_b in Basis:
                for ia, a in enumerate((1, -1)):
                    for ib, b in enumerate((1, -1)):
                        rows.append({
                            "xi_a": basis_a.value,
                            "xi_b": basis_b.value,
                            "a": a,
                            "b": b,
                            "count": int(self.counts[basis_a.index, basis_b.index, ia, ib]),
                        })
        return pd.DataFrame(rows, columns=["xi_a", "xi_b", "a", "b", "count"])


class TensorEstimate(_ArrayModel):
    """经验关联矩阵估计"""

    t_hat: np.ndarray
    stderr: np.ndarray
    n_cell: np.ndarray
    available: np.ndarray

    @model_validator(mode="after")
    def check_estimate(self) -> "TensorEstimate":
        for name in ("t_hat", "stderr", "n_cell", "available"):
            if getattr(self, name).shape != (3, 3):
                raise ValueError(f"{name} must be 3x3")
        known = self.available
        if np.any(np.abs(self.t_hat[known]) > 1.0 + ORDER_TOL):
            raise ValueError("Empirical correlation exceeds 1 in magnitude")
        if np.any(self.stderr[known] < 0):
            raise ValueError("Standard errors must be nonnegative")
        return self

    @property
    def is_complete(self) -> bool:
        """九个分组是否都有探测事件"""
        return bool(np.all(self.available))

    @property
    def missing_cells(self) -> Tuple[str, ...]:
        return tuple(
            f"{a.value}{b.value}" for a in Basis for b in Basis if not self.available[a.index, b.index]
        )
