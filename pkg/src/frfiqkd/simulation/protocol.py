"""
协议蒙特卡洛仿真模块

按协议步骤逐脉冲仿真：选基、探测、分组计数，再由计数估计关联矩阵并重算密钥率
"""

from concurrent.futures import ProcessPoolExecutor
from functools import reduce
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from ..data.models import Basis, ChannelScenario, CountTable, RateReport, TensorEstimate
from ..linalg.mat3 import Mat3, as_mat3, svd3, svd3_factors
from ..security.bounds import evaluate_tensor, frfi_rate
from ..security.qstate import project_singulars
from ..utils.config import get_config
from ..utils.logger import get_logger, log_function_call
from .channel import FRAME_CONVENTION, detection_gain, outcome_table, transmittance

logger = get_logger(__name__)

RNG_ALGORITHM = "numpy.random.Philox"
ESTIMATION_NOTE = "all classified events used for parameter estimation (no sampling fraction)"
MAX_SEED = 2**64 - 1


class SimulationError(ValueError):
    """仿真参数异常"""
    pass


class IncompleteTableError(ValueError):
    """计数表存在无探测事件的分组"""
    pass


def _check_inputs(n_pulses: int, seed: int) -> None:
    if n_pulses < 1:
        raise SimulationError(f"n_pulses={n_pulses} must be at least 1")
    if not 0 <= seed <= MAX_SEED:
        raise SimulationError(f"seed={seed} must be an unsigned 64-bit integer")


def _metadata(s: ChannelScenario, n_pulses: int, seed: int, chunk_size: int,
              shards: int = 1) -> Dict[str, Any]:
    return {
        "rng": RNG_ALGORITHM,
        "numpy_version": np.__version__,
        "seed": seed,
        "n_pulses": n_pulses,
        "chunk_size": chunk_size,
        "shards": shards,
        "frame_convention": FRAME_CONVENTION,
        "estimation": ESTIMATION_NOTE,
        "scenario": s.model_dump(),
    }


def _simulate_stream(s: ChannelScenario, n_pulses: int, bit_generator: np.random.BitGenerator,
                     chunk_size: int) -> np.ndarray:
    """
    逐脉冲仿真一个随机数流

    每批依次抽取：Alice 选基、Bob 选基、探测判定、结果均匀数。
    抽取顺序与批大小共同决定可复现性。
    """
    rng = np.random.Generator(bit_generator)
    gain = detection_gain(transmittance(s.loss_db), s.dark_rate)
    thresholds = np.cumsum(outcome_table(s), axis=-1)[:, :, :3]

    counts = np.zeros(36, dtype=np.int64)
    remaining = n_pulses
    while remaining > 0:
        size = min(chunk_size, remaining)
        basis_a = rng.integers(0, 3, size=size)
        basis_b = rng.integers(0, 3, size=size)
        detected = rng.random(size) < gain
        uniform = rng.random(size)

        ba, bb = basis_a[detected], basis_b[detected]
        outcome = (uniform[detected][:, None] >= thresholds[ba, bb]).sum(axis=1)
        counts += np.bincount(ba * 12 + bb * 4 + outcome, minlength=36)
        remaining -= size
    return counts.reshape(3, 3, 2, 2)


@log_function_call
def run_simulation(s: ChannelScenario, n_pulses: int, seed: int) -> CountTable:
    """
    单流仿真

    Args:
        s: 信道场景
        n_pulses: 发送脉冲数
        seed: 64 位无符号种子

    Returns:
        CountTable，相同 (场景, 脉冲数, 种子) 得到逐位相同的结果
    """
    _check_inputs(n_pulses, seed)
    chunk_size = get_config().simulation_chunk_size
    counts = _simulate_stream(s, n_pulses, np.random.Philox(seed), chunk_size)
    detected = int(counts.sum())
    logger.info("Simulation finished", n_pulses=n_pulses, detected=detected, seed=seed)
    return CountTable(
        counts=counts,
        detected_pulses=detected,
        emitted_pulses=n_pulses,
        metadata=_metadata(s, n_pulses, seed, chunk_size),
    )


def _run_shard(args: Tuple[ChannelScenario, int, np.random.SeedSequence, int]) -> CountTable:
    scenario, size, seed_sequence, chunk_size = args
    counts = _simulate_stream(scenario, size, np.random.Philox(seed_sequence), chunk_size)
    detected = int(counts.sum())
    return CountTable(counts=counts, detected_pulses=detected, emitted_pulses=size)


@log_function_call
def run_sharded_simulation(s: ChannelScenario, n_pulses: int, seed: int, shards: int,
                           max_workers: Optional[int] = None) -> CountTable:
    """
    分片并行仿真

    各分片使用 SeedSequence(seed).spawn(shards) 派生的独立 Philox 流，
    结果与分片完成顺序无关；与同种子的 run_simulation 结果不同。
    """
    _check_inputs(n_pulses, seed)
    if shards < 1:
        raise SimulationError(f"shards={shards} must be at least 1")

    chunk_size = get_config().simulation_chunk_size
    children = np.random.SeedSequence(seed).spawn(shards)
    base, extra = divmod(n_pulses, shards)
    jobs = [
        (s, base + (1 if index < extra else 0), child, chunk_size)
        for index, child in enumerate(children)
    ]
    jobs = [job for job in jobs if job[1] > 0]

    if max_workers == 1 or len(jobs) == 1:
        tables: List[CountTable] = [_run_shard(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=max_workers) as executor:
            tables = list(executor.map(_run_shard, jobs))

    merged = reduce(lambda left, right: left.merge(right), tables)
    logger.info("Sharded simulation finished", shards=len(jobs), detected=merged.detected_pulses)
    return CountTable(
        counts=merged.counts,
        detected_pulses=merged.detected_pulses,
        emitted_pulses=merged.emitted_pulses,
        metadata=_metadata(s, n_pulses, seed, chunk_size, shards=len(jobs)),
    )


def estimate_tensor(c: CountTable) -> TensorEstimate:
    """t̂ = (n++ + n-- - n+- - n-+) / n_cell，stderr = √((1 - t̂²) / n_cell)"""
    counts = c.counts.astype(np.float64)
    n_cell = c.counts.sum(axis=(2, 3))
    correlated = counts[:, :, 0, 0] + counts[:, :, 1, 1] - counts[:, :, 0, 1] - counts[:, :, 1, 0]
    available = n_cell > 0

    with np.errstate(invalid="ignore", divide="ignore"):
        t_hat = np.where(available, correlated / np.maximum(n_cell, 1), np.nan)
        stderr = np.where(
            available, np.sqrt(np.maximum(1.0 - t_hat**2, 0.0) / np.maximum(n_cell, 1)), np.nan
        )

    estimate = TensorEstimate(t_hat=t_hat, stderr=stderr, n_cell=n_cell, available=available)
    if not estimate.is_complete:
        logger.warning("Count table has empty cells", missing=list(estimate.missing_cells))
    return estimate


def _require_complete(estimate: TensorEstimate) -> Mat3:
    if not estimate.is_complete:
        raise IncompleteTableError(
            f"No detections in cells {', '.join(estimate.missing_cells)}; tensor unavailable"
        )
    return as_mat3(estimate.t_hat)


def _qber_of(tensor: np.ndarray) -> float:
    zz = tensor[Basis.Z.index, Basis.Z.index]
    return float(min(max((1.0 - zz) / 2.0, 0.0), 1.0))


def _frfi_of_tensor(tensor: np.ndarray) -> float:
    return frfi_rate(_qber_of(tensor), project_singulars(svd3(tensor)))


def singular_stderr(estimate: TensorEstimate) -> Tuple[float, float, float]:
    """一阶误差传播：δt_k = u_kᵗ δT v_k"""
    factors = svd3_factors(_require_complete(estimate))
    u, v = np.asarray(factors.u), np.asarray(factors.v)
    variance = np.einsum("ik,jk,ij->k", u**2, v**2, estimate.stderr**2)
    return tuple(float(x) for x in np.sqrt(variance))


def rate_stderr(estimate: TensorEstimate, step: float = 1e-6) -> float:
    """FRFI 密钥率的标准误差（对 T̂ 各元素做中心差分后按独立误差合成）"""
    tensor = np.array(_require_complete(estimate))
    variance = 0.0
    for i in range(3):
        for j in range(3):
            se = estimate.stderr[i, j]
            if se == 0.0:
                continue
            plus, minus = tensor.copy(), tensor.copy()
            plus[i, j] = min(plus[i, j] + step, 1.0)
            minus[i, j] = max(minus[i, j] - step, -1.0)
            derivative = (_frfi_of_tensor(plus) - _frfi_of_tensor(minus)) / (plus[i, j] - minus[i, j])
            variance += (derivative * se) ** 2
    return float(np.sqrt(variance))


def analyze_counts(c: CountTable) -> RateReport:
    """由经验关联矩阵计算密钥率报告，误码率取经验 (z,z) 元素"""
    estimate = estimate_tensor(c)
    tensor = _require_complete(estimate)
    gain = c.detected_pulses / c.emitted_pulses if c.emitted_pulses else None
    return evaluate_tensor(
        _qber_of(np.asarray(tensor)),
        tensor,
        gain=gain,
        r_frfi_stderr=rate_stderr(estimate),
        project=True,
    )
