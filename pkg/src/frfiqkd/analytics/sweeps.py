"""
参数扫描模块

在损耗、θ 或 φ 网格上批量计算密钥率，并提供三组固定的图形预设
"""

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional, Sequence, Tuple

import pandas as pd
from pydantic import BaseModel, ConfigDict

from ..data.models import ChannelScenario, FigurePreset, Protocol, RateReport, SweepAxis, SweepSpec
from ..simulation.channel import analyze
from ..utils.config import get_config
from ..utils.logger import LoggerMixin

# CSV 列顺序固定
CSV_COLUMNS = [
    "loss_db",
    "eta",
    "theta_rad",
    "phi_rad",
    "visibility",
    "qber",
    "t1",
    "t2",
    "t3",
    "c_squared",
    "r_frfi_raw",
    "r_frfi",
    "r_rfi_raw",
    "r_rfi",
    "r_sixstate_raw",
    "r_sixstate",
]

# 图形预设在固定列之后追加增益与每脉冲密钥率
PER_PULSE_COLUMNS = ["gain"] + [p.per_pulse_column for p in Protocol]


class SweepError(ValueError):
    """扫描配置异常"""
    pass


class FigureSpec(BaseModel):
    """图形预设：若干 (θ, φ) 组合上的损耗扫描"""

    model_config = ConfigDict(frozen=True)

    title: str
    combos: Tuple[Tuple[float, float], ...]
    protocols: Tuple[Protocol, ...]


FIGURE_PRESETS: Dict[FigurePreset, FigureSpec] = {
    FigurePreset.FIG2: FigureSpec(
        title="theta = 0, phi = 0 and pi/4",
        combos=((0.0, 0.0), (0.0, math.pi / 4)),
        protocols=(Protocol.FRFI, Protocol.RFI, Protocol.SIX_STATE),
    ),
    FigurePreset.FIG3: FigureSpec(
        title="theta = pi/8, phi = pi/8 and pi/4",
        combos=((math.pi / 8, math.pi / 8), (math.pi / 8, math.pi / 4)),
        protocols=(Protocol.FRFI, Protocol.RFI, Protocol.SIX_STATE),
    ),
    FigurePreset.FIG4: FigureSpec(
        title="theta = pi/6, pi/4 and pi/3, phi = pi/4",
        combos=((math.pi / 6, math.pi / 4), (math.pi / 4, math.pi / 4), (math.pi / 3, math.pi / 4)),
        protocols=(Protocol.FRFI, Protocol.RFI),
    ),
}


def report_row(s: ChannelScenario, report: RateReport,
               per_pulse: bool = False) -> Dict[str, Optional[float]]:
    """单个场景的一行 CSV 数据；per_pulse 时追加增益与每脉冲密钥率"""
    t1, t2, t3 = report.singulars.as_tuple()
    row: Dict[str, Optional[float]] = {
        "loss_db": s.loss_db,
        "eta": report.eta,
        "theta_rad": s.theta_rad,
        "phi_rad": s.phi_rad,
        "visibility": report.visibility,
        "qber": report.qber,
        "t1": t1,
        "t2": t2,
        "t3": t3,
        "c_squared": report.c_squared,
        "r_frfi_raw": report.r_frfi_raw,
        "r_frfi": report.r_frfi,
        "r_rfi_raw": report.r_rfi_raw,
        "r_rfi": report.r_rfi,
        "r_sixstate_raw": report.r_sixstate_raw,
        "r_sixstate": report.r_sixstate,
    }
    if per_pulse:
        row["gain"] = report.gain
        row.update({p.per_pulse_column: report.per_pulse(p) for p in Protocol})
    return row


def rows_frame(rows: Sequence[Dict[str, Optional[float]]], per_pulse: bool = False) -> pd.DataFrame:
    columns = CSV_COLUMNS + PER_PULSE_COLUMNS if per_pulse else CSV_COLUMNS
    return pd.DataFrame(list(rows), columns=columns)


class SweepRunner(LoggerMixin):
    """扫描执行器"""

    def __init__(self, workers: Optional[int] = None):
        self.workers = workers or get_config().workers

    def evaluate(self, scenarios: Sequence[ChannelScenario], per_pulse: bool = False) -> pd.DataFrame:
        """
        逐场景解析计算

        线程池可能乱序完成，结果按输入顺序收集
        """
        if self.workers > 1 and len(scenarios) > 1:
            with ThreadPoolExecutor(max_workers=self.workers) as executor:
                reports = list(executor.map(analyze, scenarios))
        else:
            reports = [analyze(s) for s in scenarios]
        rows = [report_row(s, r, per_pulse) for s, r in zip(scenarios, reports)]
        return rows_frame(rows, per_pulse)

    def run(self, spec: SweepSpec, per_pulse: bool = False) -> pd.DataFrame:
        """执行单轴扫描，行按扫描轴升序"""
        try:
            scenarios = list(spec.scenarios())
        except ValueError as e:
            raise SweepError(f"Sweep grid leaves the valid scenario range: {e}") from e
        self.logger.info(
            "Running sweep", axis=spec.axis.value, points=len(scenarios), workers=self.workers
        )
        return self.evaluate(scenarios, per_pulse)

    def run_figure(self, preset: FigurePreset, base: Optional[ChannelScenario] = None) -> pd.DataFrame:
        """按预设的全部 (θ, φ) 组合执行损耗扫描，按组合顺序拼接，含每脉冲列"""
        figure = FIGURE_PRESETS[preset]
        config = get_config()
        base = base or ChannelScenario(dark_rate=config.dark_rate, misalignment=config.misalignment)

        frames: List[pd.DataFrame] = []
        for theta, phi in figure.combos:
            spec = SweepSpec(
                axis=SweepAxis.LOSS_DB,
                start=config.preset_loss_start,
                stop=config.preset_loss_stop,
                step=config.preset_loss_step,
                scenario=base.with_value("theta_rad", theta).with_value("phi_rad", phi),
            )
            frames.append(self.run(spec, per_pulse=True))
        return pd.concat(frames, ignore_index=True)


def run_sweep(spec: SweepSpec, workers: Optional[int] = None) -> pd.DataFrame:
    return SweepRunner(workers).run(spec)


def run_figure(preset: FigurePreset, workers: Optional[int] = None,
               base: Optional[ChannelScenario] = None) -> pd.DataFrame:
    return SweepRunner(workers).run_figure(preset, base)


def loss_threshold(frame: pd.DataFrame, column: str) -> Optional[float]:
    """截断密钥率仍为正的最大损耗；没有正值时返回 None"""
    positive = frame.loc[frame[column] > 0.0, "loss_db"]
    if positive.empty:
        return None
    return float(positive.max())


def combo_frames(frame: pd.DataFrame) -> List[Tuple[Tuple[float, float], pd.DataFrame]]:
    """按 (θ, φ) 拆分长表，保持出现顺序"""
    groups = frame.groupby(["theta_rad", "phi_rad"], sort=False)
    return [
        ((float(theta), float(phi)), group.reset_index(drop=True))
        for (theta, phi), group in groups
    ]


def resolve_preset(name: str) -> FigurePreset:
    try:
        return FigurePreset(name)
    except ValueError as e:
        known = ", ".join(p.value for p in FigurePreset)
        raise SweepError(f"Unknown figure preset {name!r} (expected one of {known})") from e
