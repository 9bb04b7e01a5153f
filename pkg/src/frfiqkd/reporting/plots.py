"""
SVG 绘图模块

对数纵轴的损耗-每脉冲密钥率曲线；截断为 0 的点不绘制，曲线在该处终止
"""

import math
from pathlib import Path
from typing import Sequence, Union

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

from ..analytics.sweeps import combo_frames  # noqa: E402
from ..data.models import Protocol  # noqa: E402
from ..utils.logger import get_logger  # noqa: E402

logger = get_logger(__name__)

# 固定 SVG 内部 id 与元数据，保证输出逐字节稳定
_SVG_RC = {"svg.hashsalt": "frfiqkd", "svg.fonttype": "none"}


def _angle_label(value: float) -> str:
    """把角度写成 π 的分数（常见值），否则保留 6 位小数"""
    for denominator in (1, 2, 3, 4, 6, 8):
        numerator = value * denominator / math.pi
        if abs(numerator - round(numerator)) < 1e-9:
            n = int(round(numerator))
            if n == 0:
                return "0"
            head = "pi" if n == 1 else f"{n}pi"
            return head if denominator == 1 else f"{head}/{denominator}"
    return f"{value:.6f}"


def curve_label(protocol: Protocol, theta: float, phi: float) -> str:
    """图例标签：列名加 (θ, φ)"""
    return f"{protocol.column} (theta={_angle_label(theta)}, phi={_angle_label(phi)})"


def plot_rates(frame: pd.DataFrame, protocols: Sequence[Protocol], path: Union[str, Path],
               title: str = "") -> Path:
    """
    绘制并保存 SVG

    Args:
        frame: 扫描长表，可包含多个 (θ, φ) 组合；含每脉冲列时绘制每脉冲密钥率
        protocols: 需要绘制的协议
        path: 输出路径
        title: 图标题

    Returns:
        输出路径
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    per_pulse = all(p.per_pulse_column in frame.columns for p in protocols)
    columns = {p: p.per_pulse_column if per_pulse else p.column for p in protocols}
    unit = "per pulse" if per_pulse else "bits per detection"

    with plt.rc_context(_SVG_RC):
        fig, ax = plt.subplots(figsize=(7.0, 5.0))
        try:
            plotted = 0
            for (theta, phi), group in combo_frames(frame):
                for protocol in protocols:
                    values = group[columns[protocol]].to_numpy(dtype=np.float64)
                    if not np.any(values > 0.0):
                        continue
                    ax.plot(
                        group["loss_db"].to_numpy(),
                        np.where(values > 0.0, values, np.nan),
                        label=curve_label(protocol, theta, phi),
                    )
                    plotted += 1

            if plotted:
                ax.set_yscale("log")
                ax.legend(fontsize="small")
            ax.set_xlabel("overall loss (dB)")
            ax.set_ylabel(f"secret key rate ({unit})")
            if title:
                ax.set_title(title)
            ax.grid(True, which="both", linewidth=0.3)
            fig.savefig(path, format="svg", metadata={"Date": None})
        finally:
            plt.close(fig)

    logger.info("Wrote SVG", path=str(path), curves=plotted)
    return path
