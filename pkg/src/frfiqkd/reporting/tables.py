"""
表格输出模块

CSV、key=value 文本与元数据 JSON 的输出。相同输入得到逐字节相同的文件。
"""

import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
import pandas as pd

from ..data.models import ChannelScenario, CountTable, Protocol, RateReport
from ..utils.config import get_config
from ..utils.logger import get_logger

logger = get_logger(__name__)

PathLike = Union[str, Path]


def format_value(value: Any) -> str:
    """浮点数按配置的有效位数格式化，None 输出为空串"""
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return get_config().float_format % value
    return str(value)


def report_lines(report: RateReport, scenario: Optional[ChannelScenario] = None) -> List[str]:
    """
    RateReport 的 key=value 行

    Args:
        report: 密钥率报告
        scenario: 提供时在前面输出场景参数

    Returns:
        按固定顺序排列的文本行
    """
    items: List[tuple] = []
    if scenario is not None:
        items.extend(scenario.model_dump().items())
    t1, t2, t3 = report.singulars.as_tuple()
    items.extend([
        ("eta", report.eta),
        ("gain", report.gain),
        ("visibility", report.visibility),
        ("qber", report.qber),
        ("t1", t1),
        ("t2", t2),
        ("t3", t3),
        ("c_squared", report.c_squared),
        ("r_frfi_raw", report.r_frfi_raw),
        ("r_frfi", report.r_frfi),
        ("r_rfi_raw", report.r_rfi_raw),
        ("r_rfi", report.r_rfi),
        ("r_sixstate_raw", report.r_sixstate_raw),
        ("r_sixstate", report.r_sixstate),
    ])
    if report.gain is not None:
        items.extend((f"{p.column}_per_pulse", report.per_pulse(p)) for p in Protocol)
    if report.r_frfi_stderr is not None:
        items.append(("r_frfi_stderr", report.r_frfi_stderr))
    return [f"{key}={format_value(value)}" for key, value in items if value is not None]


def _ensure_parent(path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)


def write_csv(frame: pd.DataFrame, path: PathLike) -> Path:
    """写出带表头的 CSV，浮点数 12 位有效数字，换行符固定为 \\n"""
    path = Path(path)
    _ensure_parent(path)
    frame.to_csv(path, index=False, float_format=get_config().float_format, lineterminator="\n")
    logger.info("Wrote CSV", path=str(path), rows=len(frame))
    return path


def write_counts(table: CountTable, path: PathLike) -> Path:
    """36 行计数表"""
    return write_csv(table.to_frame(), path)


def _json_default(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def write_metadata(metadata: Dict[str, Any], path: PathLike) -> Path:
    """元数据 JSON（键排序，保证字节稳定）"""
    path = Path(path)
    _ensure_parent(path)
    text = json.dumps(metadata, sort_keys=True, indent=2, ensure_ascii=True, default=_json_default)
    path.write_text(text + "\n", encoding="utf-8")
    return path
