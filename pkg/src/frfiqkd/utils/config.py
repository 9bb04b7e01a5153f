"""
配置管理模块

运行参数统一由 AppConfig 管理；场景参数来自扁平 JSON 文件与命令行覆盖。
不读取任何环境变量。
"""

import json
from pathlib import Path
from typing import Any, Dict, Optional, Union

from pydantic import BaseModel, ConfigDict, Field


class AppConfig(BaseModel):
    """应用配置"""

    model_config = ConfigDict(validate_assignment=True)

    # 日志配置
    log_level: str = Field("WARNING", description="日志级别")
    log_file: Optional[str] = Field(None, description="日志文件路径，为空时只输出到stderr")
    debug: bool = Field(False, description="开发模式使用控制台渲染")

    # 仿真默认参数
    dark_rate: float = Field(1e-6, ge=0.0, le=1.0, description="单光子探测器暗计数率")
    misalignment: float = Field(0.015, ge=0.0, le=0.5, description="系统失准误码率")

    # 图形预设的损耗网格
    preset_loss_start: float = Field(0.0, ge=0.0)
    preset_loss_stop: float = Field(60.0, ge=0.0)
    preset_loss_step: float = Field(0.5, gt=0.0)

    # 数值参数
    svd_tolerance: float = Field(1e-14, gt=0.0, description="Jacobi 非对角收敛阈值")
    svd_max_sweeps: int = Field(100, ge=1, description="Jacobi 最大扫描轮数")
    csv_significant_digits: int = Field(12, ge=1, le=17)
    simulation_chunk_size: int = Field(2**20, ge=1, description="蒙特卡洛每批脉冲数")
    workers: int = Field(1, ge=1, description="扫描并行线程数")

    @property
    def float_format(self) -> str:
        """CSV 浮点格式"""
        return f"%.{self.csv_significant_digits}g"

    @property
    def is_development(self) -> bool:
        """是否为开发模式"""
        return self.debug


# 全局配置实例
_config: Optional[AppConfig] = None


def get_config() -> AppConfig:
    """获取配置实例"""
    global _config
    if _config is None:
        _config = AppConfig()
    return _config


def set_config(config: AppConfig) -> None:
    """替换全局配置（CLI 参数解析后调用）"""
    global _config
    _config = config


def reload_config() -> AppConfig:
    """恢复默认配置"""
    global _config
    _config = None
    return get_config()


SCENARIO_KEYS = ("theta_rad", "phi_rad", "loss_db", "dark_rate", "misalignment")


def read_json_object(path: Union[str, Path]) -> Dict[str, Any]:
    """读取扁平 JSON 对象，格式错误时抛出 ValueError"""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ValueError(f"Cannot read config {path}: {e}") from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ValueError(f"Malformed JSON config {path}: {e}") from e
    if not isinstance(data, dict):
        raise ValueError(f"Config {path} must be a JSON object")
    nested = [key for key, value in data.items() if isinstance(value, (dict, list))]
    if nested:
        raise ValueError(f"Config {path} must be flat, nested keys: {nested}")
    return data


def _apply_overrides(values: Dict[str, Any], overrides: Optional[Dict[str, Any]]) -> None:
    # 命令行参数优先
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = value


def _build_scenario(data: Dict[str, Any], overrides: Optional[Dict[str, Any]], source: Any):
    from ..data.models import ChannelScenario

    config = get_config()
    values: Dict[str, Any] = {
        "theta_rad": 0.0,
        "phi_rad": 0.0,
        "loss_db": 0.0,
        "dark_rate": config.dark_rate,
        "misalignment": config.misalignment,
    }
    unknown = sorted(set(data) - set(SCENARIO_KEYS))
    if unknown:
        raise ValueError(f"Unknown scenario keys in {source}: {unknown}")
    values.update(data)
    _apply_overrides(values, overrides)
    return ChannelScenario.model_validate(values)


def load_scenario_config(
    path: Optional[Union[str, Path]] = None,
    overrides: Optional[Dict[str, Any]] = None,
):
    """
    加载场景配置

    Args:
        path: JSON 配置文件路径，可为空
        overrides: 命令行覆盖值，值为 None 的键忽略

    Returns:
        ChannelScenario 实例
    """
    data = read_json_object(path) if path is not None else {}
    return _build_scenario(data, overrides, path)


SWEEP_KEYS = ("axis", "start", "stop", "step")


def load_sweep_config(
    path: Optional[Union[str, Path]] = None,
    overrides: Optional[Dict[str, Any]] = None,
    sweep_overrides: Optional[Dict[str, Any]] = None,
):
    """
    加载扫描配置

    JSON 中可同时包含场景键与 axis/start/stop/step；缺省为预设损耗网格

    Returns:
        SweepSpec 实例
    """
    from ..data.models import SweepSpec

    config = get_config()
    data = read_json_object(path) if path is not None else {}
    sweep: Dict[str, Any] = {
        "axis": "loss_db",
        "start": config.preset_loss_start,
        "stop": config.preset_loss_stop,
        "step": config.preset_loss_step,
    }
    sweep.update({key: data.pop(key) for key in SWEEP_KEYS if key in data})
    _apply_overrides(sweep, sweep_overrides)
    scenario = _build_scenario(data, overrides, path)
    return SweepSpec.model_validate({**sweep, "scenario": scenario})
