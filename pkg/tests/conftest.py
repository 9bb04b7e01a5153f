"""
测试配置文件

提供测试fixtures和配置
"""

import math
import sys
from pathlib import Path

import numpy as np
import pytest

# 添加项目路径
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from src.frfiqkd.data.models import ChannelScenario  # noqa: E402
from src.frfiqkd.utils.config import reload_config  # noqa: E402

# 仿真默认噪声参数
BASELINE_DARK_RATE = 1e-6
BASELINE_MISALIGNMENT = 0.015


@pytest.fixture(autouse=True)
def fresh_config():
    """每个测试使用默认配置"""
    config = reload_config()
    yield config
    reload_config()


@pytest.fixture
def rng():
    """固定种子的随机数生成器"""
    return np.random.Generator(np.random.Philox(20240601))


@pytest.fixture
def baseline_scenario():
    """pd=1e-6、ed=1.5% 的零损耗对准场景"""
    return ChannelScenario(dark_rate=BASELINE_DARK_RATE, misalignment=BASELINE_MISALIGNMENT)


@pytest.fixture
def noiseless_scenario():
    """无噪声、无损耗、参考系对准"""
    return ChannelScenario(dark_rate=0.0, misalignment=0.0)


@pytest.fixture
def rotated_scenario():
    """θ=π/3、φ=π/4 的大失准场景"""
    return ChannelScenario(
        theta_rad=math.pi / 3,
        phi_rad=math.pi / 4,
        dark_rate=BASELINE_DARK_RATE,
        misalignment=BASELINE_MISALIGNMENT,
    )


@pytest.fixture
def scenario_file(tmp_path):
    """写出 JSON 场景配置并返回路径"""

    def _write(content, name="scenario.json"):
        path = tmp_path / name
        path.write_text(content, encoding="utf-8")
        return path

    return _write

