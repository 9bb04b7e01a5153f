"""
配置与日志测试
"""

import json
import logging

import pytest
from pydantic import ValidationError

from src.frfiqkd.data.models import SweepAxis
from src.frfiqkd.utils.config import (
    AppConfig,
    get_config,
    load_scenario_config,
    load_sweep_config,
    read_json_object,
    reload_config,
    set_config,
)
from src.frfiqkd.utils.logger import LoggerMixin, get_logger, log_function_call, setup_logging


class TestAppConfig:
    """测试应用配置"""

    def test_defaults(self):
        """测试默认值"""
        config = AppConfig()
        assert config.float_format == "%.12g"
        assert config.svd_tolerance == 1e-14
        assert config.svd_max_sweeps == 100
        assert config.workers == 1
        assert not config.is_development

    def test_validate_assignment(self):
        """测试赋值时校验"""
        config = AppConfig()
        with pytest.raises(ValidationError):
            config.workers = 0

    def test_set_and_reload(self):
        """测试替换与恢复全局配置"""
        set_config(AppConfig(workers=4))
        assert get_config().workers == 4
        assert reload_config().workers == 1

    def test_environment_is_ignored(self, monkeypatch):
        """测试不读取环境变量"""
        monkeypatch.setenv("WORKERS", "8")
        monkeypatch.setenv("LOG_LEVEL", "DEBUG")
        config = reload_config()
        assert config.workers == 1
        assert config.log_level == "WARNING"


class TestReadJson:
    """测试 JSON 读取"""

    def test_missing_file(self, tmp_path):
        """测试文件不存在"""
        with pytest.raises(ValueError, match="Cannot read"):
            read_json_object(tmp_path / "missing.json")

    @pytest.mark.parametrize("content,message", [
        ("{not json", "Malformed"),
        ("[1, 2]", "JSON object"),
        ('{"loss_db": {"value": 1}}', "flat"),
    ])
    def test_invalid(self, scenario_file, content, message):
        """测试格式错误"""
        with pytest.raises(ValueError, match=message):
            read_json_object(scenario_file(content))


class TestScenarioConfig:
    """测试场景配置"""

    def test_defaults(self):
        """测试无配置文件时使用默认噪声"""
        s = load_scenario_config()
        assert (s.theta_rad, s.loss_db, s.dark_rate, s.misalignment) == (0.0, 0.0, 1e-6, 0.015)

    def test_file_values(self, scenario_file):
        """测试读取文件"""
        path = scenario_file(json.dumps({"theta_rad": 0.5, "loss_db": 12.0}))
        s = load_scenario_config(path)
        assert s.theta_rad == 0.5
        assert s.loss_db == 12.0

    def test_overrides_win(self, scenario_file):
        """测试命令行覆盖文件值，None 忽略"""
        path = scenario_file(json.dumps({"theta_rad": 0.5, "loss_db": 12.0}))
        s = load_scenario_config(path, {"loss_db": 3.0, "theta_rad": None})
        assert s.loss_db == 3.0
        assert s.theta_rad == 0.5

    def test_noise_defaults_follow_config(self, fresh_config):
        """测试默认噪声取自应用配置"""
        fresh_config.misalignment = 0.02
        assert load_scenario_config().misalignment == 0.02

    def test_unknown_key(self, scenario_file):
        """测试未知键"""
        with pytest.raises(ValueError, match="Unknown scenario keys"):
            load_scenario_config(scenario_file('{"detector": 1}'))

    def test_out_of_range(self, scenario_file):
        """测试越界值"""
        with pytest.raises(ValidationError):
            load_scenario_config(scenario_file('{"loss_db": -1}'))


class TestSweepConfig:
    """测试扫描配置"""

    def test_default_grid(self):
        """测试缺省为预设损耗网格"""
        spec = load_sweep_config()
        assert spec.axis is SweepAxis.LOSS_DB
        assert (spec.start, spec.stop, spec.step) == (0.0, 60.0, 0.5)
        assert spec.size == 121

    def test_file_and_overrides(self, scenario_file):
        """测试文件中的扫描键与命令行覆盖"""
        path = scenario_file(json.dumps({"axis": "phi", "start": 0.0, "stop": 1.0, "step": 0.5,
                                         "theta_rad": 0.3}))
        spec = load_sweep_config(path, {"loss_db": 5.0}, {"step": 0.25, "stop": None})
        assert spec.axis is SweepAxis.PHI
        assert spec.step == 0.25
        assert spec.stop == 1.0
        assert spec.scenario.theta_rad == 0.3
        assert spec.scenario.loss_db == 5.0

    def test_invalid_axis(self):
        """测试未知扫描轴"""
        with pytest.raises(ValidationError):
            load_sweep_config(sweep_overrides={"axis": "energy"})


class TestLogging:
    """测试日志"""

    def test_setup_respects_level(self, fresh_config):
        """测试日志级别"""
        fresh_config.log_level = "ERROR"
        setup_logging(force=True)
        assert logging.getLogger().level == logging.ERROR

    def test_log_file(self, fresh_config, tmp_path):
        """测试写入日志文件"""
        fresh_config.log_level = "INFO"
        fresh_config.log_file = str(tmp_path / "logs" / "frfi.log")
        setup_logging(force=True)
        get_logger("test").info("hello", value=1)
        for handler in logging.getLogger().handlers:
            handler.flush()
        text = (tmp_path / "logs" / "frfi.log").read_text(encoding="utf-8")
        assert '"event": "hello"' in text
        reload_config()
        setup_logging(force=True)

    def test_mixin(self):
        """测试混入类"""

        class Worker(LoggerMixin):
            pass

        assert Worker().logger is not None

    def test_log_function_call(self):
        """测试装饰器保留返回值与异常"""

        @log_function_call
        def double(x):
            return 2 * x

        @log_function_call
        def fail():
            raise ValueError("boom")

        assert double(3) == 6
        assert double.__name__ == "double"
        with pytest.raises(ValueError, match="boom"):
            fail()
