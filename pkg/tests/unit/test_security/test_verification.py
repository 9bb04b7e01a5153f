"""
性质自检测试
"""

import numpy as np
import pytest

from src.frfiqkd.security.verification import PropertyVerifier, run_verification


class TestPropertyVerifier:
    """测试随机态性质检查"""

    def test_all_properties_pass(self):
        """测试固定种子下全部通过"""
        summary = run_verification(20, seed=3)
        assert summary.passed
        assert summary.trials == 20
        # 每个随机态 5 项检查，外加一次非半正定拒绝检查
        assert summary.checks == 20 * 5 + 1

    def test_single_trial(self):
        """测试 trials=1 只检查一个态"""
        summary = run_verification(1, seed=0)
        assert summary.checks == 6

    def test_rejects_zero_trials(self):
        """测试 trials 必须为正"""
        with pytest.raises(ValueError, match="trials"):
            PropertyVerifier(seed=0).run(0)

    def test_non_psd_hook(self):
        """测试非半正定矩阵在构造时被拒绝"""
        assert PropertyVerifier(seed=0).check_rejects_non_psd() is None

    def test_failure_is_reported(self, mocker):
        """测试性质失败时记录态的展开系数"""
        mocker.patch.object(PropertyVerifier, "check_twirl", return_value="forced failure")
        summary = PropertyVerifier(seed=1).run(2)
        assert not summary.passed
        assert [f.name for f in summary.failures] == ["twirl", "twirl"]
        failure = summary.failures[0]
        assert failure.detail == "forced failure"
        assert np.asarray(failure.decomposition["t"]).shape == (3, 3)

    def test_reproducible(self):
        """测试相同种子结果一致"""
        a = run_verification(5, seed=11)
        b = run_verification(5, seed=11)
        assert a.model_dump() == b.model_dump()
