"""
核心基础设施测试
覆盖异常框架、结构化日志与扫描执行器
"""
import json
import logging
import os
import sys
import time

import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from rankforge.core.async_utils import ScanExecutor, flatten, log_progress, split_ranges
from rankforge.core.exceptions import (
    BadParameters,
    BudgetExceeded,
    DivisionByZero,
    ErrorCode,
    IoError,
    NotCoprime,
    RankForgeException,
    Singular,
    UnknownKey,
    is_usage_error,
    wrap_exception,
)
from rankforge.core.logging_config import (
    ContextLogger,
    StructuredFormatter,
    get_logger,
    get_timings,
    log_block,
    timed,
)


def _square_range(lo, hi):
    return [i * i for i in range(lo, hi)]


class TestExceptions:
    """异常框架测试"""

    def test_to_dict(self):
        exc = BudgetExceeded("太大", requested=100, budget=10)
        data = exc.to_dict()
        assert data["error"] is True
        assert data["code"] == ErrorCode.BUDGET_EXCEEDED.value
        assert data["details"] == {"requested": 100, "budget": 10}
        assert "cause" not in data

    def test_str_carries_code(self):
        assert str(Singular()) == f"[{ErrorCode.SINGULAR.value}] 矩阵奇异"
        assert "UnknownKey" in repr(UnknownKey("x"))

    def test_cause_recorded(self):
        exc = IoError("读失败", path="/tmp/x", cause=OSError("denied"))
        data = exc.to_dict()
        assert data["details"]["path"] == "/tmp/x"
        assert data["cause"] == "denied"

    def test_usage_classification(self):
        """参数类错误映射到退出码 2，运算类错误不算"""
        assert is_usage_error(BadParameters("x"))
        assert is_usage_error(NotCoprime(2, 4))
        assert is_usage_error(BudgetExceeded("x"))
        assert not is_usage_error(Singular())
        assert not is_usage_error(DivisionByZero())
        assert not is_usage_error(ValueError("x"))

    def test_wrap_exception(self):
        original = BadParameters("x")
        assert wrap_exception(original) is original
        wrapped = wrap_exception(KeyError("k"), message="包装")
        assert isinstance(wrapped, RankForgeException)
        assert wrapped.message == "包装"
        assert isinstance(wrapped.cause, KeyError)


class TestLogging:
    """结构化日志测试"""

    def _record(self, **fields):
        record = logging.LogRecord("rankforge.test", logging.INFO, __file__, 1, "消息", None, None)
        record.extra_fields = fields
        return record

    def test_json_format(self):
        """JSON 格式携带额外字段"""
        line = StructuredFormatter("json").format(self._record(q=3, m=6))
        data = json.loads(line)
        assert data["message"] == "消息"
        assert data["level"] == "INFO"
        assert data["q"] == 3 and data["m"] == 6
        assert data["timestamp"].endswith("Z")

    def test_text_format(self):
        line = StructuredFormatter("text").format(self._record(q=3))
        assert "消息" in line and "q=3" in line

    def test_child_logger_name(self):
        logger = get_logger("unit")
        assert isinstance(logger, ContextLogger)
        assert logger.logger.name == "rankforge.unit"

    def test_context_merges_extra(self):
        """线程上下文与调用时的 extra 合并"""
        logger = get_logger("unit_ctx")
        with logger.context(run="a"):
            _, kwargs = logger.process("m", {"extra": {"x": 1}})
        assert kwargs["extra"]["extra_fields"] == {"run": "a", "x": 1}
        _, kwargs = logger.process("m", {})
        assert kwargs["extra"]["extra_fields"] == {}

    def test_log_block_records_duration(self):
        """计时进入 ScanTimings，带规模时给出吞吐量"""
        with log_block("unit_block", size=3):
            time.sleep(0.001)
        assert get_timings().last("unit_block") > 0
        summary = get_timings().summary("unit_block")
        assert summary["count"] >= 1
        assert summary["per_second"] > 0
        assert get_timings().summary("never_ran") == {}

    def test_log_block_reraises(self):
        """失败的代码块不计时"""
        with pytest.raises(Singular):
            with log_block("unit_fail"):
                raise Singular()
        assert get_timings().last("unit_fail") is None

    def test_timed(self):
        @timed("unit_timed")
        def add(a, b):
            return a + b

        assert add(2, 3) == 5
        assert "unit_timed" in get_timings().names()

    def test_plain_extra_attributes(self):
        """未经适配器的 extra 属性同样输出"""
        record = logging.LogRecord("rankforge.test", logging.INFO, __file__, 1, "消息", None, None)
        record.size = 27
        assert json.loads(StructuredFormatter("json").format(record))["size"] == 27


class TestScanExecutor:
    """扫描执行器测试"""

    def test_split_ranges(self):
        assert split_ranges(10, 4) == [(0, 4), (4, 8), (8, 10)]
        assert split_ranges(0, 4) == []
        with pytest.raises(ValueError):
            split_ranges(5, 0)

    def test_sequential(self):
        progress = []
        with ScanExecutor(1) as pool:
            parts = pool.map_ranges(_square_range, split_ranges(7, 3),
                                    progress=lambda d, t: progress.append((d, t)))
        assert flatten(parts) == [i * i for i in range(7)]
        assert progress == [(1, 3), (2, 3), (3, 3)]

    def test_processes_keep_order(self):
        """并行结果按区间顺序归并"""
        progress = []
        with ScanExecutor(3) as pool:
            parts = pool.map_ranges(_square_range, split_ranges(50, 7),
                                    progress=lambda d, t: progress.append(d))
        assert flatten(parts) == [i * i for i in range(50)]
        assert progress == list(range(1, 9))
        assert pool._pool is None

    def test_jobs_clamped(self):
        assert ScanExecutor(0).jobs == 1

    def test_log_progress_callback(self):
        report = log_progress("单元", every=2)
        for done in range(1, 4):
            report(done, 3)
