"""
核心模块 - 提供异常体系、日志与并行扫描等基础设施
"""
from .exceptions import ErrorCode, RankForgeException, is_usage_error
from .logging_config import get_logger, get_timings, log_block, timed
from .async_utils import ScanExecutor, split_ranges

__all__ = [
    "ErrorCode",
    "RankForgeException",
    "is_usage_error",
    "get_logger",
    "get_timings",
    "log_block",
    "timed",
    "ScanExecutor",
    "split_ranges",
]
