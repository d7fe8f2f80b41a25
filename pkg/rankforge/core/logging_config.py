"""
统一日志系统

所有记录写入诊断流 (stderr)，标准输出只留给机器可读的报告。
扫描类代码块用 log_block 计时，耗时与吞吐量进入 ScanTimings。
"""
import json
import logging
import os
import sys
import threading
import time
from collections import defaultdict, deque
from contextlib import contextmanager
from datetime import datetime, timezone
from functools import wraps
from typing import Any, Deque, Dict, Optional

LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO").upper()
LOG_FORMAT = os.getenv("LOG_FORMAT", "json")  # json | text
LOG_FILE = os.getenv("LOG_FILE")

ROOT_LOGGER_NAME = "rankforge"

# LogRecord 自带的属性，格式化时不当作额外字段
_RESERVED = frozenset(vars(logging.LogRecord("", 0, "", 0, "", None, None))) | {"message", "asctime"}


class StructuredFormatter(logging.Formatter):
    """一条记录一行：json 模式输出对象，text 模式输出 key=value 尾巴"""

    def __init__(self, fmt_kind: Optional[str] = None):
        super().__init__()
        self.fmt_kind = fmt_kind or LOG_FORMAT

    @staticmethod
    def _fields(record: logging.LogRecord) -> Dict[str, Any]:
        fields = dict(getattr(record, "extra_fields", None) or {})
        for key, value in vars(record).items():
            if key not in _RESERVED and key != "extra_fields":
                fields.setdefault(key, value)
        return fields

    def format(self, record: logging.LogRecord) -> str:
        stamp = datetime.fromtimestamp(record.created, timezone.utc).isoformat().replace("+00:00", "Z")
        fields = self._fields(record)
        if self.fmt_kind == "json":
            payload = {
                "timestamp": stamp,
                "level": record.levelname,
                "logger": record.name,
                "message": record.getMessage(),
                "where": f"{record.module}:{record.lineno}",
                **fields,
            }
            if record.exc_info:
                payload["exception"] = self.formatException(record.exc_info)
            return json.dumps(payload, ensure_ascii=False, default=str)

        tail = " ".join(f"{k}={v}" for k, v in fields.items())
        line = f"[{stamp}] {record.levelname:8} {record.name} - {record.getMessage()}"
        if tail:
            line += " | " + tail
        if record.exc_info:
            line += "\n" + self.formatException(record.exc_info)
        return line


class ContextLogger(logging.LoggerAdapter):
    """
    把调用时的 extra 与线程内的上下文合并为 extra_fields

    with logger.context(q=3, m=6): 内的所有记录都带上这些字段。
    """

    _local = threading.local()

    def __init__(self, logger: logging.Logger, extra: Optional[Dict[str, Any]] = None):
        super().__init__(logger, extra or {})

    @classmethod
    def _stack(cls) -> Dict[str, Any]:
        if not hasattr(cls._local, "fields"):
            cls._local.fields = {}
        return cls._local.fields

    def process(self, msg, kwargs):
        fields = {**self.extra, **self._stack(), **(kwargs.pop("extra", None) or {})}
        kwargs["extra"] = {"extra_fields": fields}
        return msg, kwargs

    @contextmanager
    def context(self, **fields):
        saved = dict(self._stack())
        self._stack().update(fields)
        try:
            yield self
        finally:
            self._local.fields = saved


def setup_logging(name: str = ROOT_LOGGER_NAME, level: Optional[str] = None,
                  fmt_kind: Optional[str] = None) -> ContextLogger:
    """
    配置根日志器；重复调用只更新级别与格式

    Args:
        name: 日志器名称
        level: 日志级别，默认取 LOG_LEVEL
        fmt_kind: json 或 text，默认取 LOG_FORMAT
    """
    logger = logging.getLogger(name)
    logger.setLevel(getattr(logging, (level or LOG_LEVEL).upper(), logging.INFO))
    logger.propagate = False

    if not logger.handlers:
        logger.addHandler(logging.StreamHandler(sys.stderr))
        if LOG_FILE:
            logger.addHandler(logging.FileHandler(LOG_FILE, encoding="utf-8"))
    for handler in logger.handlers:
        handler.setFormatter(StructuredFormatter(fmt_kind))
    return ContextLogger(logger)


_root: Optional[ContextLogger] = None
_root_lock = threading.Lock()


def get_logger(name: Optional[str] = None) -> ContextLogger:
    """获取日志器，子日志器命名为 rankforge.<name>"""
    global _root
    if _root is None:
        with _root_lock:
            if _root is None:
                _root = setup_logging()
    if not name:
        return _root
    # 子日志器向根传播，级别与处理器由根统一控制
    return ContextLogger(logging.getLogger(f"{ROOT_LOGGER_NAME}.{name}"))


# === 扫描计时 ===

class ScanTimings:
    """按代码块名称保存最近若干次耗时与规模"""

    def __init__(self, keep: int = 256):
        self._runs: Dict[str, Deque[Dict[str, float]]] = defaultdict(lambda: deque(maxlen=keep))
        self._lock = threading.Lock()

    def record(self, name: str, seconds: float, size: Optional[int] = None) -> None:
        run = {"seconds": seconds}
        if size is not None:
            run["size"] = size
        with self._lock:
            self._runs[name].append(run)

    def last(self, name: str) -> Optional[float]:
        with self._lock:
            runs = self._runs.get(name)
            return runs[-1]["seconds"] if runs else None

    def summary(self, name: str) -> Dict[str, float]:
        """次数、总耗时、最大耗时；带规模时附上每秒处理量"""
        with self._lock:
            runs = list(self._runs.get(name, ()))
        if not runs:
            return {}
        total = sum(r["seconds"] for r in runs)
        out = {"count": len(runs), "total": total, "max": max(r["seconds"] for r in runs)}
        sized = sum(r.get("size", 0) for r in runs)
        if sized and total > 0:
            out["per_second"] = sized / total
        return out

    def names(self):
        with self._lock:
            return sorted(self._runs)


_timings = ScanTimings()


def get_timings() -> ScanTimings:
    return _timings


@contextmanager
def log_block(name: str, **extra):
    """
    给代码块计时并写 debug 日志

    extra 中的 size（码字数、枚举规模）会被记为吞吐量的分子。
    """
    logger = get_logger("perf")
    size = extra.get("size")
    start = time.perf_counter()
    logger.debug(f"开始 {name}", extra=extra)
    try:
        yield
    except Exception as e:
        ms = int((time.perf_counter() - start) * 1000)
        logger.debug(f"失败 {name}", extra={**extra, "duration_ms": ms, "error": str(e)})
        raise
    seconds = time.perf_counter() - start
    _timings.record(name, seconds, size if isinstance(size, int) else None)
    logger.debug(f"完成 {name}", extra={**extra, "duration_ms": int(seconds * 1000)})


def timed(name: Optional[str] = None):
    """把整个函数包进 log_block"""
    def decorator(func):
        label = name or func.__qualname__

        @wraps(func)
        def wrapper(*args, **kwargs):
            with log_block(label):
                return func(*args, **kwargs)
        return wrapper
    return decorator
