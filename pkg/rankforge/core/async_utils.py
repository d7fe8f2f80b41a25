"""
并行扫描工具模块
提供按下标区间切块的穷举扫描执行器

扫描任务（码字秩扫描、自同构暴力枚举）都可以按下标区间拆分，
结果按区间顺序归并，因此输出与切块方式无关。
"""
import threading
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, Iterable, List, Optional, Sequence, Tuple, TypeVar

from rankforge.core.logging_config import get_logger

logger = get_logger("async_utils")

T = TypeVar("T")
Range = Tuple[int, int]


def split_ranges(total: int, chunk_size: int) -> List[Range]:
    """把 [0, total) 切成长度不超过 chunk_size 的连续区间"""
    if chunk_size <= 0:
        raise ValueError("chunk_size 必须为正")
    return [(start, min(start + chunk_size, total)) for start in range(0, total, chunk_size)]


class ScanExecutor:
    """
    扫描执行器

    jobs == 1 时在当前进程内顺序执行；jobs > 1 时延迟创建进程池。
    worker 必须是模块级函数且参数可 pickle。
    """

    def __init__(self, jobs: int = 1):
        self._jobs = max(1, int(jobs))
        self._pool: Optional[ProcessPoolExecutor] = None
        self._lock = threading.Lock()

    @property
    def jobs(self) -> int:
        return self._jobs

    @property
    def pool(self) -> ProcessPoolExecutor:
        """延迟初始化进程池"""
        if self._pool is None:
            with self._lock:
                if self._pool is None:
                    self._pool = ProcessPoolExecutor(max_workers=self._jobs)
        return self._pool

    def map_ranges(
        self,
        worker: Callable[..., T],
        ranges: Sequence[Range],
        *args: Any,
        progress: Optional[Callable[[int, int], None]] = None,
    ) -> List[T]:
        """
        对每个区间调用 worker(start, stop, *args)，按区间顺序返回结果

        Args:
            worker: 区间工作函数
            ranges: 下标区间列表
            *args: 透传给 worker 的公共参数
            progress: 可选的进度回调 (已完成块数, 总块数)
        """
        results: List[T] = []
        if self._jobs == 1 or len(ranges) <= 1:
            for done, (lo, hi) in enumerate(ranges, 1):
                results.append(worker(lo, hi, *args))
                if progress:
                    progress(done, len(ranges))
            return results

        futures = [self.pool.submit(worker, lo, hi, *args) for lo, hi in ranges]
        for done, future in enumerate(futures, 1):
            results.append(future.result())
            if progress:
                progress(done, len(ranges))
        return results

    def shutdown(self, wait: bool = True):
        """关闭执行器"""
        if self._pool is not None:
            self._pool.shutdown(wait=wait)
            self._pool = None

    def __enter__(self) -> "ScanExecutor":
        return self

    def __exit__(self, *exc) -> None:
        self.shutdown()


def log_progress(label: str, every: int = 1) -> Callable[[int, int], None]:
    """生成把扫描进度写入诊断流的回调"""
    def _report(done: int, total: int) -> None:
        if done == total or done % every == 0:
            logger.info(f"{label} 进度 {done}/{total}", extra={"done": done, "total": total})
    return _report


def flatten(chunks: Iterable[Iterable[T]]) -> List[T]:
    """按顺序拼接各块结果"""
    out: List[T] = []
    for chunk in chunks:
        out.extend(chunk)
    return out
