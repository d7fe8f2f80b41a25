"""
报告输出

JSON 报告键排序、不含时间戳，同样的输入得到逐字节相同的正文；
耗时与正文哈希写入 <path>.meta.json，输出到标准输出时只记日志。
"""
import csv
import hashlib
import io
import json
import sys
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

from rankforge.config.schema import OutputFormat
from rankforge.core.exceptions import IoError, ValidationException
from rankforge.core.logging_config import get_logger

logger = get_logger("reports")


def render_json(result: Mapping[str, Any]) -> str:
    return json.dumps(result, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def render_csv(distribution: Mapping[Any, int]) -> str:
    """秩分布 → `rank,count`"""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["rank", "count"])
    for rank, count in sorted(distribution.items(), key=lambda kv: int(kv[0])):
        writer.writerow([int(rank), int(count)])
    return buffer.getvalue()


def payload_hash(body: str) -> str:
    return hashlib.sha256(body.encode("utf-8")).hexdigest()


def render(result: Mapping[str, Any], fmt: OutputFormat) -> str:
    fmt = OutputFormat(fmt)
    if fmt == OutputFormat.CSV:
        if "distribution" not in result:
            raise ValidationException("CSV 输出需要秩分布")
        return render_csv(result["distribution"])
    return render_json(result)


def _write(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as e:
        raise IoError(f"无法写入 {path}", path=str(path), cause=e)


def emit_report(result: Mapping[str, Any], fmt: OutputFormat = OutputFormat.JSON,
                path: Optional[str] = None, elapsed_ms: Optional[float] = None,
                write_meta: bool = True) -> str:
    """
    输出报告正文

    Args:
        result: 可 JSON 序列化的结果
        fmt: json 或 csv
        path: 输出路径，None 表示标准输出
        elapsed_ms: 耗时，只进入附属文件或日志

    Returns:
        正文的 sha256
    """
    body = render(result, fmt)
    digest = payload_hash(body)
    meta: Dict[str, Any] = {"sha256": digest}
    if elapsed_ms is not None:
        meta["elapsed_ms"] = round(float(elapsed_ms), 3)

    if path is None:
        sys.stdout.write(body)
        sys.stdout.flush()
        logger.info("报告已输出", extra=meta)
        return digest

    target = Path(path)
    _write(target, body)
    if write_meta:
        _write(target.with_name(target.name + ".meta.json"), render_json(meta))
    logger.info("报告已写入", extra={"path": str(target), **meta})
    return digest
