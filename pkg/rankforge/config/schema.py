"""
配置模式定义

使用 dataclass 定义所有配置的结构和默认值
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional


class CodeKind(str, Enum):
    """码族"""
    PHI = "phi"
    TWISTED = "twisted"
    GABIDULIN = "gabidulin"
    PUNCTURED = "punctured"


class OutputFormat(str, Enum):
    """报告格式"""
    JSON = "json"
    CSV = "csv"


class AutMethod(str, Enum):
    """自同构群阶的计算方式"""
    THEORY = "theory"
    COUNT = "count"
    ORACLE = "oracle"


@dataclass
class BudgetConfig:
    """枚举预算"""
    table_budget: int = 1 << 22        # 域阶上限
    gl_budget: int = 1 << 28           # |GL(dim, q)| 上限
    max_codewords: int = 1 << 26       # 码字扫描上限
    max_oracle_tuples: int = 1 << 28   # 暴力自同构枚举上限


@dataclass
class ParallelConfig:
    """并行扫描配置"""
    jobs: int = 1
    chunk_size: int = 1 << 14


@dataclass
class LoggingConfig:
    """日志配置"""
    level: str = "INFO"
    format: str = "json"


@dataclass
class OutputConfig:
    """输出配置"""
    format: OutputFormat = OutputFormat.JSON
    write_meta: bool = True   # 耗时写入 <path>.meta.json


@dataclass
class RankForgeConfig:
    """全局配置"""
    budgets: BudgetConfig = field(default_factory=BudgetConfig)
    parallel: ParallelConfig = field(default_factory=ParallelConfig)
    logging: LoggingConfig = field(default_factory=LoggingConfig)
    output: OutputConfig = field(default_factory=OutputConfig)


@dataclass
class RunConfig:
    """
    单次 CLI 运行的参数记录

    μ、ν 以规范整数形式给出；省略时由命令选择默认值。
    jobs、chunk_size、format 缺省取全局配置的 parallel 与 output 段。
    """
    command: str = ""
    kind: CodeKind = CodeKind.PHI
    q: Optional[int] = None
    m: Optional[int] = None
    n: Optional[int] = None
    t: Optional[int] = None
    s: Optional[int] = None
    k: int = 1
    mu: Optional[int] = None
    nu: Optional[int] = None
    u: Optional[int] = None
    g: Optional[list] = None          # gabidulin 求值点（规范整数）
    method: AutMethod = AutMethod.THEORY
    triple: Optional[dict] = None
    include_transpose: bool = True
    samples: int = 10000
    seed: int = 0
    output: Optional[str] = None
    format: OutputFormat = OutputFormat.JSON
    jobs: int = 1
    chunk_size: int = 1 << 14
    budgets: BudgetConfig = field(default_factory=BudgetConfig)
