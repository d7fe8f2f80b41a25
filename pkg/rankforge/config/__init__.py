"""
配置模块

提供统一的配置管理:
- 配置模式定义
- 配置加载器
"""

from .schema import (
    AutMethod,
    BudgetConfig,
    CodeKind,
    LoggingConfig,
    OutputConfig,
    OutputFormat,
    ParallelConfig,
    RankForgeConfig,
    RunConfig,
)
from .loader import ConfigCenter, get_config_center, reset_config_center

__all__ = [
    # 配置模式
    "BudgetConfig",
    "ParallelConfig",
    "LoggingConfig",
    "OutputConfig",
    "RankForgeConfig",
    "RunConfig",
    # 枚举类型
    "CodeKind",
    "OutputFormat",
    "AutMethod",
    # 配置加载器
    "ConfigCenter",
    "get_config_center",
    "reset_config_center",
]
