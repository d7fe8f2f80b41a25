"""
配置加载器

支持多种配置源:
- YAML 文件
- JSON 文件
- 环境变量（RANKFORGE_ 前缀，双下划线表示嵌套）
- RANKFORGE_BUDGET 预算覆盖
"""

import json
import os
import threading
from dataclasses import asdict, fields, is_dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Type, TypeVar

from rankforge.config.schema import BudgetConfig, RankForgeConfig
from rankforge.core.exceptions import ErrorCode, IoError, ParseError, UnknownKey, ValidationException
from rankforge.core.logging_config import get_logger

logger = get_logger("config")

T = TypeVar("T")

BUDGET_ENV = "RANKFORGE_BUDGET"


class ConfigCenter:
    """
    配置中心

    功能:
    - 多源配置加载（文件、环境变量）
    - 配置缓存
    - 配置合并与 dataclass 转换（可选拒绝未知键）

    使用示例:
    ```python
    center = ConfigCenter("config")
    config = center.load_rankforge_config()
    ```
    """

    def __init__(self, config_path: str = "config", env_prefix: str = "RANKFORGE_"):
        self._config_path = Path(config_path)
        self._env_prefix = env_prefix
        self._cache: Dict[str, Any] = {}
        self._lock = threading.RLock()

    def load(
        self,
        name: str,
        config_type: Optional[Type[T]] = None,
        default: Optional[T] = None,
        strict: bool = False,
    ) -> T:
        """
        加载配置

        Args:
            name: 配置名称（不含扩展名）
            config_type: 目标 dataclass 类型
            default: 没有任何来源时返回的默认值
            strict: 是否拒绝未知键
        """
        cache_key = f"{name}:{config_type.__name__ if config_type else 'dict'}"
        if cache_key in self._cache:
            return self._cache[cache_key]

        data = self._load_from_sources(name)

        if data is None:
            if default is not None:
                return default
            data = {}

        config = self._dict_to_dataclass(data, config_type, strict) if config_type else data

        with self._lock:
            self._cache[cache_key] = config
        return config

    def load_rankforge_config(self) -> RankForgeConfig:
        """加载全局配置，并应用 RANKFORGE_BUDGET 覆盖"""
        config = self.load("rankforge", RankForgeConfig, strict=True)
        override = os.environ.get(BUDGET_ENV)
        if override:
            config.budgets = apply_budget_override(config.budgets, override)
        return config

    def _load_from_sources(self, name: str) -> Optional[Dict[str, Any]]:
        """从多个源加载配置"""
        data: Dict[str, Any] = {}

        file_data = self._load_from_file(name)
        if file_data:
            data = deep_merge(data, file_data)

        env_data = self._load_from_env(name)
        if env_data:
            data = deep_merge(data, env_data)

        return data if data else None

    def _load_from_file(self, name: str) -> Optional[Dict[str, Any]]:
        """从文件加载配置"""
        for ext in (".yaml", ".yml", ".json"):
            path = self._config_path / f"{name}{ext}"
            if path.exists():
                return load_mapping(path)
        return None

    def _load_from_env(self, name: str) -> Dict[str, Any]:
        """从环境变量加载配置"""
        prefix = f"{self._env_prefix}{name.upper().replace('/', '_')}_"
        data: Dict[str, Any] = {}

        for key, value in os.environ.items():
            if key.startswith(prefix):
                keys = key[len(prefix):].lower().split("__")
                _set_nested(data, keys, parse_env_value(value))

        return data

    def _dict_to_dataclass(self, data: Dict[str, Any], cls: Type[T], strict: bool = False) -> T:
        return dict_to_dataclass(data, cls, strict)

    def save(self, name: str, config: Any, format: str = "yaml") -> Path:
        """保存配置到文件"""
        if is_dataclass(config):
            data = _plain(asdict(config))
        elif isinstance(config, dict):
            data = config
        else:
            raise ValidationException(f"无法保存类型为 {type(config)} 的配置",
                                      ErrorCode.CONFIGURATION_ERROR)

        path = self._config_path / f"{name}.{format}"
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            if format == "yaml":
                import yaml
                yaml.safe_dump(data, f, default_flow_style=False, allow_unicode=True)
            else:
                json.dump(data, f, indent=2, ensure_ascii=False)

        self.invalidate(name)
        return path

    def invalidate(self, name: Optional[str] = None) -> None:
        """使缓存失效"""
        with self._lock:
            if name:
                for key in [k for k in self._cache if k.startswith(name)]:
                    del self._cache[key]
            else:
                self._cache.clear()


# === 工具函数 ===

def load_mapping(path: Path) -> Dict[str, Any]:
    """读取 YAML/JSON 文件，顶层必须是映射"""
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            if path.suffix in (".yaml", ".yml"):
                import yaml
                data = yaml.safe_load(f)
            else:
                data = json.load(f)
    except OSError as e:
        raise IoError(f"无法读取配置文件 {path}", path=str(path), cause=e)
    except ValueError as e:
        # json.JSONDecodeError 与 yaml.YAMLError 都在这里汇合
        raise ParseError(f"配置文件 {path} 解析失败: {e}", cause=e)
    except Exception as e:
        if e.__class__.__module__.startswith("yaml"):
            raise ParseError(f"配置文件 {path} 解析失败: {e}", cause=e)
        raise

    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ParseError(f"配置文件 {path} 顶层必须是对象")
    return data


def parse_env_value(value: str) -> Any:
    """解析环境变量值"""
    try:
        return json.loads(value)
    except json.JSONDecodeError:
        pass

    if value.lower() in ("true", "yes"):
        return True
    if value.lower() in ("false", "no"):
        return False

    return value


def _set_nested(data: Dict, keys: List[str], value: Any) -> None:
    """设置嵌套字典值"""
    for key in keys[:-1]:
        data = data.setdefault(key, {})
    data[keys[-1]] = value


def deep_merge(base: Dict, override: Dict) -> Dict:
    """深度合并字典"""
    result = base.copy()
    for key, value in override.items():
        if key in result and isinstance(result[key], dict) and isinstance(value, dict):
            result[key] = deep_merge(result[key], value)
        else:
            result[key] = value
    return result


def dict_to_dataclass(data: Dict[str, Any], cls: Type[T], strict: bool = False) -> T:
    """将字典转换为 dataclass，嵌套 dataclass 与枚举一并转换"""
    if not is_dataclass(cls):
        return data
    if not isinstance(data, dict):
        raise ParseError(f"{cls.__name__} 需要一个对象")

    field_types = {f.name: f.type for f in fields(cls)}
    if strict:
        for key in data:
            if key not in field_types:
                raise UnknownKey(key)

    kwargs = {}
    for name, field_type in field_types.items():
        if name not in data:
            continue
        value = data[name]
        if is_dataclass(field_type) and isinstance(value, dict):
            value = dict_to_dataclass(value, field_type, strict)
        elif isinstance(field_type, type) and issubclass(field_type, Enum) and value is not None:
            try:
                value = field_type(value)
            except ValueError as e:
                raise ParseError(f"{name} 的取值 {value!r} 无效", cause=e)
        kwargs[name] = value

    return cls(**kwargs)


def apply_budget_override(budgets: BudgetConfig, raw: str) -> BudgetConfig:
    """
    解析 RANKFORGE_BUDGET

    单个整数同时覆盖三项枚举预算（GL、码字、oracle）；JSON 对象按键覆盖。
    """
    value = parse_env_value(raw)
    if isinstance(value, bool) or not isinstance(value, (int, dict)):
        raise ParseError(f"{BUDGET_ENV} 必须是整数或 JSON 对象: {raw!r}")
    if isinstance(value, int):
        value = {"gl_budget": value, "max_codewords": value, "max_oracle_tuples": value}
    merged = deep_merge(asdict(budgets), value)
    result = dict_to_dataclass(merged, BudgetConfig, strict=True)
    for name, amount in asdict(result).items():
        if not isinstance(amount, int) or amount <= 0:
            raise ValidationException(f"预算 {name} 必须为正整数")
    logger.debug("应用预算覆盖", extra={"budgets": asdict(result)})
    return result


def _plain(data: Any) -> Any:
    """把枚举换成其取值，便于 YAML 输出"""
    if isinstance(data, dict):
        return {k: _plain(v) for k, v in data.items()}
    if isinstance(data, list):
        return [_plain(v) for v in data]
    if isinstance(data, Enum):
        return data.value
    return data


# 全局配置中心实例
_global_config_center: Optional[ConfigCenter] = None
_config_lock = threading.Lock()


def get_config_center(config_path: str = "config") -> ConfigCenter:
    """获取全局配置中心实例"""
    global _global_config_center
    if _global_config_center is None:
        with _config_lock:
            if _global_config_center is None:
                _global_config_center = ConfigCenter(config_path)
    return _global_config_center


def reset_config_center() -> None:
    """重置全局配置中心（主要用于测试）"""
    global _global_config_center
    with _config_lock:
        _global_config_center = None
