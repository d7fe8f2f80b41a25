"""
统一异常处理框架
定义 rankforge 中使用的所有自定义异常类
"""
from typing import Any, Dict
from enum import Enum


class ErrorCode(str, Enum):
    """错误代码枚举"""
    # 通用错误 (1xxx)
    UNKNOWN_ERROR = "E1000"
    VALIDATION_ERROR = "E1001"
    CONFIGURATION_ERROR = "E1002"
    BUDGET_EXCEEDED = "E1003"
    IO_ERROR = "E1004"
    PARSE_ERROR = "E1005"
    UNKNOWN_KEY = "E1006"

    # 有限域错误 (2xxx)
    FIELD_ERROR = "E2000"
    NON_PRIME = "E2001"
    NOT_IRREDUCIBLE = "E2002"
    NOT_PRIMITIVE = "E2003"
    TABLE_BUDGET_EXCEEDED = "E2004"
    DIVISION_BY_ZERO = "E2005"
    NOT_IN_SUBFIELD = "E2006"
    NO_SUCH_SUBFIELD = "E2007"
    ZERO_RIGHT_HAND_SIDE = "E2008"
    NOT_A_BASIS = "E2009"
    NOT_IN_SPAN = "E2010"

    # 线性代数错误 (3xxx)
    LINALG_ERROR = "E3000"
    DIMENSION_MISMATCH = "E3001"
    SINGULAR = "E3002"
    NOT_COPRIME = "E3003"
    RANK_DEFICIENT = "E3004"

    # 循环矩阵错误 (4xxx)
    CIRCULANT_ERROR = "E4000"
    NOT_CIRCULANT = "E4001"
    NOT_DIVISOR = "E4002"
    ENTRY_NOT_IN_FIELD = "E4003"
    INDEX_OUT_OF_RANGE = "E4004"

    # 双线性型错误 (5xxx)
    FORM_ERROR = "E5000"
    TRANSPOSE_ON_RECTANGULAR = "E5001"

    # 码构造错误 (6xxx)
    CODE_ERROR = "E6000"
    BAD_PARAMETERS = "E6001"
    INVALID_MU = "E6002"
    NOT_INDEPENDENT = "E6003"

    # 自同构错误 (7xxx)
    AUTOMORPHISM_ERROR = "E7000"
    CONSTRAINT_UNSATISFIABLE = "E7001"


class RankForgeException(Exception):
    """
    rankforge 基础异常类

    所有自定义异常都应继承此类
    """

    def __init__(
        self,
        message: str,
        code: ErrorCode = ErrorCode.UNKNOWN_ERROR,
        details: Dict[str, Any] = None,
        cause: Exception = None
    ):
        """
        初始化异常

        Args:
            message: 错误消息
            code: 错误代码
            details: 额外的错误详情
            cause: 原始异常（如果有）
        """
        super().__init__(message)
        self.message = message
        self.code = code
        self.details = details or {}
        self.cause = cause

    def to_dict(self) -> Dict[str, Any]:
        """转换为字典格式"""
        result = {
            "error": True,
            "code": self.code.value,
            "message": self.message,
        }
        if self.details:
            result["details"] = self.details
        if self.cause:
            result["cause"] = str(self.cause)
        return result

    def __str__(self) -> str:
        return f"[{self.code.value}] {self.message}"

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(code={self.code.value}, message={self.message!r})"


# === 通用异常 ===

class ValidationException(RankForgeException):
    """参数校验异常"""

    def __init__(self, message: str, code: ErrorCode = ErrorCode.VALIDATION_ERROR, **kwargs):
        super().__init__(message, code, **kwargs)


class BudgetExceeded(RankForgeException):
    """枚举规模超出预算"""

    def __init__(self, message: str, requested: int = None, budget: int = None, **kwargs):
        details = kwargs.pop("details", {})
        if requested is not None:
            details["requested"] = requested
        if budget is not None:
            details["budget"] = budget
        super().__init__(message, ErrorCode.BUDGET_EXCEEDED, details=details, **kwargs)


class IoError(RankForgeException):
    """报告读写异常"""

    def __init__(self, message: str, path: str = None, **kwargs):
        details = kwargs.pop("details", {})
        if path:
            details["path"] = path
        super().__init__(message, ErrorCode.IO_ERROR, details=details, **kwargs)


class ParseError(ValidationException):
    """配置解析异常"""

    def __init__(self, message: str, **kwargs):
        super().__init__(message, ErrorCode.PARSE_ERROR, **kwargs)


class UnknownKey(ValidationException):
    """配置中出现未知键"""

    def __init__(self, key: str, **kwargs):
        details = kwargs.pop("details", {})
        details["key"] = key
        super().__init__(f"未知配置键 '{key}'", ErrorCode.UNKNOWN_KEY, details=details, **kwargs)


# === 有限域异常 ===

class FieldException(RankForgeException):
    """有限域异常基类"""

    def __init__(self, message: str, code: ErrorCode = ErrorCode.FIELD_ERROR, **kwargs):
        super().__init__(message, code, **kwargs)


class NonPrime(FieldException):
    """特征不是素数"""

    def __init__(self, p: int, **kwargs):
        super().__init__(f"{p} 不是素数", ErrorCode.NON_PRIME, details={"p": p}, **kwargs)


class NotIrreducible(FieldException):
    """模多项式不可约性检查失败"""

    def __init__(self, modulus, **kwargs):
        super().__init__(f"模多项式 {list(modulus)} 不可约检查失败", ErrorCode.NOT_IRREDUCIBLE,
                         details={"modulus": list(modulus)}, **kwargs)


class NotPrimitive(FieldException):
    """元素或多项式不是本原的"""

    def __init__(self, message: str, **kwargs):
        super().__init__(message, ErrorCode.NOT_PRIMITIVE, **kwargs)


class TableBudgetExceeded(FieldException):
    """域阶超出查表预算"""

    def __init__(self, order: int, budget: int, **kwargs):
        super().__init__(
            f"域阶 {order} 超出查表预算 {budget}",
            ErrorCode.TABLE_BUDGET_EXCEEDED,
            details={"order": order, "budget": budget},
            **kwargs
        )


class DivisionByZero(FieldException):
    """零元素求逆"""

    def __init__(self, message: str = "零元素不可逆", **kwargs):
        super().__init__(message, ErrorCode.DIVISION_BY_ZERO, **kwargs)


class NotInSubfield(FieldException):
    """元素不在指定子域内"""

    def __init__(self, message: str, **kwargs):
        super().__init__(message, ErrorCode.NOT_IN_SUBFIELD, **kwargs)


class NoSuchSubfield(FieldException):
    """子域不存在"""

    def __init__(self, q: int, degree: int, **kwargs):
        super().__init__(
            f"大域中不存在 F_{q}^{degree}",
            ErrorCode.NO_SUCH_SUBFIELD,
            details={"q": q, "degree": degree},
            **kwargs
        )


class ZeroRightHandSide(FieldException):
    """幂方程右端为零"""

    def __init__(self, **kwargs):
        super().__init__("幂方程右端不能为零", ErrorCode.ZERO_RIGHT_HAND_SIDE, **kwargs)


class NotABasis(FieldException):
    """给定元素不构成基"""

    def __init__(self, message: str = "给定元素在 F_q 上线性相关", **kwargs):
        super().__init__(message, ErrorCode.NOT_A_BASIS, **kwargs)


class NotInSpan(FieldException):
    """元素不在基张成的空间内"""

    def __init__(self, message: str = "元素不在基张成的 F_q 空间内", **kwargs):
        super().__init__(message, ErrorCode.NOT_IN_SPAN, **kwargs)


# === 线性代数异常 ===

class LinalgException(RankForgeException):
    """线性代数异常基类"""

    def __init__(self, message: str, code: ErrorCode = ErrorCode.LINALG_ERROR, **kwargs):
        super().__init__(message, code, **kwargs)


class DimensionMismatch(LinalgException):
    """维数不匹配"""

    def __init__(self, message: str, **kwargs):
        super().__init__(message, ErrorCode.DIMENSION_MISMATCH, **kwargs)


class Singular(LinalgException):
    """矩阵不可逆"""

    def __init__(self, message: str = "矩阵奇异", **kwargs):
        super().__init__(message, ErrorCode.SINGULAR, **kwargs)


class NotCoprime(LinalgException):
    """k 与维数不互素"""

    def __init__(self, k: int, r: int, **kwargs):
        super().__init__(f"gcd({k}, {r}) != 1", ErrorCode.NOT_COPRIME,
                         details={"k": k, "r": r}, **kwargs)


class RankDeficient(LinalgException):
    """矩阵不满秩"""

    def __init__(self, message: str, rank: int = None, **kwargs):
        details = kwargs.pop("details", {})
        if rank is not None:
            details["rank"] = rank
        super().__init__(message, ErrorCode.RANK_DEFICIENT, details=details, **kwargs)


# === 循环矩阵异常 ===

class CirculantException(RankForgeException):
    """循环矩阵异常基类"""

    def __init__(self, message: str, code: ErrorCode = ErrorCode.CIRCULANT_ERROR, **kwargs):
        super().__init__(message, code, **kwargs)


class NotCirculant(CirculantException):
    """乘积不具有 q^k-循环结构"""

    def __init__(self, message: str = "矩阵不满足 q^k-循环模式", **kwargs):
        super().__init__(message, ErrorCode.NOT_CIRCULANT, **kwargs)


class NotDivisor(CirculantException):
    """m 不整除 n"""

    def __init__(self, m: int, n: int, **kwargs):
        super().__init__(f"{m} 不整除 {n}", ErrorCode.NOT_DIVISOR,
                         details={"m": m, "n": n}, **kwargs)


class EntryNotInField(CirculantException):
    """计算出的矩阵元素不在 F_q 中"""

    def __init__(self, message: str = "矩阵元素不在 F_q 中", **kwargs):
        super().__init__(message, ErrorCode.ENTRY_NOT_IN_FIELD, **kwargs)


class IndexOutOfRange(CirculantException):
    """分量下标越界"""

    def __init__(self, index: int, bound: int, **kwargs):
        super().__init__(f"下标 {index} 不在 [0, {bound}) 内", ErrorCode.INDEX_OUT_OF_RANGE,
                         details={"index": index, "bound": bound}, **kwargs)


# === 双线性型异常 ===

class TransposeOnRectangular(RankForgeException):
    """非方阵空间上的转置"""

    def __init__(self, m: int, n: int, **kwargs):
        super().__init__(f"转置只在 m = n 时有意义 (m={m}, n={n})",
                         ErrorCode.TRANSPOSE_ON_RECTANGULAR,
                         details={"m": m, "n": n}, **kwargs)


# === 码构造异常 ===

class CodeException(RankForgeException):
    """码构造异常基类"""

    def __init__(self, message: str, code: ErrorCode = ErrorCode.CODE_ERROR, **kwargs):
        super().__init__(message, code, **kwargs)


class BadParameters(CodeException):
    """参数不满足前置条件"""

    def __init__(self, message: str, **kwargs):
        super().__init__(message, ErrorCode.BAD_PARAMETERS, **kwargs)


class InvalidMu(CodeException):
    """μ 不满足范数条件"""

    def __init__(self, message: str, **kwargs):
        super().__init__(message, ErrorCode.INVALID_MU, **kwargs)


class NotIndependent(CodeException):
    """求值点线性相关"""

    def __init__(self, message: str = "求值点在 F_q 上线性相关", **kwargs):
        super().__init__(message, ErrorCode.NOT_INDEPENDENT, **kwargs)


# === 自同构异常 ===

class ConstraintUnsatisfiable(RankForgeException):
    """约束在给定参数下无法满足"""

    def __init__(self, message: str, **kwargs):
        super().__init__(message, ErrorCode.CONSTRAINT_UNSATISFIABLE, **kwargs)


# === 异常处理工具函数 ===

_USAGE_CODES = {
    ErrorCode.VALIDATION_ERROR, ErrorCode.CONFIGURATION_ERROR, ErrorCode.BUDGET_EXCEEDED,
    ErrorCode.PARSE_ERROR, ErrorCode.UNKNOWN_KEY, ErrorCode.NON_PRIME,
    ErrorCode.NOT_IRREDUCIBLE, ErrorCode.NOT_PRIMITIVE, ErrorCode.TABLE_BUDGET_EXCEEDED,
    ErrorCode.NO_SUCH_SUBFIELD, ErrorCode.NOT_COPRIME, ErrorCode.NOT_DIVISOR,
    ErrorCode.TRANSPOSE_ON_RECTANGULAR, ErrorCode.BAD_PARAMETERS, ErrorCode.INVALID_MU,
    ErrorCode.NOT_INDEPENDENT, ErrorCode.CONSTRAINT_UNSATISFIABLE, ErrorCode.INDEX_OUT_OF_RANGE,
    ErrorCode.NOT_IN_SUBFIELD, ErrorCode.RANK_DEFICIENT, ErrorCode.ZERO_RIGHT_HAND_SIDE,
}


def is_usage_error(exc: Exception) -> bool:
    """判断异常是否属于参数/用法错误（CLI 退出码 2）"""
    return isinstance(exc, RankForgeException) and exc.code in _USAGE_CODES


def wrap_exception(exc: Exception, wrapper_class: type = RankForgeException,
                   message: str = None) -> RankForgeException:
    """
    将普通异常包装为 rankforge 异常

    Args:
        exc: 原始异常
        wrapper_class: 包装类
        message: 自定义消息（可选）

    Returns:
        RankForgeException 实例
    """
    if isinstance(exc, RankForgeException):
        return exc

    return wrapper_class(
        message=message or str(exc),
        cause=exc
    )
