"""
有限域塔

所有子域 F_q、F_{q^m}、F_{q^n}、F_{q^d} 都实现为同一个大域 F_{p^E} 中的
Frobenius 不动点集合。元素以生成元 g（模多项式的根）的离散对数表示，
零元素为 ZERO (-1)；加法通过 Zech 对数表完成。

序列化时使用多项式系数形式 Σ c_i p^i，它只依赖模多项式，
与生成元的选择无关。
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import galois
import numpy as np

from rankforge.core.exceptions import (
    DivisionByZero,
    NoSuchSubfield,
    NonPrime,
    NotABasis,
    NotInSpan,
    NotInSubfield,
    NotIrreducible,
    NotPrimitive,
    Singular,
    TableBudgetExceeded,
    ValidationException,
    ZeroRightHandSide,
)
from rankforge.core.logging_config import get_logger, log_block

logger = get_logger("field_tower")

ZERO = -1
FEl = int

DEFAULT_TABLE_BUDGET = 1 << 22


@dataclass(frozen=True)
class FieldSpec:
    """域描述：特征 p、扩张次数 E、小端序首一模多项式"""
    p: int
    E: int
    modulus: Tuple[int, ...]

    def to_json(self) -> Dict[str, Any]:
        return {"p": self.p, "E": self.E, "modulus": list(self.modulus)}

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "FieldSpec":
        return cls(int(data["p"]), int(data["E"]), tuple(int(c) for c in data["modulus"]))


def _as_galois_poly(modulus: Sequence[int], p: int) -> galois.Poly:
    # galois 的系数按降幂排列
    return galois.Poly(list(reversed(list(modulus))), field=galois.GF(p))


def default_modulus(p: int, E: int) -> Tuple[int, ...]:
    """按小端系数元组字典序最小的 E 次首一本原多项式"""
    for low in itertools.product(range(p), repeat=E):
        if low[0] == 0:
            continue
        modulus = tuple(low) + (1,)
        if _as_galois_poly(modulus, p).is_primitive():
            return modulus
    raise NotPrimitive(f"F_{p} 上不存在 {E} 次本原多项式")


def _times_x(vec: np.ndarray, mod_low: np.ndarray, p: int) -> np.ndarray:
    """多项式坐标向量乘以 x 后模去模多项式"""
    top = vec[-1]
    out = np.empty_like(vec)
    out[0] = 0
    out[1:] = vec[:-1]
    return (out - top * mod_low) % p


def _multiplication_matrix(y: np.ndarray, mod_low: np.ndarray, p: int) -> np.ndarray:
    """乘以 y 的 F_p-线性变换矩阵，第 j 列是 y·x^j 的坐标"""
    E = len(y)
    cols = np.empty((E, E), dtype=np.int64)
    col = y.copy()
    for j in range(E):
        cols[:, j] = col
        col = _times_x(col, mod_low, p)
    return cols


def _build_exp_table(p: int, E: int, modulus: Tuple[int, ...]) -> np.ndarray:
    """
    计算 g^0, g^1, ... 的多项式坐标

    每轮把已知前缀整体乘以 g^B（一次 F_p 矩阵乘法），前缀长度翻倍。
    """
    n1 = p ** E - 1
    mod_low = np.array(modulus[:E], dtype=np.int64)
    digits = np.zeros((1, E), dtype=np.int64)
    digits[0, 0] = 1
    while len(digits) < n1:
        g_b = _times_x(digits[-1], mod_low, p)
        mult = _multiplication_matrix(g_b, mod_low, p)
        digits = np.concatenate([digits, (digits @ mult.T) % p])
    digits = digits[:n1]
    # g^{n1} 必须回到 1
    closing = _times_x(digits[-1], mod_low, p)
    if closing[0] != 1 or closing[1:].any():
        raise NotPrimitive(f"模多项式 {list(modulus)} 的根阶不是 {n1}")
    return digits @ (p ** np.arange(E, dtype=np.int64))


class Field:
    """
    大域 F_{p^E}

    exp[i] 是 g^i 的规范整数形式，log 是其逆表（log[0] = ZERO），
    zech[i] = log(1 + g^i)。构造后所有表只读，可在线程/进程间共享。
    """

    def __init__(self, spec: FieldSpec, exp: np.ndarray):
        self.spec = spec
        self.p = spec.p
        self.E = spec.E
        self.modulus = spec.modulus
        self.order = self.p ** self.E
        self.n1 = self.order - 1

        self.exp = exp
        self.exp.setflags(write=False)
        log = np.full(self.order, ZERO, dtype=np.int64)
        log[exp] = np.arange(self.n1, dtype=np.int64)
        if (log[1:] == ZERO).any():
            raise NotPrimitive(f"模多项式 {list(self.modulus)} 不是本原多项式")
        self.log = log
        self.log.setflags(write=False)

        low = exp % self.p
        plus_one = np.where(low == self.p - 1, exp - (self.p - 1), exp + 1)
        self.zech = log[plus_one]
        self.zech.setflags(write=False)

        self.one: FEl = 0
        self.neg_one: FEl = 0 if self.p == 2 else self.n1 // 2

    def __repr__(self) -> str:
        return f"Field(p={self.p}, E={self.E}, modulus={list(self.modulus)})"

    def __reduce__(self):
        # 进程池传参时按描述重建，借助 make_field 的缓存
        return (make_field, (self.p, self.E, self.modulus))

    # === 标量运算 ===

    def add(self, x: FEl, y: FEl) -> FEl:
        if x < 0:
            return y
        if y < 0:
            return x
        z = int(self.zech[(y - x) % self.n1])
        return ZERO if z < 0 else (x + z) % self.n1

    def neg(self, x: FEl) -> FEl:
        return ZERO if x < 0 else (x + self.neg_one) % self.n1

    def sub(self, x: FEl, y: FEl) -> FEl:
        return self.add(x, self.neg(y))

    def mul(self, x: FEl, y: FEl) -> FEl:
        if x < 0 or y < 0:
            return ZERO
        return (x + y) % self.n1

    def inv(self, x: FEl) -> FEl:
        if x < 0:
            raise DivisionByZero()
        return (-x) % self.n1

    def div(self, x: FEl, y: FEl) -> FEl:
        return self.mul(x, self.inv(y))

    def pow(self, x: FEl, k: int) -> FEl:
        if x < 0:
            if k > 0:
                return ZERO
            if k == 0:
                return self.one
            raise DivisionByZero("零元素的负幂无定义")
        return (x * k) % self.n1

    def base_degree(self, q: int) -> int:
        """q = p^h 且 h | E 时返回 h"""
        h, power = 0, 1
        while power < q:
            power *= self.p
            h += 1
        if power != q or h == 0 or self.E % h:
            raise NoSuchSubfield(q, 1)
        return h

    def frobenius_power(self, x: FEl, q: int, j: int) -> FEl:
        """x^{q^j}，负 j 表示逆 Frobenius"""
        if x < 0:
            return ZERO
        D = self.E // self.base_degree(q)
        return (x * pow(q, j % D, self.n1)) % self.n1

    def subfield_step(self, q: int, M: int) -> int:
        """F_{q^M}^× 的生成元在大域中的对数"""
        h = self.base_degree(q)
        if M < 1 or self.E % (h * M):
            raise NoSuchSubfield(q, M)
        return self.n1 // (q ** M - 1)

    def in_subfield(self, x: FEl, q: int, M: int) -> bool:
        return x < 0 or x % self.subfield_step(q, M) == 0

    def subfield_elements(self, q: int, M: int) -> np.ndarray:
        """F_{q^M} 的全部元素（含 ZERO），按对数排列"""
        step = self.subfield_step(q, M)
        return np.concatenate([[ZERO], np.arange(0, self.n1, step, dtype=np.int64)])

    def trace_rel(self, x: FEl, q: int, D: int) -> FEl:
        if not self.in_subfield(x, q, D):
            raise NotInSubfield(f"元素不在 F_{q}^{D} 中", details={"q": q, "D": D})
        total = ZERO
        for i in range(D):
            total = self.add(total, self.frobenius_power(x, q, i))
        return total

    def norm_rel(self, x: FEl, q: int, D: int) -> FEl:
        if not self.in_subfield(x, q, D):
            raise NotInSubfield(f"元素不在 F_{q}^{D} 中", details={"q": q, "D": D})
        if x < 0:
            return ZERO
        return self.pow(x, (q ** D - 1) // (q - 1))

    # === 序列化 ===

    def to_int(self, x: FEl) -> int:
        return 0 if x < 0 else int(self.exp[x])

    def from_int(self, value: int) -> FEl:
        if not 0 <= value < self.order:
            raise ValidationException(f"{value} 不是 F_{self.order} 的规范整数")
        return int(self.log[value])

    def to_ints(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=np.int64)
        return np.where(xs < 0, 0, self.exp[np.maximum(xs, 0)])

    def from_ints(self, values: Iterable[int]) -> np.ndarray:
        values = np.asarray(list(values) if not isinstance(values, np.ndarray) else values,
                            dtype=np.int64)
        if values.size and (values.min() < 0 or values.max() >= self.order):
            raise ValidationException("规范整数越界")
        return self.log[values]

    def random_element(self, rng: np.random.Generator, q: int, M: int,
                       nonzero: bool = False) -> FEl:
        """F_{q^M} 中均匀随机元素"""
        step = self.subfield_step(q, M)
        size = q ** M - 1
        k = int(rng.integers(0 if nonzero else -1, size))
        return ZERO if k < 0 else k * step

    def random_elements(self, rng: np.random.Generator, q: int, M: int, shape,
                        nonzero: bool = False) -> np.ndarray:
        step = self.subfield_step(q, M)
        k = rng.integers(0 if nonzero else -1, q ** M - 1, size=shape)
        return np.where(k < 0, ZERO, k * step).astype(np.int64)

    # === 向量化运算（对数数组） ===

    def vadd(self, a, b) -> np.ndarray:
        a, b = np.broadcast_arrays(np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64))
        z = self.zech[(b - a) % self.n1]
        out = np.where(z < 0, ZERO, (a + z) % self.n1)
        out = np.where(a < 0, b, out)
        return np.where(b < 0, a, out)

    def vneg(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        return np.where(a < 0, ZERO, (a + self.neg_one) % self.n1)

    def vsub(self, a, b) -> np.ndarray:
        return self.vadd(a, self.vneg(b))

    def vmul(self, a, b) -> np.ndarray:
        a, b = np.broadcast_arrays(np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64))
        return np.where((a < 0) | (b < 0), ZERO, (a + b) % self.n1)

    def vinv(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        if (a < 0).any():
            raise DivisionByZero()
        return (-a) % self.n1

    def vpow(self, a, k: int) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        if k <= 0 and (a < 0).any():
            if k < 0:
                raise DivisionByZero("零元素的负幂无定义")
            return np.zeros_like(a)
        return np.where(a < 0, ZERO, (a * (k % self.n1)) % self.n1)

    def vfrob(self, a, q: int, j) -> np.ndarray:
        """逐元素 x^{q^j}，j 可以是与 a 同形的数组"""
        a = np.asarray(a, dtype=np.int64)
        D = self.E // self.base_degree(q)
        j = np.asarray(j, dtype=np.int64) % D
        table = np.array([pow(q, s, self.n1) for s in range(D)], dtype=np.int64)
        return np.where(a < 0, ZERO, (a * table[j]) % self.n1)

    def vsum(self, a, axis: int = 0) -> np.ndarray:
        a = np.moveaxis(np.asarray(a, dtype=np.int64), axis, 0)
        total = np.full(a.shape[1:], ZERO, dtype=np.int64)
        for part in a:
            total = self.vadd(total, part)
        return total

    def vin_subfield(self, a, q: int, M: int) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        return (a < 0) | (a % self.subfield_step(q, M) == 0)


@lru_cache(maxsize=32)
def _cached_field(p: int, E: int, modulus: Tuple[int, ...]) -> Field:
    with log_block("field_tables", p=p, E=E):
        exp = _build_exp_table(p, E, modulus)
        field = Field(FieldSpec(p, E, modulus), exp)
    logger.debug("域表构造完成", extra={"p": p, "E": E, "order": field.order})
    return field


def make_field(p: int, E: int, modulus: Optional[Sequence[int]] = None,
               table_budget: int = DEFAULT_TABLE_BUDGET) -> Field:
    """
    构造 F_{p^E}

    Args:
        p: 素数特征
        E: 扩张次数
        modulus: 小端序首一本原模多项式，省略时取默认模多项式
        table_budget: 查表预算（域阶上限）
    """
    if not galois.is_prime(int(p)):
        raise NonPrime(p)
    if E < 1:
        raise ValidationException(f"扩张次数必须为正: {E}")
    if p ** E > table_budget:
        raise TableBudgetExceeded(p ** E, table_budget)

    if modulus is None:
        modulus = default_modulus(p, E)
    else:
        modulus = tuple(int(c) for c in modulus)
        if len(modulus) != E + 1 or modulus[-1] != 1 or any(not 0 <= c < p for c in modulus):
            raise ValidationException(f"模多项式 {list(modulus)} 不是 {E} 次首一多项式")
        poly = _as_galois_poly(modulus, p)
        if not poly.is_irreducible():
            raise NotIrreducible(modulus)
        if not poly.is_primitive():
            raise NotPrimitive(f"模多项式 {list(modulus)} 不是本原多项式")
    return _cached_field(int(p), int(E), tuple(modulus))


def field_from_spec(spec: FieldSpec) -> Field:
    return make_field(spec.p, spec.E, spec.modulus)


# === 函数式接口 ===

def element_arithmetic(field: Field, x: FEl, y: Optional[FEl], op: str) -> FEl:
    """op ∈ {add, mul, inv, neg, pow}；pow 时 y 为整数指数"""
    if op == "add":
        return field.add(x, y)
    if op == "mul":
        return field.mul(x, y)
    if op == "inv":
        return field.inv(x)
    if op == "neg":
        return field.neg(x)
    if op == "pow":
        return field.pow(x, int(y))
    raise ValidationException(f"未知运算 {op}")


def frobenius_power(field: Field, x: FEl, q: int, j: int) -> FEl:
    return field.frobenius_power(x, q, j)


def trace_rel(field: Field, x: FEl, q: int, D: int) -> FEl:
    return field.trace_rel(x, q, D)


def norm_rel(field: Field, x: FEl, q: int, D: int) -> FEl:
    return field.norm_rel(x, q, D)


def subfield_primitive(field: Field, q: int, M: int) -> FEl:
    """F_{q^M} 的规范本原元 g^((p^E-1)/(q^M-1))"""
    return field.subfield_step(q, M)


def solve_power_equation(field: Field, q: int, n: int, N: int, c: FEl) -> List[FEl]:
    """
    求 F_{q^n}^× 中 x^N = c 的全部解

    一次离散对数除法加陪集枚举；解的个数为 0 或 gcd(q^n-1, N)。
    """
    if c < 0:
        raise ZeroRightHandSide()
    step = field.subfield_step(q, n)
    if c % step:
        raise NotInSubfield(f"右端不在 F_{q}^{n} 中")
    order = q ** n - 1
    gamma = c // step
    n_red = N % order
    g = math.gcd(n_red, order)
    if gamma % g:
        return []
    period = order // g
    base = 0 if period == 1 else (gamma // g) * pow(n_red // g, -1, period) % period
    return [((base + j * period) * step) % field.n1 for j in range(g)]


class CoordinateMap:
    """
    F_q-基下的坐标映射

    由基的 Moore 矩阵 (b_j^{q^i}) 求逆得到：x 的坐标是 Moore^{-1}·(x^{q^i})_i，
    每个分量都必须落在 F_q 中。
    """

    def __init__(self, field: Field, basis: Sequence[FEl], q: int):
        from rankforge.algebra.linalg import moore_of

        self.field = field
        self.q = q
        self.basis = np.asarray(basis, dtype=np.int64)
        self.r = len(self.basis)
        try:
            self._inverse = moore_of(field, self.basis, q).inverse()
        except Singular as exc:
            raise NotABasis(cause=exc)
        self._powers = np.arange(self.r)

    def coords_many(self, xs) -> np.ndarray:
        """批量坐标，返回形状 (len(xs), r) 的对数数组"""
        field = self.field
        xs = np.asarray(xs, dtype=np.int64).reshape(-1)
        conj = field.vfrob(xs[None, :], self.q, self._powers[:, None])      # (r, N)
        prod = field.vmul(self._inverse.data[:, :, None], conj[None, :, :])  # (r, r, N)
        out = field.vsum(prod, axis=1).T                                    # (N, r)
        if not field.vin_subfield(out, self.q, 1).all():
            raise NotInSpan()
        return out

    def coords(self, x: FEl) -> np.ndarray:
        return self.coords_many([x])[0]

    def uncoords(self, c: Sequence[FEl]) -> FEl:
        field = self.field
        return int(field.vsum(field.vmul(np.asarray(c, dtype=np.int64), self.basis)))


def coords(field: Field, x: FEl, basis: Sequence[FEl], q: int) -> np.ndarray:
    return CoordinateMap(field, basis, q).coords(x)


def uncoords(field: Field, c: Sequence[FEl], basis: Sequence[FEl], q: int) -> FEl:
    return CoordinateMap(field, basis, q).uncoords(c)


def power_basis(field: Field, q: int, M: int) -> np.ndarray:
    """F_{q^M} 的幂基 1, w, ..., w^{M-1}（w 为规范本原元）"""
    w = subfield_primitive(field, q, M)
    return np.array([(w * i) % field.n1 for i in range(M)], dtype=np.int64)
