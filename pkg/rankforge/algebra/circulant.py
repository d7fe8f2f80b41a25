"""
q^k-循环矩阵

m×n 的 q^k-循环矩阵由长度 e = gcd(m, n) 的生成数组决定：
第 i 行是第 i-1 行右移一位、每个元素再取 q^k 次幂。
CirculantModel 固定一组 (q, m, n, k)，缓存展开下标表、Moore 矩阵与
K 置换，提供 ν 变换（标准矩阵 ↔ 循环数组）。
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from rankforge.algebra.field_tower import (
    ZERO,
    Field,
    FieldSpec,
    field_from_spec,
    make_field,
    subfield_primitive,
)
from rankforge.algebra.linalg import GroundField, Mat, k_permutation, moore_matrix
from rankforge.core.exceptions import (
    DimensionMismatch,
    EntryNotInField,
    NotCirculant,
    NotCoprime,
    NotDivisor,
    NotInSubfield,
    ValidationException,
)
from rankforge.core.logging_config import get_logger

logger = get_logger("circulant")


@dataclass(frozen=True)
class SpaceParams:
    """(q, m, n, k) 及其派生量 e、d、r、h"""
    q: int
    m: int
    n: int
    k: int = 1

    def __post_init__(self):
        if self.m < 1 or self.n < 1 or self.m > self.n:
            raise ValidationException(f"需要 1 <= m <= n，得到 m={self.m}, n={self.n}")
        if self.q < 2:
            raise ValidationException(f"q 必须至少为 2: {self.q}")
        for r in (self.m, self.n):
            if math.gcd(self.k, r) != 1:
                raise NotCoprime(self.k, r)

    @property
    def e(self) -> int:
        return math.gcd(self.m, self.n)

    @property
    def d(self) -> int:
        return self.m * self.n // self.e

    @property
    def r(self) -> Optional[int]:
        return self.n // self.m if self.n % self.m == 0 else None

    @property
    def Q(self) -> int:
        return self.q ** self.k

    @property
    def square(self) -> bool:
        return self.m == self.n

    def to_json(self) -> Dict[str, int]:
        return {"q": self.q, "m": self.m, "n": self.n, "k": self.k}


def prime_power(q: int) -> Tuple[int, int]:
    """把 q 拆成 (p, h)，q = p^h"""
    for p in range(2, q + 1):
        if q % p == 0:
            h, rest = 0, q
            while rest % p == 0:
                rest //= p
                h += 1
            if rest != 1:
                raise ValidationException(f"{q} 不是素数幂")
            return p, h
    raise ValidationException(f"{q} 不是素数幂")


def field_for(params: SpaceParams, table_budget: int = 1 << 22) -> Field:
    """容纳 F_{q^d} 的大域"""
    p, h = prime_power(params.q)
    return make_field(p, h * params.d, table_budget=table_budget)


@dataclass(frozen=True, eq=False)
class CircSpec:
    """m×n q^k-循环矩阵的描述，gen 为 F_{q^d} 元素的对数"""
    params: SpaceParams
    gen: np.ndarray

    def to_json(self, field: Field) -> Dict[str, Any]:
        return {"m": self.params.m, "n": self.params.n, "k": self.params.k,
                "gen": [int(v) for v in field.to_ints(self.gen)]}


def expansion_pattern(params: SpaceParams) -> Tuple[np.ndarray, np.ndarray]:
    """
    展开的下标模式

    Returns:
        (l, σ)：entry(i, j) = a_l^{q^σ}，其中 j-i ≡ l + βm (mod n)，σ = k(βm+i) mod d
    """
    m, n, e, d, k = params.m, params.n, params.e, params.d, params.k
    # c = l + βm mod n 的反查表
    lookup = np.zeros((n, 2), dtype=np.int64)
    for l in range(e):
        for beta in range(n // e):
            lookup[(l + beta * m) % n] = (l, beta)
    i = np.arange(m)[:, None]
    j = np.arange(n)[None, :]
    c = (j - i) % n
    l_idx = lookup[c, 0]
    beta = lookup[c, 1]
    sigma = (k * (beta * m + i)) % d
    return l_idx, sigma


class CirculantModel:
    """
    固定 (q, m, n, k) 的循环矩阵模型

    P_r = E_r^{-1} K_r 把 k-循环模型下的坐标换回幂基坐标；
    ν(M) = P_m^t M P_n 是标准矩阵对应的循环矩阵。
    """

    def __init__(self, params: SpaceParams, field: Optional[Field] = None):
        self.params = params
        self.field = field or field_for(params)
        self.q = params.q
        self.gf = GroundField(self.field, params.q)
        self._l_idx, self._sigma = expansion_pattern(params)

        f = self.field
        self.w_m = subfield_primitive(f, params.q, params.m)
        self.w_n = subfield_primitive(f, params.q, params.n)
        self.E_m = moore_matrix(f, self.w_m, params.m, params.q)
        self.E_n = moore_matrix(f, self.w_n, params.n, params.q)
        self.K_m = k_permutation(f, params.m, params.k)
        self.K_n = k_permutation(f, params.n, params.k)
        self.P_m = self.E_m.inverse().matmul(self.K_m)
        self.P_n = self.E_n.inverse().matmul(self.K_n)
        self.P_m_inv = self.K_m.inverse().matmul(self.E_m)
        self.P_n_inv = self.K_n.inverse().matmul(self.E_n)

    def __repr__(self) -> str:
        p = self.params
        return f"CirculantModel(q={p.q}, m={p.m}, n={p.n}, k={p.k})"

    # === 展开 ===

    def expand_logs(self, gen) -> np.ndarray:
        gen = np.asarray(gen, dtype=np.int64)
        if gen.shape[-1] != self.params.e:
            raise DimensionMismatch(f"生成数组长度应为 {self.params.e}，得到 {gen.shape[-1]}")
        return self.field.vfrob(gen[..., self._l_idx], self.q, self._sigma)

    def expand(self, gen) -> Mat:
        return Mat(self.field, self.expand_logs(gen))

    def check_gen(self, gen) -> np.ndarray:
        gen = np.asarray(gen, dtype=np.int64)
        if not self.field.vin_subfield(gen, self.q, self.params.d).all():
            raise NotInSubfield(f"生成数组元素不在 F_{self.q}^{self.params.d} 中")
        return gen

    # === ν 变换 ===

    def nu_forward(self, M: Mat) -> np.ndarray:
        """标准矩阵（F_q 上 m×n）到循环生成数组"""
        p = self.params
        if M.shape != (p.m, p.n):
            raise DimensionMismatch(f"需要 {p.m}x{p.n} 矩阵，得到 {M.shape}")
        D = self.P_m.transpose().matmul(M).matmul(self.P_n)
        gen = D.data[0, :p.e].copy()
        if not np.array_equal(self.expand_logs(gen), D.data):
            raise NotCirculant()
        return gen

    def nu_inverse(self, gen) -> Mat:
        """循环生成数组到标准矩阵"""
        D = self.expand(gen)
        M = self.P_m_inv.transpose().matmul(D).matmul(self.P_n_inv)
        if not M.in_subfield(self.q, 1):
            raise EntryNotInField()
        return M

    def nu_inverse_index(self, gen) -> np.ndarray:
        return self.gf.mat_to_index(self.nu_inverse(gen))

    def nu_forward_index(self, idx: np.ndarray) -> np.ndarray:
        return self.nu_forward(self.gf.index_to_mat(idx))

    def spec(self, gen) -> CircSpec:
        return CircSpec(self.params, self.check_gen(gen))

    def identity_block_std(self) -> np.ndarray:
        """
        循环坐标下的 (I_m | ... | I_m) 对应的标准坐标矩阵（m×n，F_q 编号）

        仅在 m | n 时有定义；左乘它把 Ω_{n,n} 的标准矩阵打孔到 Ω_{m,n}。
        """
        p = self.params
        if p.r is None:
            raise NotDivisor(p.m, p.n)
        block = np.full((p.m, p.n), ZERO, dtype=np.int64)
        for h in range(p.r):
            block[np.arange(p.m), h * p.m + np.arange(p.m)] = 0
        A = self.P_m_inv.transpose().matmul(Mat(self.field, block)).matmul(self.P_n.transpose())
        if not A.in_subfield(p.q, 1):
            raise EntryNotInField()
        return self.gf.mat_to_index(A)


@lru_cache(maxsize=64)
def _cached_model(params: SpaceParams, spec: FieldSpec) -> CirculantModel:
    return CirculantModel(params, field_from_spec(spec))


def circulant_model(params: SpaceParams, field: Optional[Field] = None) -> CirculantModel:
    """缓存的模型实例，按 (参数, 域描述) 复用"""
    field = field or field_for(params)
    return _cached_model(params, field.spec)


def square_model(q: int, r: int, k: int, field: Field) -> CirculantModel:
    return circulant_model(SpaceParams(q, r, r, k), field)


def expand(spec: CircSpec, field: Optional[Field] = None) -> Mat:
    return circulant_model(spec.params, field).expand(spec.gen)


# === 生成数组变换 ===

def reindex_k(gen: Sequence, r: int, k: int, direction: str = "to_dickson") -> list:
    """
    方阵情形下 q^k-循环生成数组与 q-循环（Dickson）生成数组的互换

    to_dickson: b_i = a_{ih mod r}，其中 hk ≡ 1 (mod r)；from_dickson 为其逆 a_j = b_{jk mod r}。
    """
    if math.gcd(k, r) != 1:
        raise NotCoprime(k, r)
    gen = list(gen)
    if len(gen) != r:
        raise DimensionMismatch(f"生成数组长度应为 {r}")
    if direction == "to_dickson":
        h = pow(k, -1, r) if r > 1 else 0
        return [gen[(i * h) % r] for i in range(r)]
    if direction == "from_dickson":
        return [gen[(j * k) % r] for j in range(r)]
    raise ValidationException(f"未知方向 {direction}")


def reindex_rect(field: Field, gen, m: int, n: int, k: int, q: int,
                 direction: str = "to_dickson") -> np.ndarray:
    """
    m | n 时的 K 共轭：K_m D^{(k)}_c K_n^{-1} = D^{(1)}_{c'}

    c'_{l'} = c_{l'h mod m}^{q^{l' - k(l'h mod m)}}，h 为 k 模 n 的逆。
    """
    if n % m:
        raise NotDivisor(m, n)
    if math.gcd(k, n) != 1:
        raise NotCoprime(k, n)
    gen = np.asarray(gen, dtype=np.int64)
    h = pow(k, -1, n) if n > 1 else 0
    out = np.empty(m, dtype=np.int64)
    if direction == "to_dickson":
        for lp in range(m):
            src = (lp * h) % m
            out[lp] = field.frobenius_power(int(gen[src]), q, lp - k * src)
    elif direction == "from_dickson":
        for l in range(m):
            lp = (l * k) % m
            out[l] = field.frobenius_power(int(gen[lp]), q, -(lp - k * l))
    else:
        raise ValidationException(f"未知方向 {direction}")
    return out


def dickson_to_std(field: Field, gen, q: int) -> Mat:
    """
    E_r^{-1}·D_gen·E_r：q-循环（Dickson）矩阵对应的 F_q 矩阵

    结果是线性化多项式 Σ gen_i x^{q^i} 在幂基下（列坐标）的矩阵。
    """
    r = len(gen)
    model = square_model(q, r, 1, field)
    std = model.E_m.inverse().matmul(model.expand(gen)).matmul(model.E_m)
    if not std.in_subfield(q, 1):
        raise EntryNotInField()
    return std


def nu_forward(M: Mat, params: SpaceParams) -> CircSpec:
    model = circulant_model(params, M.field)
    return CircSpec(params, model.nu_forward(M))


def nu_inverse(spec: CircSpec, field: Optional[Field] = None) -> Mat:
    return circulant_model(spec.params, field).nu_inverse(spec.gen)


def puncture_array(field: Field, gen, m: int, n: int, k: int, q: int) -> np.ndarray:
    """c_j = Σ_h a_{(j-hm) mod n}^{q^{khm}}，对应 (I_m | ... | I_m)·D"""
    if n % m:
        raise NotDivisor(m, n)
    gen = np.asarray(gen, dtype=np.int64)
    if gen.shape[-1] != n:
        raise DimensionMismatch(f"生成数组长度应为 {n}")
    j = np.arange(m)
    out = np.full(gen.shape[:-1] + (m,), ZERO, dtype=np.int64)
    for h in range(n // m):
        term = field.vfrob(gen[..., (j - h * m) % n], q, k * h * m)
        out = field.vadd(out, term)
    return out


def tprime_embed(gen, m: int, n: int) -> np.ndarray:
    """(c_0, ..., c_{r-1}) ↦ 把 c_i 放在位置 i·m、其余为零的长度 n 数组"""
    if n % m:
        raise NotDivisor(m, n)
    gen = np.asarray(gen, dtype=np.int64)
    r = n // m
    if gen.shape[-1] != r:
        raise DimensionMismatch(f"生成数组长度应为 {r}")
    out = np.full(gen.shape[:-1] + (n,), ZERO, dtype=np.int64)
    out[..., ::m] = gen
    return out


def tprime_core(field: Field, gen, m: int, q: int, k: int) -> np.ndarray:
    """
    T' 元素的核心矩阵：r×r 的 q^{km}-循环矩阵，core[u, v] = c_{(v-u) mod r}^{q^{kum}}

    展开后的 n×n 矩阵可逆当且仅当核心矩阵可逆。支持批量（前导维）。
    """
    gen = np.asarray(gen, dtype=np.int64)
    r = gen.shape[-1]
    u = np.arange(r)[:, None]
    v = np.arange(r)[None, :]
    return field.vfrob(gen[..., (v - u) % r], q, k * u * m)
