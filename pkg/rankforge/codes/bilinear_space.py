"""
双线性型空间 Ω_{m,n}

一个双线性型同时有两种表示：F_q 上的标准矩阵（幂基坐标）与 q^k-循环
生成数组，两者经 ν 互换。自同构统一在标准矩阵层面作用：
StdTuple (A, B, e, τ) 把 M 映为 T^τ(A^t · M^{(p^e)} · B)。
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from rankforge.algebra.circulant import (
    SpaceParams,
    circulant_model,
    field_for,
    prime_power,
    square_model,
    tprime_embed,
)
from rankforge.algebra.field_tower import ZERO, CoordinateMap, Field, FEl, power_basis
from rankforge.algebra.linalg import Mat
from rankforge.core.exceptions import (
    DimensionMismatch,
    IndexOutOfRange,
    NotInSubfield,
    TransposeOnRectangular,
)
from rankforge.core.logging_config import get_logger

logger = get_logger("bilinear_space")


class BilinearSpace:
    """
    固定 (q, m, n, k) 的双线性型空间

    持有 m×n 的循环模型以及 m×m、n×n 的方阵模型（用于自同构的左右部分）。
    """

    def __init__(self, params: SpaceParams, field: Optional[Field] = None):
        self.params = params
        self.field = field or field_for(params)
        self.model = circulant_model(params, self.field)
        self.left_model = square_model(params.q, params.m, params.k, self.field)
        self.right_model = square_model(params.q, params.n, params.k, self.field)
        self.gf = self.model.gf
        self.p, self.h = prime_power(params.q)
        self._shift_std: Dict[str, np.ndarray] = {}
        self._frob_std: Dict[Tuple[str, int], Mat] = {}

    def __repr__(self) -> str:
        p = self.params
        return f"BilinearSpace(q={p.q}, m={p.m}, n={p.n}, k={p.k})"

    @property
    def shape(self) -> Tuple[int, int]:
        return self.params.m, self.params.n

    def zero(self) -> "Form":
        return Form(self, np.zeros(self.shape, dtype=np.int64))

    def from_circ(self, gen) -> "Form":
        gen = self.model.check_gen(gen)
        return Form(self, self.model.nu_inverse_index(gen))

    def from_std(self, std) -> "Form":
        std = np.asarray(std, dtype=np.int64)
        if std.shape != self.shape:
            raise DimensionMismatch(f"需要 {self.shape} 矩阵，得到 {std.shape}")
        return Form(self, std)

    # === 自同构所需的标准矩阵 ===

    def endo_std(self, side: str, gen) -> Mat:
        """q^k-循环生成数组所代表的 V（或 V'）自同态在幂基下的矩阵"""
        model = self.left_model if side == "left" else self.right_model
        P = model.P_m
        P_inv = model.P_m_inv
        return P.matmul(model.expand(gen)).matmul(P_inv)

    def shift_std(self, side: str) -> np.ndarray:
        """ℓ 的一个分量：生成数组 (0, ..., 0, 1) 的标准矩阵（编号形式）"""
        if side not in self._shift_std:
            r = self.params.m if side == "left" else self.params.n
            gen = np.full(r, ZERO, dtype=np.int64)
            gen[r - 1] = 0
            self._shift_std[side] = self.gf.mat_to_index(self.endo_std(side, gen))
        return self._shift_std[side]

    def frob_std(self, side: str, e: int) -> Mat:
        """Z_r = (E_r^{(p^e)})^{-1} E_r：系数 Frobenius 在标准坐标下的修正矩阵"""
        r = self.params.m if side == "left" else self.params.n
        key = (side, e % (self.h * r))
        if key not in self._frob_std:
            E = (self.left_model if side == "left" else self.right_model).E_m
            self._frob_std[key] = E.frobenius(e).inverse().matmul(E)
        return self._frob_std[key]


@lru_cache(maxsize=64)
def get_space(q: int, m: int, n: int, k: int = 1) -> BilinearSpace:
    """缓存的空间实例"""
    return BilinearSpace(SpaceParams(q, m, n, k))


@dataclass(frozen=True, eq=False)
class Form:
    """Ω_{m,n} 中的双线性型，std 为 F_q 元素编号的 m×n 矩阵"""
    space: BilinearSpace
    std: np.ndarray

    def __post_init__(self):
        std = np.array(self.std, dtype=np.int64)
        std.setflags(write=False)
        object.__setattr__(self, "std", std)

    @property
    def circ(self) -> np.ndarray:
        return self.space.model.nu_forward_index(self.std)

    def rank(self) -> int:
        return self.space.gf.rank(self.std)

    def __add__(self, other: "Form") -> "Form":
        return Form(self.space, self.space.gf.add(self.std, other.std))

    def __eq__(self, other) -> bool:
        return (isinstance(other, Form) and self.space is other.space
                and bool(np.array_equal(self.std, other.std)))

    def __hash__(self) -> int:
        return hash(self.std.tobytes())

    def is_zero(self) -> bool:
        return not self.std.any()

    def to_json(self) -> Dict[str, Any]:
        field = self.space.field
        gf = self.space.gf
        return {
            "params": self.space.params.to_json(),
            "std": field.to_ints(gf.to_logs(self.std)).tolist(),
            "circ": [int(v) for v in field.to_ints(self.circ)],
        }


# === 自同构三元组 ===

@dataclass(frozen=True, eq=False)
class AutTriple:
    """
    ((左生成数组, 右生成数组), ℓ^shift, p^frob, 转置)

    左数组定义 g(x) = Σ α_i x^{Q^i}（x ∈ F_{q^m}），右数组定义 g'，Q = q^k。
    作用顺序：先作用 (g, g')，再 ℓ^shift，再系数 Frobenius，最后转置。
    """
    left: np.ndarray
    right: np.ndarray
    shift: int = 0
    frob: int = 0
    transpose: bool = False

    def __post_init__(self):
        object.__setattr__(self, "left", np.asarray(self.left, dtype=np.int64))
        object.__setattr__(self, "right", np.asarray(self.right, dtype=np.int64))

    @classmethod
    def identity(cls, space: BilinearSpace) -> "AutTriple":
        m, n = space.shape
        return cls(_unit(m, 0), _unit(n, 0))

    @classmethod
    def from_slots(cls, space: BilinearSpace, a: FEl, slots, shift: int = 0,
                   frob: int = 0) -> "AutTriple":
        """左数组 (a, 0, ..., 0)，右数组把 slots 铺在 0, m, 2m, ... 位置"""
        m, n = space.shape
        left = np.full(m, ZERO, dtype=np.int64)
        left[0] = a
        return cls(left, tprime_embed(slots, m, n), shift, frob)

    def to_json(self, field: Field) -> Dict[str, Any]:
        return {
            "left": [int(v) for v in field.to_ints(self.left)],
            "right": [int(v) for v in field.to_ints(self.right)],
            "shift": int(self.shift),
            "frob": int(self.frob),
            "transpose": bool(self.transpose),
        }

    @classmethod
    def from_json(cls, field: Field, data: Dict[str, Any]) -> "AutTriple":
        return cls(
            field.from_ints(data["left"]),
            field.from_ints(data["right"]),
            int(data.get("shift", 0)),
            int(data.get("frob", 0)),
            bool(data.get("transpose", False)),
        )


def _unit(r: int, pos: int) -> np.ndarray:
    gen = np.full(r, ZERO, dtype=np.int64)
    gen[pos] = 0
    return gen


@dataclass(frozen=True, eq=False)
class StdTuple:
    """标准形式的自同构：M ↦ T^τ(A^t M^{(p^e)} B)，e ∈ Z_h"""
    A: np.ndarray
    B: np.ndarray
    e: int = 0
    transpose: bool = False

    def key(self) -> bytes:
        return (self.A.astype(np.int8).tobytes() + self.B.astype(np.int8).tobytes()
                + bytes([self.e, int(self.transpose)]))

    def __eq__(self, other) -> bool:
        return isinstance(other, StdTuple) and self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def to_json(self, space: BilinearSpace) -> Dict[str, Any]:
        field, gf = space.field, space.gf
        return {
            "A": field.to_ints(gf.to_logs(self.A)).tolist(),
            "B": field.to_ints(gf.to_logs(self.B)).tolist(),
            "e": int(self.e),
            "transpose": bool(self.transpose),
        }


def std_identity(space: BilinearSpace) -> StdTuple:
    m, n = space.shape
    return StdTuple(np.eye(m, dtype=np.int64), np.eye(n, dtype=np.int64))


def to_standard(space: BilinearSpace, t: AutTriple) -> StdTuple:
    """
    三元组的标准形式

    A = A1^{(p^e)}·(L_m^i)^{(p^e)}·Z_m，B 同理；A1、B1 为左右循环矩阵的标准矩阵，
    L 为 ℓ 的分量，Z 为系数 Frobenius 的修正矩阵。
    """
    m, n = space.shape
    if len(t.left) != m or len(t.right) != n:
        raise DimensionMismatch(f"三元组数组长度应为 ({m}, {n})，得到 ({len(t.left)}, {len(t.right)})")
    if t.transpose and not space.params.square:
        raise TransposeOnRectangular(m, n)
    gf = space.gf
    parts = []
    for side, gen in (("left", t.left), ("right", t.right)):
        base = space.endo_std(side, gen)
        shift = _matrix_power(gf, space.shift_std(side), t.shift)
        M = base.matmul(gf.index_to_mat(shift)).frobenius(t.frob).matmul(space.frob_std(side, t.frob))
        parts.append(gf.mat_to_index(M))
    return StdTuple(parts[0], parts[1], t.frob % space.h, bool(t.transpose))


def _matrix_power(gf, M: np.ndarray, power: int) -> np.ndarray:
    result = np.eye(M.shape[0], dtype=np.int64)
    base = M
    power = int(power)
    while power > 0:
        if power & 1:
            result = gf.matmul(result, base)
        base = gf.matmul(base, base)
        power >>= 1
    return result


def apply_std(space: BilinearSpace, g: StdTuple, M: np.ndarray) -> np.ndarray:
    """把标准自同构作用到一个或一批标准矩阵上"""
    gf = space.gf
    M = np.asarray(M, dtype=np.int64)
    if g.e:
        M = gf.frob(g.e)[M]
    out = gf.matmul(gf.matmul(g.A.T, M), g.B)
    if g.transpose:
        out = np.swapaxes(out, -1, -2)
    return out


def compose(space: BilinearSpace, g2: StdTuple, g1: StdTuple) -> StdTuple:
    """g2 ∘ g1（先 g1 后 g2）"""
    gf = space.gf
    frob2 = gf.frob(g2.e)
    A1, B1 = frob2[g1.A], frob2[g1.B]
    e = (g1.e + g2.e) % space.h
    if not g1.transpose:
        return StdTuple(gf.matmul(A1, g2.A), gf.matmul(B1, g2.B), e, g2.transpose)
    return StdTuple(gf.matmul(A1, g2.B), gf.matmul(B1, g2.A), e, not g2.transpose)


def invert(space: BilinearSpace, g: StdTuple) -> StdTuple:
    gf = space.gf
    back = gf.frob(-g.e)
    A_inv = gf.inverse(back[g.A])
    B_inv = gf.inverse(back[g.B])
    e = (-g.e) % space.h
    if not g.transpose:
        return StdTuple(A_inv, B_inv, e, False)
    return StdTuple(B_inv, A_inv, e, True)


def apply_automorphism(f: Form, t: AutTriple) -> Form:
    space = f.space
    return Form(space, apply_std(space, to_standard(space, t), f.std))


# === 分量与求值 ===

def component_form(space: BilinearSpace, a: FEl, j: int) -> Form:
    """生成数组只在位置 j 为 a 的双线性型 f_{a,j}，属于分量 Ω_j"""
    e = space.params.e
    if not 0 <= j < e:
        raise IndexOutOfRange(j, e)
    gen = np.full(e, ZERO, dtype=np.int64)
    gen[j] = a
    return space.from_circ(gen)


def decompose(f: Form) -> List[Form]:
    """Ω_{m,n} = ⊕_j Ω_j 的分解，第 j 个分量保留生成数组第 j 位"""
    gen = f.circ
    parts = []
    for j in range(len(gen)):
        part = np.full(len(gen), ZERO, dtype=np.int64)
        part[j] = gen[j]
        parts.append(f.space.from_circ(part))
    return parts


def component_support(f: Form) -> List[int]:
    return [int(j) for j in np.nonzero(f.circ >= 0)[0]]


def eval_form(f: Form, x: FEl, xp: FEl) -> FEl:
    """f(x, x') = Σ_l Tr_{q^d/q}(a_l · x · x'^{Q^l})"""
    space = f.space
    field, p = space.field, space.params
    if not field.in_subfield(x, p.q, p.m):
        raise NotInSubfield(f"x 不在 F_{p.q}^{p.m} 中")
    if not field.in_subfield(xp, p.q, p.n):
        raise NotInSubfield(f"x' 不在 F_{p.q}^{p.n} 中")
    total = ZERO
    for l, a in enumerate(f.circ):
        term = field.mul(field.mul(int(a), x), field.frobenius_power(xp, p.q, p.k * l))
        total = field.add(total, field.trace_rel(term, p.q, p.d))
    return total


def eval_std(f: Form, x: FEl, xp: FEl) -> FEl:
    """标准矩阵求值 c^t M c'，c、c' 为幂基坐标"""
    space = f.space
    field, p, gf = space.field, space.params, space.gf
    c = gf.to_index(CoordinateMap(field, power_basis(field, p.q, p.m), p.q).coords(x))
    cp = gf.to_index(CoordinateMap(field, power_basis(field, p.q, p.n), p.q).coords(xp))
    value = gf.matmul(gf.matmul(c[None, :], f.std), cp[:, None])[0, 0]
    return int(gf.logs[value])


def radical_and_rank(f: Form) -> Tuple[np.ndarray, int]:
    """左根基 Rad(f) = {v : v^t M = 0} 的基与 rank = m - dim Rad"""
    radical = f.space.gf.nullspace(f.std.T)
    return radical, f.space.params.m - len(radical)
