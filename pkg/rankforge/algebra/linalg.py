"""
有限域上的稠密矩阵

Mat 的元素是大域中的对数（ZERO 为 -1），用于 Moore 矩阵、循环矩阵等
跨子域的计算；GroundField 把小域 F_q 的元素编号为 0..q-1，提供查表
运算和批量消元，供码字扫描与暴力枚举使用。
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from rankforge.algebra.field_tower import ZERO, Field, FEl, make_field
from rankforge.core.exceptions import (
    BudgetExceeded,
    DimensionMismatch,
    NotCoprime,
    NotInSubfield,
    NotPrimitive,
    RankDeficient,
    Singular,
    ValidationException,
)
from rankforge.core.logging_config import get_logger

logger = get_logger("linalg")

DEFAULT_GL_BUDGET = 1 << 28


@dataclass(frozen=True, eq=False)
class Mat:
    """大域上的矩阵，data 为对数数组，构造后只读"""
    field: Field
    data: np.ndarray

    def __post_init__(self):
        data = np.array(self.data, dtype=np.int64)
        if data.ndim != 2:
            raise DimensionMismatch(f"矩阵数据必须是二维的，得到 {data.ndim} 维")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    # === 构造 ===

    @classmethod
    def zeros(cls, field: Field, rows: int, cols: int) -> "Mat":
        return cls(field, np.full((rows, cols), ZERO, dtype=np.int64))

    @classmethod
    def identity(cls, field: Field, n: int) -> "Mat":
        data = np.full((n, n), ZERO, dtype=np.int64)
        np.fill_diagonal(data, 0)
        return cls(field, data)

    @classmethod
    def from_ints(cls, field: Field, rows: int, cols: int, entries: Sequence[int]) -> "Mat":
        values = np.asarray(list(entries), dtype=np.int64)
        if values.size != rows * cols:
            raise DimensionMismatch(f"元素个数 {values.size} != {rows}x{cols}")
        return cls(field, field.from_ints(values).reshape(rows, cols))

    @classmethod
    def from_json(cls, field: Field, data: Dict[str, Any]) -> "Mat":
        return cls.from_ints(field, int(data["rows"]), int(data["cols"]), data["entries"])

    # === 基本属性 ===

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> Tuple[int, int]:
        return self.data.shape

    def __eq__(self, other) -> bool:
        return (isinstance(other, Mat) and self.field is other.field
                and self.shape == other.shape and bool(np.array_equal(self.data, other.data)))

    def __hash__(self) -> int:
        return hash((self.shape, self.data.tobytes()))

    def __repr__(self) -> str:
        return f"Mat({self.rows}x{self.cols}, {self.to_ints().tolist()})"

    # === 运算 ===

    def __matmul__(self, other: "Mat") -> "Mat":
        return self.matmul(other)

    def __add__(self, other: "Mat") -> "Mat":
        return self.add(other)

    def matmul(self, other: "Mat") -> "Mat":
        if self.cols != other.rows:
            raise DimensionMismatch(f"无法相乘: {self.shape} x {other.shape}")
        prod = self.field.vmul(self.data[:, :, None], other.data[None, :, :])
        return Mat(self.field, self.field.vsum(prod, axis=1))

    def add(self, other: "Mat") -> "Mat":
        if self.shape != other.shape:
            raise DimensionMismatch(f"无法相加: {self.shape} + {other.shape}")
        return Mat(self.field, self.field.vadd(self.data, other.data))

    def sub(self, other: "Mat") -> "Mat":
        if self.shape != other.shape:
            raise DimensionMismatch(f"无法相减: {self.shape} - {other.shape}")
        return Mat(self.field, self.field.vsub(self.data, other.data))

    def scale(self, c: FEl) -> "Mat":
        return Mat(self.field, self.field.vmul(self.data, c))

    def transpose(self) -> "Mat":
        return Mat(self.field, self.data.T)

    @property
    def T(self) -> "Mat":
        return self.transpose()

    def frobenius(self, e: int) -> "Mat":
        """逐元素 x ↦ x^{p^e}"""
        return Mat(self.field, self.field.vfrob(self.data, self.field.p, e))

    def frobenius_q(self, q: int, j: int) -> "Mat":
        """逐元素 x ↦ x^{q^j}"""
        return Mat(self.field, self.field.vfrob(self.data, q, j))

    def rank(self) -> int:
        return _echelon(self.field, self.data)[1]

    def rref(self) -> Tuple["Mat", List[int]]:
        reduced, _, pivots = _echelon(self.field, self.data, pivots_out=True)
        return Mat(self.field, reduced), pivots

    def inverse(self) -> "Mat":
        if self.rows != self.cols:
            raise DimensionMismatch(f"非方阵无逆: {self.shape}")
        n = self.rows
        aug = np.concatenate([self.data, Mat.identity(self.field, n).data], axis=1)
        reduced, rank, pivots = _echelon(self.field, aug, pivots_out=True, limit_cols=n)
        if rank < n:
            raise Singular()
        return Mat(self.field, reduced[:, n:])

    def is_invertible(self) -> bool:
        return self.rows == self.cols and self.rank() == self.rows

    def in_subfield(self, q: int, M: int = 1) -> bool:
        return bool(self.field.vin_subfield(self.data, q, M).all())

    def hstack(self, other: "Mat") -> "Mat":
        return Mat(self.field, np.concatenate([self.data, other.data], axis=1))

    def vstack(self, other: "Mat") -> "Mat":
        return Mat(self.field, np.concatenate([self.data, other.data], axis=0))

    # === 序列化 ===

    def to_ints(self) -> np.ndarray:
        return self.field.to_ints(self.data)

    def to_json(self) -> Dict[str, Any]:
        return {"rows": self.rows, "cols": self.cols,
                "entries": [int(v) for v in self.to_ints().reshape(-1)]}


def _echelon(field: Field, data: np.ndarray, pivots_out: bool = False,
             limit_cols: Optional[int] = None):
    """
    Gauss-Jordan 消元，主元取自上而下第一个非零元

    Returns:
        (约化矩阵, 秩, 主元列) 或 (约化矩阵, 秩)
    """
    a = np.array(data, dtype=np.int64)
    rows, cols = a.shape
    scan_cols = cols if limit_cols is None else limit_cols
    rank = 0
    pivots: List[int] = []
    for c in range(scan_cols):
        if rank == rows:
            break
        nz = np.nonzero(a[rank:, c] >= 0)[0]
        if nz.size == 0:
            continue
        piv = rank + int(nz[0])
        if piv != rank:
            a[[rank, piv]] = a[[piv, rank]]
        a[rank] = field.vmul(a[rank], field.inv(int(a[rank, c])))
        factors = a[:, c].copy()
        factors[rank] = ZERO
        a = field.vsub(a, field.vmul(factors[:, None], a[rank][None, :]))
        pivots.append(c)
        rank += 1
    if pivots_out:
        return a, rank, pivots
    return a, rank


def rank(M: Mat) -> int:
    return M.rank()


def basic_ops(A: Mat, B: Optional[Mat], op: str, e: int = 1) -> Mat:
    """op ∈ {mul, add, transpose, inverse, entrywise_frobenius}"""
    if op == "mul":
        return A.matmul(B)
    if op == "add":
        return A.add(B)
    if op == "transpose":
        return A.transpose()
    if op == "inverse":
        return A.inverse()
    if op == "entrywise_frobenius":
        return A.frobenius(e)
    raise ValidationException(f"未知矩阵运算 {op}")


def batch_rank_field(field: Field, mats: np.ndarray) -> np.ndarray:
    """一批大域矩阵（对数数组，形状 (N, r, c)）的秩"""
    a = np.array(mats, dtype=np.int64)
    N, R, C = a.shape
    ranks = np.zeros(N, dtype=np.int64)
    row_ids = np.arange(R)
    for c in range(C):
        cand = (a[:, :, c] >= 0) & (row_ids[None, :] >= ranks[:, None])
        sel = np.nonzero(cand.any(axis=1))[0]
        if sel.size == 0:
            continue
        piv = np.argmax(cand[sel], axis=1)
        rk = ranks[sel]
        pivot_rows = a[sel, piv].copy()
        a[sel, piv] = a[sel, rk]
        a[sel, rk] = pivot_rows
        prow = field.vmul(pivot_rows, field.vinv(pivot_rows[:, c])[:, None])
        factors = np.where(row_ids[None, :] > rk[:, None], a[sel, :, c], ZERO)
        a[sel] = field.vsub(a[sel], field.vmul(factors[:, :, None], prow[:, None, :]))
        ranks[sel] += 1
    return ranks


# === 特殊矩阵 ===

def moore_of(field: Field, basis: Sequence[FEl], q: int) -> Mat:
    """Moore 矩阵，(i, j) 元素为 basis_j^{q^i}"""
    basis = np.asarray(basis, dtype=np.int64)
    r = len(basis)
    return Mat(field, field.vfrob(basis[None, :], q, np.arange(r)[:, None]))


def moore_matrix(field: Field, w: FEl, r: int, q: int) -> Mat:
    """
    E_r：以 F_{q^r} 本原元 w 的幂基构成的 Moore 矩阵，(i, j) 元素 w^{j q^i}
    """
    step = field.subfield_step(q, r)
    order = q ** r - 1
    if w < 0 or w % step or math.gcd((w // step) % order, order) != 1:
        raise NotPrimitive(f"元素不是 F_{q}^{r} 的本原元", details={"q": q, "r": r})
    basis = np.array([(w * j) % field.n1 for j in range(r)], dtype=np.int64)
    return moore_of(field, basis, q)


def k_permutation(field: Field, r: int, k: int) -> Mat:
    """K_r：第 i 列的 1 位于第 ik mod r 行"""
    if math.gcd(k, r) != 1:
        raise NotCoprime(k, r)
    data = np.full((r, r), ZERO, dtype=np.int64)
    for i in range(r):
        data[(i * k) % r, i] = 0
    return Mat(field, data)


def _extend_to_basis(M: Mat) -> Mat:
    """按单位向量顺序贪心补行，得到可逆方阵"""
    n = M.cols
    current = M
    for j in range(n):
        if current.rows == n:
            break
        unit = Mat.zeros(M.field, 1, n).data.copy()
        unit[0, j] = 0
        candidate = current.vstack(Mat(M.field, unit))
        if candidate.rank() == candidate.rows:
            current = candidate
    return current


def full_rank_factorize(B: Mat, A: Mat) -> Tuple[Mat, Mat]:
    """
    满秩分解 B = S·A·T

    取 S = I_m；把 A、B 分别补成可逆方阵 A', B'，则 T = A'^{-1}·B'。
    """
    m = B.rows
    if A.shape != B.shape:
        raise DimensionMismatch(f"形状不一致: {A.shape} vs {B.shape}")
    for name, M in (("B", B), ("A", A)):
        r = M.rank()
        if r != m:
            raise RankDeficient(f"{name} 的秩 {r} 小于行数 {m}", rank=r)
    A_ext = _extend_to_basis(A)
    B_ext = _extend_to_basis(B)
    return Mat.identity(B.field, m), A_ext.inverse().matmul(B_ext)


# === 一般线性群 ===

def gl_order(dim: int, q: int) -> int:
    """|GL(dim, q)|"""
    order = 1
    for i in range(dim):
        order *= q ** dim - q ** i
    return order


class GroundField:
    """
    大域中的小域 F_q

    元素按规范整数升序编号，素域时编号即取值。所有运算表为 q×q 数组，
    批量运算作用于编号数组。
    """

    def __init__(self, field: Field, q: int):
        self.field = field
        self.q = q
        self.p = field.p
        self.is_prime = q == field.p
        elems = field.subfield_elements(q, 1)
        order = np.argsort(field.to_ints(elems), kind="stable")
        self.logs = elems[order]
        self.logs.setflags(write=False)
        self._lut = np.full(field.order, -1, dtype=np.int64)
        self._lut[self.logs + 1] = np.arange(q)

        grid_a, grid_b = np.meshgrid(self.logs, self.logs, indexing="ij")
        self.add_table = self.to_index(field.vadd(grid_a, grid_b))
        self.mul_table = self.to_index(field.vmul(grid_a, grid_b))
        self.sub_table = self.to_index(field.vsub(grid_a, grid_b))
        self.neg = self.to_index(field.vneg(self.logs))
        inv = np.zeros(q, dtype=np.int64)
        inv[1:] = self.to_index(field.vinv(self.logs[1:]))
        self.inv = inv

    def __reduce__(self):
        return (GroundField, (self.field, self.q))

    def to_index(self, logs) -> np.ndarray:
        idx = self._lut[np.asarray(logs, dtype=np.int64) + 1]
        if (idx < 0).any():
            raise NotInSubfield(f"元素不在 F_{self.q} 中")
        return idx

    def to_logs(self, idx) -> np.ndarray:
        return self.logs[np.asarray(idx, dtype=np.int64)]

    def mat_to_index(self, M: Mat) -> np.ndarray:
        return self.to_index(M.data)

    def index_to_mat(self, idx: np.ndarray) -> Mat:
        return Mat(self.field, self.to_logs(idx))

    def frob(self, e: int) -> np.ndarray:
        """编号上的 x ↦ x^{p^e}"""
        return self.to_index(self.field.vfrob(self.logs, self.p, e))

    # === 批量运算（编号数组） ===

    def add(self, a, b) -> np.ndarray:
        if self.is_prime:
            return (np.asarray(a) + np.asarray(b)) % self.p
        return self.add_table[a, b]

    def sub(self, a, b) -> np.ndarray:
        if self.is_prime:
            return (np.asarray(a) - np.asarray(b)) % self.p
        return self.sub_table[a, b]

    def mul(self, a, b) -> np.ndarray:
        if self.is_prime:
            return (np.asarray(a) * np.asarray(b)) % self.p
        return self.mul_table[a, b]

    def matmul(self, A, B) -> np.ndarray:
        """批量矩阵乘法，支持 numpy 广播"""
        A = np.asarray(A, dtype=np.int64)
        B = np.asarray(B, dtype=np.int64)
        if self.is_prime:
            return np.matmul(A, B) % self.p
        inner = A.shape[-1]
        acc = self.mul(A[..., :, 0:1], B[..., 0:1, :])
        for l in range(1, inner):
            acc = self.add(acc, self.mul(A[..., :, l:l + 1], B[..., l:l + 1, :]))
        return acc

    def combine(self, coeffs, basis) -> np.ndarray:
        """coeffs (N, g) 与 basis (g, ...) 的线性组合"""
        coeffs = np.asarray(coeffs, dtype=np.int64)
        basis = np.asarray(basis, dtype=np.int64)
        flat = basis.reshape(basis.shape[0], -1)
        out = self.matmul(coeffs, flat)
        return out.reshape((coeffs.shape[0],) + basis.shape[1:])

    def batch_rank(self, mats) -> np.ndarray:
        """形状 (N, r, c) 的一批 F_q 矩阵的秩"""
        a = np.array(mats, dtype=np.int64)
        N, R, C = a.shape
        ranks = np.zeros(N, dtype=np.int64)
        row_ids = np.arange(R)
        for c in range(C):
            cand = (a[:, :, c] != 0) & (row_ids[None, :] >= ranks[:, None])
            sel = np.nonzero(cand.any(axis=1))[0]
            if sel.size == 0:
                continue
            piv = np.argmax(cand[sel], axis=1)
            rk = ranks[sel]
            pivot_rows = a[sel, piv].copy()
            a[sel, piv] = a[sel, rk]
            a[sel, rk] = pivot_rows
            prow = self.mul(self.inv[pivot_rows[:, c]][:, None], pivot_rows)
            factors = np.where(row_ids[None, :] > rk[:, None], a[sel, :, c], 0)
            a[sel] = self.sub(a[sel], self.mul(factors[:, :, None], prow[:, None, :]))
            ranks[sel] += 1
        return ranks

    def rank(self, M) -> int:
        M = np.asarray(M, dtype=np.int64)
        return int(self.batch_rank(M[None])[0])

    def rref(self, M) -> Tuple[np.ndarray, List[int]]:
        a = np.array(M, dtype=np.int64)
        rows, cols = a.shape
        rank = 0
        pivots: List[int] = []
        for c in range(cols):
            if rank == rows:
                break
            nz = np.nonzero(a[rank:, c])[0]
            if nz.size == 0:
                continue
            piv = rank + int(nz[0])
            if piv != rank:
                a[[rank, piv]] = a[[piv, rank]]
            a[rank] = self.mul(self.inv[a[rank, c]], a[rank])
            factors = a[:, c].copy()
            factors[rank] = 0
            a = self.sub(a, self.mul(factors[:, None], a[rank][None, :]))
            pivots.append(c)
            rank += 1
        return a[:rank], pivots

    def nullspace(self, M) -> np.ndarray:
        """右零空间 {x : Mx = 0} 的基，按行返回"""
        M = np.asarray(M, dtype=np.int64)
        cols = M.shape[1]
        reduced, pivots = self.rref(M)
        free = [c for c in range(cols) if c not in pivots]
        basis = np.zeros((len(free), cols), dtype=np.int64)
        for row, f in enumerate(free):
            basis[row, f] = 1
            for i, pc in enumerate(pivots):
                basis[row, pc] = self.neg[reduced[i, f]]
        return basis

    def inverse(self, M) -> np.ndarray:
        M = np.asarray(M, dtype=np.int64)
        n = M.shape[0]
        aug = np.concatenate([M, np.eye(n, dtype=np.int64)], axis=1)
        reduced, pivots = self.rref(aug)
        if len(pivots) < n or pivots[n - 1] >= n:
            raise Singular()
        return reduced[:, n:]

    def all_vectors(self, dim: int) -> np.ndarray:
        """F_q^dim 的全部向量，按首分量为最高位的字典序"""
        codes = np.arange(self.q ** dim)
        powers = self.q ** np.arange(dim - 1, -1, -1)
        return (codes[:, None] // powers[None, :]) % self.q

    def normalized_vectors(self, dim: int) -> np.ndarray:
        """首个非零分量为 1 的向量（每个标量类一个代表）"""
        vecs = self.all_vectors(dim)[1:]
        lead = vecs[np.arange(len(vecs)), np.argmax(vecs != 0, axis=1)]
        return vecs[lead == 1]


def _completions(dim: int, q: int, rows: int) -> int:
    """已有 rows 个无关行时补全为可逆矩阵的方式数"""
    count = 1
    for j in range(rows, dim):
        count *= q ** dim - q ** j
    return count


def gl_iter(gf: GroundField, dim: int, start: int = 0,
            stop: Optional[int] = None) -> Iterator[np.ndarray]:
    """
    按固定顺序惰性产出 GL(dim, q) 的元素（编号数组）

    逐行深度优先：第 i 行依字典序取遍不在前 i 行张成空间内的向量，
    落在张成空间内的前缀直接剪掉；start 之前的整棵子树按计数跳过。
    """
    q = gf.q
    total = gl_order(dim, q)
    stop = total if stop is None else min(stop, total)
    if start >= stop:
        return
    vectors = gf.all_vectors(dim)
    powers = q ** np.arange(dim - 1, -1, -1)
    position = start

    def walk(prefix: np.ndarray, skip: int) -> Iterator[np.ndarray]:
        nonlocal position
        depth = len(prefix)
        if depth == dim:
            yield prefix
            position += 1
            return
        blocked = np.zeros(q ** dim, dtype=bool)
        if depth:
            blocked[(gf.matmul(gf.all_vectors(depth), prefix) * powers).sum(axis=1)] = True
        else:
            blocked[0] = True
        sub = _completions(dim, q, depth + 1)
        for code in np.nonzero(~blocked)[0]:
            if skip >= sub:
                skip -= sub
                continue
            yield from walk(np.concatenate([prefix, vectors[code][None]]), skip)
            skip = 0
            if position >= stop:
                return

    yield from walk(np.zeros((0, dim), dtype=np.int64), start)


def gl_array(gf: GroundField, dim: int, start: int = 0, stop: Optional[int] = None,
             budget: int = DEFAULT_GL_BUDGET) -> np.ndarray:
    """
    GL(dim, q) 中下标 [start, stop) 的窗口，形状 (N, dim, dim)

    只物化请求的窗口；预算限制窗口大小。
    """
    total = gl_order(dim, gf.q)
    stop = total if stop is None else min(stop, total)
    size = max(0, stop - start)
    if size > budget:
        raise BudgetExceeded(f"GL({dim},{gf.q}) 窗口 {size} 超出预算", requested=size, budget=budget)
    out = np.zeros((size, dim, dim), dtype=np.int64)
    for i, M in enumerate(gl_iter(gf, dim, start, stop)):
        out[i] = M
    return out


def gl_blocks(gf: GroundField, dim: int, start: int, stop: int,
              block: int) -> Iterator[Tuple[int, np.ndarray]]:
    """按块产出 (块首下标, 块内矩阵)，内存只占一块"""
    buffer: List[np.ndarray] = []
    lo = start
    for M in gl_iter(gf, dim, start, stop):
        buffer.append(M)
        if len(buffer) == block:
            yield lo, np.stack(buffer)
            lo += len(buffer)
            buffer = []
    if buffer:
        yield lo, np.stack(buffer)


def gl_enumerate(field: Field, dim: int, q: int, start: int = 0,
                 budget: int = DEFAULT_GL_BUDGET) -> Iterator[Mat]:
    """逐个产出 GL(dim, q) 的元素，顺序确定，可从下标 start 重启"""
    gf = GroundField(field, q)
    remaining = gl_order(dim, q) - start
    if remaining > budget:
        raise BudgetExceeded(f"|GL({dim},{q})| 剩余 {remaining} 超出预算",
                             requested=remaining, budget=budget)
    for idx in gl_iter(gf, dim, start):
        yield gf.index_to_mat(idx)
