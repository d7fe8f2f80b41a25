"""
MRD 码的构造与验证

所有码都以 F_q 上的生成矩阵组（标准坐标，形状 (g, m, n)）表示，
线性码的码字即生成元的 F_q 线性组合。构造：
- Φ：分量 Ω_0 ⊕ ... ⊕ Ω_{t-1}
- 扭曲码 H：{f_{a,0} + f_{μa^{Q^s}, t}} ⊕ Ω_1 ⊕ ... ⊕ Ω_{t-1}，m | n 时直接在 Ω_{m,n} 中构造
- 求值型 Gabidulin 码与打孔码

最小秩距离通过穷举码字得到，同一 F_q^× 标量类只扫描一个代表。
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Any, Dict, List, Optional, Sequence, Set, Tuple, Union

import numpy as np

from rankforge.algebra.field_tower import ZERO, CoordinateMap, FEl, power_basis
from rankforge.algebra.linalg import GroundField, Mat, moore_of
from rankforge.codes.bilinear_space import BilinearSpace, Form, component_form, get_space
from rankforge.config.schema import CodeKind
from rankforge.core.async_utils import ScanExecutor, log_progress, split_ranges
from rankforge.core.exceptions import (
    BadParameters,
    BudgetExceeded,
    DimensionMismatch,
    InvalidMu,
    NotIndependent,
    RankDeficient,
)
from rankforge.core.logging_config import get_logger, log_block

logger = get_logger("mrd_codes")

DEFAULT_MAX_CODEWORDS = 1 << 26


@dataclass(frozen=True, eq=False)
class CodeSpec:
    """
    F_q-线性的矩阵码

    generators 为 F_q 元素编号，形状 (g, m, n)，各生成元线性无关。
    """
    kind: CodeKind
    space: BilinearSpace
    generators: np.ndarray
    t: int
    mu: Optional[FEl] = None
    s: Optional[int] = None
    points: Optional[np.ndarray] = None
    inner: Optional["CodeSpec"] = None

    @property
    def params(self):
        return self.space.params

    @property
    def gf(self) -> GroundField:
        return self.space.gf

    @property
    def dimension(self) -> int:
        return int(self.generators.shape[0])

    @property
    def size(self) -> int:
        return self.params.q ** self.dimension

    @property
    def shape(self) -> Tuple[int, int]:
        return self.space.shape

    def forms(self) -> List[Form]:
        return [Form(self.space, g) for g in self.generators]

    def describe(self) -> Dict[str, Any]:
        field = self.space.field
        out: Dict[str, Any] = {
            "kind": self.kind.value,
            "params": self.params.to_json(),
            "t": self.t,
            "dimension": self.dimension,
            "field": field.spec.to_json(),
        }
        if self.mu is not None:
            out["mu"] = field.to_int(self.mu)
        if self.s is not None:
            out["s"] = self.s
        if self.points is not None:
            out["points"] = [int(v) for v in field.to_ints(self.points)]
        if self.inner is not None:
            out["inner"] = self.inner.describe()
        return out

    def to_json(self) -> Dict[str, Any]:
        out = self.describe()
        out["generators"] = self.space.field.to_ints(self.gf.to_logs(self.generators)).tolist()
        return out


def _make_code(kind: CodeKind, space: BilinearSpace, generators, t: int, **extra) -> CodeSpec:
    gens = np.asarray(generators, dtype=np.int64).reshape((-1,) + space.shape)
    rank = space.gf.rank(gens.reshape(len(gens), -1)) if len(gens) else 0
    if rank < len(gens):
        raise RankDeficient(f"{kind.value} 码的 {len(gens)} 个生成元只张成 {rank} 维", rank=rank)
    code = CodeSpec(kind, space, gens, t, **extra)
    logger.debug("码构造完成", extra={"kind": kind.value, "dimension": len(gens),
                                      **space.params.to_json()})
    return code


def _require_divisor(m: int, n: int) -> None:
    if n % m:
        raise BadParameters(f"需要 m | n，得到 m={m}, n={n}")


def _circ_generators(space: BilinearSpace, arrays: Sequence[np.ndarray]) -> np.ndarray:
    return np.stack([space.from_circ(a).std for a in arrays]) if len(arrays) else \
        np.zeros((0,) + space.shape, dtype=np.int64)


def _component_arrays(space: BilinearSpace, j_range) -> List[np.ndarray]:
    """Ω_j（j ∈ j_range）的生成数组，基元取 F_{q^n} 的幂基"""
    p = space.params
    arrays = []
    for j in j_range:
        for beta in power_basis(space.field, p.q, p.n):
            gen = np.full(p.e, ZERO, dtype=np.int64)
            gen[j] = beta
            arrays.append(gen)
    return arrays


# === 构造 ===

def build_phi(q: int, m: int, n: int, t: int, k: int = 1) -> CodeSpec:
    """Φ_{m,n,t} = Ω_0 ⊕ ... ⊕ Ω_{t-1}"""
    _require_divisor(m, n)
    if not 1 <= t <= m:
        raise BadParameters(f"需要 1 <= t <= m，得到 t={t}")
    space = get_space(q, m, n, k)
    gens = _circ_generators(space, _component_arrays(space, range(t)))
    return _make_code(CodeKind.PHI, space, gens, t)


def check_mu(space: BilinearSpace, mu: FEl, t: int) -> None:
    """N_{q^n/q}(μ) ≠ (-1)^{nt}"""
    field, p = space.field, space.params
    if mu == ZERO or not field.in_subfield(mu, p.q, p.n):
        raise InvalidMu(f"μ 必须是 F_{p.q}^{p.n} 的非零元素")
    target = field.one if (p.n * t) % 2 == 0 else field.neg_one
    if field.norm_rel(mu, p.q, p.n) == target:
        raise InvalidMu(f"N(μ) = (-1)^{p.n * t}，扭曲码不是 MRD 码",
                        details={"mu": field.to_int(mu), "nt": p.n * t})


def default_mu(q: int, n: int, t: int, k: int = 1, m: Optional[int] = None) -> FEl:
    """
    缺省 μ：F_{q^n} 的规范本原元

    q 为奇数时它是非平方元，范数为 F_q 的生成元，不等于 ±1（q > 3 时）；
    q = 3 且范数恰为 (-1)^{nt} 时退回到 1。
    """
    space = get_space(q, m or n, n, k)
    w = power_basis(space.field, q, n)[1] if n > 1 else 0
    for candidate in (w, 0):
        try:
            check_mu(space, candidate, t)
            return candidate
        except InvalidMu:
            continue
    raise InvalidMu(f"q={q} 时不存在合法 μ")


def build_twisted(q: int, m: int, n: int, t: int, mu: FEl, s: int, k: int = 1) -> CodeSpec:
    """
    扭曲码：{f_{a,0} + f_{μ a^{Q^s}, t} : a ∈ F_{q^n}} ⊕ Ω_1 ⊕ ... ⊕ Ω_{t-1}

    m = n 为方阵情形，m | n 时直接给出打孔后的 Ω_{m,n} 形式。
    """
    _require_divisor(m, n)
    if not 1 <= t <= m - 1:
        raise BadParameters(f"需要 1 <= t <= m-1，得到 t={t}, m={m}")
    space = get_space(q, m, n, k)
    check_mu(space, mu, t)
    field = space.field
    arrays = []
    for beta in power_basis(field, q, n):
        gen = np.full(space.params.e, ZERO, dtype=np.int64)
        gen[0] = beta
        gen[t] = field.mul(mu, field.frobenius_power(int(beta), q, k * s))
        arrays.append(gen)
    arrays.extend(_component_arrays(space, range(1, t)))
    kind = CodeKind.TWISTED
    return _make_code(kind, space, _circ_generators(space, arrays), t, mu=mu, s=s)


def _check_points(space: BilinearSpace, points) -> np.ndarray:
    p = space.params
    points = np.asarray(points, dtype=np.int64)
    if len(points) != p.m:
        raise DimensionMismatch(f"需要 {p.m} 个求值点，得到 {len(points)}")
    if not space.field.vin_subfield(points, p.q, p.n).all():
        raise NotIndependent("求值点不在 F_q^n 中")
    if moore_of(space.field, points, p.q).rank() < p.m:
        raise NotIndependent()
    return points


def gabidulin_eval(q: int, m: int, n: int, points, t: int, k: int = 1) -> CodeSpec:
    """
    求值型广义 Gabidulin 码

    码字对应 F(y) = Σ_{i<t} b_i y^{Q^i}：第 j 行是 F(g_j) 在 F_{q^n} 幂基下的坐标。
    """
    if not 1 <= t <= m:
        raise BadParameters(f"需要 1 <= t <= m，得到 t={t}")
    space = get_space(q, m, n, k)
    points = _check_points(space, points)
    field, gf = space.field, space.gf
    basis = power_basis(field, q, n)
    cmap = CoordinateMap(field, basis, q)
    gens = []
    for i in range(t):
        conj = field.vfrob(points, q, k * i)
        for beta in basis:
            values = field.vmul(conj, int(beta))
            gens.append(gf.to_index(cmap.coords_many(values)))
    return _make_code(CodeKind.GABIDULIN, space, np.stack(gens), t, points=points)


def gabidulin_frame(space: BilinearSpace, t: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Φ 与幂基求值码之间的固定基变换 (F, G)：M_Φ = F^t · M_eval · G

    F 是 x ↦ x^{Q^{-(t-1)}} 在 F_{q^m} 幂基下的矩阵，G[a][b] = Tr_{q^n/q}(w^a w^b)。
    """
    p = space.params
    field, gf = space.field, space.gf
    basis_m = power_basis(field, p.q, p.m)
    images = field.vfrob(basis_m, p.q, -p.k * (t - 1))
    F = gf.to_index(CoordinateMap(field, basis_m, p.q).coords_many(images)).T
    basis_n = power_basis(field, p.q, p.n)
    G = np.zeros((p.n, p.n), dtype=np.int64)
    for a in range(p.n):
        for b in range(p.n):
            G[a, b] = gf.to_index(field.trace_rel(field.mul(int(basis_n[a]), int(basis_n[b])),
                                                  p.q, p.n))
    return F, G


def to_phi_frame(code: CodeSpec) -> CodeSpec:
    """把幂基求值码换到 Φ 的坐标"""
    F, G = gabidulin_frame(code.space, code.t)
    gf = code.gf
    gens = gf.matmul(gf.matmul(F.T, code.generators), G)
    return replace(code, generators=gens)


def identity_block(space: BilinearSpace) -> np.ndarray:
    """(I_m | ... | I_m) 在标准坐标下的 m×n 矩阵"""
    return space.model.identity_block_std()


def puncture_code(code: CodeSpec, A: Union[np.ndarray, Mat]) -> CodeSpec:
    """P_A(X) = {A·M : M ∈ X}"""
    p = code.params
    if not p.square:
        raise BadParameters("只能打孔方阵码")
    gf = code.gf
    A = gf.mat_to_index(A) if isinstance(A, Mat) else np.asarray(A, dtype=np.int64)
    rows, cols = A.shape
    if cols != p.n or rows > p.n:
        raise DimensionMismatch(f"打孔矩阵应为 m×{p.n}，得到 {A.shape}")
    rank = gf.rank(A)
    if rank < rows:
        raise RankDeficient(f"打孔矩阵秩 {rank} < {rows}，行线性相关", rank=rank)
    space = get_space(p.q, rows, p.n, p.k)
    gens = gf.matmul(A, code.generators)
    image_rank = gf.rank(gens.reshape(len(gens), -1))
    if image_rank < code.dimension:
        raise RankDeficient(
            f"打孔映射在码上不是单射：{code.dimension} 个生成元的像只张成 {image_rank} 维",
            rank=image_rank, details={"dimension": code.dimension},
        )
    return _make_code(CodeKind.PUNCTURED, space, gens, code.t, mu=code.mu, s=code.s, inner=code)


def build_code(kind: CodeKind, q: int, m: int, n: int, t: int, k: int = 1,
               mu: Optional[FEl] = None, s: Optional[int] = None,
               points=None) -> CodeSpec:
    """按码族构造；punctured 表示方阵码经 (I_m | ... | I_m) 打孔"""
    kind = CodeKind(kind)
    if kind == CodeKind.PHI:
        return build_phi(q, m, n, t, k)
    if kind == CodeKind.GABIDULIN:
        if points is None:
            points = power_basis(get_space(q, m, n, k).field, q, m)
        return gabidulin_eval(q, m, n, points, t, k)
    if s is None:
        raise BadParameters(f"{kind.value} 码需要 s")
    if mu is None:
        mu = default_mu(q, n, t, k, m)
    if kind == CodeKind.TWISTED:
        return build_twisted(q, m, n, t, mu, s, k)
    _require_divisor(m, n)
    square = build_twisted(q, n, n, t, mu, s, k)
    return puncture_code(square, identity_block(get_space(q, m, n, k)))


# === 码字枚举 ===

def _normalized_coeffs(q: int, g: int, start: int, stop: int) -> np.ndarray:
    """
    首个非零分量为 1 的系数向量，第 [start, stop) 个

    按码值升序：首 1 位于第 g-1-b 位的一段共 q^b 个，段起点 (q^b-1)/(q-1)。
    """
    starts = np.array([(q ** b - 1) // (q - 1) for b in range(g + 1)], dtype=np.int64)
    idx = np.arange(start, stop, dtype=np.int64)
    block = np.searchsorted(starts, idx, side="right") - 1
    codes = q ** block + idx - starts[block]
    powers = q ** np.arange(g - 1, -1, -1, dtype=np.int64)
    return (codes[:, None] // powers[None, :]) % q


def _rank_scan_worker(start: int, stop: int, gf: GroundField, generators: np.ndarray) -> np.ndarray:
    coeffs = _normalized_coeffs(gf.q, len(generators), start, stop)
    ranks = gf.batch_rank(gf.combine(coeffs, generators))
    return np.bincount(ranks, minlength=generators.shape[1] + 1)


def _normalized_count(code: CodeSpec) -> int:
    q = code.params.q
    return (q ** code.dimension - 1) // (q - 1)


def _check_budget(code: CodeSpec, budget: int) -> None:
    if code.size > budget:
        raise BudgetExceeded(f"码字数 {code.size} 超出预算", requested=code.size, budget=budget)


def rank_distribution(code: CodeSpec, jobs: int = 1, chunk_size: int = 1 << 14,
                      budget: int = DEFAULT_MAX_CODEWORDS) -> Dict[int, int]:
    """各秩的码字数（含零码字）"""
    _check_budget(code, budget)
    m = code.shape[0]
    hist = np.zeros(m + 1, dtype=np.int64)
    total = _normalized_count(code)
    if total:
        ranges = split_ranges(total, chunk_size)
        with log_block("rank_scan", size=code.size, chunks=len(ranges)), ScanExecutor(jobs) as pool:
            parts = pool.map_ranges(_rank_scan_worker, ranges, code.gf, code.generators,
                                    progress=log_progress("码字扫描", every=max(1, len(ranges) // 10)))
        hist = np.sum(parts, axis=0) * (code.params.q - 1)
    hist[0] += 1
    return {r: int(c) for r, c in enumerate(hist) if c}


def min_rank_distance(code: CodeSpec, jobs: int = 1, chunk_size: int = 1 << 14,
                      budget: int = DEFAULT_MAX_CODEWORDS) -> int:
    if code.dimension == 0:
        raise BadParameters("零维码没有最小距离")
    dist = rank_distribution(code, jobs, chunk_size, budget)
    return min(r for r in dist if r > 0)


def singleton_bound(code: CodeSpec, distance: int) -> int:
    """|X| ≤ q^{n(m-d+1)}"""
    p = code.params
    return p.q ** (p.n * (p.m - distance + 1))


def verify_mrd(code: CodeSpec, jobs: int = 1, chunk_size: int = 1 << 14,
               budget: int = DEFAULT_MAX_CODEWORDS) -> Dict[str, Any]:
    """
    穷举验证 MRD 性质

    Returns:
        {"size", "min_distance", "singleton", "is_mrd", "distribution", ...}；
        零维码返回 error 字段
    """
    report: Dict[str, Any] = {"code": code.describe(), "size": code.size}
    if code.dimension == 0:
        report.update(min_distance=None, singleton=None, is_mrd=False,
                      error="零维码没有最小距离", distribution={"0": 1})
        return report
    dist = rank_distribution(code, jobs, chunk_size, budget)
    distance = min(r for r in dist if r > 0)
    bound = singleton_bound(code, distance)
    report.update(
        min_distance=distance,
        singleton=bound,
        is_mrd=code.size == bound,
        distribution={str(r): c for r, c in sorted(dist.items())},
    )
    logger.info("MRD 验证完成", extra={"kind": code.kind.value, "size": code.size,
                                        "min_distance": distance, "is_mrd": report["is_mrd"]})
    return report


# === 成员与集合比较 ===

def _as_std(code: CodeSpec, f: Union[Form, np.ndarray]) -> np.ndarray:
    std = f.std if isinstance(f, Form) else np.asarray(f, dtype=np.int64)
    if std.shape != code.shape:
        raise DimensionMismatch(f"需要 {code.shape} 矩阵，得到 {std.shape}")
    return std


def membership(code: CodeSpec, f: Union[Form, np.ndarray]) -> bool:
    """f 是否在生成元的 F_q 张成中"""
    std = _as_std(code, f)
    gf = code.gf
    flat = code.generators.reshape(code.dimension, -1)
    stacked = np.concatenate([flat, std.reshape(1, -1)])
    return gf.rank(stacked) == code.dimension


def contains_all(code: CodeSpec, mats: np.ndarray) -> bool:
    """一批矩阵是否全部属于码"""
    mats = np.asarray(mats, dtype=np.int64)
    if not len(mats):
        return True
    flat = code.generators.reshape(code.dimension, -1)
    stacked = np.concatenate([flat, mats.reshape(len(mats), -1)])
    return code.gf.rank(stacked) == code.dimension


def same_code(a: CodeSpec, b: CodeSpec) -> bool:
    """两个线性码作为矩阵集合是否相等"""
    if a.shape != b.shape or a.params.q != b.params.q or a.dimension != b.dimension:
        return False
    return contains_all(a, b.generators)


def codeword_keys(code: CodeSpec, budget: int = 1 << 20) -> Set[bytes]:
    """全部码字的字节键，用于小规模的集合比较"""
    _check_budget(code, budget)
    gf = code.gf
    coeffs = gf.all_vectors(code.dimension)
    words = gf.combine(coeffs, code.generators) if code.dimension else \
        np.zeros((1,) + code.shape, dtype=np.int64)
    return {w.astype(np.int8).tobytes() for w in words}
