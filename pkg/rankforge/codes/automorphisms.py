"""
自同构群

- Φ 与扭曲码 H 的自同构判定（结构约束 + 逐槽位的域方程）
- 群阶的闭式与结构化计数
- 暴力枚举 (A, B, e, τ) 的对照实现
- 打孔扭曲码与 Gabidulin 码的不等价证书
- H 码之间的等价搜索

约定：三元组的左数组为 (a, 0, ..., 0)，右数组把 b_λ 放在位置 λm；
ρ = Q^i·p^e = p^ε，ε = e + hki。
"""
from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field as dc_field
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from rankforge.algebra.circulant import tprime_core
from rankforge.algebra.field_tower import ZERO, FEl, solve_power_equation
from rankforge.algebra.linalg import (
    GroundField,
    batch_rank_field,
    gl_array,
    gl_blocks,
    gl_order,
)
from rankforge.codes.bilinear_space import (
    AutTriple,
    BilinearSpace,
    StdTuple,
    apply_std,
    compose,
    to_standard,
)
from rankforge.codes.mrd_codes import CodeSpec, build_twisted, check_mu, contains_all
from rankforge.core.async_utils import ScanExecutor, flatten, log_progress, split_ranges
from rankforge.core.exceptions import (
    BadParameters,
    BudgetExceeded,
    ConstraintUnsatisfiable,
    TransposeOnRectangular,
)
from rankforge.core.logging_config import get_logger, log_block

logger = get_logger("automorphisms")

DEFAULT_ORACLE_BUDGET = 1 << 28
DEFAULT_SEARCH_BUDGET = 1 << 24


# === 报告类型 ===

@dataclass
class AutReport:
    """自同构群阶报告；agreement 只在有可比较的量时给出"""
    predicate_count: int
    oracle_count: Optional[int] = None
    closed_form: Optional[int] = None
    factors: Dict[str, Any] = dc_field(default_factory=dict)
    agreement: Optional[bool] = None

    def settle(self) -> "AutReport":
        reference = self.oracle_count if self.oracle_count is not None else self.closed_form
        self.agreement = None if reference is None else self.predicate_count == reference
        return self

    def to_json(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class InequivalenceCertificate:
    c: int
    r: int
    b_subgroup_size: int
    bound: int
    gabidulin_floor: int
    verdict: bool
    slot_sizes: List[int] = dc_field(default_factory=list)

    def to_json(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class EquivalenceWitness:
    """
    等价见证

    pre_transpose 为真时，std 先转置再作用 triple；triple 始终是直接搜索得到的部分。
    """
    triple: AutTriple
    std: StdTuple
    pre_transpose: bool = False

    def to_json(self, space: BilinearSpace) -> Dict[str, Any]:
        return {
            "triple": self.triple.to_json(space.field),
            "std": self.std.to_json(space),
            "pre_transpose": self.pre_transpose,
        }


@dataclass
class OracleResult:
    """暴力枚举结果，tuples 按 (τ, e, A 序号, B 序号) 排序"""
    tuples: List[StdTuple]
    counts: Dict[str, int]

    @property
    def direct(self) -> List[StdTuple]:
        return [g for g in self.tuples if not g.transpose]

    @property
    def transposed(self) -> List[StdTuple]:
        return [g for g in self.tuples if g.transpose]


# === 参数与结构 ===

def _q_power(space: BilinearSpace, j: int) -> int:
    """Q^j，j 按 n 取模"""
    p = space.params
    return p.q ** ((p.k * j) % p.n)


def _power_exponent(space: BilinearSpace, t: int, s: int) -> int:
    """b 的指数 Q^t - Q^s"""
    return _q_power(space, t) - _q_power(space, s)


def _eps(space: BilinearSpace, i: int, e: int) -> int:
    p = space.params
    return (e + space.h * p.k * i) % (space.h * p.n)


def _require_divisor(space: BilinearSpace) -> int:
    p = space.params
    if p.r is None:
        raise BadParameters(f"需要 m | n，得到 m={p.m}, n={p.n}")
    return p.r


def check_h_hypotheses(space: BilinearSpace, t: int, s: int) -> None:
    """
    自同构定理的参数前提

    方阵：1 <= t <= n-2；打孔：1 <= t <= m-2 且 s mod m ∉ {0, ±1, ±2}，
    m <= 5 时后者无解。
    """
    p = space.params
    _require_divisor(space)
    if p.square:
        if not 1 <= t <= p.n - 2:
            raise BadParameters(f"方阵情形需要 1 <= t <= n-2，得到 t={t}")
        return
    if p.m <= 5:
        raise ConstraintUnsatisfiable(f"m={p.m} <= 5 时不存在 s ≢ 0,±1,±2 (mod m)")
    if not 1 <= t <= p.m - 2:
        raise BadParameters(f"打孔情形需要 1 <= t <= m-2，得到 t={t}")
    if s % p.m in {0, 1, 2, p.m - 1, p.m - 2}:
        raise BadParameters(f"打孔情形需要 s ≢ 0,±1,±2 (mod {p.m})，得到 s={s}")


def _phi_shape(space: BilinearSpace, triple: AutTriple) -> Optional[Tuple[FEl, np.ndarray]]:
    """三元组是否具有 (a,0,...,0) × T' 的形状；是则返回 (a, 槽位)"""
    p = space.params
    field = space.field
    if triple.transpose or len(triple.left) != p.m or len(triple.right) != p.n:
        return None
    a = int(triple.left[0])
    if a == ZERO or not field.in_subfield(a, p.q, p.m) or (triple.left[1:] != ZERO).any():
        return None
    right = triple.right
    slots = right[::p.m]
    mask = np.ones(p.n, dtype=bool)
    mask[::p.m] = False
    if (right[mask] != ZERO).any() or not field.vin_subfield(slots, p.q, p.n).all():
        return None
    core = tprime_core(field, slots, p.m, p.q, p.k)
    if batch_rank_field(field, core[None])[0] < len(slots):
        return None
    return a, slots


def _slot_rhs(space: BilinearSpace, a: FEl, mu: FEl, s: int, eps: int, lam: int) -> FEl:
    """(μ^{ρ^{-1}} a^{Q^s-1})^{Q^{λm}} / μ"""
    p = space.params
    field = space.field
    base = field.mul(field.frobenius_power(mu, space.p, -eps), field.pow(a, _q_power(space, s) - 1))
    return field.div(field.frobenius_power(base, p.q, p.k * lam * p.m), mu)


def phi_aut_predicate(space: BilinearSpace, triple: AutTriple, t: int) -> bool:
    """三元组是否属于 Aut(Φ_{m,n,t}) 的结构化描述"""
    p = space.params
    _require_divisor(space)
    if not 1 <= t <= p.m - 1:
        raise BadParameters(f"需要 1 <= t <= m-1，得到 t={t}")
    return _phi_shape(space, triple) is not None


def h_aut_predicate(space: BilinearSpace, triple: AutTriple, t: int, mu: FEl, s: int,
                    check_hypotheses: bool = True) -> bool:
    """
    三元组是否属于 Aut(H_{m,n,t,μ,s}) 的结构化描述

    每个非零槽位 b_λ 满足 b^{Q^t-Q^s} = (μ^{ρ^{-1}} a^{Q^s-1})^{Q^{λm}} / μ。
    """
    if check_hypotheses:
        check_h_hypotheses(space, t, s)
    shape = _phi_shape(space, triple)
    if shape is None:
        return False
    a, slots = shape
    field = space.field
    eps = _eps(space, triple.shift, triple.frob)
    N = _power_exponent(space, t, s)
    for lam, b in enumerate(slots):
        if b == ZERO:
            continue
        if field.pow(int(b), N) != _slot_rhs(space, a, mu, s, eps, lam):
            return False
    return True


# === 枚举 ===

def _check_enumeration(total: int, budget: int, label: str) -> None:
    if total > budget:
        raise BudgetExceeded(f"{label} 枚举规模 {total} 超出预算", requested=total, budget=budget)


def _invertible_cores(space: BilinearSpace, options: Sequence[Sequence[FEl]]) -> np.ndarray:
    """槽位取值的笛卡尔积中核心矩阵可逆的那些，形状 (N, r)"""
    p = space.params
    if any(len(o) == 0 for o in options):
        return np.zeros((0, len(options)), dtype=np.int64)
    grids = np.meshgrid(*[np.asarray(o, dtype=np.int64) for o in options], indexing="ij")
    combos = np.stack([g.reshape(-1) for g in grids], axis=1)
    cores = tprime_core(space.field, combos, p.m, p.q, p.k)
    ranks = batch_rank_field(space.field, cores)
    return combos[ranks == len(options)]


def enumerate_phi_triples(space: BilinearSpace, t: int,
                          budget: int = DEFAULT_ORACLE_BUDGET) -> Iterator[AutTriple]:
    """Aut(Φ) 的全部结构化三元组：a ∈ F_{q^m}^×，T' 的可逆元，i ∈ Z_m，e ∈ Z_h"""
    p = space.params
    r = _require_divisor(space)
    if not 1 <= t <= p.m - 1:
        raise BadParameters(f"需要 1 <= t <= m-1，得到 t={t}")
    field = space.field
    _check_enumeration((p.q ** p.n) ** r, budget, "T'")
    slot_values = field.subfield_elements(p.q, p.n)
    cores = _invertible_cores(space, [slot_values] * r)
    _check_enumeration(len(cores) * (p.q ** p.m - 1) * p.m * space.h, budget, "Aut(Φ)")
    units = field.subfield_elements(p.q, p.m)[1:]
    for i in range(p.m):
        for e in range(space.h):
            for a in units:
                for slots in cores:
                    yield AutTriple.from_slots(space, int(a), slots, i, e)


def _h_slot_options(space: BilinearSpace, a: FEl, mu: FEl, s: int, t: int,
                    eps: int) -> List[List[FEl]]:
    """每个槽位的可选值：方程的解，外加零"""
    p = space.params
    N = _power_exponent(space, t, s)
    return [
        solve_power_equation(space.field, p.q, p.n, N, _slot_rhs(space, a, mu, s, eps, lam)) + [ZERO]
        for lam in range(p.r)
    ]


def enumerate_h_triples(space: BilinearSpace, t: int, mu: FEl, s: int,
                        check_hypotheses: bool = True,
                        budget: int = DEFAULT_ORACLE_BUDGET) -> Iterator[AutTriple]:
    """Aut(H) 的全部结构化三元组：a ∈ F_{q^m}^×，i ∈ Z_m，e ∈ Z_h，槽位逐个解方程"""
    if check_hypotheses:
        check_h_hypotheses(space, t, s)
    p = space.params
    _require_divisor(space)
    units = space.field.subfield_elements(p.q, p.m)[1:]
    _check_enumeration(len(units) * p.m * space.h, budget, "Aut(H) 外层")
    for i in range(p.m):
        for e in range(space.h):
            eps = _eps(space, i, e)
            for a in units:
                options = _h_slot_options(space, int(a), mu, s, t, eps)
                for slots in _invertible_cores(space, options):
                    yield AutTriple.from_slots(space, int(a), slots, i, e)


def predicate_std_set(space: BilinearSpace, triples: Iterator[AutTriple]) -> set:
    """三元组的标准形式集合"""
    return {to_standard(space, tr) for tr in triples}


# === 闭式计数 ===

def unit_power_image(q: int, n: int, k: int) -> int:
    """|{x^{q^k-1} : x ∈ F_{q^n}^×}| = (q^n-1)/(q^{gcd(n,k)}-1)"""
    return (q ** n - 1) // (q ** math.gcd(n, k) - 1)


def image_intersection(q: int, n: int, k: int, j: int) -> int:
    """两个幂像子群的交的阶"""
    return math.gcd(unit_power_image(q, n, k), unit_power_image(q, n, j))


def unit_pair_count(q: int, n: int, k: int, j: int) -> int:
    """x^{q^k-1} y^{q^j-1} = 1 的解对数 (q^n-1)(q^{gcd(n,k,j)}-1)"""
    return (q ** n - 1) * (q ** math.gcd(math.gcd(n, k), j) - 1)


def subfield_degree(space: BilinearSpace, x: FEl) -> int:
    """包含 x 的最小子域 F_{p^D} 的次数 D"""
    field = space.field
    for D in range(1, field.E + 1):
        if field.E % D == 0 and field.in_subfield(x, space.p, D):
            return D
    return field.E


def admissible_frobenius(space: BilinearSpace, mu: FEl, s: int, t: int) -> List[int]:
    """
    使第 0 槽位方程可解的 ε ∈ Z_{nh}

    可解当且仅当 μ^{ρ^{-1}-1} 落在 {b^{Q^t-Q^s} a^{1-Q^s}} 生成的子群中；
    这些 ε 构成 Z_{nh} 的加法子群。
    """
    p = space.params
    field = space.field
    step = field.subfield_step(p.q, p.n)
    order = p.q ** p.n - 1
    index_m = order // (p.q ** p.m - 1)
    G = math.gcd(math.gcd(order, _power_exponent(space, t, s) % order),
                 (index_m * (_q_power(space, s) - 1)) % order)
    out = []
    for eps in range(space.h * p.n):
        ratio = field.div(field.frobenius_power(mu, space.p, -eps), mu)
        if (ratio // step) % G == 0:
            out.append(eps)
    return out


def phi_order_factors(space: BilinearSpace) -> Dict[str, int]:
    """|S|·|T'|·|C|·|Aut(F_q)|"""
    p = space.params
    r = _require_divisor(space)
    factors = {
        "S": p.q ** p.m - 1,
        "T_prime": gl_order(r, p.q ** p.m),
        "C": p.m,
        "aut_fq": space.h,
    }
    factors["total"] = math.prod(factors.values())
    return factors


def closed_form_counts(space: BilinearSpace, t: int, s: Optional[int] = None,
                       mu: Optional[FEl] = None) -> Dict[str, Any]:
    """闭式群阶；给出 μ、s 时附带扭曲码的 l 与 l(q^n-1)(q^{gcd(n,s,t)}-1)"""
    p = space.params
    out: Dict[str, Any] = {"phi": phi_order_factors(space)}
    if mu is None or s is None:
        return out
    admissible = admissible_frobenius(space, mu, s, t)
    l = len(admissible)
    twisted: Dict[str, Any] = {
        "l": l,
        "nh": p.n * space.h,
        "mu_degree": subfield_degree(space, mu),
    }
    twisted["nh_over_d_divides_l"] = l % (p.n * space.h // math.gcd(p.n * space.h,
                                                                     twisted["mu_degree"])) == 0
    if p.square:
        G = p.q ** math.gcd(math.gcd(p.n, s % p.n), t) - 1
        twisted.update(unit_group=p.q ** p.n - 1, G=G, total=l * (p.q ** p.n - 1) * G)
    else:
        twisted["total"] = None
    out["twisted"] = twisted
    return out


def count_phi_aut(space: BilinearSpace, t: int, budget: int = DEFAULT_ORACLE_BUDGET) -> AutReport:
    """T' 可逆元穷举计数，与因子乘积比较"""
    p = space.params
    r = _require_divisor(space)
    _check_enumeration((p.q ** p.n) ** r, budget, "T'")
    if not 1 <= t <= p.m - 1:
        raise BadParameters(f"需要 1 <= t <= m-1，得到 t={t}")
    slot_values = space.field.subfield_elements(p.q, p.n)
    t_prime = len(_invertible_cores(space, [slot_values] * r))
    factors = phi_order_factors(space)
    count = (p.q ** p.m - 1) * t_prime * p.m * space.h
    return AutReport(count, closed_form=factors["total"],
                     factors={**factors, "T_prime_counted": t_prime}).settle()


def _square_h_count(space: BilinearSpace, mu: FEl, s: int, t: int) -> Tuple[int, List[int]]:
    """
    方阵情形逐 ε 的穷举：对每个 ε 统计满足 b^{Q^t-Q^s} = μ^{ρ^{-1}-1} a^{Q^s-1} 的 (a, b) 对

    两边分别对全部 a、b 求值后按值配对计数。
    """
    p = space.params
    field = space.field
    units = field.subfield_elements(p.q, p.n)[1:]
    N = _power_exponent(space, t, s)
    lhs = np.bincount(field.vpow(units, N), minlength=field.n1)
    a_part = field.vpow(units, _q_power(space, s) - 1)
    total = 0
    admissible = []
    for i in range(p.n):
        for e in range(space.h):
            eps = _eps(space, i, e)
            shift = field.div(field.frobenius_power(mu, space.p, -eps), mu)
            rhs = np.bincount(field.vmul(a_part, shift), minlength=field.n1)
            hits = int(np.dot(lhs, rhs))
            if hits:
                admissible.append(eps)
            total += hits
    return total, sorted(admissible)


def _punctured_h_count(space: BilinearSpace, mu: FEl, s: int, t: int) -> Tuple[int, List[int], List[int]]:
    p = space.params
    units = space.field.subfield_elements(p.q, p.m)[1:]
    cache: Dict[Tuple[Tuple[int, ...], ...], int] = {}
    total = 0
    admissible = []
    slot_sizes = set()
    for i in range(p.m):
        for e in range(space.h):
            eps = _eps(space, i, e)
            hits = 0
            for a in units:
                options = _h_slot_options(space, int(a), mu, s, t, eps)
                slot_sizes.update(len(o) - 1 for o in options)
                key = tuple(tuple(o) for o in options)
                if key not in cache:
                    cache[key] = len(_invertible_cores(space, options))
                hits += cache[key]
            if hits:
                admissible.append(eps)
            total += hits
    return total, admissible, sorted(slot_sizes)


def count_h_aut(space: BilinearSpace, mu: FEl, s: int, t: int,
                check_hypotheses: bool = True) -> AutReport:
    """
    扭曲码自同构三元组计数

    方阵：对 (a, b, i, e) 穷举，与 l(q^n-1)(q^{gcd(n,s,t)}-1) 比较；
    打孔：逐槽位解方程并统计核心可逆的赋值，无闭式。
    """
    if check_hypotheses:
        check_h_hypotheses(space, t, s)
    check_mu(space, mu, t)
    p = space.params
    with log_block("count_h_aut", **p.to_json(), t=t, s=s):
        if p.square:
            count, admissible = _square_h_count(space, mu, s, t)
            closed = closed_form_counts(space, t, s, mu)["twisted"]
            factors = {"l": len(admissible), "unit_group": closed["unit_group"], "G": closed["G"],
                       "admissible_eps": admissible}
            report = AutReport(count, closed_form=closed["total"], factors=factors)
        else:
            count, admissible, sizes = _punctured_h_count(space, mu, s, t)
            report = AutReport(count, factors={"l": len(admissible), "admissible_eps": admissible,
                                               "slot_solution_sizes": sizes})
    logger.info("扭曲码自同构计数完成", extra={"count": count, **p.to_json()})
    return report.settle()


# === 暴力枚举 ===

def parity_check(gf: GroundField, generators: np.ndarray) -> np.ndarray:
    """码的校验张量 H：X ∈ 码 ⟺ Σ H[h,a,b] X[a,b] = 0 对全部 h"""
    g, m, n = generators.shape
    if g == 0:
        return np.eye(m * n, dtype=np.int64).reshape(m * n, m, n)
    return gf.nullspace(generators.reshape(g, -1)).reshape(-1, m, n)


def _contract(gf: GroundField, N: np.ndarray, H: np.ndarray) -> np.ndarray:
    """W[(c,b), (x,u,h)] = Σ_a N[x,u,a,c] H[h,a,b]"""
    X, g, m, n = N.shape
    if gf.is_prime:
        W = np.einsum("xuac,hab->cbxuh", N, H) % gf.p
    else:
        acc = np.zeros((X, g, n, H.shape[0], n), dtype=np.int64)
        for a in range(m):
            acc = gf.add(acc, gf.mul(N[:, :, a, :, None, None], H[None, None, None, :, a, :]))
        W = acc.transpose(2, 4, 0, 1, 3)
    return W.reshape(n * n, -1)


def _oracle_worker(start: int, stop: int, gf: GroundField, m: int, B_flat: np.ndarray,
                   generators: np.ndarray, checks: List[Tuple[bool, np.ndarray]],
                   frobs: List[int]) -> List[Tuple[int, int, int, int]]:
    """GL(m) 下标区间 [start, stop) 上的暴力检查，返回 (τ, e, A 序号, B 序号)"""
    found: List[Tuple[int, int, int, int]] = []
    NB = len(B_flat)
    width = generators.shape[0] * max(1, max(len(H) for _, H in checks))
    block = max(1, (1 << 21) // max(1, NB * width))
    B_float = B_flat.astype(np.float64)
    for lo, A in gl_blocks(gf, m, start, stop, block):
        count = len(A)
        for e in frobs:
            G = gf.frob(e)[generators] if e else generators
            N = gf.matmul(np.swapaxes(A, -1, -2)[:, None], G[None])
            for tau, H in checks:
                if len(H) == 0:
                    ok = np.ones((NB, count), dtype=bool)
                else:
                    W = _contract(gf, N, H)
                    if gf.is_prime:
                        R = np.rint(B_float @ W.astype(np.float64)).astype(np.int64) % gf.p
                    else:
                        R = gf.matmul(B_flat, W)
                    ok = ~R.reshape(NB, count, -1).any(axis=2)
                b_idx, x_idx = np.nonzero(ok)
                found.extend((int(tau), e, lo + int(x), int(b)) for b, x in zip(b_idx, x_idx))
    return found


def oracle_size(code: CodeSpec, include_transpose: bool = True) -> int:
    p = code.params
    h = code.space.h
    factor = 2 if include_transpose and p.square else 1
    return gl_order(p.m, p.q) * gl_order(p.n, p.q) * h * factor


def brute_force_aut(code: CodeSpec, include_transpose: bool = True, jobs: int = 1,
                    budget: int = DEFAULT_ORACLE_BUDGET) -> OracleResult:
    """
    枚举全部 (A, B, e, τ)，保留把每个生成元映入码的那些

    m = n 时转置陪集用转置码的校验张量检查。
    """
    p = code.params
    space, gf = code.space, code.gf
    total = oracle_size(code, include_transpose)
    if total > budget:
        raise BudgetExceeded(f"暴力枚举规模 {total} 超出预算", requested=total, budget=budget)
    checks = [(False, parity_check(gf, code.generators))]
    if include_transpose and p.square:
        checks.append((True, parity_check(gf, np.swapaxes(code.generators, -1, -2))))
    with log_block("oracle", size=total, **p.to_json()):
        # GL(n) 是向量化的内层轴，整体物化；GL(m) 按区间在各 worker 内惰性生成
        gl_n = gl_array(gf, p.n, budget=budget)
        B_flat = gl_n.reshape(len(gl_n), -1)
        order_m = gl_order(p.m, p.q)
        frobs = list(range(space.h))
        ranges = split_ranges(order_m, max(1, order_m // (8 * max(1, jobs))))
        with ScanExecutor(jobs) as pool:
            parts = pool.map_ranges(_oracle_worker, ranges, gf, p.m, B_flat, code.generators,
                                    checks, frobs,
                                    progress=log_progress("暴力枚举", every=max(1, len(ranges) // 8)))
    found = sorted(flatten(parts))
    if p.square:
        left = gl_n
    else:
        left = {a: gl_array(gf, p.m, a, a + 1)[0] for a in {f[2] for f in found}}
    tuples = [StdTuple(left[a], gl_n[b], e, bool(tau)) for tau, e, a, b in found]
    counts = {"direct": sum(1 for f in found if not f[0]), "transpose": sum(1 for f in found if f[0])}
    logger.info("暴力枚举完成", extra={"kind": code.kind.value, **counts})
    return OracleResult(tuples, counts)


def maps_into(space: BilinearSpace, g: StdTuple, source: CodeSpec, target: CodeSpec) -> bool:
    """g 是否把 source 的每个生成元映入 target"""
    return contains_all(target, apply_std(space, g, source.generators))


# === 不等价证书 ===

def _b_subgroup(space: BilinearSpace, mu: FEl, s: int, t: int) -> Tuple[int, List[int]]:
    """a = 1、ρ = 1 时的槽位解：b^{Q^t-Q^s} = μ^{Q^{λm}-1}，统计核心可逆的赋值"""
    options = _h_slot_options(space, 0, mu, s, t, 0)
    return len(_invertible_cores(space, options)), [len(o) - 1 for o in options]


def inequivalence_certificate(space: BilinearSpace, mu: FEl, s: int, t: int) -> InequivalenceCertificate:
    """
    打孔扭曲码与任何广义 Gabidulin 码不等价的证书

    c = gcd(n, sk-t)，要求 c < m；|B| <= q^{cr}-1 < q^n-1 时结论成立。
    B 按槽位方程实际计数，槽位解集大小另列在 slot_sizes 中。
    """
    p = space.params
    r = _require_divisor(space)
    if p.square:
        raise BadParameters("证书只适用于打孔情形 m < n")
    check_h_hypotheses(space, t, s)
    check_mu(space, mu, t)
    c = math.gcd(p.n, s * p.k - t)
    if c >= p.m:
        raise BadParameters(f"c = gcd(n, sk-t) = {c} 不小于 m = {p.m}",
                            details={"c": c, "m": p.m})
    size, slot_sizes = _b_subgroup(space, mu, s, t)
    bound = p.q ** (c * r) - 1
    floor = p.q ** p.n - 1
    cert = InequivalenceCertificate(c, r, size, bound, floor, size <= bound < floor, slot_sizes)
    logger.info("不等价证书", extra=cert.to_json())
    return cert


# === 等价搜索 ===

def _cycle_options(space: BilinearSpace, a: FEl, mu: FEl, s: int, nu: FEl, u: int, t: int,
                   eps: int, j: int) -> List[Tuple[List[int], List[List[FEl]]]]:
    """
    槽位递推 b_λ = K_λ · b_{λ-j}^{Q^{s-t}} 沿 λ ↦ λ+j 的每个环给出的候选

    返回 [(环上槽位, [该环各候选赋值]) ...]；含槽位 0 的环先列非零解，其余先列零。
    """
    p = space.params
    field = space.field
    r = p.r
    D = field.mul(field.frobenius_power(nu, space.p, -eps), field.pow(a, _q_power(space, u)))
    K = []
    for lam in range(r):
        C = field.mul(a, field.frobenius_power(mu, p.q, -p.k * lam * p.m))
        K.append(field.frobenius_power(field.div(D, C), p.q, p.k * (lam * p.m - t)))
    seen = set()
    out = []
    for start in range(r):
        if start in seen:
            continue
        cycle = [start]
        while (cycle[-1] + j) % r != start:
            cycle.append((cycle[-1] + j) % r)
        seen.update(cycle)
        # coef_k·x^{Q^{k(s-t)}} 为环上第 k 个槽位的值
        coefs = [0]
        for lam in cycle[1:] + [start]:
            prev = field.frobenius_power(coefs[-1], p.q, p.k * (s - t))
            coefs.append(field.mul(K[lam], prev))
        L = len(cycle)
        N = _q_power(space, L * (s - t)) - 1
        roots = solve_power_equation(field, p.q, p.n, N, field.inv(coefs[-1]))
        assignments = []
        for x in roots:
            assignments.append([field.mul(coefs[k], field.frobenius_power(x, p.q, p.k * k * (s - t)))
                                for k in range(L)])
        zero = [ZERO] * L
        assignments = assignments + [zero] if start == 0 else [zero] + assignments
        out.append((cycle, assignments))
    return out


def h_equivalence_search(space: BilinearSpace, mu: FEl, s: int, nu: FEl, u: int, t: int,
                         budget: int = DEFAULT_SEARCH_BUDGET,
                         allow_transpose: bool = True) -> Optional[EquivalenceWitness]:
    """
    搜索把 H(μ, s) 映到 H(ν, u) 的结构化三元组

    需要 s ≡ u (mod m)，此时 j = (s-u)/m mod r；依次枚举 ε、a 与每个环的候选，
    找到后以作用后的码比较确认。方阵情形直接搜索失败时，再经转置路线
    H(μ,s)^⊤ ∘ (id, x^{Q^t}) = H(μ^{-Q^{-s}}, t-s) 搜索一次。
    """
    p = space.params
    r = _require_divisor(space)
    if not 1 <= t <= p.m - 1:
        raise BadParameters(f"需要 1 <= t <= m-1，得到 t={t}")
    check_mu(space, mu, t)
    check_mu(space, nu, t)
    source = build_twisted(p.q, p.m, p.n, t, mu, s, p.k)
    target = build_twisted(p.q, p.m, p.n, t, nu, u, p.k)
    with log_block("equivalence_search", s=s, u=u, **p.to_json()):
        witness = _direct_search(space, source, target, mu, s, nu, u, t, budget)
        if witness is None and allow_transpose and p.square:
            witness = _transpose_route(space, source, target, mu, s, nu, u, t, budget)
    logger.info("等价搜索完成", extra={"found": witness is not None})
    return witness


def _direct_search(space: BilinearSpace, source: CodeSpec, target: CodeSpec, mu: FEl, s: int,
                   nu: FEl, u: int, t: int, budget: int) -> Optional[EquivalenceWitness]:
    p = space.params
    r = p.r
    if (s - u) % p.m:
        return None
    j = ((s - u) // p.m) % r
    units = space.field.subfield_elements(p.q, p.m)[1:]
    tried = 0
    for i in range(p.m):
        for e in range(space.h):
            eps = _eps(space, i, e)
            for a in units:
                cycles = _cycle_options(space, int(a), mu, s, nu, u, t, eps, j)
                for choice in itertools.product(*[opts for _, opts in cycles]):
                    tried += 1
                    if tried > budget:
                        raise BudgetExceeded("等价搜索超出预算", requested=tried, budget=budget)
                    slots = np.full(r, ZERO, dtype=np.int64)
                    for (cycle, _), values in zip(cycles, choice):
                        slots[cycle] = values
                    core = tprime_core(space.field, slots, p.m, p.q, p.k)
                    if batch_rank_field(space.field, core[None])[0] < r:
                        continue
                    triple = AutTriple.from_slots(space, int(a), slots, i, e)
                    std = to_standard(space, triple)
                    if maps_into(space, std, source, target):
                        return EquivalenceWitness(triple, std)
                    logger.debug("候选未通过作用检查", extra={"i": i, "e": e, "a": int(a)})
    return None


def transpose_route(space: BilinearSpace, mu: FEl, s: int, t: int) -> Tuple[StdTuple, FEl, int]:
    """
    方阵扭曲码的转置路线：W = (先转置，再右乘 x ↦ x^{Q^t}) 把 H(μ, s) 映到 H(μ', s')

    μ' = μ^{-Q^{-s}}，s' = t - s mod n。
    """
    p = space.params
    if not p.square:
        raise TransposeOnRectangular(p.m, p.n)
    field = space.field
    unit_t = np.full(p.n, ZERO, dtype=np.int64)
    unit_t[t % p.n] = 0
    B_t = space.gf.mat_to_index(space.endo_std("right", unit_t))
    W = StdTuple(B_t, np.eye(p.n, dtype=np.int64), 0, True)
    mu_prime = field.inv(field.frobenius_power(mu, p.q, -p.k * s))
    return W, mu_prime, (t - s) % p.n


def _transpose_route(space: BilinearSpace, source: CodeSpec, target: CodeSpec, mu: FEl, s: int,
                     nu: FEl, u: int, t: int, budget: int) -> Optional[EquivalenceWitness]:
    p = space.params
    W, mu_prime, s_prime = transpose_route(space, mu, s, t)
    middle = build_twisted(p.q, p.m, p.n, t, mu_prime, s_prime, p.k)
    inner = _direct_search(space, middle, target, mu_prime, s_prime, nu, u, t, budget)
    if inner is None:
        return None
    std = compose(space, inner.std, W)
    if not maps_into(space, std, source, target):
        return None
    return EquivalenceWitness(inner.triple, std, pre_transpose=True)


def _random_gl(gf: GroundField, rng: np.random.Generator, dim: int, count: int) -> np.ndarray:
    out = []
    need = count
    while need > 0:
        cand = rng.integers(0, gf.q, size=(2 * need + 8, dim, dim))
        ok = cand[gf.batch_rank(cand) == dim]
        out.append(ok[:need])
        need -= len(out[-1])
    return np.concatenate(out)[:count]


def sample_equivalence_falsification(space: BilinearSpace, source: CodeSpec, target: CodeSpec,
                                     samples: int = 10000, seed: int = 0,
                                     batch: int = 2048) -> Dict[str, int]:
    """随机一般自同构 (A, B, e, τ) 中把 source 映入 target 的个数"""
    p = space.params
    gf = space.gf
    rng = np.random.default_rng(seed)
    flat_target = target.generators.reshape(target.dimension, -1)
    hits = 0
    done = 0
    while done < samples:
        size = min(batch, samples - done)
        A = _random_gl(gf, rng, p.m, size)
        B = _random_gl(gf, rng, p.n, size)
        es = rng.integers(0, space.h, size=size)
        taus = rng.integers(0, 2, size=size).astype(bool) if p.square else np.zeros(size, dtype=bool)
        for e in np.unique(es):
            sel = np.nonzero(es == e)[0]
            G = gf.frob(int(e))[source.generators]
            images = gf.matmul(gf.matmul(np.swapaxes(A[sel], -1, -2)[:, None], G[None]),
                               B[sel][:, None])
            flip = taus[sel]
            images[flip] = np.swapaxes(images[flip], -1, -2)
            stacked = np.concatenate([
                np.broadcast_to(flat_target, (len(sel),) + flat_target.shape),
                images.reshape(len(sel), source.dimension, -1),
            ], axis=1)
            hits += int((gf.batch_rank(stacked) == target.dimension).sum())
        done += size
    logger.info("随机证伪完成", extra={"samples": samples, "hits": hits})
    return {"samples": samples, "hits": hits}
