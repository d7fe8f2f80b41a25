"""
MRD 码单元测试
测试 rankforge/codes/mrd_codes.py 的构造、扫描与比较
"""
import os
import sys

import numpy as np
import pytest

# 添加项目路径
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from rankforge.algebra.field_tower import power_basis
from rankforge.codes.bilinear_space import get_space
from rankforge.codes.mrd_codes import (
    CodeSpec, build_code, build_phi, build_twisted, codeword_keys, default_mu,
    gabidulin_eval, identity_block, membership, min_rank_distance, puncture_code,
    rank_distribution, same_code, singleton_bound, to_phi_frame, verify_mrd,
)
from rankforge.config.schema import CodeKind
from rankforge.core.exceptions import (
    BadParameters, BudgetExceeded, DimensionMismatch, InvalidMu, NotIndependent,
    RankDeficient,
)


class TestBuildPhi:
    """测试 Φ 构造"""

    def test_small_distribution(self):
        """(2,2,4,1)：16 个码字，非零码字秩全为 2"""
        code = build_phi(2, 2, 4, 1)
        assert code.size == 16
        assert rank_distribution(code) == {0: 1, 2: 15}

    def test_full_space(self):
        """t = m = n 时为整个空间"""
        code = build_phi(2, 2, 2, 2)
        assert code.size == 2 ** 4
        assert min_rank_distance(code) == 1

    def test_phi_2_3_6_2(self):
        """4096 个码字，最小秩 2 = m - t + 1"""
        code = build_phi(2, 3, 6, 2)
        report = verify_mrd(code)
        assert report["size"] == 4096
        assert report["min_distance"] == 2
        assert report["singleton"] == 4096
        assert report["is_mrd"] is True

    def test_requires_divisor(self):
        with pytest.raises(BadParameters):
            build_phi(2, 2, 3, 1)

    def test_t_range(self):
        with pytest.raises(BadParameters):
            build_phi(2, 2, 4, 3)


class TestBuildTwisted:
    """测试扭曲码构造"""

    def test_square_3_3_1_2(self):
        """μ = 1：27 个码字，最小秩 3"""
        code = build_twisted(3, 3, 3, 1, 0, 2)
        report = verify_mrd(code)
        assert report["size"] == 27
        assert report["min_distance"] == 3
        assert report["is_mrd"] is True

    def test_characteristic_two_rejected(self):
        """特征 2 下 N(μ) = 1 = (-1)^{nt}"""
        with pytest.raises(InvalidMu):
            build_twisted(2, 2, 2, 1, 0, 1)

    def test_norm_condition(self):
        """F_27 本原元的范数为 -1 = (-1)^3"""
        space = get_space(3, 3, 3)
        w = power_basis(space.field, 3, 3)[1]
        with pytest.raises(InvalidMu):
            build_twisted(3, 3, 3, 1, int(w), 2)

    def test_t_range(self):
        with pytest.raises(BadParameters):
            build_twisted(3, 3, 3, 3, 0, 1)

    def test_default_mu(self):
        """q = 3, n = 3 时退回到 1；n = 6 时取本原元"""
        assert default_mu(3, 3, 1) == 0
        field = get_space(3, 6, 6).field
        assert default_mu(3, 6, 1) == power_basis(field, 3, 6)[1]
        with pytest.raises(InvalidMu):
            default_mu(2, 4, 1)

    def test_punctured_twisted_small(self):
        """m | n 的直接构造同样是 MRD 码"""
        mu = default_mu(3, 6, 1, 1, 3)
        code = build_twisted(3, 3, 6, 1, mu, 2)
        assert code.dimension == 6
        assert min_rank_distance(code) == 3

    @pytest.mark.slow
    def test_punctured_twisted_acceptance(self):
        """(3,6,12,1,3,1)：3^12 个码字，最小秩 6"""
        mu = default_mu(3, 12, 1, 1, 6)
        code = build_twisted(3, 6, 12, 1, mu, 3)
        report = verify_mrd(code, jobs=2)
        assert report["size"] == 3 ** 12
        assert report["min_distance"] == 6
        assert report["is_mrd"] is True


class TestGabidulin:
    """测试求值型 Gabidulin 码"""

    def test_t_one(self):
        """t = 1 时最小秩为 m"""
        code = build_code(CodeKind.GABIDULIN, 2, 2, 4, 1)
        assert min_rank_distance(code) == 2

    def test_dependent_points(self):
        """(1, w, 1+w) 在 F_2 上相关"""
        space = get_space(2, 3, 4)
        field = space.field
        w = field.subfield_step(2, 2)
        with pytest.raises(NotIndependent):
            gabidulin_eval(2, 3, 4, [0, w, field.add(0, w)], 1)

    def test_point_count(self):
        space = get_space(2, 2, 4)
        with pytest.raises(DimensionMismatch):
            gabidulin_eval(2, 2, 4, power_basis(space.field, 2, 4), 1)

    @pytest.mark.parametrize("q,m,n,t", [(2, 2, 4, 1), (2, 3, 6, 2), (3, 2, 4, 1), (2, 3, 3, 2)])
    def test_matches_phi(self, q, m, n, t):
        """幂基求值码换到 Φ 坐标后与 Φ 相同"""
        gab = build_code(CodeKind.GABIDULIN, q, m, n, t)
        assert same_code(to_phi_frame(gab), build_phi(q, m, n, t))

    def test_mrd(self):
        code = build_code(CodeKind.GABIDULIN, 2, 3, 6, 2)
        assert verify_mrd(code)["is_mrd"] is True


class TestPuncture:
    """测试打孔"""

    @pytest.mark.parametrize("q,m,n,t", [(2, 2, 4, 1), (3, 3, 6, 1)])
    def test_puncture_phi(self, q, m, n, t):
        """打孔 Φ_{n,n,t} 得到 Φ_{m,n,t}"""
        block = identity_block(get_space(q, m, n))
        punctured = puncture_code(build_phi(q, n, n, t), block)
        assert punctured.kind == CodeKind.PUNCTURED
        assert same_code(punctured, build_phi(q, m, n, t))
        assert codeword_keys(punctured) == codeword_keys(build_phi(q, m, n, t))

    def test_puncture_twisted(self):
        """打孔方阵扭曲码得到直接构造的打孔码"""
        mu = default_mu(3, 6, 1, 1, 3)
        block = identity_block(get_space(3, 3, 6))
        punctured = puncture_code(build_twisted(3, 6, 6, 1, mu, 2), block)
        direct = build_twisted(3, 3, 6, 1, mu, 2)
        assert codeword_keys(punctured) == codeword_keys(direct)
        assert same_code(build_code(CodeKind.PUNCTURED, 3, 3, 6, 1, s=2), direct)

    def test_identity_puncture(self):
        """A = I_n 不改变码"""
        code = build_phi(2, 4, 4, 2)
        same = puncture_code(code, np.eye(4, dtype=np.int64))
        assert same_code(same, code)

    def test_rank_deficient(self):
        code = build_phi(2, 4, 4, 1)
        A = np.zeros((2, 4), dtype=np.int64)
        A[0, 0] = A[1, 0] = 1
        with pytest.raises(RankDeficient):
            puncture_code(code, A)

    def test_non_injective_puncture(self):
        """满秩打孔矩阵也可能在码上不是单射：12 维的码打到 2×4 只剩 8 维"""
        code = build_phi(2, 4, 4, 3)
        with pytest.raises(RankDeficient) as info:
            puncture_code(code, np.eye(2, 4, dtype=np.int64))
        assert "单射" in info.value.message
        assert info.value.details == {"rank": 8, "dimension": 12}

    def test_rectangular_rejected(self):
        code = build_phi(2, 2, 4, 1)
        with pytest.raises(BadParameters):
            puncture_code(code, np.eye(2, 4, dtype=np.int64))

    def test_inner_recorded(self):
        block = identity_block(get_space(2, 2, 4))
        inner = build_phi(2, 4, 4, 1)
        described = puncture_code(inner, block).describe()
        assert described["inner"]["kind"] == "phi"


class TestScan:
    """测试码字扫描"""

    def test_chunking_independent(self):
        """分块大小不影响结果"""
        code = build_phi(2, 3, 6, 2)
        assert rank_distribution(code, chunk_size=7) == rank_distribution(code)

    def test_parallel_matches_serial(self):
        code = build_twisted(3, 3, 3, 1, 0, 2)
        assert rank_distribution(code, jobs=2, chunk_size=3) == rank_distribution(code)

    def test_distribution_total(self):
        code = build_phi(3, 2, 2, 1)
        dist = rank_distribution(code)
        assert sum(dist.values()) == code.size
        assert dist == {0: 1, 2: 8}

    def test_budget(self):
        with pytest.raises(BudgetExceeded):
            rank_distribution(build_phi(2, 3, 6, 2), budget=100)

    def test_zero_dimensional(self):
        """零维码在报告中给出错误字段"""
        space = get_space(2, 2, 4)
        code = CodeSpec(CodeKind.PHI, space, np.zeros((0, 2, 4), dtype=np.int64), 0)
        report = verify_mrd(code)
        assert report["is_mrd"] is False
        assert "error" in report
        with pytest.raises(BadParameters):
            min_rank_distance(code)

    def test_singleton(self):
        code = build_phi(2, 2, 4, 1)
        assert singleton_bound(code, 2) == 16
        assert singleton_bound(code, 1) == 2 ** 8


class TestMembership:
    """测试成员判定"""

    def test_generators_and_zero(self):
        code = build_phi(2, 3, 6, 2)
        for g in code.generators:
            assert membership(code, g)
        assert membership(code, np.zeros((3, 6), dtype=np.int64))

    def test_rank_one_excluded(self):
        """距离为 2 的码不含秩 1 矩阵"""
        code = build_phi(2, 3, 6, 2)
        rng = np.random.default_rng(0)
        for _ in range(20):
            u = rng.integers(0, 2, size=3)
            v = rng.integers(0, 2, size=6)
            u[rng.integers(3)] = 1
            v[rng.integers(6)] = 1
            assert not membership(code, np.outer(u, v) % 2)

    def test_shape_checked(self):
        code = build_phi(2, 2, 4, 1)
        with pytest.raises(DimensionMismatch):
            membership(code, np.zeros((4, 2), dtype=np.int64))

    def test_same_code_distinguishes(self):
        assert not same_code(build_phi(2, 2, 4, 1), build_phi(2, 2, 4, 2))

    def test_to_json(self):
        code = build_twisted(3, 3, 3, 1, 0, 2)
        data = code.to_json()
        assert data["kind"] == "twisted"
        assert data["mu"] == 1
        assert data["s"] == 2
        assert len(data["generators"]) == 3
