"""
性质测试
用 hypothesis 随机抽取参数与种子，检查代数恒等式；迹与范数在 F_729 上穷举
"""
import os
import sys
from functools import lru_cache

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from rankforge.algebra.field_tower import ZERO, make_field
from rankforge.algebra.linalg import GroundField, gl_array
from rankforge.codes.bilinear_space import (
    StdTuple, apply_std, compose, decompose, get_space, invert, std_identity,
)

SPACES = [(2, 2, 4, 1), (2, 3, 3, 2), (3, 3, 3, 1), (3, 2, 3, 1), (2, 2, 6, 1)]
ACTION_SPACES = SPACES[:4]
HOST = {2: (2, 2), 3: (3, 2), 4: (2, 2)}

seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)


def _ground(q):
    return GroundField(make_field(*HOST[q]), q)


@lru_cache(maxsize=None)
def _gl(q, m, n, k, side):
    space = get_space(q, m, n, k)
    return gl_array(space.gf, space.shape[side])


def _random_std(space, rng):
    p = space.params
    key = (p.q, p.m, p.n, p.k)
    GL_m, GL_n = _gl(*key, 0), _gl(*key, 1)
    A = GL_m[rng.integers(len(GL_m))]
    B = GL_n[rng.integers(len(GL_n))]
    transpose = bool(p.square and rng.integers(2))
    return StdTuple(A, B, int(rng.integers(space.h)), transpose)


class TestRankInequalities:
    """秩不等式"""

    @settings(max_examples=500, deadline=None)
    @given(q=st.sampled_from([2, 3, 4]), r=st.integers(1, 5), s=st.integers(1, 5),
           c=st.integers(1, 5), seed=seeds)
    def test_sylvester(self, q, r, s, c, seed):
        """rank A + rank B - s <= rank AB <= min(rank A, rank B)"""
        gf = _ground(q)
        rng = np.random.default_rng(seed)
        A = rng.integers(q, size=(r, s))
        B = rng.integers(q, size=(s, c))
        ra, rb, rab = gf.rank(A), gf.rank(B), gf.rank(gf.matmul(A, B))
        assert ra + rb - s <= rab <= min(ra, rb)

    @settings(max_examples=100, deadline=None)
    @given(q=st.sampled_from([2, 3]), r=st.integers(1, 4), c=st.integers(1, 4), seed=seeds)
    def test_subadditive(self, q, r, c, seed):
        gf = _ground(q)
        rng = np.random.default_rng(seed)
        A = rng.integers(q, size=(r, c))
        B = rng.integers(q, size=(r, c))
        assert gf.rank(gf.add(A, B)) <= gf.rank(A) + gf.rank(B)


class TestTraceNorm:
    """迹与范数"""

    @pytest.mark.parametrize("q,D", [(3, 6), (9, 3), (27, 2)])
    def test_exhaustive_f729(self, q, D):
        """F_729 全体元素：迹 F_q-线性且落入 F_q，范数乘性，二者在 Frobenius 下不变"""
        field = make_field(3, 6)
        g = 1
        c = field.subfield_elements(q, 1)[2]
        tr_g = field.trace_rel(g, q, D)
        nm_g = field.norm_rel(g, q, D)
        for x in [ZERO] + list(range(field.n1)):
            tr = field.trace_rel(x, q, D)
            nm = field.norm_rel(x, q, D)
            assert field.in_subfield(tr, q, 1) and field.in_subfield(nm, q, 1)
            assert field.trace_rel(field.add(x, g), q, D) == field.add(tr, tr_g)
            assert field.trace_rel(field.mul(c, x), q, D) == field.mul(c, tr)
            assert field.norm_rel(field.mul(x, g), q, D) == field.mul(nm, nm_g)
            xq = field.frobenius_power(x, q, 1)
            assert field.trace_rel(xq, q, D) == tr
            assert field.norm_rel(xq, q, D) == nm
            assert (nm == ZERO) == (x == ZERO)

    @settings(max_examples=100, deadline=None)
    @given(pE=st.sampled_from([(2, 6), (3, 4), (5, 2)]), x=st.integers(-1, 10 ** 6),
           y=st.integers(-1, 10 ** 6))
    def test_trace_additive_norm_multiplicative(self, pE, x, y):
        p, E = pE
        field = make_field(p, E)
        x = ZERO if x < 0 else x % field.n1
        y = ZERO if y < 0 else y % field.n1
        assert field.trace_rel(field.add(x, y), p, E) == \
            field.add(field.trace_rel(x, p, E), field.trace_rel(y, p, E))
        assert field.norm_rel(field.mul(x, y), p, E) == \
            field.mul(field.norm_rel(x, p, E), field.norm_rel(y, p, E))


class TestDecomposition:
    """分量分解"""

    @pytest.mark.parametrize("shape", SPACES)
    @settings(max_examples=100, deadline=None)
    @given(seed=seeds)
    def test_unique_recomposition(self, shape, seed):
        """e·d = mn，且分量之和唯一地还原原型"""
        q, m, n, k = shape
        space = get_space(q, m, n, k)
        p = space.params
        assert p.e * p.d == m * n
        rng = np.random.default_rng(seed)
        f = space.from_circ(space.field.random_elements(rng, q, p.d, p.e))
        parts = decompose(f)
        total = space.zero()
        for j, part in enumerate(parts):
            assert all(i == j or v == ZERO for i, v in enumerate(part.circ))
            total = total + part
        assert total == f


class TestActionLaws:
    """作用的复合律"""

    @settings(max_examples=100, deadline=None)
    @given(shape=st.sampled_from(ACTION_SPACES), seed=seeds)
    def test_composition_law(self, shape, seed):
        """(g2 ∘ g1)(M) = g2(g1(M))，且 g^{-1} ∘ g = id"""
        q, m, n, k = shape
        space = get_space(q, m, n, k)
        rng = np.random.default_rng(seed)
        g1, g2 = _random_std(space, rng), _random_std(space, rng)
        mats = rng.integers(q, size=(4, m, n))
        assert np.array_equal(apply_std(space, compose(space, g2, g1), mats),
                              apply_std(space, g2, apply_std(space, g1, mats)))
        assert compose(space, invert(space, g1), g1) == std_identity(space)

    @settings(max_examples=50, deadline=None)
    @given(shape=st.sampled_from(ACTION_SPACES), seed=seeds)
    def test_rank_preserved(self, shape, seed):
        q, m, n, k = shape
        space = get_space(q, m, n, k)
        rng = np.random.default_rng(seed)
        g = _random_std(space, rng)
        mats = rng.integers(q, size=(6, m, n))
        assert list(space.gf.batch_rank(apply_std(space, g, mats))) == \
            list(space.gf.batch_rank(mats))
