"""
双线性型空间单元测试
测试 rankforge/codes/bilinear_space.py 的核心功能
"""
import os
import sys

import numpy as np
import pytest

# 添加项目路径
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from rankforge.algebra.field_tower import ZERO
from rankforge.algebra.linalg import gl_array
from rankforge.codes.bilinear_space import (
    AutTriple, Form, StdTuple, apply_automorphism, apply_std, component_form,
    component_support, compose, decompose, eval_form, eval_std, get_space, invert,
    radical_and_rank, std_identity, to_standard,
)
from rankforge.core.exceptions import (
    DimensionMismatch, IndexOutOfRange, NotInSubfield, TransposeOnRectangular,
)

SPACES = [(2, 2, 4, 1), (2, 3, 3, 2), (3, 3, 3, 1), (4, 2, 2, 1), (3, 2, 3, 1)]


def _random_form(space, rng):
    p = space.params
    return space.from_circ(space.field.random_elements(rng, p.q, p.d, p.e))


def _random_gen(space, rng, r):
    return space.field.random_elements(rng, space.params.q, r, r)


def _random_std(space, rng, transpose=False):
    m, n = space.shape
    GL_m = gl_array(space.gf, m)
    GL_n = GL_m if m == n else gl_array(space.gf, n)
    A = GL_m[rng.integers(len(GL_m))]
    B = GL_n[rng.integers(len(GL_n))]
    return StdTuple(A, B, int(rng.integers(space.h)), transpose)


def _poly(space, gen, x, r):
    """Σ gen_i x^{Q^i}"""
    field, p = space.field, space.params
    total = ZERO
    for i, a in enumerate(gen):
        total = field.add(total, field.mul(int(a), field.frobenius_power(x, p.q, p.k * i)))
    return total


class TestForm:
    """测试双线性型的两种表示"""

    @pytest.mark.parametrize("q,m,n,k", SPACES)
    def test_circ_round_trip(self, q, m, n, k):
        """from_circ 后取 circ 得回原数组"""
        space = get_space(q, m, n, k)
        rng = np.random.default_rng(1)
        gen = space.field.random_elements(rng, q, space.params.d, space.params.e)
        assert (space.from_circ(gen).circ == gen).all()

    @pytest.mark.parametrize("q,m,n,k", SPACES)
    def test_trace_evaluation_matches_matrix(self, q, m, n, k):
        """迹形式求值与标准矩阵求值一致"""
        space = get_space(q, m, n, k)
        field = space.field
        rng = np.random.default_rng(m + n)
        for _ in range(5):
            f = _random_form(space, rng)
            for _ in range(5):
                x = field.random_element(rng, q, m)
                xp = field.random_element(rng, q, n)
                assert eval_form(f, x, xp) == eval_std(f, x, xp)

    def test_eval_checks_subfield(self):
        space = get_space(2, 2, 4)
        f = space.zero()
        with pytest.raises(NotInSubfield):
            eval_form(f, 1, 0)

    def test_addition(self):
        """加法与生成数组加法一致"""
        space = get_space(2, 2, 4)
        rng = np.random.default_rng(2)
        f, g = _random_form(space, rng), _random_form(space, rng)
        assert ((f + g).circ == space.field.vadd(f.circ, g.circ)).all()
        assert (f + f).is_zero()

    def test_rank_and_radical(self):
        """rank = m - dim Rad"""
        space = get_space(3, 3, 3)
        rng = np.random.default_rng(3)
        for _ in range(10):
            f = _random_form(space, rng)
            radical, rank = radical_and_rank(f)
            assert rank == f.rank()
            for v in radical:
                assert (space.gf.matmul(v[None, :], f.std) == 0).all()

    def test_rank_matches_circulant(self):
        """标准矩阵的秩等于循环展开的秩"""
        space = get_space(2, 2, 4)
        rng = np.random.default_rng(4)
        for _ in range(10):
            f = _random_form(space, rng)
            assert f.rank() == space.model.expand(f.circ).rank()

    def test_from_std_shape(self):
        space = get_space(2, 2, 4)
        with pytest.raises(DimensionMismatch):
            space.from_std(np.zeros((4, 2), dtype=np.int64))

    def test_to_json(self):
        space = get_space(2, 2, 4)
        data = component_form(space, 0, 1).to_json()
        assert data["params"] == {"q": 2, "m": 2, "n": 4, "k": 1}
        assert data["circ"] == [0, 1]
        assert len(data["std"]) == 2

    def test_space_cached(self):
        assert get_space(2, 2, 4) is get_space(2, 2, 4)


class TestComponents:
    """测试分量分解"""

    def test_decompose_sums_back(self):
        space = get_space(2, 2, 4)
        rng = np.random.default_rng(5)
        f = _random_form(space, rng)
        parts = decompose(f)
        total = space.zero()
        for part in parts:
            total = total + part
        assert total == f
        assert len(parts) == space.params.e

    def test_component_support(self):
        space = get_space(2, 2, 4)
        assert component_support(component_form(space, 3, 1)) == [1]
        assert component_support(space.zero()) == []

    def test_component_index_checked(self):
        space = get_space(2, 2, 4)
        with pytest.raises(IndexOutOfRange):
            component_form(space, 0, 2)


class TestAutomorphismAction:
    """测试自同构的标准形式"""

    @pytest.mark.parametrize("q,m,n,k", SPACES)
    def test_identity(self, q, m, n, k):
        space = get_space(q, m, n, k)
        assert to_standard(space, AutTriple.identity(space)) == std_identity(space)

    @pytest.mark.parametrize("q,m,n,k", SPACES)
    def test_pair_action_is_substitution(self, q, m, n, k):
        """(g, g') 作用后 f'(x, x') = f(g(x), g'(x'))"""
        space = get_space(q, m, n, k)
        field = space.field
        rng = np.random.default_rng(7)
        left, right = _random_gen(space, rng, m), _random_gen(space, rng, n)
        f = _random_form(space, rng)
        image = apply_automorphism(f, AutTriple(left, right))
        for _ in range(5):
            x = field.random_element(rng, q, m)
            xp = field.random_element(rng, q, n)
            expected = eval_form(f, _poly(space, left, x, m), _poly(space, right, xp, n))
            assert eval_form(image, x, xp) == expected

    def test_shift_is_frobenius_substitution(self):
        """ℓ 把 (x, x') 换成 (x^{Q^{m-1}}, x'^{Q^{n-1}})"""
        space = get_space(2, 2, 4)
        field = space.field
        rng = np.random.default_rng(8)
        f = _random_form(space, rng)
        image = apply_automorphism(f, AutTriple(np.array([0, ZERO]), np.array([0, ZERO, ZERO, ZERO]), shift=1))
        for _ in range(5):
            x = field.random_element(rng, 2, 2)
            xp = field.random_element(rng, 2, 4)
            expected = eval_form(f, field.frobenius_power(x, 2, 1), field.frobenius_power(xp, 2, 3))
            assert eval_form(image, x, xp) == expected

    def test_rank_preserved(self):
        """可逆自同构保持秩"""
        space = get_space(4, 2, 2)
        rng = np.random.default_rng(9)
        for _ in range(10):
            g = _random_std(space, rng, transpose=bool(rng.integers(2)))
            f = _random_form(space, rng)
            assert space.gf.rank(apply_std(space, g, f.std)) == f.rank()

    def test_transpose_on_rectangular(self):
        space = get_space(2, 2, 4)
        t = AutTriple(np.array([0, ZERO]), np.array([0, ZERO, ZERO, ZERO]), transpose=True)
        with pytest.raises(TransposeOnRectangular):
            to_standard(space, t)

    def test_length_checked(self):
        space = get_space(2, 2, 4)
        with pytest.raises(DimensionMismatch):
            to_standard(space, AutTriple(np.array([0]), np.array([0, ZERO, ZERO, ZERO])))

    @pytest.mark.parametrize("q,m,n,k", [(4, 2, 2, 1), (3, 3, 3, 1), (2, 2, 4, 1)])
    def test_compose(self, q, m, n, k):
        """apply(g2∘g1) = apply(g2)·apply(g1)"""
        space = get_space(q, m, n, k)
        rng = np.random.default_rng(11)
        square = space.params.square
        mats = rng.integers(0, q, size=(20, m, n))
        for _ in range(5):
            g1 = _random_std(space, rng, transpose=square and bool(rng.integers(2)))
            g2 = _random_std(space, rng, transpose=square and bool(rng.integers(2)))
            direct = apply_std(space, compose(space, g2, g1), mats)
            stepwise = apply_std(space, g2, apply_std(space, g1, mats))
            assert (direct == stepwise).all()

    @pytest.mark.parametrize("q,m,n,k", [(4, 2, 2, 1), (3, 3, 3, 1), (2, 2, 4, 1)])
    def test_invert(self, q, m, n, k):
        """g^{-1}∘g = id"""
        space = get_space(q, m, n, k)
        rng = np.random.default_rng(13)
        square = space.params.square
        mats = rng.integers(0, q, size=(20, m, n))
        for _ in range(5):
            g = _random_std(space, rng, transpose=square and bool(rng.integers(2)))
            back = apply_std(space, invert(space, g), apply_std(space, g, mats))
            assert (back == mats).all()
            assert compose(space, invert(space, g), g) == std_identity(space)

    def test_frobenius_part(self):
        """q = 4 时系数 Frobenius 作用在生成数组上"""
        space = get_space(4, 2, 2)
        field = space.field
        left = np.array([0, ZERO])
        rng = np.random.default_rng(15)
        f = _random_form(space, rng)
        for e in (1, 2, 3):
            t = AutTriple(left, left, frob=e)
            assert to_standard(space, t).e == e % 2
            assert (apply_automorphism(f, t).circ == field.vfrob(f.circ, 2, e)).all()


class TestSerialization:
    """测试三元组序列化"""

    def test_triple_json(self):
        space = get_space(2, 2, 4)
        t = AutTriple.from_slots(space, 3, [0, 5], shift=1)
        data = t.to_json(space.field)
        back = AutTriple.from_json(space.field, data)
        assert (back.left == t.left).all()
        assert (back.right == t.right).all()
        assert back.shift == 1
        assert not back.transpose

    def test_from_slots_layout(self):
        space = get_space(2, 2, 4)
        t = AutTriple.from_slots(space, 3, [0, 5])
        assert t.left.tolist() == [3, ZERO]
        assert t.right.tolist() == [0, ZERO, 5, ZERO]

    def test_std_json(self):
        space = get_space(3, 3, 3)
        data = std_identity(space).to_json(space)
        assert data["A"] == [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
        assert data["e"] == 0
        assert data["transpose"] is False
