"""
Test suite for matrix operators and the operator-norm engine
"""

import math
import os
import sys

import numpy as np
import pytest

sys.path.append(os.path.join(os.path.dirname(__file__), '..'))

from src.errors import DimensionCapError, ValidationError
from src.operators.matrix_operator import (
    MatrixOperator, adjoint, atom_split_tuple, buhvalov_ratio, dominates, least_dominant,
    scalar_space,
)
from src.operators.norm_engine import automatic_regularity_case, m_norm, operator_norm
from src.spaces.function_space import FunctionSpace, kothe_pair, pairing
from src.spaces.measure import counting_measure, make_measure_space


def lp(n, p, weights=None):
    space = counting_measure(n) if weights is None else make_measure_space(weights)
    return FunctionSpace(space, p)


class TestMatrixOperator:
    """Test cases for operator construction and the domination calculus"""

    def test_shape_validation(self):
        """Test that the matrix must map source atoms to target atoms"""
        with pytest.raises(ValidationError):
            MatrixOperator(np.ones((2, 3)), lp(2, 2), lp(2, 2))

    def test_matrix_is_read_only(self):
        """Test that the stored matrix cannot be mutated"""
        T = MatrixOperator([[1.0, 2.0]], lp(2, 2), lp(1, 2))
        assert not T.matrix.flags.writeable
        assert list(T.apply([1.0, 1.0])) == [3.0]

    def test_least_dominant(self):
        """Test that |T| is the entrywise absolute value"""
        T = MatrixOperator([[1.0, -2.0], [-3.0, 4.0]], lp(2, 2), lp(2, 2))
        R = least_dominant(T)
        assert np.array_equal(R.matrix, [[1.0, 2.0], [3.0, 4.0]])
        assert dominates(R, T, rng=np.random.default_rng(0), samples=64)
        assert not dominates(T, T)
        assert not dominates(R.scaled(0.5), T)

    def test_domination_is_minimal(self):
        """Test lowering one entry of |T| by a tiny amount breaks domination"""
        T = MatrixOperator([[1.0, -2.0], [-3.0, 4.0]], lp(2, 2), lp(2, 2))
        for row in range(2):
            for column in range(2):
                lowered = np.abs(T.matrix).copy()
                lowered[row, column] -= 1e-9
                assert not dominates(MatrixOperator(lowered, T.source, T.target), T)

    def test_adjoint_pairing_identity(self):
        """Test <g, Th>_nu = <Sg, h>_mu on weighted spaces"""
        rng = np.random.default_rng(1)
        E = lp(2, 2, [1.0, 2.0])
        G = lp(3, 3, [0.5, 1.0, 3.0])
        T = MatrixOperator(rng.standard_normal((3, 2)), E, G)
        S = adjoint(T, kothe_pair(E), kothe_pair(G))
        assert S.source == kothe_pair(G).first
        assert S.target == kothe_pair(E).first
        h, g = rng.standard_normal(2), rng.standard_normal(3)
        lhs = pairing(G.space, g, T.apply(h))
        rhs = pairing(E.space, S.apply(g), h)
        assert lhs == pytest.approx(rhs, abs=1e-12)

    def test_adjoint_requires_matching_pairs(self):
        """Test that the pairs must end in the operator's spaces"""
        T = MatrixOperator(np.eye(2), lp(2, 2), lp(2, 2))
        with pytest.raises(ValidationError):
            adjoint(T, kothe_pair(lp(2, 3)), kothe_pair(lp(2, 2)))

    def test_buhvalov_ratio(self):
        """Test the ratio on atom-split tuples and the empty case"""
        T = MatrixOperator([[1.0, 1.0], [1.0, -1.0]], lp(2, 1), lp(2, 1))
        split = atom_split_tuple([1.0, -1.0])
        assert np.array_equal(np.sum(np.abs(split), axis=0), [1.0, 1.0])
        # sum_n |T e_n| = |T| |e| = (2, 2)
        assert buhvalov_ratio(T, [split]) == pytest.approx(2.0)
        with pytest.raises(ValidationError):
            buhvalov_ratio(T, [])

    def test_buhvalov_ratio_increases_to_m_norm(self):
        """Test the ratio grows with the sampled tuples and reaches ||T||_M"""
        rng = np.random.default_rng(5)
        T = MatrixOperator(rng.standard_normal((3, 4)), lp(4, 2, [0.5, 1.0, 1.5, 2.0]), lp(3, 2))
        regular = operator_norm(least_dominant(T))
        tuples = []
        ratios = []
        for _ in range(6):
            tuples.extend(list(rng.standard_normal((int(rng.integers(1, 4)), 4))) for _ in range(5))
            ratios.append(buhvalov_ratio(T, tuples))
        tuples.append(atom_split_tuple(np.abs(regular.witness)))
        ratios.append(buhvalov_ratio(T, tuples))
        assert all(a <= b for a, b in zip(ratios, ratios[1:]))
        assert max(ratios) <= m_norm(T) * (1.0 + 1e-9)
        assert ratios[-1] == pytest.approx(regular.value, rel=1e-6)

    def test_round_trip_dict(self):
        """Test serialisation of an operator"""
        T = MatrixOperator([[1.0, -2.0]], lp(2, "inf", [1.0, 2.0]), scalar_space())
        restored = MatrixOperator.from_dict(T.to_dict())
        assert np.array_equal(restored.matrix, T.matrix)
        assert restored.source == T.source


class TestOperatorNorm:
    """Test cases for each exact route and the ascent fallback"""

    def test_zero_operator(self):
        """Test the zero operator short-circuit"""
        estimate = operator_norm(MatrixOperator(np.zeros((2, 2)), lp(2, 3), lp(2, 3)))
        assert estimate.value == 0.0
        assert estimate.exact
        assert estimate.method == "zero"

    def test_l1_source(self):
        """Test L^1 sources use the largest column"""
        estimate = operator_norm(MatrixOperator([[1.0, 2.0], [3.0, 4.0]], lp(2, 1), lp(2, 1)))
        assert estimate.value == pytest.approx(6.0)
        assert estimate.method == "l1-extreme-points"

    def test_l1_source_weighted(self):
        """Test that source weights divide the column norms"""
        T = MatrixOperator([[1.0, 1.0]], lp(2, 1, [0.5, 2.0]), lp(1, 1))
        assert operator_norm(T).value == pytest.approx(2.0)

    def test_sup_target(self):
        """Test a row functional on l^2"""
        estimate = operator_norm(MatrixOperator([[1.0, -2.0]], lp(2, 2), scalar_space()))
        assert estimate.value == pytest.approx(math.sqrt(5.0))
        assert estimate.method == "sup-target-rows"

    def test_sup_source_sign_enumeration(self):
        """Test sign enumeration for a non-positive matrix"""
        estimate = operator_norm(MatrixOperator([[1.0, 1.0], [1.0, -1.0]], lp(2, "inf"), lp(2, 1)))
        assert estimate.value == pytest.approx(2.0)
        assert estimate.method == "sign-enumeration"
        assert set(np.abs(estimate.witness)) == {1.0}

    def test_sup_source_positive(self):
        """Test that positive matrices attain the norm at the constant one"""
        estimate = operator_norm(MatrixOperator([[1.0, 2.0]], lp(2, "inf"), lp(1, 2)))
        assert estimate.value == pytest.approx(3.0)
        assert estimate.method == "positive-sup-source"

    def test_hilbert(self):
        """Test the Hadamard matrix on l^2_2"""
        T = MatrixOperator([[1.0, 1.0], [1.0, -1.0]], lp(2, 2), lp(2, 2))
        estimate = operator_norm(T)
        assert estimate.value == pytest.approx(math.sqrt(2.0))
        assert estimate.method == "svd"
        assert m_norm(T) == pytest.approx(2.0)

    def test_positive_into_l1(self):
        """Test the density route for positive operators into L^1"""
        estimate = operator_norm(MatrixOperator([[1.0, 2.0], [3.0, 4.0]], lp(2, 2), lp(2, 1)))
        assert estimate.value == pytest.approx(math.sqrt(52.0))
        assert estimate.method == "positive-l1-target"
        assert estimate.exact

    def test_enumeration_cap(self):
        """Test that large sup-normed sources refuse enumeration"""
        rng = np.random.default_rng(2)
        T = MatrixOperator(rng.standard_normal((2, 25)), lp(25, "inf"), lp(2, 2))
        with pytest.raises(DimensionCapError):
            operator_norm(T)
        estimate = operator_norm(T, method="ascent", starts=8)
        assert not estimate.exact
        assert estimate.value > 0.0

    def test_ascent_matches_svd(self):
        """Test that forced ascent reaches the singular value from below"""
        T = MatrixOperator([[2.0, 1.0], [1.0, 3.0]], lp(2, 2), lp(2, 2))
        exact = operator_norm(T).value
        ascent = operator_norm(T, method="ascent")
        assert not ascent.exact
        assert ascent.value <= exact + 1e-12
        assert ascent.value == pytest.approx(exact, abs=1e-6)

    def test_ascent_identity_on_l3(self):
        """Test ascent on a space with no exact route"""
        T = MatrixOperator(np.eye(3), lp(3, 3), lp(3, 3))
        estimate = operator_norm(T)
        assert estimate.method == "ascent"
        assert estimate.value == pytest.approx(1.0, abs=1e-12)

    def test_value_matches_witness(self):
        """Test that every returned value is the ratio at its witness"""
        rng = np.random.default_rng(4)
        for p, q in ((1, 3), (3, "inf"), ("inf", 3), (2, 2), (3, 1.5)):
            T = MatrixOperator(rng.standard_normal((3, 3)), lp(3, p, [0.5, 1.0, 2.0]),
                               lp(3, q, [1.0, 0.25, 1.5]))
            estimate = operator_norm(T, seed=7)
            w = estimate.witness
            ratio = T.target.norm(T.apply(w)) / T.source.norm(w)
            assert estimate.value == pytest.approx(ratio, rel=1e-12)

    def test_seeded_ascent_is_reproducible(self):
        """Test that the same seed gives the same estimate"""
        T = MatrixOperator([[1.0, -2.0, 0.5], [0.3, 1.0, -1.0]], lp(3, 3), lp(2, 1.5))
        first = operator_norm(T, seed=11)
        second = operator_norm(T, seed=11)
        assert first.value == second.value
        assert np.array_equal(first.witness, second.witness)

    def test_unknown_method(self):
        """Test that only auto and ascent are accepted"""
        T = MatrixOperator(np.eye(2), lp(2, 2), lp(2, 2))
        with pytest.raises(ValidationError):
            operator_norm(T, method="exact")

    def test_automatic_regularity(self):
        """Test ||T|| = ||T||_M from L^1 and into L^inf"""
        rng = np.random.default_rng(5)
        matrix = rng.standard_normal((3, 4))
        for source, target in ((lp(4, 1), lp(3, 3)), (lp(4, 3), lp(3, "inf"))):
            T = MatrixOperator(matrix, source, target)
            assert automatic_regularity_case(T)
            assert operator_norm(T).value == pytest.approx(m_norm(T), rel=1e-12)
        assert not automatic_regularity_case(MatrixOperator(matrix, lp(4, 2), lp(3, 2)))
