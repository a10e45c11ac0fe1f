"""
Test suite for measure spaces, function spaces and dual pairs
"""

import math
import os
import sys

import numpy as np
import pytest

sys.path.append(os.path.join(os.path.dirname(__file__), '..'))

from src.errors import ValidationError
from src.spaces.duality import (
    DualPair, FiniteBanachSpace, bochner_norm, bochner_pairing, elementary_tensor, is_norming,
    make_basis, standard_basis, standard_pair, y_norm,
)
from src.spaces.function_space import (
    FunctionSpace, KothePair, conjugate_exponent, dual_norm_numeric, kothe_dual, kothe_pair,
    lp_norm, pairing, parse_exponent,
)
from src.spaces.measure import (
    counting_measure, discrete_partition, is_coarser, make_measure_space, make_partition,
    trivial_partition, uniform_probability,
)


class TestMeasureSpace:
    """Test cases for atomic measure spaces and partitions"""

    def test_weights_and_mass(self):
        """Test that weights are stored and summed"""
        space = make_measure_space([1, 2])
        assert space.atom_count == 2
        assert space.total_mass == 3.0
        assert not space.mu.flags.writeable

    def test_uniform_probability(self):
        """Test the uniform probability has total mass one"""
        space = uniform_probability(4)
        assert space.total_mass == pytest.approx(1.0)
        assert space.to_dict() == {"weights": [0.25] * 4}

    def test_rejects_nonpositive_weight(self):
        """Test that zero and negative weights are refused"""
        with pytest.raises(ValidationError):
            make_measure_space([1.0, 0.0])
        with pytest.raises(ValidationError):
            make_measure_space([])

    def test_partition_is_canonical(self):
        """Test that blocks are sorted into canonical order"""
        space = counting_measure(4)
        P = make_partition([[3, 2], [1, 0]], space)
        assert P.blocks == ((0, 1), (2, 3))
        assert list(P.block_index()) == [0, 0, 1, 1]

    def test_partition_validation(self):
        """Test overlapping, missing and out-of-range atoms"""
        space = counting_measure(3)
        with pytest.raises(ValidationError):
            make_partition([[0, 1], [1, 2]], space)
        with pytest.raises(ValidationError):
            make_partition([[0, 1]], space)
        with pytest.raises(ValidationError):
            make_partition([[0, 1, 2, 3]], space)
        with pytest.raises(ValidationError):
            make_partition([[0, 1, 2], []], space)

    def test_coarser(self):
        """Test the refinement order on partitions"""
        space = counting_measure(4)
        fine = discrete_partition(space)
        coarse = trivial_partition(space)
        assert is_coarser(coarse, fine)
        assert not is_coarser(fine, coarse)
        crossing = make_partition([[0, 2], [1, 3]], space)
        assert not is_coarser(crossing, make_partition([[0, 1], [2, 3]], space))

    def test_coarser_is_a_partial_order(self):
        """Test reflexivity, antisymmetry and transitivity on random partitions"""
        rng = np.random.default_rng(11)
        space = counting_measure(5)
        partitions = [discrete_partition(space), trivial_partition(space)]
        for _ in range(12):
            labels = rng.integers(0, 3, size=5)
            partitions.append(make_partition(
                [np.flatnonzero(labels == label).tolist() for label in np.unique(labels)], space))
        for a in partitions:
            assert is_coarser(a, a)
            for b in partitions:
                if is_coarser(a, b) and is_coarser(b, a):
                    assert a.blocks == b.blocks
                for c in partitions:
                    if is_coarser(a, b) and is_coarser(b, c):
                        assert is_coarser(a, c)


class TestFunctionSpace:
    """Test cases for weighted L^p spaces"""

    def test_parse_exponent(self):
        """Test exponent parsing including infinity"""
        assert parse_exponent("inf") == math.inf
        assert parse_exponent(3) == 3.0
        with pytest.raises(ValidationError):
            parse_exponent(0.5)
        with pytest.raises(ValidationError):
            parse_exponent("fast")

    def test_conjugate_exponent(self):
        """Test conjugate exponents"""
        assert conjugate_exponent(1.0) == math.inf
        assert conjugate_exponent(math.inf) == 1.0
        assert conjugate_exponent(2.0) == 2.0
        assert conjugate_exponent(3.0) == pytest.approx(1.5)

    def test_norms(self):
        """Test weighted norms for the three standard exponents"""
        assert FunctionSpace(counting_measure(2), 2).norm([3.0, 4.0]) == pytest.approx(5.0)
        weighted = make_measure_space([0.5, 2.0])
        assert FunctionSpace(weighted, 1).norm([2.0, -1.0]) == pytest.approx(3.0)
        assert FunctionSpace(weighted, "inf").norm([1.0, -3.0]) == 3.0

    def test_large_exponent_does_not_overflow(self):
        """Test that scaling keeps huge values finite"""
        value = float(lp_norm(np.array([1e200, 1e200]), 50.0, np.ones(2)))
        assert math.isclose(value, 1e200 * 2.0 ** (1.0 / 50.0), rel_tol=1e-12)

    def test_shape_check(self):
        """Test that functions must match the atom count"""
        E = FunctionSpace(counting_measure(3), 2)
        with pytest.raises(ValidationError):
            E.norm([1.0, 2.0])

    def test_kothe_pair(self):
        """Test Kothe duals and the integral pairing"""
        space = make_measure_space([0.5, 1.5])
        E = FunctionSpace(space, 3)
        pair = kothe_pair(E)
        assert pair.first.p == pytest.approx(1.5)
        assert pair.pair([1.0, 2.0], [4.0, 1.0]) == pytest.approx(2.0 + 3.0)
        assert pairing(space, [1.0, 2.0], [4.0, 1.0]) == pytest.approx(5.0)
        with pytest.raises(ValidationError):
            KothePair(E, E)

    def test_dual_norm_matches_closed_form(self):
        """Test the numeric dual norm against the Kothe dual norm"""
        space = make_measure_space([0.5, 1.0, 2.0])
        f = np.array([1.0, -2.0, 0.5])
        for p in (1.0, 1.5, 2.0, 3.0, math.inf):
            E = FunctionSpace(space, p)
            assert dual_norm_numeric(E, f) == pytest.approx(kothe_dual(E).norm(f), rel=1e-9)

    def test_round_trip_dict(self):
        """Test that a space survives serialisation"""
        E = FunctionSpace(make_measure_space([1.0, 2.0]), "inf")
        assert FunctionSpace.from_dict(E.to_dict()) == E

    def test_holder_inequality(self):
        """Test |<e, f>| <= ||e||_E ||f||_E^x on sampled functions"""
        rng = np.random.default_rng(21)
        for _ in range(200):
            space = make_measure_space(rng.uniform(0.5, 2.0, size=4))
            E = FunctionSpace(space, float(rng.choice([1.0, 1.5, 2.0, 3.0, math.inf])))
            e, f = rng.standard_normal(4), rng.standard_normal(4)
            bound = E.norm(e) * kothe_dual(E).norm(f)
            assert abs(pairing(space, e, f)) <= bound * (1.0 + 1e-12)

    def test_lattice_monotonicity(self):
        """Test |f| <= |g| pointwise gives norm(f) <= norm(g)"""
        rng = np.random.default_rng(22)
        for _ in range(200):
            E = FunctionSpace(make_measure_space(rng.uniform(0.5, 2.0, size=5)),
                              float(rng.choice([1.0, 2.0, 4.0, math.inf])))
            g = rng.standard_normal(5)
            f = g * rng.uniform(-1.0, 1.0, size=5)
            assert E.norm(f) <= E.norm(g) * (1.0 + 1e-12)

    def test_homogeneity_and_triangle_inequality(self):
        """Test ||cf|| = |c| ||f|| and ||f + g|| <= ||f|| + ||g||"""
        rng = np.random.default_rng(23)
        for _ in range(200):
            E = FunctionSpace(make_measure_space(rng.uniform(0.5, 2.0, size=4)),
                              float(rng.choice([1.0, 1.5, 2.0, 3.0, math.inf])))
            f, g = rng.standard_normal(4), rng.standard_normal(4)
            c = float(rng.standard_normal())
            assert E.norm(c * f) == pytest.approx(abs(c) * E.norm(f), rel=1e-12)
            assert E.norm(f + g) <= (E.norm(f) + E.norm(g)) * (1.0 + 1e-12)


class TestDualPairs:
    """Test cases for finite Banach spaces, dual pairs and bases"""

    def test_dual_space(self):
        """Test that the dual flips exponent and scale"""
        Y = FiniteBanachSpace(3, 1.0, 2.0)
        X = Y.dual()
        assert X.p == math.inf
        assert X.scale == pytest.approx(0.5)
        assert y_norm(Y, [1.0, -1.0, 2.0]) == pytest.approx(8.0)

    def test_singular_pairing_rejected(self):
        """Test that a singular pairing matrix is refused"""
        Y = FiniteBanachSpace(2)
        with pytest.raises(ValidationError):
            DualPair(Y.dual(), Y, np.array([[1.0, 1.0], [1.0, 1.0]]))

    def test_standard_pairs_are_norming(self):
        """Test that identity pairings recover both norms"""
        for p in (1.0, 2.0, 3.0, math.inf):
            report = is_norming(standard_pair(FiniteBanachSpace(3, p)))
            assert report.norming
            assert report.max_defect <= 1e-9

    def test_doubled_norm_is_not_norming(self):
        """Test doubling the X norm leaves a defect of one half"""
        Y = FiniteBanachSpace(2, 2.0)
        X = FiniteBanachSpace(2, 2.0, 2.0)
        report = is_norming(DualPair(X, Y, np.eye(2)))
        assert report.y_defect == pytest.approx(0.5)
        assert report.max_defect == pytest.approx(0.5)
        assert not report.norming

    def test_scaled_pair_is_norming(self):
        """Test that the norm scale is carried to the dual"""
        report = is_norming(standard_pair(FiniteBanachSpace(2, 2.0, 3.0)))
        assert report.norming
        assert report.exact

    def test_standard_basis(self):
        """Test the coordinate basis has constant one"""
        basis = standard_basis(standard_pair(FiniteBanachSpace(3, 2.0)))
        assert basis.constant == pytest.approx(1.0)
        assert np.allclose(basis.functionals, np.eye(3))

    def test_basis_expansion_recovers_vectors(self):
        """Test biorthogonal coefficients reproduce f under a general pairing"""
        rng = np.random.default_rng(3)
        Y = FiniteBanachSpace(3, 2.0)
        pair = DualPair(Y.dual(), Y, np.eye(3) + 0.2 * rng.standard_normal((3, 3)))
        basis = make_basis(np.eye(3) + 0.3 * rng.standard_normal((3, 3)), pair)
        f = rng.standard_normal((4, 3))
        coefficients = basis.coefficients(pair, f)
        assert np.allclose(coefficients @ basis.vectors, f, atol=1e-10)

    def test_skewed_basis_constant(self):
        """Test the basis constant of a non-orthogonal basis of l^2_2"""
        pair = standard_pair(FiniteBanachSpace(2, 2.0))
        basis = make_basis([[1.0, 0.0], [1.0, 1.0]], pair)
        assert basis.constant == pytest.approx(math.sqrt(2.0))

    def test_dependent_basis_rejected(self):
        """Test that linearly dependent vectors are refused"""
        pair = standard_pair(FiniteBanachSpace(2, 2.0))
        with pytest.raises(ValidationError):
            make_basis([[1.0, 2.0], [2.0, 4.0]], pair)

    def test_bochner_norm_and_pairing(self):
        """Test the Kothe-Bochner norm and pairing"""
        E = FunctionSpace(counting_measure(2), 1.0)
        Y = FiniteBanachSpace(2, 2.0)
        f = np.array([[3.0, 4.0], [0.0, 1.0]])
        assert bochner_norm(E, Y, f) == pytest.approx(6.0)

        pair = standard_pair(Y)
        g = np.array([[1.0, 0.0], [2.0, 2.0]])
        assert bochner_pairing(kothe_pair(E), pair, g, f) == pytest.approx(3.0 + 2.0)

    def test_bochner_holder(self):
        """Test |<e, f>| <= ||f||_E(Y) ||e||_E^x(X) for conjugate l^p values"""
        rng = np.random.default_rng(31)
        for _ in range(100):
            E = FunctionSpace(make_measure_space(rng.uniform(0.5, 2.0, size=3)),
                              float(rng.choice([1.0, 2.0, 3.0, math.inf])))
            Y = FiniteBanachSpace(2, float(rng.choice([1.0, 1.5, 2.0, math.inf])))
            pair = standard_pair(Y)
            e, f = rng.standard_normal((3, 2)), rng.standard_normal((3, 2))
            bound = bochner_norm(E, Y, f) * bochner_norm(kothe_dual(E), pair.X, e)
            assert abs(bochner_pairing(kothe_pair(E), pair, e, f)) <= bound * (1.0 + 1e-12)

    def test_cross_norm(self):
        """Test ||e (x) y|| = ||e||_E ||y||_Y on elementary tensors"""
        rng = np.random.default_rng(32)
        for p in (1.0, 2.0, 3.0, math.inf):
            E = FunctionSpace(make_measure_space([0.5, 1.0, 2.0]), p)
            Y = FiniteBanachSpace(3, float(rng.choice([1.0, 2.0, math.inf])), 1.5)
            e, y = rng.standard_normal(3), rng.standard_normal(3)
            tensor = elementary_tensor(e, y)
            assert tensor.shape == (3, 3)
            assert bochner_norm(E, Y, tensor) == pytest.approx(E.norm(e) * y_norm(Y, y), rel=1e-12)

    def test_elementary_tensor_pairing(self):
        """Test the pairing of e (x) x with f (x) y factors"""
        rng = np.random.default_rng(33)
        space = make_measure_space([0.5, 1.5, 1.0, 2.0])
        E = FunctionSpace(space, 2.0)
        Y = FiniteBanachSpace(3, 2.0)
        pair = DualPair(Y.dual(), Y, np.eye(3) + 0.2 * rng.standard_normal((3, 3)))
        e, f = rng.standard_normal(4), rng.standard_normal(4)
        x, y = rng.standard_normal(3), rng.standard_normal(3)
        value = bochner_pairing(kothe_pair(E), pair, elementary_tensor(e, x), elementary_tensor(f, y))
        assert value == pytest.approx(pairing(space, e, f) * pair.pair(x, y), rel=1e-12, abs=1e-12)
