"""
Vector-Valued Extensions
Tensor extension of dominated operators, the basis-expansion extension, the
adjoint route through S_X, and the checks that tie them to the defining
relation <x, T_Y f> = T<x, f>.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from src.errors import DominationError, ValidationError
from src.operators.matrix_operator import MatrixOperator, adjoint, dominates, least_dominant
from src.operators.norm_engine import operator_norm
from src.spaces.duality import (
    Basis, DualPair, FiniteBanachSpace, VectorFunction, bochner_norm, bochner_pairing,
    check_vector_function, pointwise_norms,
)
from src.spaces.function_space import KothePair, kothe_pair

logger = logging.getLogger(__name__)

RANDOM_PROBES = 8


def tensor_extension_apply(T: MatrixOperator, Y: FiniteBanachSpace, f: VectorFunction) -> VectorFunction:
    """T applied to every Y-coordinate column of f"""
    values = check_vector_function(f, T.shape[1], Y.dim)
    return T.matrix @ values


def default_probes(X: FiniteBanachSpace, rng: Optional[np.random.Generator] = None,
                   extra: int = RANDOM_PROBES) -> np.ndarray:
    """The coordinate basis of X followed by `extra` random unit vectors"""
    probes = [np.eye(X.dim)]
    if extra > 0:
        rng = rng if rng is not None else np.random.default_rng(0)
        random = rng.standard_normal((extra, X.dim))
        norms = pointwise_norms(X, random)
        probes.append(random / np.where(norms > 0, norms, 1.0)[:, np.newaxis])
    return np.vstack(probes)


@dataclass
class ExtensionResidual:
    """Worst deviation from the defining relation and where it occurs"""
    max_residual: float
    probe_index: int
    atom: int
    entry: Optional[List[int]] = None
    per_probe: np.ndarray = field(default_factory=lambda: np.zeros(0), repr=False)

    def witness(self) -> Dict[str, Any]:
        return {"probe_index": self.probe_index, "atom": self.atom, "entry": self.entry,
                "residual": self.max_residual}


def verify_extension_relation(T: MatrixOperator, output: VectorFunction, pair: DualPair,
                              f: VectorFunction, probes=None,
                              rng: Optional[np.random.Generator] = None) -> ExtensionResidual:
    """max over probes x of ||<x, T_Y f> - T<x, f>||_G"""
    if probes is None:
        probes = default_probes(pair.X, rng)
    probes = np.atleast_2d(np.asarray(probes, dtype=float))
    if probes.shape[0] == 0:
        raise ValidationError("at least one probe is required")
    if probes.shape[1] != pair.X.dim:
        raise ValidationError(f"probes have dimension {probes.shape[1]}, expected {pair.X.dim}")
    values = check_vector_function(f, T.shape[1], pair.Y.dim)
    result = check_vector_function(output, T.shape[0], pair.Y.dim)

    # rows: probes, columns: target atoms
    lhs = probes @ pair.pairing_matrix @ result.T
    rhs = (probes @ pair.pairing_matrix @ values.T) @ T.matrix.T
    deviation = lhs - rhs
    per_probe = np.array([T.target.norm(row) for row in deviation])
    probe_index = int(np.argmax(per_probe))
    atom = int(np.argmax(np.abs(deviation[probe_index])))

    entry = None
    if per_probe[probe_index] > 0.0:
        difference = np.abs(result - T.matrix @ values)
        entry = [int(i) for i in np.unravel_index(int(np.argmax(difference)), difference.shape)]
    return ExtensionResidual(float(per_probe[probe_index]), probe_index, atom, entry, per_probe)


def domination_pointwise_check(T: MatrixOperator, R: MatrixOperator, Y: FiniteBanachSpace,
                               f: VectorFunction) -> float:
    """max_b ||(T_Y f)(b)||_Y - (R ||f(.)||_Y)(b); nonpositive when R dominates T"""
    if not dominates(R, T):
        raise DominationError("R does not dominate T")
    values = check_vector_function(f, T.shape[1], Y.dim)
    lhs = pointwise_norms(Y, T.matrix @ values)
    rhs = R.matrix @ pointwise_norms(Y, values)
    return float(np.max(lhs - rhs))


@dataclass
class BasisExtension:
    output: VectorFunction
    partial_sum_norms: np.ndarray
    bound: Optional[np.ndarray] = None

    @property
    def max_excess(self) -> float:
        """Largest amount by which a prefix norm exceeds the bound"""
        if self.bound is None or len(self.partial_sum_norms) == 0:
            return float("-inf")
        return float(np.max(self.partial_sum_norms - self.bound[np.newaxis, :]))


def basis_extension_apply(T: MatrixOperator, basis: Basis, pair: DualPair, f: VectorFunction,
                          truncation: int, dominant: Optional[MatrixOperator] = None,
                          check_bound: bool = False) -> BasisExtension:
    """
    sum_{n<N} T<b_n*, f> (x) b_n together with the pointwise Y-norms of every
    prefix. With a dominant R the prefixes are bounded by K R||f||_Y.
    """
    Y = pair.Y
    if not 0 <= truncation <= Y.dim:
        raise ValidationError(f"truncation {truncation} outside 0..{Y.dim}")
    if check_bound and dominant is None:
        raise ValidationError("a dominant is required for the prefix bound")
    values = check_vector_function(f, T.shape[1], Y.dim)

    transformed = T.matrix @ basis.coefficients(pair, values)
    partial = np.zeros((T.shape[0], Y.dim))
    prefix_norms = []
    for n in range(truncation):
        partial = partial + np.outer(transformed[:, n], basis.vectors[n])
        prefix_norms.append(pointwise_norms(Y, partial))

    bound = None
    if dominant is not None:
        if not dominates(dominant, T):
            raise DominationError("supplied operator does not dominate T")
        bound = basis.constant * (dominant.matrix @ pointwise_norms(Y, values))
    norms = np.array(prefix_norms) if prefix_norms else np.zeros((0, T.shape[0]))
    return BasisExtension(partial, norms, bound)


@dataclass
class AdjointPipeline:
    """S, its X-valued extension and the T_Y recovered from it"""
    S: MatrixOperator
    pair: DualPair
    source_pair: KothePair
    target_pair: KothePair
    S_X: np.ndarray = field(repr=False)
    T_Y: np.ndarray = field(repr=False)
    agreement: float

    def apply_T_Y(self, f: VectorFunction) -> VectorFunction:
        atoms, dim = self.S.shape[0], self.pair.Y.dim
        values = check_vector_function(f, atoms, dim)
        return (self.T_Y @ values.reshape(-1)).reshape(self.S.shape[1], dim)

    def apply_S_X(self, g: VectorFunction) -> VectorFunction:
        dim = self.pair.X.dim
        values = check_vector_function(g, self.S.shape[1], dim)
        return (self.S_X @ values.reshape(-1)).reshape(self.S.shape[0], dim)

    def duality_residual(self, f: VectorFunction, g: VectorFunction) -> float:
        """|sum_b <g(b), (T_Y f)(b)> nu_b - sum_a <(S_X g)(a), f(a)> mu_a|"""
        lhs = bochner_pairing(self.target_pair, self.pair, g, self.apply_T_Y(f))
        rhs = bochner_pairing(self.source_pair, self.pair, self.apply_S_X(g), f)
        return abs(lhs - rhs)

    def adjoint_extension_ratio(self, g: VectorFunction) -> float:
        """||S_X g||_{L^1(X)} / ||g||_{F(X)}"""
        denominator = bochner_norm(self.S.source, self.pair.X, g)
        if denominator == 0.0:
            return 0.0
        return bochner_norm(self.S.target, self.pair.X, self.apply_S_X(g)) / denominator


def adjoint_extension_pipeline(T: MatrixOperator, FG: KothePair, XY: DualPair) -> AdjointPipeline:
    """
    Build S = T' for <L^1, L^inf> and <F, G>, extend S to X-valued functions
    and recover T_Y as the pairing adjoint of S_X on L^inf(Y).
    """
    if not T.source.is_sup_norm:
        raise ValidationError(f"pipeline needs an L^inf source, got {T.source.describe()}")
    source_pair = kothe_pair(T.source)
    S = adjoint(T, source_pair, FG)
    dim = XY.dim
    identity = np.eye(dim)
    mu = T.source.space.mu
    nu = T.target.space.mu

    S_X = np.kron(S.matrix, identity)
    # pairing forms on the flattened target and source Bochner spaces
    target_form = np.kron(np.diag(nu), XY.pairing_matrix)
    source_form = np.kron(np.diag(mu), XY.pairing_matrix)
    T_Y = np.linalg.solve(target_form, S_X.T @ source_form)

    agreement = float(np.max(np.abs(T_Y - np.kron(T.matrix, identity))))
    logger.debug(f"pipeline T_Y agrees with the tensor extension up to {agreement:.3e}")
    return AdjointPipeline(S, XY, source_pair, FG, S_X, T_Y, agreement)


@dataclass
class NormBoundReport:
    max_ratio: float
    m_norm: float
    operator_norm: Optional[float]
    witness: VectorFunction = field(repr=False)
    instances: int = 0

    @property
    def holds(self) -> bool:
        return self.max_ratio <= self.m_norm + 1e-8

    @property
    def excess_over_operator_norm(self) -> Optional[float]:
        if self.operator_norm is None:
            return None
        return self.max_ratio - self.operator_norm


def atom_split_candidate(T: MatrixOperator, Y: FiniteBanachSpace, weights) -> Optional[VectorFunction]:
    """f(a) = |w_a| delta_a in Y = l^1_m, realising || |T| |w| || / ||w||"""
    if Y.p != 1.0 or Y.dim < T.shape[1]:
        return None
    f = np.zeros((T.shape[1], Y.dim))
    f[np.arange(T.shape[1]), np.arange(T.shape[1])] = np.abs(np.asarray(weights, dtype=float))
    return f


def extension_norm_bound_check(T: MatrixOperator, Y: FiniteBanachSpace, trials: int,
                               rng: Optional[np.random.Generator] = None,
                               operator_estimate: Optional[float] = None,
                               m_norm_estimate: Optional[float] = None,
                               with_operator_norm: bool = True) -> NormBoundReport:
    """max over sampled f of ||T_Y f||_{G(Y)} / ||f||_{E(Y)}"""
    if trials < 1:
        raise ValidationError(f"trials must be at least 1, got {trials}")
    rng = rng if rng is not None else np.random.default_rng(0)
    modulus = operator_norm(least_dominant(T))
    regular = m_norm_estimate if m_norm_estimate is not None else modulus.value
    plain = operator_estimate
    if plain is None and with_operator_norm:
        plain = operator_norm(T).value

    candidates = []
    split = atom_split_candidate(T, Y, modulus.witness)
    if split is not None:
        candidates.append(split)
    candidates.extend(rng.standard_normal((trials, T.shape[1], Y.dim)))

    best_ratio = 0.0
    best = candidates[0]
    for f in candidates:
        denominator = bochner_norm(T.source, Y, f)
        if denominator == 0.0:
            continue
        ratio = bochner_norm(T.target, Y, T.matrix @ f) / denominator
        if ratio > best_ratio:
            best_ratio, best = ratio, f
    return NormBoundReport(best_ratio, regular, plain, best, len(candidates))


def l1_extension_ratio(T: MatrixOperator, tuple_: Sequence) -> float:
    """Norm ratio of the l^1_N-valued extension on a -> (e_1(a), ..., e_N(a))"""
    block = np.atleast_2d(np.asarray(tuple_, dtype=float))
    if block.shape[1] != T.shape[1]:
        raise ValidationError(f"tuple functions have {block.shape[1]} atoms, expected {T.shape[1]}")
    Y = FiniteBanachSpace(block.shape[0], 1.0)
    f = block.T
    denominator = bochner_norm(T.source, Y, f)
    if denominator == 0.0:
        return 0.0
    return bochner_norm(T.target, Y, T.matrix @ f) / denominator


def orthogonal_invariance_residual(T: MatrixOperator, U, f: VectorFunction) -> float:
    """max |T_Y(U f) - U T_Y f| for an orthogonal U acting pointwise on l^2_m"""
    U = np.asarray(U, dtype=float)
    m = U.shape[0]
    if U.shape != (m, m) or not np.allclose(U.T @ U, np.eye(m), atol=1e-10):
        raise ValidationError("U must be a square orthogonal matrix")
    values = check_vector_function(f, T.shape[1], m)
    rotated_first = T.matrix @ (values @ U.T)
    rotated_after = (T.matrix @ values) @ U.T
    return float(np.max(np.abs(rotated_first - rotated_after)))


def column_bound(T: MatrixOperator, atom: int) -> float:
    """Ratio bound for f supported on a single atom"""
    column = np.zeros(T.shape[1])
    column[atom] = 1.0
    return T.target.norm(T.matrix @ column) / T.source.norm(column)