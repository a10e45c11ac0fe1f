"""
Square Functions and Gaussian Constants
Lattice square functions, the Grothendieck-Krivine ratio, Gaussian moments
and the Marcinkiewicz-Zygmund constant, plus Hilbert-valued extensions
computed through an orthonormal basis.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence

import numpy as np
from numpy.polynomial.hermite import hermgauss
from scipy import integrate
from scipy.special import gammaln

from src.errors import ValidationError
from src.extension.extensions import extension_norm_bound_check
from src.operators.matrix_operator import MatrixOperator
from src.operators.norm_engine import m_norm, operator_norm
from src.spaces.duality import FiniteBanachSpace, VectorFunction, check_vector_function
from src.spaces.function_space import FunctionSpace, parse_exponent

logger = logging.getLogger(__name__)

KRIVINE_BOUND = 1.782214


@dataclass
class Constants:
    """Upper bound used for K_G and a cache of Gaussian moments"""
    K_G_bound: float = KRIVINE_BOUND
    moments: Dict[float, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.K_G_bound < 1.0:
            raise ValidationError(f"K_G bound must be at least 1, got {self.K_G_bound}")

    def moment(self, p: float) -> float:
        p = parse_exponent(p)
        if p not in self.moments:
            self.moments[p] = gaussian_moment(p)
        return self.moments[p]


def _stack(es: Sequence, atom_count: int) -> np.ndarray:
    if len(es) == 0:
        raise ValidationError("square function needs at least one function")
    block = np.atleast_2d(np.asarray(es, dtype=float))
    if block.shape[1] != atom_count:
        raise ValidationError(f"functions have {block.shape[1]} atoms, expected {atom_count}")
    return block


def square_function(E: FunctionSpace, es: Sequence) -> float:
    """norm(E, a -> (sum_k e_k(a)^2)^(1/2))"""
    block = _stack(es, E.atom_count)
    return E.norm(np.sqrt((block ** 2).sum(axis=0)))


def krivine_ratio(S: MatrixOperator, es: Sequence, norm_value: Optional[float] = None) -> float:
    """||(sum |S e_k|^2)^(1/2)||_G / (||S|| ||(sum |e_k|^2)^(1/2)||_E)"""
    block = _stack(es, S.shape[1])
    if norm_value is None:
        norm_value = operator_norm(S).value
    denominator = norm_value * square_function(S.source, block)
    if denominator == 0.0:
        raise ValidationError("krivine ratio is undefined: zero operator or all e_k = 0")
    return square_function(S.target, block @ S.matrix.T) / denominator


def gaussian_moment(p: float) -> float:
    """||gamma||_p = sqrt(2) (Gamma((p+1)/2) / sqrt(pi))^(1/p)"""
    p = parse_exponent(p)
    if math.isinf(p):
        raise ValidationError("the Gaussian has no finite L^inf norm")
    log_moment = gammaln((p + 1.0) / 2.0) - 0.5 * math.log(math.pi)
    return math.sqrt(2.0) * math.exp(log_moment / p)


def gaussian_moment_quadrature(p: float) -> float:
    """||gamma||_p by Gauss-Hermite for even integer p, adaptive quadrature otherwise"""
    p = parse_exponent(p)
    if float(p).is_integer() and int(p) % 2 == 0:
        nodes, weights = hermgauss(int(p) // 2 + 1)
        expectation = float(np.dot(weights, (math.sqrt(2.0) * nodes) ** p)) / math.sqrt(math.pi)
    else:
        half, _ = integrate.quad(lambda x: x ** p * math.exp(-0.5 * x * x), 0.0, math.inf,
                                 epsabs=0.0, epsrel=1e-13, limit=200)
        expectation = 2.0 * half / math.sqrt(2.0 * math.pi)
    return expectation ** (1.0 / p)


def mz_constant(p1: float, p2: float, constants: Optional[Constants] = None) -> float:
    """max{||gamma||_p1 / ||gamma||_p2, 1}"""
    constants = constants or Constants()
    return max(constants.moment(p1) / constants.moment(p2), 1.0)


@dataclass
class MZCheck:
    lhs: float
    rhs: float
    constant: float

    @property
    def passed(self) -> bool:
        return self.lhs <= self.rhs + 1e-8

    @property
    def defect(self) -> float:
        return self.lhs - self.rhs


def mz_ratio_check(S: MatrixOperator, es: Sequence, p1: float, p2: float,
                   norm_value: Optional[float] = None,
                   constants: Optional[Constants] = None) -> MZCheck:
    """Square-function estimate for S: L^p1 -> L^p2 with the Gaussian constant"""
    p1, p2 = parse_exponent(p1), parse_exponent(p2)
    if S.source.p != p1 or S.target.p != p2:
        raise ValidationError(
            f"operator acts {S.describe()}, expected exponents {p1} -> {p2}")
    block = _stack(es, S.shape[1])
    if norm_value is None:
        norm_value = operator_norm(S).value
    constant = mz_constant(p1, p2, constants)
    lhs = square_function(S.target, block @ S.matrix.T)
    rhs = constant * norm_value * square_function(S.source, block)
    return MZCheck(lhs, rhs, constant)


def _check_orthonormal(onb: np.ndarray):
    m = onb.shape[0]
    if onb.shape != (m, m) or not np.allclose(onb @ onb.T, np.eye(m), atol=1e-10):
        raise ValidationError("rows do not form an orthonormal basis")


def hilbert_extension_apply(T: MatrixOperator, onb, f: VectorFunction) -> VectorFunction:
    """sum_n T<h_n, f> (x) h_n over the orthonormal rows h_n of `onb`"""
    H = np.asarray(onb, dtype=float)
    _check_orthonormal(H)
    values = check_vector_function(f, T.shape[1], H.shape[0])
    coefficients = values @ H.T
    return (T.matrix @ coefficients) @ H


@dataclass
class HilbertBoundReport:
    max_ratio: float
    grothendieck_bound: float
    m_norm: float
    candidate: np.ndarray

    @property
    def holds(self) -> bool:
        return self.max_ratio <= self.grothendieck_bound + 1e-6 and self.max_ratio <= self.m_norm + 1e-8


def hilbert_extension_bound(T: MatrixOperator, m: int, trials: int,
                            rng: Optional[np.random.Generator] = None,
                            constants: Optional[Constants] = None) -> HilbertBoundReport:
    """Sampled ||T_H|| for H = l^2_m against K_G ||T|| and ||T||_M"""
    constants = constants or Constants()
    H = FiniteBanachSpace(m, 2.0)
    report = extension_norm_bound_check(T, H, trials, rng, with_operator_norm=False)
    bound = constants.K_G_bound * operator_norm(T).value
    return HilbertBoundReport(report.max_ratio, bound, m_norm(T), report.witness)
