"""
Banach Limit Approximants
Cesaro windows standing in for Banach limits, and the diagnostics showing
why the c0- and l1-valued extensions of such a functional break down while
the extension with respect to <c0, l1> survives.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from src.errors import ValidationError
from src.extension.extensions import ExtensionResidual, basis_extension_apply, verify_extension_relation
from src.operators.matrix_operator import MatrixOperator, least_dominant, scalar_space
from src.spaces.duality import FiniteBanachSpace, VectorFunction, standard_basis, standard_pair
from src.spaces.function_space import FunctionSpace
from src.spaces.measure import counting_measure

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CesaroFunctional:
    """Lambda_N(x) = (1/N) sum_{k<N} x_k"""
    N: int

    def __post_init__(self):
        if int(self.N) < 1:
            raise ValidationError(f"window length must be at least 1, got {self.N}")
        object.__setattr__(self, "N", int(self.N))

    def as_operator(self) -> MatrixOperator:
        """The functional on l^inf_N as a 1 x N matrix operator"""
        source = FunctionSpace(counting_measure(self.N), math.inf)
        return MatrixOperator(np.full((1, self.N), 1.0 / self.N), source, scalar_space())


def _prefix(L: CesaroFunctional, x, length: int) -> np.ndarray:
    values = np.asarray(x, dtype=float)
    if values.ndim != 1 or len(values) < length:
        raise ValidationError(f"sequence prefix of length {len(values)} is shorter than {length}")
    return values


def cesaro_apply(L: CesaroFunctional, x) -> float:
    values = _prefix(L, x, L.N)
    return float(np.mean(values[:L.N]))


def shift_defect(L: CesaroFunctional, x) -> float:
    """|Lambda_N(Sx) - Lambda_N(x)| with S the left shift; at most 2 sup|x| / N"""
    values = _prefix(L, x, L.N + 1)
    return abs(cesaro_apply(L, values[1:]) - cesaro_apply(L, values))


def _check_window(N: int, K: int):
    if K < 0 or K > N:
        raise ValidationError(f"need 0 <= K <= N, got K={K}, N={N}")


@dataclass
class C0Diagnostic:
    N: int
    K: int
    values: np.ndarray = field(repr=False)
    min_head: float

    def to_rows(self):
        return [{"k": k, "value": float(v)} for k, v in enumerate(self.values)]


def c0_counterexample(N: int, K: int) -> C0Diagnostic:
    """
    Lambda_N applied to the tails f_k = 1_{k, k+1, ...}. The values (N-k)/N
    stay near one on any fixed head, so the candidate c0-valued output
    approaches the constant one sequence.
    """
    _check_window(N, K)
    L = CesaroFunctional(N)
    # window sums of the tails: entry k counts the ones of f_k among the first N terms
    window = np.ones(L.N)
    values = np.cumsum(window[::-1])[::-1] / L.N
    min_head = float(values[:K + 1].min()) if K < N else 0.0
    logger.debug(f"c0 diagnostic N={N} K={K}: min_head={min_head:.12g}")
    return C0Diagnostic(N, K, values, min_head)


@dataclass
class L1Diagnostic:
    N: int
    K: int
    head_mass: float
    total_pairing: float

    @property
    def gap(self) -> float:
        return self.total_pairing - self.head_mass

    def to_rows(self):
        return [{"N": self.N, "K": self.K, "head_mass": self.head_mass,
                 "total_pairing": self.total_pairing, "gap": self.gap}]


def l1_counterexample(N: int, K: int) -> L1Diagnostic:
    """
    With f_k = delta_k each Lambda_N(f_k) is 1/N, so the head carries K/N
    while Lambda_N(1) = 1; the missing mass escapes past every head.
    """
    _check_window(N, K)
    L = CesaroFunctional(N)
    head_mass = 0.0
    for k in range(K):
        delta = np.zeros(N)
        delta[k] = 1.0
        head_mass += cesaro_apply(L, delta)
    total = cesaro_apply(L, np.ones(N))
    return L1Diagnostic(N, K, head_mass, total)


@dataclass
class PredualExtension:
    output: VectorFunction = field(repr=False)
    residual: ExtensionResidual
    max_prefix_excess: float
    f: VectorFunction = field(repr=False)


def predual_l1_extension(N: int, m: int, rng: Optional[np.random.Generator] = None,
                         f: Optional[VectorFunction] = None) -> PredualExtension:
    """l^1_m-valued extension of Lambda_N for <c0, l1>, built from the standard basis"""
    if m < 1:
        raise ValidationError(f"value dimension must be at least 1, got {m}")
    L = CesaroFunctional(N)
    T = L.as_operator()
    pair = standard_pair(FiniteBanachSpace(m, 1.0))
    rng = rng if rng is not None else np.random.default_rng(0)
    if f is None:
        f = rng.uniform(-1.0, 1.0, size=(N, m))
    extension = basis_extension_apply(T, standard_basis(pair), pair, f, m,
                                      dominant=least_dominant(T), check_bound=True)
    residual = verify_extension_relation(T, extension.output, pair, f, rng=rng)
    return PredualExtension(extension.output, residual, extension.max_excess, f)
