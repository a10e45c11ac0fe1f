"""
Operator Norm Engine
Computes sup_{||e||_E <= 1} ||Te||_G for matrix operators between weighted
L^p spaces, exactly where an extreme-point or closed-form route exists and
by multistart ascent on the unit sphere otherwise.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, Optional

import numpy as np

from src.errors import DimensionCapError, ValidationError
from src.operators.matrix_operator import MatrixOperator, least_dominant
from src.spaces.function_space import conjugate_exponent, lp_norm

logger = logging.getLogger(__name__)

ENUMERATION_CAP = 24
DEFAULT_STARTS = 64
DEFAULT_TOLERANCE = 1e-10
MAX_ITERATIONS = 2000
_CHUNK = 1 << 15

METHODS = ("auto", "ascent")


@dataclass
class NormEstimate:
    """Norm value with the witness that attains it"""
    value: float
    witness: np.ndarray
    exact: bool
    method: str

    def to_dict(self) -> Dict[str, Any]:
        return {"value": self.value, "witness": np.asarray(self.witness).tolist(),
                "exact": self.exact, "method": self.method}


def _ratio(T: MatrixOperator, e: np.ndarray) -> float:
    denominator = T.source.norm(e)
    if denominator == 0.0:
        return 0.0
    return T.target.norm(T.matrix @ e) / denominator


def _finish(T: MatrixOperator, witness: np.ndarray, exact: bool, method: str) -> NormEstimate:
    """Recompute the value from the witness so the two always agree"""
    witness = np.asarray(witness, dtype=float)
    value = _ratio(T, witness)
    logger.debug(f"operator norm {T.describe()}: {value:.12g} via {method} (exact={exact})")
    return NormEstimate(value, witness, exact, method)


def _unit_vector(T: MatrixOperator) -> np.ndarray:
    ones = np.ones(T.shape[1])
    return ones / T.source.norm(ones)


def _source_l1(T: MatrixOperator) -> NormEstimate:
    # extreme points of the L^1 ball are +-delta_a / mu_a
    mu = T.source.space.mu
    nu = T.target.space.mu
    column_norms = lp_norm(T.matrix.T, T.target.p, nu, axis=1) / mu
    best = int(np.argmax(column_norms))
    witness = np.zeros(T.shape[1])
    witness[best] = 1.0 / mu[best]
    return _finish(T, witness, True, "l1-extreme-points")


def _holder_extremal(density: np.ndarray, p: float, mu: np.ndarray) -> np.ndarray:
    """Unit vector e of L^p(mu) with <e, density>_mu = ||density||_{p'}"""
    if math.isinf(p):
        return np.sign(density)
    q = conjugate_exponent(p)
    magnitude = np.abs(density)
    peak = magnitude.max()
    scaled = magnitude / peak
    e = np.sign(density) * scaled ** (q - 1.0)
    return e / float(lp_norm(e, p, mu))


def _target_sup(T: MatrixOperator) -> NormEstimate:
    # ||Te||_inf = max_b |<e, M[b, :] / mu>_mu|, so each row is a functional on E
    mu = T.source.space.mu
    densities = T.matrix / mu[np.newaxis, :]
    dual_p = conjugate_exponent(T.source.p)
    row_norms = lp_norm(densities, dual_p, mu, axis=1)
    best = int(np.argmax(row_norms))
    if row_norms[best] == 0.0:
        return _finish(T, _unit_vector(T), True, "sup-target-rows")
    witness = _holder_extremal(densities[best], T.source.p, mu)
    return _finish(T, witness, True, "sup-target-rows")


def _positive_l1_target(T: MatrixOperator) -> NormEstimate:
    # for T >= 0, ||Te||_1 = <1, T|e|>_nu is the functional with density T^T nu / mu
    mu = T.source.space.mu
    density = (T.target.space.mu @ T.matrix) / mu
    witness = _holder_extremal(density, T.source.p, mu)
    return _finish(T, witness, True, "positive-l1-target")


def _sign_chunks(n: int):
    """All sign vectors of length n with first entry +1, in blocks"""
    total = 1 << (n - 1)
    bits = np.arange(n - 1, dtype=np.int64)
    for start in range(0, total, _CHUNK):
        index = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        signs = 1.0 - 2.0 * ((index[:, np.newaxis] >> bits) & 1)
        yield np.hstack([np.ones((len(index), 1)), signs])


def _source_sup(T: MatrixOperator) -> NormEstimate:
    n = T.shape[1]
    if T.is_positive():
        # lattice norms make the constant one the maximiser for positive T
        return _finish(T, np.ones(n), True, "positive-sup-source")
    if n > ENUMERATION_CAP:
        raise DimensionCapError(
            f"sign enumeration over {n} atoms exceeds the cap of {ENUMERATION_CAP}; "
            f"call operator_norm(..., method='ascent') for a lower bound")
    nu = T.target.space.mu
    best_value = -1.0
    best_signs = np.ones(n)
    for signs in _sign_chunks(n):
        values = lp_norm(signs @ T.matrix.T, T.target.p, nu, axis=1)
        index = int(np.argmax(values))
        if values[index] > best_value:
            best_value = float(values[index])
            best_signs = signs[index].copy()
    return _finish(T, best_signs, True, "sign-enumeration")


def _hilbert(T: MatrixOperator) -> NormEstimate:
    source_root = np.sqrt(T.source.space.mu)
    target_root = np.sqrt(T.target.space.mu)
    A = target_root[:, np.newaxis] * T.matrix / source_root[np.newaxis, :]
    _, singular, vt = np.linalg.svd(A)
    if singular[0] == 0.0:
        return _finish(T, _unit_vector(T), True, "svd")
    return _finish(T, vt[0] / source_root, True, "svd")


def _duality_map(V: np.ndarray, r: float) -> np.ndarray:
    """Row-wise sign(v)|v|^(r-1) / ||v||_r^(r-1), the norming functional of v"""
    magnitude = np.abs(V)
    norms = lp_norm(V, r, np.ones(V.shape[1]), axis=1)
    safe = np.where(norms > 0, norms, 1.0)[:, np.newaxis]
    if math.isinf(r):
        # any subgradient of the max norm: mass on the largest coordinate
        peaks = (magnitude == magnitude.max(axis=1, keepdims=True)) & (norms[:, np.newaxis] > 0)
        first = np.cumsum(peaks, axis=1) == 1
        return np.sign(V) * (peaks & first)
    out = np.sign(V) * (magnitude / safe) ** (r - 1.0)
    out[norms == 0] = 0.0
    return out


def _normalize(U: np.ndarray, p: float) -> np.ndarray:
    norms = lp_norm(U, p, np.ones(U.shape[1]), axis=1)
    safe = np.where(norms > 0, norms, 1.0)
    return U / safe[:, np.newaxis]


def _ascent(T: MatrixOperator, starts: int, rng: np.random.Generator, tol: float) -> NormEstimate:
    p, q = T.source.p, T.target.p
    source_weight = np.ones(T.shape[1]) if math.isinf(p) else T.source.space.mu ** (1.0 / p)
    target_weight = np.ones(T.shape[0]) if math.isinf(q) else T.target.space.mu ** (1.0 / q)
    # unweighted problem: maximise ||A u||_q over ||u||_p = 1
    A = target_weight[:, np.newaxis] * T.matrix / source_weight[np.newaxis, :]
    n = A.shape[1]
    dual_p = conjugate_exponent(p)
    ones = np.ones(n)

    seeds = [np.eye(n)[int(np.argmax(lp_norm(A.T, q, np.ones(A.shape[0]), axis=1)))], ones]
    random_count = max(starts - len(seeds), 0)
    U = np.vstack(seeds + [rng.standard_normal((random_count, n))])[:max(starts, 1)]
    U = _normalize(U, p)

    def objective(X: np.ndarray) -> np.ndarray:
        return lp_norm(X @ A.T, q, np.ones(A.shape[0]), axis=1)

    values = objective(U)
    steps = np.ones(len(U))
    active = np.ones(len(U), dtype=bool)
    iterations = 0
    while active.any() and iterations < MAX_ITERATIONS:
        iterations += 1
        current = U[active]
        gradient = _duality_map(current @ A.T, q) @ A
        direction = _duality_map(gradient, dual_p)
        candidate = _normalize(current + steps[active, np.newaxis] * direction, p)
        candidate_values = objective(candidate)
        gain = candidate_values - values[active]
        improved = gain > 0

        rows = np.flatnonzero(active)
        U[rows[improved]] = candidate[improved]
        values[rows[improved]] = candidate_values[improved]
        steps[rows[improved]] = np.minimum(steps[rows[improved]] * 2.0, 1e8)
        steps[rows[~improved]] *= 0.5

        settled = improved & (gain <= tol * values[rows])
        stalled = ~improved & (steps[rows] < 1e-12)
        active[rows[settled | stalled]] = False
    best = int(np.argmax(values))
    logger.debug(f"ascent finished after {iterations} iterations over {len(U)} starts")
    witness = U[best] / source_weight
    if not np.any(witness):
        witness = _unit_vector(T)
    return _finish(T, witness, False, "ascent")


def operator_norm(T: MatrixOperator, starts: int = DEFAULT_STARTS,
                  rng: Optional[np.random.Generator] = None, seed: int = 0,
                  tol: float = DEFAULT_TOLERANCE, method: str = "auto") -> NormEstimate:
    """
    Norm of T: E -> G. Exact routes are tried in the order source L^1,
    target L^inf, source L^inf, L^2 -> L^2, positive T into L^1; everything
    else falls back to ascent, which returns a lower bound flagged exact=False.
    """
    if method not in METHODS:
        raise ValidationError(f"unknown norm method {method!r}; expected one of {METHODS}")
    if not np.any(T.matrix):
        return _finish(T, _unit_vector(T), True, "zero")
    if method == "auto":
        if T.source.p == 1.0:
            return _source_l1(T)
        if T.target.is_sup_norm:
            return _target_sup(T)
        if T.source.is_sup_norm:
            return _source_sup(T)
        if T.source.p == 2.0 and T.target.p == 2.0:
            return _hilbert(T)
        if T.target.p == 1.0 and T.is_positive():
            return _positive_l1_target(T)
    if rng is None:
        rng = np.random.default_rng(seed)
    return _ascent(T, starts, rng, tol)


def m_norm(T: MatrixOperator, **kwargs) -> float:
    """||T||_M = || |T| ||, the norm of the least dominant"""
    return operator_norm(least_dominant(T), **kwargs).value


def automatic_regularity_case(T: MatrixOperator) -> bool:
    """True when the source is an L^1 or the target an L^inf space"""
    return T.source.p == 1.0 or T.target.is_sup_norm
