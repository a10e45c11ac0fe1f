"""
Banach Function Spaces
Weighted L^p spaces over a finite measure space, their Kothe duals and the
integral pairing between them.
"""

import math
from dataclasses import dataclass
from typing import Any, Dict, Union

import numpy as np

from src.errors import ValidationError
from src.spaces.measure import MeasureSpace, make_measure_space

Exponent = Union[float, str]


def parse_exponent(p: Exponent) -> float:
    """Accept 1 <= p <= inf, with infinity given as math.inf or "inf" """
    if isinstance(p, str):
        if p.strip().lower() in ("inf", "infinity", "∞"):
            return math.inf
        try:
            p = float(p)
        except ValueError:
            raise ValidationError(f"cannot read exponent {p!r}")
    p = float(p)
    if math.isnan(p) or p < 1.0:
        raise ValidationError(f"exponent must satisfy p >= 1, got {p}")
    return p


def conjugate_exponent(p: float) -> float:
    """p' with 1/p + 1/p' = 1"""
    if p == 1.0:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


def format_exponent(p: float) -> Union[float, str]:
    return "inf" if math.isinf(p) else p


def lp_norm(values: np.ndarray, p: float, weights: np.ndarray, axis: int = -1) -> np.ndarray:
    """Weighted l^p norm along `axis`; infinity ignores the (positive) weights"""
    magnitude = np.abs(values)
    if math.isinf(p):
        return magnitude.max(axis=axis)
    if p == 1.0:
        return (magnitude * weights).sum(axis=axis)
    if p == 2.0:
        return np.sqrt((magnitude ** 2 * weights).sum(axis=axis))
    # scale before powering to keep large p from overflowing
    scale = magnitude.max(axis=axis, keepdims=True)
    safe = np.where(scale > 0, scale, 1.0)
    total = ((magnitude / safe) ** p * weights).sum(axis=axis)
    return np.squeeze(safe, axis=axis) * total ** (1.0 / p)


@dataclass(frozen=True)
class FunctionSpace:
    """L^p(mu) over a finite measure space"""
    space: MeasureSpace
    p: float

    def __post_init__(self):
        object.__setattr__(self, "p", parse_exponent(self.p))

    @property
    def atom_count(self) -> int:
        return self.space.atom_count

    @property
    def is_sup_norm(self) -> bool:
        return math.isinf(self.p)

    def norm(self, f) -> float:
        return norm(self, f)

    def check(self, f) -> np.ndarray:
        values = np.asarray(f, dtype=float)
        if values.shape != (self.atom_count,):
            raise ValidationError(
                f"function has shape {values.shape}, expected ({self.atom_count},)")
        return values

    def describe(self) -> str:
        return f"L^{format_exponent(self.p)}({self.atom_count} atoms)"

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": "Lp", "p": format_exponent(self.p), "weights": list(self.space.weights)}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "FunctionSpace":
        kind = data.get("kind", "Lp")
        if kind != "Lp":
            raise ValidationError(f"unsupported function space kind {kind!r}")
        return cls(make_measure_space(data["weights"]), data.get("p", 2.0))


def norm(E: FunctionSpace, f) -> float:
    """Lattice norm of a scalar function"""
    values = E.check(f)
    return float(lp_norm(values, E.p, E.space.mu))


def kothe_dual(E: FunctionSpace) -> FunctionSpace:
    return FunctionSpace(E.space, conjugate_exponent(E.p))


def pairing(space: MeasureSpace, e, f) -> float:
    """Integral pairing sum_a e_a f_a mu_a"""
    e = np.asarray(e, dtype=float)
    f = np.asarray(f, dtype=float)
    if e.shape != (space.atom_count,) or f.shape != (space.atom_count,):
        raise ValidationError(
            f"pairing needs two functions on {space.atom_count} atoms, got {e.shape} and {f.shape}")
    return float(np.dot(e * f, space.mu))


def dual_norm_numeric(E: FunctionSpace, f) -> float:
    """Norm of the functional e -> <e, f> on E, found by the operator-norm engine"""
    from src.operators.matrix_operator import MatrixOperator, scalar_space
    from src.operators.norm_engine import operator_norm

    values = E.check(f)
    functional = MatrixOperator((values * E.space.mu)[np.newaxis, :], E, scalar_space())
    return operator_norm(functional).value


@dataclass(frozen=True)
class KothePair:
    """Kothe dual pair <first, second> on one measure space"""
    first: FunctionSpace
    second: FunctionSpace

    def __post_init__(self):
        if self.first.space != self.second.space:
            raise ValidationError("a Kothe pair must live on a single measure space")
        if not math.isclose(conjugate_exponent(self.first.p), self.second.p, rel_tol=1e-12):
            raise ValidationError(
                f"exponents {self.first.p} and {self.second.p} are not conjugate")

    @property
    def space(self) -> MeasureSpace:
        return self.first.space

    def swapped(self) -> "KothePair":
        return KothePair(self.second, self.first)

    def pair(self, e, f) -> float:
        return pairing(self.space, e, f)


def kothe_pair(E: FunctionSpace) -> KothePair:
    """The pair <E^x, E>"""
    return KothePair(kothe_dual(E), E)
