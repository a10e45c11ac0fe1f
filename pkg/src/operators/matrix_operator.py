"""
Matrix Operators Between Function Spaces
Dense matrices acting between finite L^p spaces, together with the
domination calculus: least dominants, domination tests, adjoints with
respect to Kothe dualities and the Buhvalov regularity ratio.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from src.errors import ValidationError
from src.spaces.function_space import FunctionSpace, KothePair
from src.spaces.measure import counting_measure

logger = logging.getLogger(__name__)


def scalar_space() -> FunctionSpace:
    """The scalar field as a function space over a single unit atom"""
    return FunctionSpace(counting_measure(1), math.inf)


@dataclass(frozen=True)
class MatrixOperator:
    """T: source -> target with (Tf)_b = sum_a matrix[b, a] f_a"""
    matrix: np.ndarray = field(compare=False)
    source: FunctionSpace
    target: FunctionSpace

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=float)
        if matrix.ndim != 2:
            raise ValidationError(f"operator matrix must be 2-dimensional, got {matrix.ndim}")
        expected = (self.target.atom_count, self.source.atom_count)
        if matrix.shape != expected:
            raise ValidationError(f"operator matrix has shape {matrix.shape}, expected {expected}")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)

    @property
    def shape(self):
        return self.matrix.shape

    def apply(self, f) -> np.ndarray:
        return apply(self, f)

    def with_matrix(self, matrix) -> "MatrixOperator":
        return MatrixOperator(matrix, self.source, self.target)

    def scaled(self, factor: float) -> "MatrixOperator":
        return self.with_matrix(factor * self.matrix)

    def is_positive(self) -> bool:
        return bool(np.all(self.matrix >= 0))

    def describe(self) -> str:
        return f"{self.source.describe()} -> {self.target.describe()}"

    def to_dict(self) -> Dict[str, Any]:
        return {"matrix": self.matrix.tolist(), "source": self.source.to_dict(),
                "target": self.target.to_dict()}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "MatrixOperator":
        return cls(np.asarray(data["matrix"], dtype=float),
                   FunctionSpace.from_dict(data["source"]), FunctionSpace.from_dict(data["target"]))


def apply(T: MatrixOperator, f) -> np.ndarray:
    values = T.source.check(f)
    return T.matrix @ values


def least_dominant(T: MatrixOperator) -> MatrixOperator:
    """|T|: on atomic spaces the modulus is the entrywise absolute value"""
    return T.with_matrix(np.abs(T.matrix))


def _check_same_shape(R: MatrixOperator, T: MatrixOperator):
    if R.shape != T.shape:
        raise ValidationError(f"operators have shapes {R.shape} and {T.shape}")


def dominates(R: MatrixOperator, T: MatrixOperator,
              rng: Optional[np.random.Generator] = None, samples: int = 0) -> bool:
    """R >= 0 and |Te| <= R|e| for all e, decided entrywise"""
    _check_same_shape(R, T)
    verdict = bool(np.all(R.matrix >= 0) and np.all(R.matrix >= np.abs(T.matrix)))
    if verdict and rng is not None and samples > 0:
        e = rng.standard_normal((samples, T.shape[1]))
        lhs = np.abs(e @ T.matrix.T)
        rhs = np.abs(e) @ R.matrix.T
        slack = 1e-12 * (1.0 + rhs)
        if np.any(lhs > rhs + slack):
            logger.warning("entrywise domination contradicted by a sampled function")
            return False
    return verdict


def adjoint(T: MatrixOperator, source_pair: KothePair, target_pair: KothePair) -> MatrixOperator:
    """
    Adjoint S: F -> D of T: E -> G with respect to <D, E> and <F, G>,
    so that <g, Th>_nu = <Sg, h>_mu.
    """
    if source_pair.second != T.source:
        raise ValidationError("source pair does not end in the operator's source space")
    if target_pair.second != T.target:
        raise ValidationError("target pair does not end in the operator's target space")
    mu = T.source.space.mu
    nu = T.target.space.mu
    matrix = T.matrix.T * nu[np.newaxis, :] / mu[:, np.newaxis]
    return MatrixOperator(matrix, target_pair.first, source_pair.first)


def atom_split_tuple(e) -> List[np.ndarray]:
    """The tuple (e_a * delta_a)_a whose moduli sum to |e|"""
    values = np.asarray(e, dtype=float)
    return [row for row in np.diag(values)]


def buhvalov_ratio(T: MatrixOperator, tuples: Sequence[Sequence]) -> float:
    """max over tuples of ||sum_n |T e_n| ||_G / ||sum_n |e_n| ||_E"""
    if len(tuples) == 0:
        raise ValidationError("buhvalov_ratio needs at least one tuple")
    best = 0.0
    for index, members in enumerate(tuples):
        block = np.atleast_2d(np.asarray(members, dtype=float))
        if block.shape[1] != T.shape[1]:
            raise ValidationError(
                f"tuple {index} holds functions on {block.shape[1]} atoms, expected {T.shape[1]}")
        denominator = T.source.norm(np.abs(block).sum(axis=0))
        if denominator == 0.0:
            continue
        numerator = T.target.norm(np.abs(block @ T.matrix.T).sum(axis=0))
        best = max(best, numerator / denominator)
    return best
