"""
Banach Dual Pairs and Kothe-Bochner Spaces
Finite-dimensional coordinate Banach spaces, dual pairs <X, Y> given by a
pairing matrix, Schauder bases with biorthogonal functionals, and the
vector-valued norms and pairings built on top of them.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

import numpy as np

from src.errors import ValidationError
from src.spaces.function_space import (
    FunctionSpace, KothePair, conjugate_exponent, format_exponent, lp_norm, parse_exponent,
)
from src.spaces.measure import counting_measure

logger = logging.getLogger(__name__)

# A vector-valued function is an (atoms x dim) array: row a holds the
# coordinates of f(a) in the declared basis of the value space.
VectorFunction = np.ndarray


@dataclass(frozen=True)
class FiniteBanachSpace:
    """R^dim with norm scale * ||.||_p on coordinates"""
    dim: int
    p: float = 2.0
    scale: float = 1.0

    def __post_init__(self):
        if int(self.dim) < 1:
            raise ValidationError(f"dimension must be at least 1, got {self.dim}")
        if not self.scale > 0:
            raise ValidationError(f"norm scale must be positive, got {self.scale}")
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "p", parse_exponent(self.p))

    def dual(self) -> "FiniteBanachSpace":
        """Norm dual under the identity pairing"""
        return FiniteBanachSpace(self.dim, conjugate_exponent(self.p), 1.0 / self.scale)

    def as_function_space(self) -> FunctionSpace:
        """Coordinates viewed as functions on a counting measure space (scale dropped)"""
        return FunctionSpace(counting_measure(self.dim), self.p)

    def describe(self) -> str:
        prefix = "" if self.scale == 1.0 else f"{self.scale:g}*"
        return f"{prefix}l^{format_exponent(self.p)}_{self.dim}"

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"kind": "lp", "p": format_exponent(self.p), "dim": self.dim}
        if self.scale != 1.0:
            data["scale"] = self.scale
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "FiniteBanachSpace":
        kind = data.get("kind", "lp")
        if kind != "lp":
            raise ValidationError(f"unsupported Banach space kind {kind!r}")
        if "dim" not in data:
            raise ValidationError("Banach space needs a 'dim' entry")
        return cls(int(data["dim"]), data.get("p", 2.0), float(data.get("scale", 1.0)))


def y_norm(Y: FiniteBanachSpace, v) -> float:
    values = np.asarray(v, dtype=float)
    if values.shape != (Y.dim,):
        raise ValidationError(f"vector has shape {values.shape}, expected ({Y.dim},)")
    return float(Y.scale * lp_norm(values, Y.p, np.ones(Y.dim)))


def pointwise_norms(Y: FiniteBanachSpace, f: VectorFunction) -> np.ndarray:
    """a -> ||f(a)||_Y"""
    return Y.scale * lp_norm(np.asarray(f, dtype=float), Y.p, np.ones(Y.dim), axis=1)


def check_vector_function(f, atom_count: int, dim: int) -> VectorFunction:
    values = np.asarray(f, dtype=float)
    if values.shape != (atom_count, dim):
        raise ValidationError(
            f"vector function has shape {values.shape}, expected ({atom_count}, {dim})")
    return values


def elementary_tensor(e, y) -> VectorFunction:
    """The function a -> e(a) y"""
    return np.outer(np.asarray(e, dtype=float), np.asarray(y, dtype=float))


@dataclass(frozen=True)
class DualPair:
    """Banach dual pair <X, Y> with <x, y> = x^T M y"""
    X: FiniteBanachSpace
    Y: FiniteBanachSpace
    pairing_matrix: np.ndarray = field(compare=False)

    def __post_init__(self):
        matrix = np.array(self.pairing_matrix, dtype=float)
        if self.X.dim != self.Y.dim:
            raise ValidationError(
                f"dual pair needs dim(X) = dim(Y), got {self.X.dim} and {self.Y.dim}")
        if matrix.shape != (self.X.dim, self.Y.dim):
            raise ValidationError(
                f"pairing matrix has shape {matrix.shape}, expected ({self.X.dim}, {self.Y.dim})")
        if np.linalg.matrix_rank(matrix) < self.X.dim:
            raise ValidationError("pairing matrix is singular; the induced maps are not injective")
        matrix.setflags(write=False)
        object.__setattr__(self, "pairing_matrix", matrix)

    @property
    def dim(self) -> int:
        return self.Y.dim

    def pair(self, x, y) -> float:
        return float(np.asarray(x, dtype=float) @ self.pairing_matrix @ np.asarray(y, dtype=float))

    def pointwise(self, x, f: VectorFunction) -> np.ndarray:
        """a -> <x, f(a)> for a Y-valued f"""
        return np.asarray(f, dtype=float) @ (self.pairing_matrix.T @ np.asarray(x, dtype=float))

    def to_dict(self) -> Dict[str, Any]:
        return {"X": self.X.to_dict(), "Y": self.Y.to_dict(),
                "pairing_matrix": self.pairing_matrix.tolist()}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "DualPair":
        Y = FiniteBanachSpace.from_dict(data["Y"])
        X = FiniteBanachSpace.from_dict(data["X"]) if "X" in data else Y.dual()
        matrix = data.get("pairing_matrix", np.eye(Y.dim))
        return cls(X, Y, np.asarray(matrix, dtype=float))


def standard_pair(Y: FiniteBanachSpace) -> DualPair:
    """<Y*, Y> under the identity pairing"""
    return DualPair(Y.dual(), Y, np.eye(Y.dim))


@dataclass
class NormingReport:
    """How far a dual pair is from recovering both norms"""
    max_defect: float
    x_defect: float
    y_defect: float
    norming: bool
    exact: bool


def _recovery_defect(matrix: np.ndarray, source: FiniteBanachSpace,
                     partner: FiniteBanachSpace) -> Tuple[float, bool]:
    """sup over the unit sphere of `source` of |1 - sup_{z in B_partner} <z, M v>|"""
    from src.operators.matrix_operator import MatrixOperator
    from src.operators.norm_engine import operator_norm

    # sup_{z in B_partner} z^T w equals ||w||_{partner*}
    target = partner.dual()
    scale = target.scale / source.scale
    forward = operator_norm(MatrixOperator(matrix, source.as_function_space(),
                                           target.as_function_space()))
    backward = operator_norm(MatrixOperator(np.linalg.inv(matrix), target.as_function_space(),
                                            source.as_function_space()))
    largest = scale * forward.value
    smallest = scale / backward.value
    defect = max(abs(largest - 1.0), abs(1.0 - smallest))
    return defect, forward.exact and backward.exact


def is_norming(P: DualPair, tol: float = 1e-9) -> NormingReport:
    """Compare ||y|| with sup_{x in B_X} <x, y> and symmetrically for X"""
    y_defect, y_exact = _recovery_defect(P.pairing_matrix, P.Y, P.X)
    x_defect, x_exact = _recovery_defect(P.pairing_matrix.T, P.X, P.Y)
    worst = max(x_defect, y_defect)
    logger.debug(f"norming defects: X {x_defect:.3e}, Y {y_defect:.3e}")
    return NormingReport(worst, x_defect, y_defect, worst <= tol, x_exact and y_exact)


@dataclass(frozen=True)
class Basis:
    """Basis {b_n} of Y (rows of `vectors`) with biorthogonal functionals in X"""
    vectors: np.ndarray = field(compare=False)
    functionals: np.ndarray = field(compare=False)
    constant: float = 1.0

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    def coefficients(self, pair: DualPair, f: VectorFunction) -> np.ndarray:
        """Row a holds (<b_n*, f(a)>)_n"""
        return np.asarray(f, dtype=float) @ (self.functionals @ pair.pairing_matrix).T

    def projection(self, pair: DualPair, n: int) -> np.ndarray:
        """Matrix of y -> sum_{k<n} <b_k*, y> b_k"""
        return self.vectors[:n].T @ self.functionals[:n] @ pair.pairing_matrix


def make_basis(vectors, pair: DualPair, constant: Optional[float] = None) -> Basis:
    """Basis from its vectors; functionals solved from biorthogonality"""
    B = np.array(vectors, dtype=float)
    if B.shape != (pair.dim, pair.dim):
        raise ValidationError(f"basis matrix has shape {B.shape}, expected ({pair.dim}, {pair.dim})")
    if np.linalg.matrix_rank(B) < pair.dim:
        raise ValidationError("basis vectors are linearly dependent")
    # rows F satisfy F M B^T = I
    F = np.linalg.inv(pair.pairing_matrix @ B.T)
    gram = F @ pair.pairing_matrix @ B.T
    if not np.allclose(gram, np.eye(pair.dim), atol=1e-10):
        raise ValidationError("functionals are not biorthogonal to the basis")
    B.setflags(write=False)
    F.setflags(write=False)
    basis = Basis(B, F, 1.0)
    if constant is None:
        constant = basis_constant(basis, pair)
    if constant < 1.0:
        raise ValidationError(f"basis constant must be at least 1, got {constant}")
    return Basis(B, F, float(constant))


def basis_constant(basis: Basis, pair: DualPair) -> float:
    """K = max_N ||P_N|| over the partial-sum projections on Y"""
    from src.operators.matrix_operator import MatrixOperator
    from src.operators.norm_engine import operator_norm

    Y = pair.Y.as_function_space()
    constant = 1.0
    for n in range(1, basis.dim):
        estimate = operator_norm(MatrixOperator(basis.projection(pair, n), Y, Y))
        constant = max(constant, estimate.value)
    return constant


def standard_basis(pair: DualPair) -> Basis:
    return make_basis(np.eye(pair.dim), pair)


def bochner_norm(E: FunctionSpace, Y: FiniteBanachSpace, f: VectorFunction) -> float:
    """||a -> ||f(a)||_Y||_E"""
    values = check_vector_function(f, E.atom_count, Y.dim)
    return float(lp_norm(pointwise_norms(Y, values), E.p, E.space.mu))


def bochner_pairing(EF: KothePair, XY: DualPair, e: VectorFunction, f: VectorFunction) -> float:
    """Integral of <e(a), f(a)> for X-valued e and Y-valued f"""
    n = EF.space.atom_count
    e = check_vector_function(e, n, XY.X.dim)
    f = check_vector_function(f, n, XY.Y.dim)
    pointwise = np.einsum("ai,ij,aj->a", e, XY.pairing_matrix, f)
    return float(np.dot(pointwise, EF.space.mu))
