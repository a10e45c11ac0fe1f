"""
Conditional Expectation
Block-averaging projections onto a partition, their vector-valued versions
and a sampled audit of the properties that make them contractive
projections dual to one another.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence

import numpy as np
from tqdm import tqdm

from src.errors import ValidationError
from src.extension.extensions import tensor_extension_apply
from src.operators.matrix_operator import MatrixOperator, adjoint
from src.spaces.duality import DualPair, FiniteBanachSpace, VectorFunction, bochner_norm, bochner_pairing
from src.spaces.function_space import FunctionSpace, kothe_pair
from src.spaces.measure import MeasureSpace, Partition, is_coarser, trivial_partition

logger = logging.getLogger(__name__)

DEFAULT_EXPONENTS = (1.0, 2.0, math.inf)

# per-check tolerances for the audit
TOLERANCES = {
    "averaging": 1e-12,
    "idempotence": 1e-12,
    "contraction": 1e-10,
    "duality": 1e-10,
    "tower": 1e-12,
    "positivity": 0.0,
    "adjoint_route": 1e-12,
}
AUXILIARY_CHECKS = ("tower",)


def _check_partition(space: MeasureSpace, P: Partition):
    if P.atom_count != space.atom_count:
        raise ValidationError(
            f"partition covers {P.atom_count} atoms but the space has {space.atom_count}")


def cond_exp_matrix(space: MeasureSpace, P: Partition, p: float = math.inf) -> MatrixOperator:
    """E[a, a'] = mu_a' / mass(block(a)) when a and a' share a block"""
    _check_partition(space, P)
    owner = P.block_index()
    masses = P.block_masses(space)
    same_block = owner[:, np.newaxis] == owner[np.newaxis, :]
    matrix = np.where(same_block, space.mu[np.newaxis, :] / masses[owner][:, np.newaxis], 0.0)
    L = FunctionSpace(space, p)
    return MatrixOperator(matrix, L, L)


def cond_exp_vector(space: MeasureSpace, P: Partition, Y: FiniteBanachSpace,
                    f: VectorFunction) -> VectorFunction:
    return tensor_extension_apply(cond_exp_matrix(space, P), Y, f)


def block_integrals(space: MeasureSpace, P: Partition, f: VectorFunction) -> np.ndarray:
    """Row k holds sum_{a in block k} mu_a f(a)"""
    indicator = np.zeros((P.block_count, space.atom_count))
    indicator[P.block_index(), np.arange(space.atom_count)] = 1.0
    return (indicator * space.mu[np.newaxis, :]) @ np.asarray(f, dtype=float)


@dataclass
class CondExpReport:
    """Worst residual per property over all sampled functions"""
    residuals: Dict[str, float] = field(default_factory=dict)
    instances: int = 0

    def record(self, check: str, value: float):
        self.residuals[check] = max(self.residuals.get(check, 0.0), float(value))

    def passed(self, check: str) -> bool:
        return self.residuals.get(check, 0.0) <= TOLERANCES[check]

    @property
    def all_passed(self) -> bool:
        return all(self.passed(check) for check in self.residuals)

    def failures(self) -> Sequence[str]:
        return [check for check in self.residuals if not self.passed(check)]


def verify_condexp_properties(space: MeasureSpace, P: Partition, Y: FiniteBanachSpace,
                              pair: DualPair, trials: int,
                              rng: Optional[np.random.Generator] = None,
                              coarser: Optional[Partition] = None,
                              exponents: Sequence[float] = DEFAULT_EXPONENTS,
                              progress: bool = False) -> CondExpReport:
    """Sampled audit of averaging, idempotence, contraction, duality, tower and positivity"""
    if trials < 1:
        raise ValidationError(f"trials must be at least 1, got {trials}")
    if pair.Y.dim != Y.dim:
        raise ValidationError("dual pair does not match the value space")
    coarser = coarser if coarser is not None else trivial_partition(space)
    if not is_coarser(coarser, P):
        raise ValidationError("tower check needs a partition coarser than P")
    rng = rng if rng is not None else np.random.default_rng(0)

    E = cond_exp_matrix(space, P).matrix
    E_coarse = cond_exp_matrix(space, coarser).matrix
    report = CondExpReport()

    # deterministic matrix-level checks
    report.record("idempotence", np.max(np.abs(E @ E - E)))
    report.record("tower", np.max(np.abs(E_coarse @ E - E_coarse)))
    E1 = cond_exp_matrix(space, P, 1.0)
    restricted = adjoint(E1, kothe_pair(E1.source), kothe_pair(E1.target))
    report.record("adjoint_route", np.max(np.abs(restricted.matrix - E)))
    L1_Linf = kothe_pair(FunctionSpace(space, 1.0))

    n = space.atom_count
    for _ in tqdm(range(trials), desc="condexp", disable=not progress):
        f = rng.standard_normal((n, Y.dim))
        g = rng.standard_normal((n, pair.X.dim))
        Ef = E @ f

        report.record("averaging", np.max(np.abs(block_integrals(space, P, f) - block_integrals(space, P, Ef))))
        report.record("idempotence", np.max(np.abs(E @ Ef - Ef)))
        report.record("tower", np.max(np.abs(E_coarse @ Ef - E_coarse @ f)))
        for p in exponents:
            L = FunctionSpace(space, p)
            report.record("contraction", bochner_norm(L, Y, Ef) - bochner_norm(L, Y, f))
        # X-valued g in L^1(X) against Y-valued f in L^inf(Y)
        lhs = bochner_pairing(L1_Linf, pair, g, Ef)
        rhs = bochner_pairing(L1_Linf, pair, E @ g, f)
        report.record("duality", abs(lhs - rhs))
        report.record("positivity", max(0.0, -float(np.min(E @ np.abs(f)))))
        report.instances += 1

    for check in report.failures():
        logger.warning(f"conditional expectation check {check} failed: "
                       f"{report.residuals[check]:.3e} > {TOLERANCES[check]:.0e}")
    return report
