"""
Verification Suites
Randomized and fixture-based checks grouped by topic. Each suite can be
enabled, configured and run on its own; the manager runs them side by side
and reports them in a fixed order.
"""

import logging
import math
from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from src.errors import ConfigError, ValidationError
from src.extension.banach_limits import (
    CesaroFunctional, c0_counterexample, l1_counterexample, predual_l1_extension, shift_defect,
)
from src.extension.conditional_expectation import (
    AUXILIARY_CHECKS, TOLERANCES as CONDEXP_TOLERANCES, cond_exp_matrix, verify_condexp_properties,
)
from src.extension.extensions import (
    adjoint_extension_pipeline, basis_extension_apply, domination_pointwise_check,
    extension_norm_bound_check, orthogonal_invariance_residual, tensor_extension_apply,
    verify_extension_relation,
)
from src.extension.square_functions import (
    Constants, gaussian_moment, gaussian_moment_quadrature, hilbert_extension_apply,
    hilbert_extension_bound, krivine_ratio, mz_constant, mz_ratio_check,
)
from src.operators.matrix_operator import (
    MatrixOperator, adjoint, atom_split_tuple, buhvalov_ratio, least_dominant, scalar_space,
)
from src.operators.norm_engine import automatic_regularity_case, m_norm, operator_norm
from src.spaces.duality import DualPair, FiniteBanachSpace, is_norming, make_basis, standard_pair
from src.spaces.function_space import (
    FunctionSpace, dual_norm_numeric, format_exponent, kothe_dual, kothe_pair, parse_exponent,
)
from src.spaces.measure import (
    counting_measure, make_measure_space, make_partition, trivial_partition,
)
from src.verification.seeding import stream_id, trial_rng

logger = logging.getLogger(__name__)

SUITE_NAMES = ("extension", "sqfn", "condexp", "counterexample", "norms")

DEFAULT_TOLERANCES: Dict[str, float] = {
    "extension_relation": 1e-10,
    "norm_bound": 1e-8,
    "norm_witness": 0.0,
    "domination": 1e-10,
    "basis_agreement": 1e-9,
    "basis_prefix_bound": 1e-10,
    "pipeline_agreement": 1e-10,
    "pipeline_duality": 1e-10,
    "pipeline_adjoint_bound": 1e-8,
    "krivine": 1e-6,
    "mz": 1e-8,
    "gaussian_moment": 1e-10,
    "hilbert_grothendieck_bound": 1e-6,
    "hilbert_m_bound": 1e-8,
    "hilbert_basis_independence": 1e-10,
    "orthogonal_invariance": 1e-10,
    "counterexample": 1e-12,
    "shift_defect": 1e-12,
    "predual_extension": 1e-10,
    "exact_norm": 1e-9,
    "dual_norm": 1e-8,
    "norming": 1e-9,
    "automatic_regularity": 1e-9,
    "buhvalov_attained": 1e-9,
    "adjoint_norm": 1e-9,
    **{f"condexp_{name}": value for name, value in CONDEXP_TOLERANCES.items()},
}

# residual, plus a callable building the replay witness on demand
TrialOutcome = Dict[str, Tuple[float, Callable[[], Dict[str, Any]]]]


@dataclass
class CheckResult:
    """One row of the verification report"""
    suite: str
    check: str
    instances: int
    max_residual: float
    bound: float
    passed: bool
    witness: Optional[Dict[str, Any]] = None
    observed: Optional[float] = None
    auxiliary: bool = False

    def to_row(self) -> Dict[str, Any]:
        row: Dict[str, Any] = {
            "suite": self.suite,
            "check": self.check,
            "instances": self.instances,
            "max_residual": self.max_residual,
            "bound": self.bound,
            "pass": self.passed,
        }
        if self.observed is not None:
            row["observed"] = self.observed
        if self.auxiliary:
            row["auxiliary"] = True
        if self.witness is not None:
            row["witness"] = self.witness
        return row


class CheckAccumulator:
    """Running maximum of one check's residual and the witness attaining it"""

    def __init__(self, suite: str, check: str, bound: float, auxiliary: bool = False):
        self.suite = suite
        self.check = check
        self.bound = bound
        self.auxiliary = auxiliary
        self.instances = 0
        self.max_residual = -math.inf
        self.observed: Optional[float] = None
        self._witness: Optional[Callable[[], Dict[str, Any]]] = None

    def update(self, residual: float, witness: Optional[Callable[[], Dict[str, Any]]] = None,
               observed: Optional[float] = None):
        self.instances += 1
        if residual > self.max_residual:
            self.max_residual = float(residual)
            self._witness = witness
        if observed is not None:
            self.observed = observed if self.observed is None else max(self.observed, observed)

    def result(self) -> CheckResult:
        residual = self.max_residual if self.instances else 0.0
        passed = bool(residual <= self.bound)
        witness = None
        if not passed and self._witness is not None:
            witness = self._witness()
        return CheckResult(self.suite, self.check, self.instances, residual, self.bound,
                           passed, witness, self.observed, self.auxiliary)


def _exponents(values: Sequence, key: str) -> List[float]:
    try:
        parsed = [parse_exponent(value) for value in values]
    except ValidationError as error:
        raise ConfigError(key, str(error))
    if not parsed:
        raise ConfigError(key, "at least one exponent is required")
    return parsed


def _random_measure(rng: np.random.Generator, n: int):
    return make_measure_space(rng.uniform(0.5, 2.0, size=n))


def _random_pairing(rng: np.random.Generator, m: int) -> np.ndarray:
    matrix = np.eye(m) + 0.3 * rng.standard_normal((m, m))
    if np.linalg.cond(matrix) > 1e6:
        return np.eye(m)
    return matrix


def _orthogonal(rng: np.random.Generator, m: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((m, m)))
    return q * np.sign(np.where(np.diag(r) == 0, 1.0, np.diag(r)))


class VerificationSuite(ABC):
    """Base class for all verification suites"""

    name = ""

    def __init__(self, options: Dict[str, Any], tolerances: Dict[str, float], seed: int,
                 trials: int, workers: int = 1, progress: bool = False):
        self.options = options
        self.tolerances = tolerances
        self.seed = seed
        self.trials = int(options.get("trials") or trials)
        self.workers = max(int(workers), 1)
        self.progress = progress
        self.enabled = bool(options.get("enabled", True))
        self._accumulators: Dict[str, CheckAccumulator] = {}

    def rng(self, trial: int) -> np.random.Generator:
        return trial_rng(self.seed, stream_id(self.name), trial)

    def option_key(self, key: str) -> str:
        return f"suites.{self.name}.{key}"

    def accumulator(self, check: str, tolerance: Optional[str] = None,
                    auxiliary: bool = False) -> CheckAccumulator:
        if check not in self._accumulators:
            bound = self.tolerances[tolerance or check]
            self._accumulators[check] = CheckAccumulator(self.name, check, bound, auxiliary)
        return self._accumulators[check]

    def record(self, check: str, residual: float, witness=None, tolerance: Optional[str] = None,
               observed: Optional[float] = None):
        self.accumulator(check, tolerance).update(residual, witness, observed)

    def run_trials(self, trial: Callable[[int], TrialOutcome], count: int,
                   tolerances: Optional[Dict[str, str]] = None):
        """Run `trial` for 0..count-1 and reduce in trial order"""
        tolerances = tolerances or {}
        indices = range(count)
        if self.workers > 1:
            with ThreadPoolExecutor(max_workers=self.workers) as executor:
                outcomes = list(tqdm(executor.map(trial, indices), total=count,
                                     desc=self.name, disable=not self.progress))
        else:
            outcomes = [trial(t) for t in tqdm(indices, desc=self.name, disable=not self.progress)]
        for outcome in outcomes:
            for check, (residual, witness) in outcome.items():
                self.record(check, residual, witness, tolerance=tolerances.get(check))

    def results(self) -> List[CheckResult]:
        return [accumulator.result() for accumulator in self._accumulators.values()]

    def execute(self) -> List[CheckResult]:
        self._accumulators = {}
        logger.info(f"Running suite {self.name} ({self.trials} trials)")
        self.run()
        results = self.results()
        for result in results:
            if not result.passed:
                logger.warning(f"{self.name}.{result.check} failed: "
                               f"{result.max_residual:.3e} > {result.bound:.0e}")
        logger.info(f"Suite {self.name} finished: "
                    f"{sum(r.passed for r in results)}/{len(results)} checks passed")
        return results

    @abstractmethod
    def run(self):
        """Populate the accumulators"""
        pass


class ExtensionSuite(VerificationSuite):
    """Defining relation, norm bounds, basis and adjoint routes of T_Y"""

    name = "extension"

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.max_atoms = int(self.options.get("max_atoms", 5))
        self.max_dim = int(self.options.get("max_dim", 4))
        self.exponents = _exponents(self.options.get("exponents", [1, 2, "inf"]),
                                    self.option_key("exponents"))
        self.norm_samples = int(self.options.get("norm_samples", 4))
        self.corrupt_delta = float(self.options.get("corrupt_delta", 1e-3))
        corrupt = self.options.get("corrupt_entry")
        if corrupt is not None and (not isinstance(corrupt, (list, tuple)) or len(corrupt) != 2
                                    or not all(isinstance(i, int) for i in corrupt)):
            raise ConfigError(self.option_key("corrupt_entry"), "expected [row, column] integers")
        self.corrupt_entry = corrupt
        if self.max_atoms < 1 or self.max_dim < 1:
            raise ConfigError(self.option_key("max_atoms"), "dimensions must be at least 1")

    def _instance(self, rng: np.random.Generator):
        n, k = (int(v) for v in rng.integers(1, self.max_atoms + 1, size=2))
        E = FunctionSpace(_random_measure(rng, n), float(rng.choice(self.exponents)))
        G = FunctionSpace(_random_measure(rng, k), float(rng.choice(self.exponents)))
        T = MatrixOperator(rng.standard_normal((k, n)), E, G)
        m = int(rng.integers(1, self.max_dim + 1))
        Y = FiniteBanachSpace(m, float(rng.choice(self.exponents)))
        return T, Y

    def trial(self, t: int) -> TrialOutcome:
        rng = self.rng(t)
        T, Y = self._instance(rng)
        pair = standard_pair(Y)
        f = rng.standard_normal((T.shape[1], Y.dim))
        clean = tensor_extension_apply(T, Y, f)
        output = clean
        if self.corrupt_entry is not None and t == 0:
            output = clean.copy()
            row, column = self.corrupt_entry
            output[row % T.shape[0], column % Y.dim] += self.corrupt_delta

        def instance_witness(**extra):
            witness = {"trial": t, "seed": self.seed, "operator": T.to_dict(), "Y": Y.to_dict(),
                       "f": f.tolist()}
            witness.update(extra)
            return witness

        outcome: TrialOutcome = {}
        relation = verify_extension_relation(T, output, pair, f, rng=rng)
        outcome["extension_relation"] = (relation.max_residual, lambda: instance_witness(
            output=output.tolist(), **relation.witness()))

        bound = extension_norm_bound_check(T, Y, self.norm_samples, rng=rng, with_operator_norm=False)
        outcome["norm_bound"] = (bound.max_ratio - bound.m_norm, lambda: instance_witness(
            candidate=bound.witness.tolist(), ratio=bound.max_ratio, m_norm=bound.m_norm))

        R = least_dominant(T)
        defect = domination_pointwise_check(T, R, Y, f)
        outcome["domination"] = (defect, lambda: instance_witness(defect=defect))

        B = rng.standard_normal((Y.dim, Y.dim)) + Y.dim * np.eye(Y.dim)
        basis = make_basis(B, pair)
        expansion = basis_extension_apply(T, basis, pair, f, Y.dim, dominant=R, check_bound=True)
        scale = 1.0 + float(np.max(np.abs(clean)))
        agreement = float(np.max(np.abs(expansion.output - clean))) / scale
        outcome["basis_agreement"] = (agreement, lambda: instance_witness(basis=B.tolist()))
        outcome["basis_prefix_bound"] = (expansion.max_excess, lambda: instance_witness(
            basis=B.tolist(), constant=basis.constant))

        outcome.update(self._pipeline(rng, T, Y, f, instance_witness))
        return outcome

    def _pipeline(self, rng, T: MatrixOperator, Y: FiniteBanachSpace, f, instance_witness) -> TrialOutcome:
        T_inf = MatrixOperator(T.matrix, FunctionSpace(T.source.space, math.inf), T.target)
        M = _random_pairing(rng, Y.dim)
        XY = DualPair(Y.dual(), Y, M)
        pipeline = adjoint_extension_pipeline(T_inf, kothe_pair(T.target), XY)
        g = rng.standard_normal((T.shape[0], Y.dim))
        duality = pipeline.duality_residual(f, g)
        ratio = pipeline.adjoint_extension_ratio(g)
        regular = m_norm(pipeline.S)
        return {
            "pipeline_agreement": (pipeline.agreement, lambda: instance_witness(pairing=M.tolist())),
            "pipeline_duality": (duality, lambda: instance_witness(pairing=M.tolist(), g=g.tolist())),
            "pipeline_adjoint_bound": (ratio - regular, lambda: instance_witness(
                g=g.tolist(), ratio=ratio, m_norm=regular)),
        }

    def _norm_witness_fixture(self):
        """||T||_M, not ||T||, bounds the l^1-valued extension of a Hadamard matrix"""
        l2 = FunctionSpace(counting_measure(2), 2.0)
        T = MatrixOperator([[1.0, 1.0], [1.0, -1.0]], l2, l2)
        report = extension_norm_bound_check(T, FiniteBanachSpace(2, 1.0), self.norm_samples,
                                            rng=self.rng(self.trials))
        margin = report.operator_norm + 0.05 - report.max_ratio
        self.record("norm_witness", margin, lambda: {
            "operator": T.to_dict(), "candidate": report.witness.tolist(),
            "ratio": report.max_ratio, "operator_norm": report.operator_norm},
            observed=report.max_ratio)

    def run(self):
        self.run_trials(self.trial, self.trials)
        self._norm_witness_fixture()


class SquareFunctionSuite(VerificationSuite):
    """Krivine ratio, Gaussian constants and Hilbert-valued extensions"""

    name = "sqfn"

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.max_dim = int(self.options.get("max_dim", 6))
        self.hilbert_dim = int(self.options.get("hilbert_dim", 3))
        self.ascent_starts = int(self.options.get("ascent_starts", 16))
        try:
            self.constants = Constants(float(self.options.get("K_G_bound", 1.782214)))
        except ValidationError as error:
            raise ConfigError(self.option_key("K_G_bound"), str(error))
        pairs = self.options.get("mz_pairs", [[1, 2], [2, 1], [2, 2], [4, 2]])
        self.mz_pairs = []
        for index, pair in enumerate(pairs):
            key = self.option_key(f"mz_pairs.{index}")
            if not isinstance(pair, (list, tuple)) or len(pair) != 2:
                raise ConfigError(key, "expected [p1, p2]")
            p1, p2 = _exponents(pair, key)
            if math.isinf(p1) or math.isinf(p2):
                raise ConfigError(key, "Gaussian constants need finite exponents")
            self.mz_pairs.append((p1, p2))
        if self.max_dim < 1 or self.max_dim > 12:
            raise ConfigError(self.option_key("max_dim"), "must lie in 1..12")

    def trial(self, t: int) -> TrialOutcome:
        rng = self.rng(t)
        outcome: TrialOutcome = {}
        n, k, count = (int(v) for v in rng.integers(1, self.max_dim + 1, size=3))

        S = MatrixOperator(rng.standard_normal((k, n)), FunctionSpace(counting_measure(n), math.inf),
                           FunctionSpace(counting_measure(k), 1.0))
        es = rng.standard_normal((count, n))
        ratio = krivine_ratio(S, es)
        outcome["krivine"] = (ratio - self.constants.K_G_bound, lambda: {
            "trial": t, "operator": S.to_dict(), "es": es.tolist(), "ratio": ratio})

        for p1, p2 in self.mz_pairs:
            outcome[f"mz_{p1:g}_{p2:g}"] = self._mz(rng, t, p1, p2)

        outcome.update(self._hilbert(rng, t))
        return outcome

    def _mz(self, rng, t: int, p1: float, p2: float):
        n, k, count = (int(v) for v in rng.integers(1, self.max_dim + 1, size=3))
        S = MatrixOperator(rng.standard_normal((k, n)), FunctionSpace(counting_measure(n), p1),
                           FunctionSpace(counting_measure(k), p2))
        es = rng.standard_normal((count, n))
        estimate = operator_norm(S, starts=self.ascent_starts, rng=rng)
        check = mz_ratio_check(S, es, p1, p2, norm_value=estimate.value, constants=self.constants)
        return check.defect, lambda: {"trial": t, "operator": S.to_dict(), "es": es.tolist(),
                                      "lhs": check.lhs, "rhs": check.rhs,
                                      "exact_norm": estimate.exact}

    def _hilbert(self, rng, t: int) -> TrialOutcome:
        n, k = (int(v) for v in rng.integers(1, self.max_dim + 1, size=2))
        target_p = float(rng.choice([1.0, 2.0, math.inf]))
        T = MatrixOperator(rng.standard_normal((k, n)), FunctionSpace(counting_measure(n), math.inf),
                           FunctionSpace(counting_measure(k), target_p))
        m = self.hilbert_dim
        report = hilbert_extension_bound(T, m, 2, rng=rng, constants=self.constants)
        U = _orthogonal(rng, m)
        f = rng.standard_normal((n, m))
        independence = float(np.max(np.abs(hilbert_extension_apply(T, U, f) - T.matrix @ f)))
        invariance = orthogonal_invariance_residual(T, U, f)

        def witness():
            return {"trial": t, "operator": T.to_dict(), "onb": U.tolist(), "f": f.tolist()}

        def bound_witness():
            return {"trial": t, "operator": T.to_dict(), "Y": FiniteBanachSpace(m, 2.0).to_dict(),
                    "candidate": report.candidate.tolist(), "ratio": report.max_ratio,
                    "grothendieck_bound": report.grothendieck_bound, "m_norm": report.m_norm}
        return {
            "hilbert_grothendieck_bound": (report.max_ratio - report.grothendieck_bound, bound_witness),
            "hilbert_m_bound": (report.max_ratio - report.m_norm, bound_witness),
            "hilbert_basis_independence": (independence, witness),
            "orthogonal_invariance": (invariance, witness),
        }

    def _fixtures(self):
        for p in (1.0, 1.5, 2.0, 3.0, 4.0, 6.0):
            closed, quadrature = gaussian_moment(p), gaussian_moment_quadrature(p)
            self.record("gaussian_moment", abs(closed - quadrature),
                        lambda p=p, c=closed, q=quadrature: {"p": p, "closed_form": c, "quadrature": q})
        second = self.constants.moment(2.0)
        self.record("gaussian_moment", abs(second - 1.0), lambda: {"p": 2.0, "closed_form": second,
                                                                     "expected": 1.0})
        same = mz_constant(2.0, 2.0, self.constants)
        self.record("gaussian_moment", abs(same - 1.0), lambda: {"p1": 2.0, "p2": 2.0, "constant": same,
                                                                   "expected": 1.0})

        # identity on a sup-normed space attains ratio one
        space = FunctionSpace(counting_measure(3), math.inf)
        identity = MatrixOperator(np.eye(3), space, space)
        es = self.rng(self.trials).standard_normal((4, 3))
        ratio = krivine_ratio(identity, es)
        self.record("krivine", ratio - self.constants.K_G_bound, lambda: {
            "operator": identity.to_dict(), "es": es.tolist(), "ratio": ratio})

    def run(self):
        tolerances = {f"mz_{p1:g}_{p2:g}": "mz" for p1, p2 in self.mz_pairs}
        self.run_trials(self.trial, self.trials, tolerances)
        self._fixtures()
        accumulator = self._accumulators.get("krivine")
        if accumulator is not None:
            accumulator.observed = accumulator.max_residual + self.constants.K_G_bound


class ConditionalExpectationSuite(VerificationSuite):
    """Audit of E on one configured or random scenario"""

    name = "condexp"

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        rng = self.rng(0)
        try:
            weights = self.options.get("weights")
            if weights is None:
                weights = rng.uniform(0.5, 2.0, size=6).tolist()
            self.space = make_measure_space(weights)
        except (ValidationError, TypeError) as error:
            raise ConfigError(self.option_key("weights"), str(error))
        self.partition = self._partition("blocks", rng)
        coarser = self.options.get("coarser")
        self.coarser = trivial_partition(self.space) if coarser is None else self._partition("coarser", rng)
        Y = self.options.get("Y") or {"p": 1, "dim": 3}
        try:
            self.Y = FiniteBanachSpace.from_dict(dict(Y))
        except (ValidationError, TypeError, ValueError) as error:
            raise ConfigError(self.option_key("Y"), str(error))
        self.exponents = _exponents(self.options.get("exponents", [1, 2, "inf"]),
                                    self.option_key("exponents"))

    def _partition(self, key: str, rng: np.random.Generator):
        blocks = self.options.get(key)
        if blocks is None:
            labels = rng.integers(0, 3, size=self.space.atom_count)
            blocks = [np.flatnonzero(labels == label).tolist() for label in np.unique(labels)]
        try:
            return make_partition(blocks, self.space)
        except (ValidationError, TypeError) as error:
            raise ConfigError(self.option_key(key), str(error))

    def _fixture(self):
        space = make_measure_space([0.25] * 4)
        P = make_partition([[0, 1], [2, 3]], space)
        E = cond_exp_matrix(space, P)
        residual = float(np.max(np.abs(E.apply([1.0, 3.0, 2.0, 6.0]) - np.array([2.0, 2.0, 4.0, 4.0]))))
        self.record("fixture", residual, lambda: {"E": E.to_dict()}, tolerance="condexp_averaging")

    def run(self):
        try:
            report = verify_condexp_properties(
                self.space, self.partition, self.Y, standard_pair(self.Y), self.trials,
                rng=self.rng(1), coarser=self.coarser, exponents=self.exponents,
                progress=self.progress)
        except ValidationError as error:
            raise ConfigError(self.option_key("coarser"), str(error))
        scenario = {"weights": list(self.space.weights), "blocks": self.partition.to_dict()["blocks"],
                    "coarser": self.coarser.to_dict()["blocks"], "Y": self.Y.to_dict(),
                    "exponents": [format_exponent(p) for p in self.exponents],
                    "trials": self.trials, "seed": self.seed}
        for check, residual in report.residuals.items():
            accumulator = self.accumulator(check, f"condexp_{check}", auxiliary=check in AUXILIARY_CHECKS)
            accumulator.update(residual, lambda: dict(scenario))
            accumulator.instances = report.instances or 1
        self._fixture()


class CounterexampleSuite(VerificationSuite):
    """Quantitative failure of c0- and l1-valued extensions of Banach limits"""

    name = "counterexample"

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.N = int(self.options.get("N", 10000))
        self.K = int(self.options.get("K", 100))
        self.sweep = [int(n) for n in self.options.get("N_sweep", [200, 1000, 5000, 10000])]
        self.sequences = int(self.options.get("shift_sequences", 1000))
        self.predual_dim = int(self.options.get("predual_dim", 3))
        if not 0 <= self.K <= self.N:
            raise ConfigError(self.option_key("K"), f"need 0 <= K <= N, got K={self.K}, N={self.N}")
        if any(n < self.K for n in self.sweep):
            raise ConfigError(self.option_key("N_sweep"), "every N must be at least K")
        self.diagnostics: List[Dict[str, Any]] = []

    def run(self):
        expected = (self.N - self.K) / self.N
        c0 = c0_counterexample(self.N, self.K)
        self.record("c0_min_head", abs(c0.min_head - expected), lambda: {
            "N": self.N, "K": self.K, "min_head": c0.min_head}, tolerance="counterexample",
            observed=c0.min_head)

        heads = [c0_counterexample(n, self.K).min_head for n in sorted(self.sweep)]
        drop = max([0.0] + [a - b for a, b in zip(heads, heads[1:])])
        self.record("c0_monotone", drop, lambda: {"N": sorted(self.sweep), "min_head": heads},
                    tolerance="counterexample")

        l1 = l1_counterexample(self.N, self.K)
        self.record("l1_gap", abs(l1.gap - (1.0 - self.K / self.N)), lambda: l1.to_rows()[0],
                    tolerance="counterexample", observed=l1.gap)

        for s in range(self.sequences):
            rng = self.rng(s)
            window = int(rng.integers(1, 200))
            x = rng.uniform(-1.0, 1.0, size=window + 1)
            excess = shift_defect(CesaroFunctional(window), x) - 2.0 * float(np.max(np.abs(x))) / window
            self.record("shift_defect", excess, lambda x=x, w=window: {"N": w, "x": x.tolist()})

        predual_N = min(self.N, 50)
        predual = predual_l1_extension(predual_N, self.predual_dim, rng=self.rng(self.sequences))
        self.record("predual_extension", predual.residual.max_residual,
                    lambda: {"N": predual_N, "f": predual.f.tolist(), **predual.residual.witness()})
        self.record("predual_extension", predual.max_prefix_excess, lambda: {
            "N": predual_N, "f": predual.f.tolist(), "prefix_excess": predual.max_prefix_excess})

        self.diagnostics = [
            {"space": "c0", "N": n, "K": self.K, "min_head": head}
            for n, head in zip(sorted(self.sweep), heads)
        ] + [{"space": "l1", **row} for row in l1.to_rows()]


class NormSuite(VerificationSuite):
    """Exact norm fixtures and the domination calculus"""

    name = "norms"

    def _fixtures(self):
        l2 = FunctionSpace(counting_measure(2), 2.0)
        hadamard = MatrixOperator([[1.0, 1.0], [1.0, -1.0]], l2, l2)
        value = operator_norm(hadamard).value
        self.record("exact_norm", abs(value - math.sqrt(2.0)), lambda: {"operator": hadamard.to_dict(),
                                                                       "value": value})
        regular = m_norm(hadamard)
        self.record("exact_norm", abs(regular - 2.0), lambda: {"operator": hadamard.to_dict(),
                                                              "m_norm": regular})
        row = MatrixOperator([[1.0, 1.0]], FunctionSpace(counting_measure(2), math.inf), scalar_space())
        estimate = operator_norm(row)
        self.record("exact_norm", abs(estimate.value - 2.0) + (0.0 if estimate.exact else 1.0),
                    lambda: {"operator": row.to_dict(), **estimate.to_dict()})

        for p in (1.0, 2.0, 3.0, math.inf):
            Y = FiniteBanachSpace(3, p)
            report = is_norming(standard_pair(Y))
            self.record("norming", report.max_defect, lambda Y=Y: {"Y": Y.to_dict()})

    def trial(self, t: int) -> TrialOutcome:
        rng = self.rng(t)
        n, k = (int(v) for v in rng.integers(1, 7, size=2))
        E = FunctionSpace(_random_measure(rng, n), float(rng.choice([1.0, 1.5, 2.0, 3.0, math.inf])))
        f = rng.standard_normal(n)
        numeric = dual_norm_numeric(E, f)
        closed = kothe_dual(E).norm(f)

        G = FunctionSpace(_random_measure(rng, k), float(rng.choice([1.0, 2.0, 3.0, math.inf])))
        if rng.random() < 0.5:
            E_reg = FunctionSpace(E.space, 1.0)
            G_reg = G
        else:
            E_reg = E
            G_reg = FunctionSpace(G.space, math.inf)
        T = MatrixOperator(rng.standard_normal((k, n)), E_reg, G_reg)
        regularity_case = automatic_regularity_case(T)
        plain, regular = operator_norm(T), operator_norm(least_dominant(T))

        split = atom_split_tuple(np.abs(regular.witness))
        attained = buhvalov_ratio(T, [split])

        # L^1 -> L^3 against its adjoint L^(3/2) -> L^inf, both exact
        D = MatrixOperator(rng.standard_normal((k, n)), FunctionSpace(E.space, 1.0),
                           FunctionSpace(G.space, 3.0))
        S = adjoint(D, kothe_pair(D.source), kothe_pair(D.target))
        forward = operator_norm(D).value
        adjoint_gap = abs(forward - operator_norm(S).value)

        def witness():
            return {"trial": t, "E": E.to_dict(), "f": f.tolist(), "operator": T.to_dict(),
                    "adjoint_source": D.to_dict()}
        scale = 1.0 + regular.value
        return {
            "dual_norm": (abs(numeric - closed) / (1.0 + closed), witness),
            "automatic_regularity": (abs(plain.value - regular.value) / scale if regularity_case else 1.0, witness),
            "buhvalov_attained": (abs(attained - regular.value) / scale, witness),
            "adjoint_norm": (adjoint_gap / (1.0 + forward), witness),
        }

    def run(self):
        self._fixtures()
        self.run_trials(self.trial, self.trials)


SUITE_CLASSES = {
    "extension": ExtensionSuite,
    "sqfn": SquareFunctionSuite,
    "condexp": ConditionalExpectationSuite,
    "counterexample": CounterexampleSuite,
    "norms": NormSuite,
}


class SuiteManager:
    """Holds the configured suites and runs the enabled ones in a fixed order"""

    def __init__(self):
        self.suites: Dict[str, VerificationSuite] = {}
        self.results: List[CheckResult] = []

    def add_suite(self, suite: VerificationSuite):
        self.suites[suite.name] = suite

    def get_enabled_suites(self, names: Optional[Sequence[str]] = None) -> List[VerificationSuite]:
        selected = names or SUITE_NAMES
        return [self.suites[name] for name in SUITE_NAMES
                if name in selected and name in self.suites and self.suites[name].enabled]

    def run(self, names: Optional[Sequence[str]] = None) -> List[CheckResult]:
        """Run the enabled suites concurrently; results stay in suite order"""
        suites = self.get_enabled_suites(names)
        self.results = []
        if not suites:
            return self.results
        with ThreadPoolExecutor(max_workers=len(suites)) as executor:
            for results in executor.map(lambda suite: suite.execute(), suites):
                self.results.extend(results)
        return self.results

    def get_suite_report(self) -> Dict[str, Any]:
        by_suite: Dict[str, List[CheckResult]] = {}
        for result in self.results:
            by_suite.setdefault(result.suite, []).append(result)
        return {
            "suites": list(by_suite),
            "checks": [result.to_row() for result in self.results],
            "pass": all(result.passed for result in self.results),
            "failures": [f"{r.suite}.{r.check}" for r in self.results if not r.passed],
        }
