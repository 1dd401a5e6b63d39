# app/services/verification.py

"""Self-certifying oracle checks run by the `verify` command."""

import logging
from typing import Callable, List, Tuple

import numpy as np

from app.config import settings
from app.errors import LabError
from app.models.schemas import CheckResult, VerificationReport, VerifyConfig
from app.services.ising import make_parameters
from app.services.measures import entanglement_record, purity, purity_bruteforce
from app.services.partitions import balanced_bipartitions, family_iter
from app.services.solver import dense_ground_state, lanczos_ground_state
from app.services.state import (
    check_normalized,
    ghz_state,
    haar_random_state,
    join_index,
    make_bipartition,
    product_plus_state,
    split_index,
    to_matrix,
)

logger = logging.getLogger(__name__)

SOLVER_GRID = [(4, 0.3, 0.0), (6, 0.5, 0.0), (7, 0.8, 1e-4), (8, 0.5, 1e-2), (10, 0.4, 0.0)]


def _random_cases(config: VerifyConfig):
    rng = np.random.default_rng(config.seed)
    for _ in range(config.cases):
        n = int(rng.integers(2, config.max_n + 1))
        mask = int(rng.integers(1, (1 << n) - 1))
        yield haar_random_state(n, rng), make_bipartition(n, mask)


def check_purity_oracle(config: VerifyConfig) -> CheckResult:
    worst = max(abs(purity(state, part) - purity_bruteforce(state, part)) for state, part in _random_cases(config))
    return CheckResult(
        name="purity_vs_quadruple_sum",
        passed=worst < 1e-10,
        detail=f"{config.cases} seeded random states, n <= {config.max_n}",
        max_error=worst,
    )


def check_bounds(config: VerifyConfig) -> CheckResult:
    worst = 0.0
    for state, part in _random_cases(config):
        record = entanglement_record(state, part)
        worst = max(worst, 1.0 - record.participation, record.participation - part.dim_a)
    return CheckResult(
        name="participation_bounds",
        passed=worst <= 1e-9,
        detail="1 <= N_AB <= N_A on every random record",
        max_error=max(worst, 0.0),
    )


def check_complement_symmetry(config: VerifyConfig) -> CheckResult:
    worst = 0.0
    for state, part in _random_cases(config):
        m = to_matrix(state, part).entries
        purity_b = float(np.sum(np.abs(m.conj().T @ m) ** 2))
        worst = max(worst, abs(purity(state, part) - purity_b))
    return CheckResult(name="complement_symmetry", passed=worst < 1e-12, max_error=worst)


def check_split_bijection(config: VerifyConfig) -> CheckResult:
    failures = 0
    for n in range(2, config.max_n + 1):
        part = make_bipartition(n, sum(1 << i for i in range(0, n, 2)))
        pairs = {split_index(k, part) for k in range(1 << n)}
        inverse_ok = all(join_index(*split_index(k, part), part) == k for k in range(1 << n))
        if len(pairs) != 1 << n or not inverse_ok:
            failures += 1
    return CheckResult(name="split_index_bijection", passed=failures == 0, detail=f"n = 2..{config.max_n}")


def check_solvers(config: VerifyConfig) -> CheckResult:
    worst_energy, worst_overlap = 0.0, 0.0
    for n, g, eps in SOLVER_GRID:
        params = make_parameters(n, g, eps)
        dense = dense_ground_state(params)
        krylov = lanczos_ground_state(params, tol=config.tol, max_iter=config.max_iter, seed=config.seed)
        worst_energy = max(worst_energy, abs(dense.energy - krylov.energy))
        overlap = abs(np.vdot(dense.state.amplitudes, krylov.state.amplitudes))
        worst_overlap = max(worst_overlap, 1.0 - overlap)
    return CheckResult(
        name="dense_vs_lanczos",
        passed=worst_energy <= 1e-9 and worst_overlap <= 1e-8,
        detail=f"max |dE| = {worst_energy:.2e}, max 1-|overlap| = {worst_overlap:.2e}",
        max_error=worst_energy,
    )


def check_fixed_points(config: VerifyConfig) -> CheckResult:
    worst = 0.0
    for n in (8, 9, 10):
        for state, expected in ((ghz_state(n), 2.0), (product_plus_state(n), 1.0)):
            values = [entanglement_record(state, part).participation for part in family_iter(balanced_bipartitions(n))]
            worst = max(worst, float(np.max(np.abs(np.asarray(values) - expected))))
    return CheckResult(
        name="ghz_and_product_fixed_points",
        passed=worst <= 1e-12,
        detail="GHZ gives N_AB = 2 and |+>^n gives N_AB = 1 on every balanced cut, n = 8..10",
        max_error=worst,
    )


def check_normalization(config: VerifyConfig) -> CheckResult:
    vectors = [haar_random_state(n, config.seed + n).amplitudes for n in range(1, config.max_n + 1)]
    if config.inject_corruption:
        corrupted = np.zeros(4, dtype=np.complex128)
        corrupted[0] = np.sqrt(0.9)
        vectors.append(corrupted)
    worst = 0.0
    try:
        for amplitudes in vectors:
            worst = max(worst, check_normalized(amplitudes, tol=settings.normalization_tol))
    except LabError as e:
        return CheckResult(name="normalization", passed=False, detail=e.detail)
    return CheckResult(name="normalization", passed=True, max_error=worst)


CHECKS: List[Tuple[str, Callable[[VerifyConfig], CheckResult]]] = [
    ("normalization", check_normalization),
    ("split_index_bijection", check_split_bijection),
    ("purity_vs_quadruple_sum", check_purity_oracle),
    ("participation_bounds", check_bounds),
    ("complement_symmetry", check_complement_symmetry),
    ("ghz_and_product_fixed_points", check_fixed_points),
    ("dense_vs_lanczos", check_solvers),
]


def run_verification(config: VerifyConfig) -> VerificationReport:
    checks = []
    for name, check in CHECKS:
        try:
            result = check(config)
        except LabError as e:
            result = CheckResult(name=name, passed=False, detail=f"raised: {e.detail}")
        level = logging.INFO if result.passed else logging.ERROR
        logger.log(level, "%s: %s %s", name, "pass" if result.passed else "FAIL", result.detail)
        checks.append(result)
    return VerificationReport(checks=checks)
