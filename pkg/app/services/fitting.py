# app/services/fitting.py

"""
Finite-size fits of the sweep extrema against the chain length n.

    rational_shift     g(n)  = 0.5 + a / (n^2 + b n + c)
    quadratic_shifted  mu(n) = 2 + a (n - 6) + b (n - 6)^2
    sqrt_shifted       s(n)  = c + d sqrt(n - 6)
"""

import logging
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import least_squares

from app.errors import FitError
from app.models.schemas import FitOutcome, FitResult, ScalingPoint

logger = logging.getLogger(__name__)

CRITICAL_COUPLING = 0.5
SHIFT = 6

PARAMETERS = {
    "rational_shift": ("a", "b", "c"),
    "quadratic_shifted": ("a", "b"),
    "sqrt_shifted": ("c", "d"),
}

# Published finite-size fits for the purely transverse chain (eps = 0).
REFERENCE_COEFFICIENTS: Dict[str, Tuple[str, Dict[str, float]]] = {
    "g_mu_max": ("rational_shift", {"a": 5.43, "b": 3.09, "c": -35.59}),
    "g_sigma_max": ("rational_shift", {"a": 0.14, "b": -13.01, "c": 46.39}),
    "mu_max": ("quadratic_shifted", {"a": 0.019, "b": 0.007}),
    "sigma_at_mu_max": ("sqrt_shifted", {"c": -0.077, "d": 0.11}),
}

RATIONAL_START_B = np.linspace(-20.0, 20.0, 9)
RATIONAL_START_C = np.linspace(-60.0, 60.0, 13)


def evaluate_model(model: str, coefficients: Dict[str, float], n) -> np.ndarray:
    n = np.asarray(n, dtype=np.float64)
    if model == "rational_shift":
        return CRITICAL_COUPLING + coefficients["a"] / (n**2 + coefficients["b"] * n + coefficients["c"])
    x = n - SHIFT
    if model == "quadratic_shifted":
        return 2.0 + coefficients["a"] * x + coefficients["b"] * x**2
    if model == "sqrt_shifted":
        return coefficients["c"] + coefficients["d"] * np.sqrt(x)
    raise FitError(f"unknown fit model {model!r}")


def _linear_fit(ns: np.ndarray, values: np.ndarray, model: str) -> Dict[str, float]:
    x = ns - SHIFT
    if model == "quadratic_shifted":
        design, target = np.column_stack([x, x**2]), values - 2.0
    else:
        design, target = np.column_stack([np.ones_like(x), np.sqrt(x)]), values

    if np.linalg.matrix_rank(design) < design.shape[1]:
        raise FitError(f"{model}: rank-deficient design for n={ns.astype(int).tolist()}")
    solution, *_ = np.linalg.lstsq(design, target, rcond=None)
    return dict(zip(PARAMETERS[model], (float(v) for v in solution)))


def _rational_starts(ns: np.ndarray, values: np.ndarray) -> List[np.ndarray]:
    shifted = values - CRITICAL_COUPLING
    starts = []

    # a - b*y*n - c*y = y*n^2 is exact for noiseless data
    design = np.column_stack([np.ones_like(ns), -shifted * ns, -shifted])
    if np.linalg.matrix_rank(design) == 3:
        solution, *_ = np.linalg.lstsq(design, shifted * ns**2, rcond=None)
        starts.append(solution)

    for b, c in product(RATIONAL_START_B, RATIONAL_START_C):
        denominators = ns**2 + b * ns + c
        if np.any(denominators <= 0):
            continue
        u = 1.0 / denominators
        starts.append(np.array([float(u @ shifted / (u @ u)), b, c]))
    return starts


def _rational_fit(ns: np.ndarray, values: np.ndarray) -> Dict[str, float]:
    def residuals(p: np.ndarray) -> np.ndarray:
        return CRITICAL_COUPLING + p[0] / (ns**2 + p[1] * ns + p[2]) - values

    best = None
    for start in _rational_starts(ns, values):
        with np.errstate(divide="ignore", invalid="ignore"):
            solution = least_squares(
                residuals, start, method="lm", xtol=1e-10, ftol=1e-15, gtol=1e-15, max_nfev=200 * 4
            )
        if solution.status <= 0 or not np.all(np.isfinite(solution.fun)):
            continue
        a, b, c = solution.x
        if np.any(ns**2 + b * ns + c <= 0):
            continue
        if best is None or solution.cost < best.cost:
            best = solution

    if best is None:
        raise FitError(f"rational_shift: no start converged for n={ns.astype(int).tolist()}")
    return dict(zip(PARAMETERS["rational_shift"], (float(v) for v in best.x)))


def fit_model(ns: Sequence[int], values: Sequence[float], model: str, target: str = "") -> FitResult:
    """Least-squares fit of one model; linear models in closed form, the rational one by multi-start LM."""
    if model not in PARAMETERS:
        raise FitError(f"unknown fit model {model!r}")
    ns_array = np.asarray(ns, dtype=np.float64)
    observed = np.asarray(values, dtype=np.float64)

    if ns_array.shape != observed.shape:
        raise FitError(f"{model}: {ns_array.size} sizes but {observed.size} values")
    if ns_array.size < len(PARAMETERS[model]):
        raise FitError(f"{model}: {ns_array.size} points for {len(PARAMETERS[model])} free parameters")
    if np.any(ns_array <= SHIFT):
        raise FitError(f"{model}: every n must exceed {SHIFT}")
    if not np.all(np.isfinite(observed)):
        raise FitError(f"{model}: non-finite observations")

    if model == "rational_shift":
        coefficients = _rational_fit(ns_array, observed)
    else:
        coefficients = _linear_fit(ns_array, observed, model)

    predicted = evaluate_model(model, coefficients, ns_array)
    return FitResult(
        model=model,
        target=target,
        coefficients=coefficients,
        rss=float(np.sum((predicted - observed) ** 2)),
        ns=[int(n) for n in ns_array],
        observed=observed.tolist(),
        predicted=predicted.tolist(),
    )


def fit_scaling(points: Sequence[ScalingPoint]) -> List[FitOutcome]:
    """Fits every scaling quantity; a failing model is reported in place."""
    ns = [p.n for p in points]
    outcomes = []
    for target, (model, reference) in REFERENCE_COEFFICIENTS.items():
        values = [getattr(p, target) for p in points]
        reference_predicted = evaluate_model(model, reference, ns)
        outcome = FitOutcome(
            target=target,
            model=model,
            reference_predicted=reference_predicted.tolist(),
            reference_max_deviation=float(np.max(np.abs(reference_predicted - np.asarray(values)))) if values else None,
        )
        try:
            outcome.result = fit_model(ns, values, model, target=target)
        except FitError as e:
            logger.warning("Fit of %s failed: %s", target, e.detail)
            outcome.error = e.detail
        outcomes.append(outcome)
    return outcomes


def composite_exponent(mu_coefficients: Dict[str, float], sigma_coefficients: Dict[str, float]) -> Optional[float]:
    """Large-n power of sqrt_shifted / quadratic_shifted, read off the leading terms; None when the width vanishes."""
    if sigma_coefficients["d"] != 0:
        numerator = 0.5
    elif sigma_coefficients["c"] != 0:
        numerator = 0.0
    else:
        return None

    if mu_coefficients["b"] != 0:
        denominator = 2.0
    elif mu_coefficients["a"] != 0:
        denominator = 1.0
    else:
        denominator = 0.0
    return numerator - denominator


def composite_sigma_rel(mu_coefficients: Dict[str, float], sigma_coefficients: Dict[str, float], n) -> np.ndarray:
    return evaluate_model("sqrt_shifted", sigma_coefficients, n) / evaluate_model("quadratic_shifted", mu_coefficients, n)


def reference_sigma_rel(n) -> np.ndarray:
    """The composite built from the published mu_max and sigma_at_mu_max coefficients."""
    return composite_sigma_rel(REFERENCE_COEFFICIENTS["mu_max"][1], REFERENCE_COEFFICIENTS["sigma_at_mu_max"][1], n)


def numeric_exponent(mu_coefficients: Dict[str, float], sigma_coefficients: Dict[str, float]) -> Optional[float]:
    """Log-log slope of the composite between n = 1e6 and 1e7; None if the composite vanishes there."""
    low, high = 1e6, 1e7
    values = np.abs(composite_sigma_rel(mu_coefficients, sigma_coefficients, [low, high]))
    if not np.all(np.isfinite(values)) or np.any(values == 0):
        return None
    return float(np.log(values[1] / values[0]) / np.log(high / low))
