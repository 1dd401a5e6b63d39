# app/services/analysis.py

"""
Statistics of the bipartite-entanglement distribution: summaries over a partition
family, sweeps in the coupling g, finite-size scaling, contiguous-block entropy
and the Haar-random baseline.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from app.errors import ContractViolation, SolverError
from app.models.schemas import (
    BaselineSummary,
    BlockEntropyPoint,
    BlockEntropyProfile,
    DistributionSummary,
    EntanglementRecord,
    FitResult,
    HistogramBin,
    PartitionFamily,
    PeakEstimate,
    PureState,
    ScalingPoint,
    SigmaRelReport,
    SweepPoint,
    SweepResult,
)
from app.services.fitting import SHIFT, composite_exponent, composite_sigma_rel, numeric_exponent, reference_sigma_rel
from app.services.ising import make_parameters
from app.services.measures import entanglement_records, entropy
from app.services.partitions import (
    balanced_bipartitions,
    contiguous_blocks,
    family_iter,
    family_size,
    parse_partition_spec,
)
from app.services.solver import ground_state
from app.services.state import haar_random_state, is_contiguous, make_bipartition

logger = logging.getLogger(__name__)

G_CEILING = 0.99
REFINE_STEP = 0.002
REFINE_HALFWIDTH = 0.03
BLOCK_SLOPE_WINDOW = (0.10, 0.25)
BLOCK_SLOPE_MARGIN = 0.005


class RunningStats:
    """Streaming count / mean / variance / extremes (Welford update)."""

    def __init__(self):
        self.count = 0
        self.mean = 0.0
        self._m2 = 0.0
        self.min = float("inf")
        self.max = float("-inf")

    def add(self, x: float) -> None:
        self.count += 1
        delta = x - self.mean
        self.mean += delta / self.count
        self._m2 += delta * (x - self.mean)
        self.min = min(self.min, x)
        self.max = max(self.max, x)

    def extend(self, values: Iterable[float]) -> "RunningStats":
        for x in values:
            self.add(float(x))
        return self

    @property
    def variance(self) -> float:
        # population variance: the family is the whole population
        return self._m2 / self.count if self.count else 0.0

    @property
    def std(self) -> float:
        return float(np.sqrt(max(self.variance, 0.0)))


def measure_values(records: Sequence[EntanglementRecord], measure: str = "participation") -> np.ndarray:
    if measure == "participation":
        return np.array([r.participation for r in records])
    if measure == "linear":
        return np.array([1.0 - r.purity for r in records])
    if measure == "entropy":
        if any(r.entropy is None for r in records):
            raise ContractViolation("entropy measure requested but records carry no entropy")
        return np.array([r.entropy for r in records])
    raise ContractViolation(f"unknown measure {measure!r}")


def histogram(values: np.ndarray, bins: int) -> List[HistogramBin]:
    low, high = float(np.min(values)), float(np.max(values))
    if high - low <= 1e-12 * max(abs(high), 1.0):
        return [HistogramBin(low=low, high=high, count=int(values.size))]
    counts, edges = np.histogram(values, bins=bins, range=(low, high))
    return [HistogramBin(low=float(edges[i]), high=float(edges[i + 1]), count=int(c)) for i, c in enumerate(counts)]


def summarize(values: Iterable[float], bins: int = 50, measure: str = "participation") -> DistributionSummary:
    values = np.asarray(list(values), dtype=np.float64)
    if values.size == 0:
        raise ContractViolation("cannot summarize an empty set of records")
    if bins < 1:
        raise ContractViolation("bins must be at least 1")

    stats = RunningStats().extend(values)
    return DistributionSummary(
        measure=measure,
        count=stats.count,
        mu=stats.mean,
        sigma=stats.std,
        min=stats.min,
        max=stats.max,
        histogram=histogram(values, bins),
    )


def distribution(
    state: PureState,
    family: PartitionFamily,
    bins: int = 50,
    with_entropy: bool = False,
    measure: str = "participation",
    threads: int = 1,
) -> Tuple[DistributionSummary, List[EntanglementRecord]]:
    if family.n != state.n:
        raise ContractViolation(f"family has n={family.n} but state has n={state.n}")
    if family_size(family) == 0:
        raise ContractViolation("partition family is empty")

    records = entanglement_records(
        state, family, with_entropy=with_entropy or measure == "entropy", threads=threads
    )
    return summarize(measure_values(records, measure), bins=bins, measure=measure), records


def contiguity_breakdown(
    records: Sequence[EntanglementRecord], bins: int = 50, measure: str = "participation"
) -> Dict[str, Optional[DistributionSummary]]:
    """Separate summaries for cuts whose subsystem A is one block of sites and for the rest."""
    groups = {"contiguous": [], "scattered": []}
    for record in records:
        groups["contiguous" if is_contiguous(record.part.mask) else "scattered"].append(record)
    return {
        name: summarize(measure_values(members, measure), bins=bins, measure=measure) if members else None
        for name, members in groups.items()
    }


# =======================
# SWEEPS IN g
# =======================

def make_grid(g_min: float, g_max: float, g_step: float) -> np.ndarray:
    if g_step <= 0:
        raise ContractViolation("g_step must be positive")
    if g_min > g_max:
        raise ContractViolation(f"empty g grid: g_min={g_min} > g_max={g_max}")
    count = int(np.floor((g_max - g_min) / g_step + 1e-9)) + 1
    return np.round(g_min + g_step * np.arange(count), 10)


def locate_maximum(grid: Sequence[float], values: Sequence[float]) -> PeakEstimate:
    """Discrete argmax refined by the parabola through it and its two neighbours."""
    grid = np.asarray(grid, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if grid.size == 0 or grid.shape != values.shape:
        raise ContractViolation("grid and values must be nonempty and of equal length")

    i = int(np.argmax(values))
    if grid.size == 1:
        return PeakEstimate(location=float(grid[0]), value=float(values[0]), uncertainty=0.0, index=0)
    if i == 0 or i == grid.size - 1:
        neighbour = grid[1] - grid[0] if i == 0 else grid[-1] - grid[-2]
        return PeakEstimate(location=float(grid[i]), value=float(values[i]), uncertainty=0.5 * neighbour, index=i)

    xs = grid[i - 1 : i + 2] - grid[i]
    ys = values[i - 1 : i + 2]
    uncertainty = 0.5 * float(min(-xs[0], xs[2]))
    curvature, slope, intercept = np.polyfit(xs, ys, 2)
    if curvature >= 0:
        return PeakEstimate(location=float(grid[i]), value=float(values[i]), uncertainty=uncertainty, index=i)

    offset = float(np.clip(-slope / (2.0 * curvature), xs[0], xs[2]))
    return PeakEstimate(
        location=float(grid[i] + offset),
        value=float(np.polyval([curvature, slope, intercept], offset)),
        uncertainty=uncertainty,
        index=i,
    )


def _sweep_point(
    n: int,
    epsilon: float,
    g: float,
    family: PartitionFamily,
    measure: str,
    solver: str,
    tol: Optional[float],
    max_iter: Optional[int],
    seed: Optional[int],
) -> SweepPoint:
    params = make_parameters(n, float(g), epsilon)
    try:
        result = ground_state(params, solver=solver, tol=tol, max_iter=max_iter, seed=seed)
    except SolverError as e:
        raise e.at_coupling(float(g)) from e
    summary, _ = distribution(result.state, family, bins=1, measure=measure)
    return SweepPoint(g=float(g), mu=summary.mu, sigma=summary.sigma, energy=result.energy, gap=result.gap)


def _evaluate(grid: Sequence[float], threads: int, label: str, **kwargs) -> List[SweepPoint]:
    def job(g):
        return _sweep_point(g=g, **kwargs)

    with tqdm(total=len(grid), desc=label, unit="g", leave=False, disable=None) as progress:
        if threads <= 1 or len(grid) < 2:
            points = []
            for g in grid:
                points.append(job(g))
                progress.update()
            return points
        with ThreadPoolExecutor(max_workers=threads) as pool:
            points = []
            for point in pool.map(job, grid):
                points.append(point)
                progress.update()
            return points


def _refinement_grid(coarse: np.ndarray, centers: Iterable[float], known: Iterable[float]) -> List[float]:
    seen = {round(g, 9) for g in known}
    extra = set()
    for center in centers:
        low = max(coarse[0], center - REFINE_HALFWIDTH)
        high = min(coarse[-1], center + REFINE_HALFWIDTH)
        start = center - REFINE_STEP * np.floor((center - low) / REFINE_STEP + 1e-9)
        for g in make_grid(start, high, REFINE_STEP):
            if round(g, 9) not in seen:
                extra.add(round(float(g), 10))
    return sorted(extra)


def sweep_g(
    n: int,
    epsilon: float,
    g_grid: Sequence[float],
    family_kind: str = "balanced",
    measure: str = "participation",
    solver: str = "auto",
    refine: bool = False,
    threads: int = 1,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
    seed: Optional[int] = 0,
) -> SweepResult:
    """
    Ground state -> distribution -> (mu, sigma) for every g, then the maxima of both
    curves. With `refine`, a 0.002-step pass within +-0.03 of each coarse maximum is
    merged into the curves before the maxima are located.
    """
    grid = np.asarray(g_grid, dtype=np.float64)
    if grid.size == 0:
        raise ContractViolation("g grid is empty")
    if np.any(np.diff(grid) <= 0):
        raise ContractViolation("g grid must be strictly increasing")
    if grid[0] < 0.0 or grid[-1] > G_CEILING + 1e-12:
        raise ContractViolation(f"g grid must lie inside [0, {G_CEILING}]")

    family = parse_partition_spec(family_kind, n)
    common = dict(
        n=n, epsilon=epsilon, family=family, measure=measure, solver=solver, tol=tol, max_iter=max_iter, seed=seed
    )
    logger.info("Sweeping n=%d eps=%g over %d couplings (%s)", n, epsilon, grid.size, family.label)
    points = _evaluate(grid, threads, f"n={n} coarse", **common)

    if refine and grid.size >= 3:
        centers = {
            float(grid[int(np.argmax([p.mu for p in points]))]),
            float(grid[int(np.argmax([p.sigma for p in points]))]),
        }
        extra = _refinement_grid(grid, centers, grid)
        if extra:
            logger.info("Refining n=%d around g=%s with %d extra couplings", n, sorted(centers), len(extra))
            points = sorted(points + _evaluate(extra, threads, f"n={n} refine", **common), key=lambda p: p.g)

    merged = np.array([p.g for p in points])
    mu_curve = np.array([p.mu for p in points])
    sigma_curve = np.array([p.sigma for p in points])
    mu_peak = locate_maximum(merged, mu_curve)
    sigma_peak = locate_maximum(merged, sigma_curve)

    return SweepResult(
        n=n,
        epsilon=epsilon,
        family=family.label,
        measure=measure,
        points=points,
        g_mu_max=mu_peak.location,
        g_mu_max_uncertainty=mu_peak.uncertainty,
        g_sigma_max=sigma_peak.location,
        g_sigma_max_uncertainty=sigma_peak.uncertainty,
        mu_max=mu_peak.value,
        sigma_max=sigma_peak.value,
        sigma_at_mu_max=float(np.interp(mu_peak.location, merged, sigma_curve)),
    )


def scaling_point(sweep: SweepResult) -> ScalingPoint:
    return ScalingPoint(
        n=sweep.n,
        epsilon=sweep.epsilon,
        g_mu_max=sweep.g_mu_max,
        g_mu_max_uncertainty=sweep.g_mu_max_uncertainty,
        g_sigma_max=sweep.g_sigma_max,
        g_sigma_max_uncertainty=sweep.g_sigma_max_uncertainty,
        mu_max=sweep.mu_max,
        sigma_max=sweep.sigma_max,
        sigma_at_mu_max=sweep.sigma_at_mu_max,
    )


def scaling_study(
    n_list: Sequence[int],
    epsilon: float,
    g_grid: Sequence[float],
    refine: bool = True,
    solver: str = "auto",
    threads: int = 1,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
    seed: Optional[int] = 0,
) -> Tuple[List[ScalingPoint], List[SweepResult]]:
    """One balanced-family sweep per chain length; returns the extracted extrema and the sweeps."""
    points, sweeps = [], []
    for n in n_list:
        sweep = sweep_g(
            n, epsilon, g_grid, solver=solver, refine=refine, threads=threads, tol=tol, max_iter=max_iter, seed=seed
        )
        point = scaling_point(sweep)
        if not point.ordering_holds:
            logger.warning(
                "n=%d: g(sigma_max)=%.4f is not below g(mu_max)=%.4f", n, point.g_sigma_max, point.g_mu_max
            )
        sweeps.append(sweep)
        points.append(point)
    return points, sweeps


def _trend(values: Sequence[float]) -> str:
    steps = np.diff(values)
    if steps.size == 0 or np.all(steps == 0):
        return "flat"
    if np.all(steps > 0):
        return "rising"
    if np.all(steps < 0):
        return "falling"
    return "mixed"


def sigma_rel(
    points: Sequence[ScalingPoint],
    mu_fit: Optional[FitResult] = None,
    sigma_fit: Optional[FitResult] = None,
    composite_until: int = 100,
) -> SigmaRelReport:
    """
    sigma(mu_max) / mu_max per n next to the published composite at the same n, plus the
    composite curve and its large-n power when fits are given.

    The published composite rises up to n of about 17 and falls after that.
    """
    values = []
    for p in points:
        if p.mu_max <= 0:
            raise ContractViolation(f"n={p.n}: mu_max must be positive")
        values.append(0.0 if p.sigma_at_mu_max == 0 else p.sigma_at_mu_max / p.mu_max)

    ns = [p.n for p in points]
    report = SigmaRelReport(
        ns=ns,
        values=values,
        decreasing=bool(np.all(np.diff(values) < 0)),
        trend=_trend(values),
        reference_values=reference_sigma_rel(ns).tolist() if ns and min(ns) > SHIFT else [],
    )
    if mu_fit is not None and sigma_fit is not None:
        composite_ns = np.arange(max(SHIFT + 1, min(ns, default=SHIFT + 1)), composite_until + 1)
        report.composite_ns = composite_ns.tolist()
        report.composite_values = composite_sigma_rel(mu_fit.coefficients, sigma_fit.coefficients, composite_ns).tolist()
        report.exponent = composite_exponent(mu_fit.coefficients, sigma_fit.coefficients)
        report.numeric_exponent = numeric_exponent(mu_fit.coefficients, sigma_fit.coefficients)
    return report


# =======================
# BLOCK ENTROPY AND BASELINE
# =======================

def _log_slope(lengths: Sequence[int], entropies: Sequence[float]) -> Optional[float]:
    if len(lengths) < 2:
        return None
    return float(np.polyfit(np.log2(np.asarray(lengths, dtype=np.float64)), np.asarray(entropies), 1)[0])


def entropy_slope(points: Sequence[BlockEntropyPoint], central: bool = False) -> Optional[float]:
    """Least-squares slope of S(l) against log2(l), position-averaged or for the central blocks."""
    if central:
        points = [p for p in points if p.central_entropy is not None]
        return _log_slope([p.length for p in points], [p.central_entropy for p in points])
    return _log_slope([p.length for p in points], [p.mean_entropy for p in points])


def central_block(n: int, length: int) -> int:
    """Mask of the length-l block whose midpoint is closest to the middle of the chain."""
    return ((1 << length) - 1) << ((n - length) // 2)


def block_entropy_profile(
    n: int,
    g: float,
    epsilon: float = 0.0,
    max_len: Optional[int] = None,
    solver: str = "auto",
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
    seed: Optional[int] = 0,
) -> BlockEntropyProfile:
    """
    Entropy of every contiguous block, averaged over positions for each length, and the
    entropy of the central block of each length.

    On an open chain a block touching an end has one cut instead of two, so the
    position average can dip at the largest lengths; the central series has two cuts
    at every length.
    """
    max_len = n // 2 if max_len is None else max_len
    family = contiguous_blocks(n, max_len)
    result = ground_state(make_parameters(n, g, epsilon), solver=solver, tol=tol, max_iter=max_iter, seed=seed)
    records = entanglement_records(result.state, family, with_entropy=True)

    by_length: Dict[int, List[float]] = {}
    for record in records:
        by_length.setdefault(record.part.n_a, []).append(record.entropy)
    points = [
        BlockEntropyPoint(
            length=length,
            mean_entropy=float(np.mean(values)),
            blocks=len(values),
            central_entropy=entropy(result.state, make_bipartition(n, central_block(n, length))),
        )
        for length, values in sorted(by_length.items())
    ]
    means = np.array([p.mean_entropy for p in points])
    centrals = np.array([p.central_entropy for p in points])
    slope = entropy_slope(points)

    profile = BlockEntropyProfile(
        n=n,
        g=g,
        epsilon=epsilon,
        points=points,
        slope=slope,
        increasing=bool(np.all(np.diff(means) > 0)),
        central_slope=entropy_slope(points, central=True),
        central_increasing=bool(np.all(np.diff(centrals) > 0)),
        marginal_slope=slope is not None
        and min(abs(slope - BLOCK_SLOPE_WINDOW[0]), abs(slope - BLOCK_SLOPE_WINDOW[1])) < BLOCK_SLOPE_MARGIN,
    )
    if not profile.increasing:
        dips = [int(points[i + 1].length) for i in np.flatnonzero(np.diff(means) <= 0)]
        logger.info("Position-averaged S(l) on n=%d does not rise at l=%s (blocks at the open ends)", n, dips)
    if profile.marginal_slope:
        logger.info("S(l) slope %.4f is within %.3f of the window %s", slope, BLOCK_SLOPE_MARGIN, BLOCK_SLOPE_WINDOW)
    return profile


def random_baseline(n: int, samples: int, seed: int = 0, bins: int = 50) -> BaselineSummary:
    """mu and sigma over balanced cuts for seeded Haar-random states; ensemble mean and spread."""
    if samples < 1:
        raise ContractViolation("samples must be at least 1")

    parts = list(family_iter(balanced_bipartitions(n)))
    mus, sigmas, pooled = [], [], []
    for child in tqdm(np.random.SeedSequence(seed).spawn(samples), desc=f"haar n={n}", leave=False, disable=None):
        state = haar_random_state(n, child)
        values = measure_values(entanglement_records(state, parts))
        stats = RunningStats().extend(values)
        mus.append(stats.mean)
        sigmas.append(stats.std)
        pooled.extend(values)

    spread = 1 if samples > 1 else 0
    return BaselineSummary(
        n=n,
        samples=samples,
        seed=seed,
        mu_mean=float(np.mean(mus)),
        mu_std=float(np.std(mus, ddof=spread)),
        sigma_mean=float(np.mean(sigmas)),
        sigma_std=float(np.std(sigmas, ddof=spread)),
        pooled=summarize(pooled, bins=bins),
    )
