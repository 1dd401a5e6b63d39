from typing import Dict, List, Literal, Optional, Tuple, Type, TypeVar

import numpy as np
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    ValidationError,
    computed_field,
    field_validator,
    model_validator,
)

from app.config import settings
from app.errors import ContractViolation

Model = TypeVar("Model", bound=BaseModel)

SolverName = Literal["auto", "dense", "lanczos"]
MeasureName = Literal["participation", "entropy", "linear"]
FitModelName = Literal["rational_shift", "quadratic_shifted", "sqrt_shifted"]


def describe_validation_error(error: ValidationError) -> str:
    parts = []
    for err in error.errors():
        field = ".".join(str(loc) for loc in err["loc"]) or "value"
        parts.append(f"{field}: {err['msg']}")
    return "; ".join(parts)


def validated(model_cls: Type[Model], **fields) -> Model:
    """Builds a model, turning validation failures into a ContractViolation."""
    try:
        return model_cls(**fields)
    except ValidationError as e:
        raise ContractViolation(f"{model_cls.__name__}: {describe_validation_error(e)}") from e


# =======================
# STATE SCHEMAS
# =======================

class PureState(BaseModel):
    """Normalized amplitude vector over the 2^n computational basis states."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n: int = Field(ge=1)
    amplitudes: np.ndarray

    @field_validator("amplitudes", mode="before")
    @classmethod
    def _as_complex_vector(cls, value):
        array = np.array(value, dtype=np.complex128).reshape(-1)
        array.setflags(write=False)
        return array

    @model_validator(mode="after")
    def _check_length_and_norm(self):
        if self.amplitudes.shape[0] != 2 ** self.n:
            raise ValueError(f"expected {2 ** self.n} amplitudes for n={self.n}, got {self.amplitudes.shape[0]}")
        drift = abs(float(np.vdot(self.amplitudes, self.amplitudes).real) - 1.0)
        if drift > settings.normalization_tol:
            raise ValueError(f"state is not normalized (|norm^2 - 1| = {drift:.3e})")
        return self

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def is_real(self) -> bool:
        return not np.any(self.amplitudes.imag)


class Bipartition(BaseModel):
    """
    Split of n sites into subsystems A (set bits of `mask`) and B.
    Orientation is normalized so that n_A <= n_B.
    """

    model_config = ConfigDict(frozen=True)

    n: int = Field(ge=2)
    mask: int = Field(ge=1)

    @model_validator(mode="before")
    @classmethod
    def _orient(cls, data):
        if isinstance(data, dict) and "n" in data and "mask" in data:
            n, mask = int(data["n"]), int(data["mask"])
            full = (1 << n) - 1
            if 0 < mask < full and 2 * mask.bit_count() > n:
                mask = full ^ mask
            data = {**data, "n": n, "mask": mask}
        return data

    @model_validator(mode="after")
    def _both_nonempty(self):
        if self.mask >= 1 << self.n:
            raise ValueError(f"mask {self.mask:#b} has bits beyond n={self.n}")
        if not 1 <= self.mask.bit_count() <= self.n - 1:
            raise ValueError("both subsystems must be nonempty")
        return self

    @property
    def n_a(self) -> int:
        return self.mask.bit_count()

    @property
    def n_b(self) -> int:
        return self.n - self.n_a

    @property
    def dim_a(self) -> int:
        return 1 << self.n_a

    @property
    def dim_b(self) -> int:
        return 1 << self.n_b

    @property
    def sites_a(self) -> Tuple[int, ...]:
        return tuple(i for i in range(self.n) if self.mask >> i & 1)

    @property
    def sites_b(self) -> Tuple[int, ...]:
        return tuple(i for i in range(self.n) if not self.mask >> i & 1)

    @property
    def binary(self) -> str:
        return format(self.mask, f"0{self.n}b")


class AmplitudeMatrix(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    part: Bipartition
    entries: np.ndarray

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]


class ReducedDensityMatrix(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    part: Bipartition
    entries: np.ndarray

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


class PartitionFamily(BaseModel):
    """Immutable description of a bipartition family; members come from partitions.family_iter."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["balanced", "contiguous", "fixed_size", "explicit"]
    n: int = Field(ge=2)
    size: Optional[int] = None
    masks: Tuple[int, ...] = ()

    @model_validator(mode="after")
    def _consistent(self):
        if self.kind == "contiguous" and not 1 <= (self.size or 0) <= self.n // 2:
            raise ValueError(f"max_len must lie in [1, {self.n // 2}] for n={self.n}")
        if self.kind == "fixed_size" and not 1 <= (self.size or 0) <= self.n - 1:
            raise ValueError(f"subset size must lie in [1, {self.n - 1}] for n={self.n}")
        return self

    @property
    def label(self) -> str:
        if self.kind in ("contiguous", "fixed_size"):
            return f"{self.kind}:{self.size}"
        return self.kind


class EntanglementRecord(BaseModel):
    part: Bipartition
    purity: float
    participation: float
    n_ab: float
    entropy: Optional[float] = None

    @model_validator(mode="after")
    def _within_bounds(self):
        slack = 1e-9
        if not 1.0 - slack <= self.participation <= self.part.dim_a + slack:
            raise ValueError(
                f"participation {self.participation!r} outside [1, {self.part.dim_a}] for mask {self.part.binary}"
            )
        return self


# =======================
# MODEL SCHEMAS
# =======================

class IsingParameters(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int = Field(ge=2)
    g: float = Field(ge=0.0, le=1.0)
    epsilon: float = Field(default=0.0, ge=0.0, le=1.0)

    @property
    def dim(self) -> int:
        return 1 << self.n


class GroundStateResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    params: IsingParameters
    energy: float
    state: PureState
    gap: Optional[float] = None
    solver: Literal["dense", "lanczos"]
    residual: float
    iterations: Optional[int] = None

    def near_degenerate(self, threshold: float = None) -> bool:
        threshold = settings.degeneracy_threshold if threshold is None else threshold
        return self.gap is not None and self.gap < threshold


# =======================
# ANALYSIS SCHEMAS
# =======================

class HistogramBin(BaseModel):
    low: float
    high: float
    count: int


class DistributionSummary(BaseModel):
    measure: MeasureName = "participation"
    count: int
    mu: float
    sigma: float = Field(ge=0.0)
    min: float
    max: float
    histogram: List[HistogramBin] = []


class PeakEstimate(BaseModel):
    location: float
    value: float
    uncertainty: float
    index: int


class SweepPoint(BaseModel):
    g: float
    mu: float
    sigma: float
    energy: float
    gap: Optional[float] = None


class SweepResult(BaseModel):
    n: int
    epsilon: float
    family: str
    measure: MeasureName = "participation"
    points: List[SweepPoint]
    g_mu_max: float
    g_mu_max_uncertainty: float
    g_sigma_max: float
    g_sigma_max_uncertainty: float
    mu_max: float
    sigma_max: float
    sigma_at_mu_max: float

    @property
    def grid(self) -> np.ndarray:
        return np.array([p.g for p in self.points])

    @property
    def mu_curve(self) -> np.ndarray:
        return np.array([p.mu for p in self.points])

    @property
    def sigma_curve(self) -> np.ndarray:
        return np.array([p.sigma for p in self.points])


class ScalingPoint(BaseModel):
    n: int
    epsilon: float
    g_mu_max: float
    g_mu_max_uncertainty: float
    g_sigma_max: float
    g_sigma_max_uncertainty: float
    mu_max: float
    sigma_max: float
    sigma_at_mu_max: float

    @computed_field
    @property
    def ordering_holds(self) -> bool:
        return self.g_sigma_max < self.g_mu_max


class FitResult(BaseModel):
    model: FitModelName
    target: str
    coefficients: Dict[str, float]
    rss: float
    ns: List[int]
    observed: List[float]
    predicted: List[float]


class FitOutcome(BaseModel):
    """One model fitted to one scaling quantity; `error` is set instead of `result` on failure."""

    target: str
    model: FitModelName
    result: Optional[FitResult] = None
    error: Optional[str] = None
    reference_predicted: Optional[List[float]] = None
    reference_max_deviation: Optional[float] = None


class SigmaRelReport(BaseModel):
    ns: List[int]
    values: List[float]
    decreasing: bool
    trend: Literal["rising", "falling", "mixed", "flat"]
    reference_values: List[float] = []
    composite_ns: List[int] = []
    composite_values: List[float] = []
    exponent: Optional[float] = None
    numeric_exponent: Optional[float] = None


class BlockEntropyPoint(BaseModel):
    length: int
    mean_entropy: float
    blocks: int
    # block whose midpoint is closest to the chain centre
    central_entropy: Optional[float] = None


class BlockEntropyProfile(BaseModel):
    n: int
    g: float
    epsilon: float
    points: List[BlockEntropyPoint]
    slope: Optional[float] = None
    increasing: bool
    central_slope: Optional[float] = None
    central_increasing: Optional[bool] = None
    marginal_slope: bool = False


class BaselineSummary(BaseModel):
    n: int
    samples: int
    seed: int
    mu_mean: float
    mu_std: float
    sigma_mean: float
    sigma_std: float
    pooled: DistributionSummary


class CheckResult(BaseModel):
    name: str
    passed: bool
    detail: str = ""
    max_error: Optional[float] = None


class VerificationReport(BaseModel):
    checks: List[CheckResult]

    @computed_field
    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)


# =======================
# RUN CONFIG SCHEMAS
# =======================

class RunConfig(BaseModel):
    """Options shared by every command; values are validated before any computation."""

    model_config = ConfigDict(extra="forbid")

    seed: int = 12345
    threads: int = Field(default_factory=lambda: settings.threads, ge=1)
    out: Optional[str] = None
    solver: SolverName = "auto"
    tol: float = Field(default_factory=lambda: settings.solver_tol, gt=0.0)
    max_iter: int = Field(default_factory=lambda: settings.lanczos_max_iter, ge=1)


class GroundConfig(RunConfig):
    n: int = Field(ge=2)
    g: float = Field(ge=0.0, le=1.0)
    eps: float = Field(default=0.0, ge=0.0, le=1.0)
    amplitudes: bool = False
    save_state: Optional[str] = None


class DistConfig(RunConfig):
    n: Optional[int] = Field(default=None, ge=1)
    g: float = Field(default=0.5, ge=0.0, le=1.0)
    eps: float = Field(default=0.0, ge=0.0, le=1.0)
    state: str = "ground"
    state_file: Optional[str] = None
    partitions: str = "balanced"
    bins: int = Field(default=50, ge=1)
    entropy: bool = False
    measure: MeasureName = "participation"

    @field_validator("state")
    @classmethod
    def _known_state(cls, value: str) -> str:
        if value in ("ground", "ghz", "plus", "haar") or value.startswith("file:"):
            return value
        raise ValueError("must be ground, ghz, plus, haar or file:<path>")

    @model_validator(mode="after")
    def _size_known(self):
        from_file = self.state_file is not None or self.state.startswith("file:")
        if not from_file and self.n is None:
            raise ValueError("n is required unless the state comes from a file")
        if self.state == "ground" and self.n is not None and self.n < 2:
            raise ValueError("n must be at least 2 for a ground state")
        return self


class SweepConfig(RunConfig):
    n: int = Field(ge=2)
    eps: float = Field(default=0.0, ge=0.0, le=1.0)
    g_min: float = Field(default=0.01, ge=0.0, le=0.99)
    g_max: float = Field(default=0.99, ge=0.0, le=0.99)
    g_step: float = Field(default=0.01, gt=0.0)
    refine: bool = True
    partitions: str = "balanced"
    measure: MeasureName = "participation"

    @model_validator(mode="after")
    def _nonempty_grid(self):
        if self.g_min > self.g_max:
            raise ValueError(f"empty g grid: g_min={self.g_min} > g_max={self.g_max}")
        return self


class ScalingConfig(RunConfig):
    n_list: List[int] = [7, 8, 9, 10, 11]
    eps: float = Field(default=0.0, ge=0.0, le=1.0)
    g_min: float = Field(default=0.01, ge=0.0, le=0.99)
    g_max: float = Field(default=0.99, ge=0.0, le=0.99)
    g_step: float = Field(default=0.01, gt=0.0)
    refine: bool = True

    @field_validator("n_list", mode="before")
    @classmethod
    def _parse_sizes(cls, value):
        if isinstance(value, str):
            value = value.strip()
            if "-" in value:
                low, high = (int(v) for v in value.split("-", 1))
                return list(range(low, high + 1))
            return [int(v) for v in value.split(",") if v.strip()]
        return value

    @field_validator("n_list")
    @classmethod
    def _sizes_in_range(cls, value: List[int]) -> List[int]:
        if not value:
            raise ValueError("at least one chain length is required")
        if any(n < 2 for n in value):
            raise ValueError("every chain length must be at least 2")
        return sorted(set(value))

    @model_validator(mode="after")
    def _nonempty_grid(self):
        if self.g_min > self.g_max:
            raise ValueError(f"empty g grid: g_min={self.g_min} > g_max={self.g_max}")
        return self


class BaselineConfig(RunConfig):
    n: int = Field(ge=2)
    samples: int = Field(default=200, ge=1)
    bins: int = Field(default=50, ge=1)


class BlocksConfig(RunConfig):
    n: int = Field(ge=2)
    g: float = Field(default=0.5, ge=0.0, le=1.0)
    eps: float = Field(default=0.0, ge=0.0, le=1.0)
    max_len: Optional[int] = Field(default=None, ge=1)

    @model_validator(mode="after")
    def _block_fits(self):
        if self.max_len is not None and self.max_len > self.n // 2:
            raise ValueError(f"max_len must be at most n//2 = {self.n // 2}")
        return self


class VerifyConfig(RunConfig):
    cases: int = Field(default=100, ge=1)
    max_n: int = Field(default=8, ge=2, le=10)
    inject_corruption: bool = False
