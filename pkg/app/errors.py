# app/errors.py

from typing import Optional


class LabError(Exception):
    """Base class for every failure the lab reports to the command line."""

    exit_code = 1

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class ContractViolation(LabError, ValueError):
    """A pre- or post-condition of an operation does not hold."""

    exit_code = 1


class ConfigError(LabError):
    exit_code = 2


class SolverError(LabError):
    """Ground-state solver failed; carries the best residual reached."""

    exit_code = 3

    def __init__(self, detail: str, best_residual: Optional[float] = None, g: Optional[float] = None):
        super().__init__(detail)
        self.best_residual = best_residual
        self.g = g

    def at_coupling(self, g: float) -> "SolverError":
        return SolverError(f"{self.detail} (at g={g})", best_residual=self.best_residual, g=g)


class FitError(LabError):
    exit_code = 3


class VerificationError(LabError):
    exit_code = 4
