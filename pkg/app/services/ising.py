# app/services/ising.py

"""
Open transverse-field Ising chain with a longitudinal perturbation:

    H = -g sum_i s^z_i s^z_{i+1} - (1 - g) sum_i s^x_i + eps sum_i s^z_i
"""

import logging
from functools import lru_cache

import numpy as np

from app.config import settings
from app.errors import ContractViolation
from app.models.schemas import IsingParameters, validated

logger = logging.getLogger(__name__)


def make_parameters(n: int, g: float, epsilon: float = 0.0) -> IsingParameters:
    return validated(IsingParameters, n=n, g=g, epsilon=epsilon)


def _spins(indices: np.ndarray, n: int) -> np.ndarray:
    bits = (indices[..., None] >> np.arange(n)) & 1
    return 1 - 2 * bits


def diagonal_energy(k: int, params: IsingParameters) -> float:
    if not 0 <= k < params.dim:
        raise ContractViolation(f"basis index {k} out of range for n={params.n}")
    s = _spins(np.asarray(k), params.n)
    bonds = float(np.sum(s[:-1] * s[1:]))
    return -params.g * bonds + params.epsilon * float(np.sum(s))


@lru_cache(maxsize=64)
def diagonal_energies(params: IsingParameters) -> np.ndarray:
    """Diagonal of H for every basis index (read-only, cached per parameter set)."""
    s = _spins(np.arange(params.dim), params.n)
    energies = -params.g * np.sum(s[:, :-1] * s[:, 1:], axis=1) + params.epsilon * np.sum(s, axis=1)
    energies = energies.astype(np.float64)
    energies.setflags(write=False)
    return energies


@lru_cache(maxsize=16)
def _flip_tables(n: int):
    indices = np.arange(1 << n)
    tables = tuple(indices ^ (1 << i) for i in range(n))
    for table in tables:
        table.setflags(write=False)
    return tables


def apply_hamiltonian(params: IsingParameters, x: np.ndarray) -> np.ndarray:
    """Matrix-free y = H x; every output index is accumulated on its own."""
    x = np.asarray(x)
    if x.shape != (params.dim,):
        raise ContractViolation(f"vector length {x.shape} does not match 2^{params.n}={params.dim}")

    y = diagonal_energies(params) * x
    field = 1.0 - params.g
    if field != 0.0:
        for flipped in _flip_tables(params.n):
            y -= field * x[flipped]
    return y


def dense_matrix(params: IsingParameters, cap: int = None) -> np.ndarray:
    cap = settings.dense_cap if cap is None else cap
    if params.n > cap:
        raise ContractViolation(
            f"dense Hamiltonian refused for n={params.n} (cap {cap}); use the matrix-free Lanczos path"
        )

    matrix = np.diag(diagonal_energies(params).copy())
    field = 1.0 - params.g
    if field != 0.0:
        rows = np.arange(params.dim)
        for flipped in _flip_tables(params.n):
            matrix[rows, flipped] = -field
    return matrix


def spin_flip(x: np.ndarray) -> np.ndarray:
    """Global spin flip: index k -> (2^n - 1) XOR k, which is the reversed vector."""
    return np.asarray(x)[::-1]
