# app/services/solver.py

"""
Ground state of the Ising chain.

Small chains go through a dense symmetric eigendecomposition, larger ones through
matrix-free Lanczos with full reorthogonalization. At eps=0 both paths stay in the
spin-flip-even sector, which holds the finite-chain ground state for g < 1 and
picks the GHZ-like combination at the degenerate point g = 1.
"""

import logging
from typing import Optional, Tuple

import numpy as np
from scipy.linalg import eigh, eigh_tridiagonal
from scipy.sparse.linalg import LinearOperator, eigsh

from app.config import settings
from app.errors import ContractViolation, SolverError
from app.models.schemas import GroundStateResult, IsingParameters, PureState, validated
from app.services.ising import apply_hamiltonian, dense_matrix, spin_flip

logger = logging.getLogger(__name__)

BREAKDOWN = 1e-12


def _fix_sign(vector: np.ndarray) -> np.ndarray:
    # largest-magnitude amplitude made positive real
    pivot = vector[int(np.argmax(np.abs(vector)))]
    return vector * (abs(pivot) / pivot)


def _residual(params: IsingParameters, vector: np.ndarray, energy: float) -> float:
    return float(np.linalg.norm(apply_hamiltonian(params, vector) - energy * vector))


def _as_state(params: IsingParameters, vector: np.ndarray) -> PureState:
    vector = _fix_sign(vector / np.linalg.norm(vector))
    return validated(PureState, n=params.n, amplitudes=vector)


def _symmetric_sectors(matrix: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Blocks of H on the spin-flip-even and -odd subspaces (valid when H commutes with the flip)."""
    half = matrix.shape[0] // 2
    direct = matrix[:half, :half]
    mirrored = matrix[:half, ::-1][:, :half]
    return direct + mirrored, direct - mirrored


def dense_ground_state(params: IsingParameters, cap: int = None, tol: float = None) -> GroundStateResult:
    tol = settings.solver_tol if tol is None else tol
    matrix = dense_matrix(params, cap=cap)

    if params.epsilon == 0.0:
        even, odd = _symmetric_sectors(matrix)
        even_values, even_vectors = eigh(even)
        odd_values = eigh(odd, eigvals_only=True, subset_by_index=[0, 0])
        energy = float(even_values[0])
        excited = min(even_values[1] if even_values.size > 1 else np.inf, odd_values[0])
        head = even_vectors[:, 0] / np.sqrt(2.0)
        vector = np.concatenate([head, head[::-1]])
    else:
        values, vectors = eigh(matrix, subset_by_index=[0, 1])
        energy = float(values[0])
        excited = values[1]
        vector = vectors[:, 0]

    gap = max(float(excited) - energy, 0.0)
    state = _as_state(params, vector)
    residual = _residual(params, state.amplitudes, energy)
    if residual > tol:
        raise SolverError(f"dense eigenvector residual {residual:.3e} exceeds tolerance {tol:.1e}", best_residual=residual)

    return GroundStateResult(
        params=params, energy=energy, state=state, gap=gap, solver="dense", residual=residual
    )


def lanczos_ground_state(
    params: IsingParameters, tol: float = None, max_iter: int = None, seed: Optional[int] = 0
) -> GroundStateResult:
    """
    Lanczos iteration with full reorthogonalization from a seeded start vector.
    Converged when the true residual ||H psi - E psi|| drops below tol.
    """
    tol = settings.solver_tol if tol is None else tol
    max_iter = settings.lanczos_max_iter if max_iter is None else max_iter
    dim = params.dim
    symmetric = params.epsilon == 0.0

    def project(v: np.ndarray) -> np.ndarray:
        return 0.5 * (v + spin_flip(v)) if symmetric else v

    rng = np.random.default_rng(seed)
    start = project(rng.standard_normal(dim))

    size = min(max_iter, dim) + 1
    basis = np.empty((min(size, 64), dim))
    basis[0] = start / np.linalg.norm(start)
    alphas, betas = [], []
    best_residual = np.inf

    for step in range(1, size):
        current = basis[step - 1]
        w = apply_hamiltonian(params, current)
        alphas.append(float(current @ w))

        krylov = basis[:step]
        w -= krylov.T @ (krylov @ w)
        w -= krylov.T @ (krylov @ w)
        w = project(w)
        beta = float(np.linalg.norm(w))

        if step == 1:
            ritz_values, ritz_vectors = np.array(alphas), np.ones((1, 1))
        else:
            ritz_values, ritz_vectors = eigh_tridiagonal(
                np.array(alphas), np.array(betas), select="i", select_range=(0, 0)
            )
        estimate = abs(beta * ritz_vectors[-1, 0])

        if estimate <= tol or beta <= BREAKDOWN or step == size - 1:
            vector = krylov.T @ ritz_vectors[:, 0]
            vector /= np.linalg.norm(vector)
            energy = float(vector @ apply_hamiltonian(params, vector))
            residual = _residual(params, vector, energy)
            best_residual = min(best_residual, residual)
            if residual <= tol:
                logger.debug("Lanczos converged for %s in %d steps (residual %.2e)", params, step, residual)
                return GroundStateResult(
                    params=params,
                    energy=energy,
                    state=_as_state(params, vector),
                    solver="lanczos",
                    residual=residual,
                    iterations=step,
                )
            if beta <= BREAKDOWN:
                break

        betas.append(beta)
        if step == basis.shape[0]:
            grown = np.empty((min(2 * step, size), dim))
            grown[:step] = basis
            basis = grown
        basis[step] = w / beta

    raise SolverError(
        f"Lanczos did not converge within {max_iter} iterations (best residual {best_residual:.3e})",
        best_residual=float(best_residual),
    )


def ground_state(
    params: IsingParameters,
    solver: str = "auto",
    tol: float = None,
    max_iter: int = None,
    seed: Optional[int] = 0,
) -> GroundStateResult:
    if solver == "auto":
        solver = "dense" if params.n <= settings.auto_dense_max_n else "lanczos"
    if solver == "dense":
        return dense_ground_state(params, tol=tol)
    if solver == "lanczos":
        return lanczos_ground_state(params, tol=tol, max_iter=max_iter, seed=seed)
    raise ContractViolation(f"unknown solver {solver!r}")


def energy_gap(params: IsingParameters) -> float:
    """E1 - E0 over the full spectrum."""
    if params.n <= settings.dense_cap:
        return dense_ground_state(params).gap

    operator = LinearOperator(
        (params.dim, params.dim), matvec=lambda v: apply_hamiltonian(params, np.ravel(v)), dtype=np.float64
    )
    values = np.sort(eigsh(operator, k=2, which="SA", tol=settings.solver_tol, return_eigenvectors=False))
    return max(float(values[1] - values[0]), 0.0)
