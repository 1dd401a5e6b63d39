# app/services/measures.py

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Iterable, List, Tuple, Union

import numpy as np

from app.config import settings
from app.errors import ContractViolation
from app.models.schemas import (
    Bipartition,
    EntanglementRecord,
    PartitionFamily,
    PureState,
    ReducedDensityMatrix,
    validated,
)
from app.services.partitions import explicit, family_chunks, family_iter, family_size
from app.services.state import split_index, to_matrix

logger = logging.getLogger(__name__)


def _matrix(state: PureState, part: Bipartition) -> np.ndarray:
    entries = to_matrix(state, part).entries
    return entries.real if state.is_real else entries


def _gram(state: PureState, part: Bipartition) -> np.ndarray:
    m = _matrix(state, part)
    return m @ m.conj().T


def reduced_density(state: PureState, part: Bipartition) -> ReducedDensityMatrix:
    """rho_A = M M^dagger for the N_A x N_B amplitude matrix M."""
    entries = to_matrix(state, part).entries
    return ReducedDensityMatrix(part=part, entries=entries @ entries.conj().T)


def purity(state: PureState, part: Bipartition) -> float:
    rho = _gram(state, part)
    return float(np.sum(np.abs(rho) ** 2))


def purity_bruteforce(state: PureState, part: Bipartition, cap: int = None) -> float:
    """
    Literal quadruple sum over (j, j', l, l') of z_jl conj(z_j'l) z_j'l' conj(z_jl').
    Amplitudes are placed through split_index, independently of the reshaping path.
    """
    cap = settings.bruteforce_cap if cap is None else cap
    if state.n != part.n:
        raise ContractViolation(f"state has n={state.n} but bipartition has n={part.n}")
    if part.n > cap:
        raise ContractViolation(f"brute-force purity refused for n={part.n} (cap {cap})")

    z = np.zeros((part.dim_a, part.dim_b), dtype=np.complex128)
    for k, amplitude in enumerate(state.amplitudes):
        z[split_index(k, part)] = amplitude
    total = np.einsum("jl,Jl,JL,jL->", z, z.conj(), z, z.conj(), optimize=False)
    return float(total.real)


def spectrum(state: PureState, part: Bipartition) -> np.ndarray:
    """Eigenvalues of rho_A, clipped below the entropy cutoff to zero."""
    values = np.linalg.eigvalsh(_gram(state, part))
    values[values < settings.entropy_cutoff] = 0.0
    return values


def entropy(state: PureState, part: Bipartition) -> float:
    values = spectrum(state, part)
    values = values[values > 0.0]
    return float(max(-np.sum(values * np.log2(values)), 0.0))


def tsallis_entropy(state: PureState, part: Bipartition, q: float) -> float:
    if q <= 0 or q == 1:
        raise ContractViolation(f"Tsallis index q must be positive and different from 1, got {q}")
    values = spectrum(state, part)
    return float((1.0 - np.sum(values[values > 0.0] ** q)) / (q - 1.0))


def entanglement_record(state: PureState, part: Bipartition, with_entropy: bool = False) -> EntanglementRecord:
    pi = purity(state, part)
    participation = 1.0 / pi
    return validated(
        EntanglementRecord,
        part=part,
        purity=pi,
        participation=participation,
        n_ab=float(np.log2(participation)),
        entropy=entropy(state, part) if with_entropy else None,
    )


def entanglement_records(
    state: PureState,
    parts: Union[PartitionFamily, Iterable[Bipartition]],
    with_entropy: bool = False,
    threads: int = 1,
) -> List[EntanglementRecord]:
    """
    Records in enumeration order, whatever the worker count. With several threads the
    family is cut into disjoint index ranges by family_chunks and each job walks its
    own range lazily.
    """
    if not isinstance(parts, PartitionFamily):
        parts = list(parts)
        if threads <= 1 or len(parts) < 2 * threads:
            return [entanglement_record(state, part, with_entropy) for part in parts]
        parts = explicit(state.n, [part.mask for part in parts])

    if threads <= 1 or family_size(parts) < 2 * threads:
        return [entanglement_record(state, part, with_entropy) for part in family_iter(parts)]

    def job(bounds: Tuple[int, int]) -> List[EntanglementRecord]:
        return [entanglement_record(state, part, with_entropy) for part in family_iter(parts, *bounds)]

    with ThreadPoolExecutor(max_workers=threads) as pool:
        return [record for chunk in pool.map(job, family_chunks(parts, 4 * threads)) for record in chunk]
