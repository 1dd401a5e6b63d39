# app/services/state.py

"""
n-qubit pure states and the index split that reshapes them along a bipartition.

Site i is bit i of the basis index k; bit value b_i maps to the sigma^z eigenvalue
s_i = 1 - 2 b_i. Inside a subsystem, bits are packed in ascending site order.
"""

import logging
from functools import lru_cache
from typing import Iterable, Tuple

import numpy as np

from app.errors import ContractViolation
from app.models.schemas import AmplitudeMatrix, Bipartition, PureState, validated

logger = logging.getLogger(__name__)


def make_bipartition(n: int, mask: int) -> Bipartition:
    return validated(Bipartition, n=n, mask=mask)


def complement_mask(mask: int, n: int) -> int:
    return ((1 << n) - 1) ^ mask


def mask_from_sites(sites: Iterable[int]) -> int:
    mask = 0
    for site in sites:
        mask |= 1 << site
    return mask


def is_contiguous(mask: int) -> bool:
    """True when the set bits of mask form one unbroken run."""
    if mask <= 0:
        return False
    run = mask >> ((mask & -mask).bit_length() - 1)
    return run & (run + 1) == 0


def split_index(k: int, part: Bipartition) -> Tuple[int, int]:
    if not 0 <= k < 1 << part.n:
        raise ContractViolation(f"basis index {k} out of range for n={part.n}")

    j_a = l_b = 0
    pos_a = pos_b = 0
    for site in range(part.n):
        bit = k >> site & 1
        if part.mask >> site & 1:
            j_a |= bit << pos_a
            pos_a += 1
        else:
            l_b |= bit << pos_b
            pos_b += 1
    return j_a, l_b


def join_index(j_a: int, l_b: int, part: Bipartition) -> int:
    """Inverse of split_index."""
    k = 0
    for pos, site in enumerate(part.sites_a):
        k |= (j_a >> pos & 1) << site
    for pos, site in enumerate(part.sites_b):
        k |= (l_b >> pos & 1) << site
    return k


@lru_cache(maxsize=4096)
def _tensor_axes(part: Bipartition) -> Tuple[int, ...]:
    # reshape((2,)*n) puts site i on axis n-1-i; the most significant packed bit comes first
    axes_a = [part.n - 1 - site for site in reversed(part.sites_a)]
    axes_b = [part.n - 1 - site for site in reversed(part.sites_b)]
    return tuple(axes_a + axes_b)


def amplitude_matrix(amplitudes: np.ndarray, part: Bipartition) -> np.ndarray:
    """Raw N_A x N_B view of an amplitude vector (no normalization check)."""
    tensor = np.asarray(amplitudes).reshape((2,) * part.n)
    return tensor.transpose(_tensor_axes(part)).reshape(part.dim_a, part.dim_b)


def to_matrix(state: PureState, part: Bipartition) -> AmplitudeMatrix:
    if state.n != part.n:
        raise ContractViolation(f"state has n={state.n} but bipartition has n={part.n}")
    return AmplitudeMatrix(part=part, entries=amplitude_matrix(state.amplitudes, part))


# =======================
# STATE CONSTRUCTORS
# =======================

def from_amplitudes(amplitudes, normalize: bool = True) -> PureState:
    array = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
    size = array.shape[0]
    if size < 2 or size & (size - 1):
        raise ContractViolation(f"amplitude count {size} is not a power of two >= 2")
    if normalize:
        norm = np.linalg.norm(array)
        if norm == 0.0:
            raise ContractViolation("cannot normalize the zero vector")
        array = array / norm
    return validated(PureState, n=size.bit_length() - 1, amplitudes=array)


def basis_state(n: int, k: int) -> PureState:
    amplitudes = np.zeros(1 << n, dtype=np.complex128)
    amplitudes[k] = 1.0
    return validated(PureState, n=n, amplitudes=amplitudes)


def product_plus_state(n: int) -> PureState:
    if n < 1:
        raise ContractViolation("n must be at least 1")
    return validated(PureState, n=n, amplitudes=np.full(1 << n, 2.0 ** (-n / 2), dtype=np.complex128))


def ghz_state(n: int) -> PureState:
    if n < 2:
        raise ContractViolation("a GHZ state needs at least 2 qubits")
    amplitudes = np.zeros(1 << n, dtype=np.complex128)
    amplitudes[0] = amplitudes[-1] = 1.0 / np.sqrt(2.0)
    return validated(PureState, n=n, amplitudes=amplitudes)


def w_state(n: int) -> PureState:
    if n < 2:
        raise ContractViolation("a W state needs at least 2 qubits")
    amplitudes = np.zeros(1 << n, dtype=np.complex128)
    amplitudes[[1 << i for i in range(n)]] = 1.0 / np.sqrt(n)
    return validated(PureState, n=n, amplitudes=amplitudes)


def haar_random_state(n: int, seed=None) -> PureState:
    """Unitarily invariant random state: i.i.d. complex Gaussian amplitudes, normalized."""
    if n < 1:
        raise ContractViolation("n must be at least 1")
    rng = np.random.default_rng(seed)
    size = 1 << n
    amplitudes = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    return from_amplitudes(amplitudes)


def check_normalized(amplitudes: np.ndarray, tol: float = 1e-12) -> float:
    """Returns |norm^2 - 1|, raising ContractViolation above tol."""
    drift = abs(float(np.vdot(amplitudes, amplitudes).real) - 1.0)
    if drift > tol:
        raise ContractViolation(f"state is not normalized (|norm^2 - 1| = {drift:.3e})")
    return drift
