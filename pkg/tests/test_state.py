"""
Tests for pure states and bipartition index handling (services/state.py)

Tests verify:
- Bipartition orientation and validation
- split_index / join_index bijection and bit packing
- Matrix view consistency with split_index
- Standard state constructors and normalization checks
"""

import numpy as np
import pytest
from pydantic import ValidationError

from app.errors import ContractViolation
from app.models.schemas import PureState
from app.services.state import (
    basis_state,
    check_normalized,
    complement_mask,
    from_amplitudes,
    ghz_state,
    haar_random_state,
    is_contiguous,
    join_index,
    make_bipartition,
    mask_from_sites,
    product_plus_state,
    split_index,
    to_matrix,
    w_state,
)


class TestBipartition:
    """Validation and orientation of bipartitions."""

    def test_larger_side_is_flipped_to_complement(self):
        """A mask covering more than half the sites is stored as its complement."""
        part = make_bipartition(5, 0b01111)
        assert part.mask == 0b10000
        assert part.n_a == 1
        assert part.n_b == 4

    def test_half_split_keeps_given_side(self):
        part = make_bipartition(4, 0b1100)
        assert part.mask == 0b1100
        assert part.sites_a == (2, 3)
        assert part.sites_b == (0, 1)

    @pytest.mark.parametrize("mask", [0, 0b1111])
    def test_empty_side_rejected(self, mask):
        """Empty A or empty B is a contract violation."""
        with pytest.raises(ContractViolation):
            make_bipartition(4, mask)

    def test_dimensions(self):
        part = make_bipartition(6, 0b000111)
        assert (part.dim_a, part.dim_b) == (8, 8)

    def test_complement_and_sites(self):
        assert complement_mask(0b0101, 4) == 0b1010
        assert mask_from_sites([0, 3]) == 0b1001

    @pytest.mark.parametrize("mask, expected", [(0b0110, True), (0b1, True), (0b101, False), (0b11011, False)])
    def test_is_contiguous(self, mask, expected):
        assert is_contiguous(mask) is expected


class TestSplitIndex:
    """The index split that maps k to (j_A, l_B)."""

    def test_bits_packed_in_ascending_site_order(self):
        """A = {1, 3}: bit 1 of k becomes bit 0 of j_A, bit 3 becomes bit 1."""
        part = make_bipartition(4, 0b1010)
        assert split_index(0b1000, part) == (0b10, 0)
        assert split_index(0b0010, part) == (0b01, 0)
        assert split_index(0b0101, part) == (0, 0b11)

    def test_bijection_and_inverse(self):
        part = make_bipartition(7, 0b1010011)
        pairs = [split_index(k, part) for k in range(1 << 7)]
        assert len(set(pairs)) == 1 << 7
        assert all(join_index(j, l, part) == k for k, (j, l) in enumerate(pairs))

    def test_out_of_range_index(self):
        part = make_bipartition(3, 0b001)
        with pytest.raises(ContractViolation):
            split_index(8, part)


class TestToMatrix:
    """Reshaping a state into the N_A x N_B amplitude matrix."""

    def test_matches_split_index_placement(self, random_state, alternating_cut):
        """M[j, l] holds amplitude k for (j, l) = split_index(k)."""
        m = to_matrix(random_state, alternating_cut).entries
        for k, amplitude in enumerate(random_state.amplitudes):
            assert m[split_index(k, alternating_cut)] == amplitude

    def test_shape(self):
        state = haar_random_state(5, seed=1)
        matrix = to_matrix(state, make_bipartition(5, 0b00110))
        assert (matrix.rows, matrix.cols) == (4, 8)

    def test_size_mismatch(self, random_state):
        with pytest.raises(ContractViolation):
            to_matrix(random_state, make_bipartition(4, 0b0011))


class TestConstructors:
    """Standard states and normalization."""

    def test_ghz(self):
        state = ghz_state(3)
        assert state.amplitudes[0] == pytest.approx(1 / np.sqrt(2))
        assert state.amplitudes[7] == pytest.approx(1 / np.sqrt(2))
        assert np.count_nonzero(state.amplitudes) == 2

    def test_ghz_needs_two_qubits(self):
        with pytest.raises(ContractViolation):
            ghz_state(1)

    def test_plus_state_is_uniform(self):
        state = product_plus_state(4)
        assert np.allclose(state.amplitudes, 0.25)

    def test_w_state_support(self):
        state = w_state(4)
        support = np.flatnonzero(state.amplitudes)
        assert support.tolist() == [1, 2, 4, 8]

    def test_basis_state(self):
        assert basis_state(3, 5).amplitudes[5] == 1.0

    def test_haar_state_is_seeded(self):
        first = haar_random_state(5, seed=11).amplitudes
        second = haar_random_state(5, seed=11).amplitudes
        assert np.array_equal(first, second)
        assert np.vdot(first, first).real == pytest.approx(1.0, abs=1e-12)

    def test_from_amplitudes_normalizes(self):
        state = from_amplitudes([3, 0, 0, 4])
        assert state.n == 2
        assert abs(state.amplitudes[3]) == pytest.approx(0.8)

    def test_from_amplitudes_rejects_bad_length(self):
        with pytest.raises(ContractViolation):
            from_amplitudes([1, 0, 0])

    def test_unnormalized_state_rejected(self):
        """Constructing a PureState with norm^2 = 0.9 is refused."""
        with pytest.raises(ValidationError):
            PureState(n=1, amplitudes=np.array([np.sqrt(0.9), 0.0]))

    def test_check_normalized(self):
        assert check_normalized(ghz_state(3).amplitudes) < 1e-12
        with pytest.raises(ContractViolation):
            check_normalized(np.array([np.sqrt(0.9), 0.0]))

    def test_amplitudes_are_read_only(self):
        state = ghz_state(3)
        with pytest.raises(ValueError):
            state.amplitudes[0] = 0.0
