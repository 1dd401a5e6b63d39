"""
Tests for the ground-state solvers (services/solver.py)

Tests verify:
- Closed-form energies at the solvable points
- Dense and Lanczos agreement
- Z2-even ground state at the degenerate point
- Failure reporting
"""

import numpy as np
import pytest

from app.config import settings
from app.errors import ContractViolation, SolverError
from app.services.ising import apply_hamiltonian, make_parameters
from app.services.measures import entanglement_record
from app.services.partitions import balanced_bipartitions, family_iter
from app.services.solver import dense_ground_state, energy_gap, ground_state, lanczos_ground_state


class TestDenseSolver:
    """Exact diagonalization on small chains."""

    def test_two_sites(self):
        """Two sites at g = 0.5: E0 = -sqrt(g^2 + 4 (1-g)^2)."""
        result = dense_ground_state(make_parameters(2, 0.5))
        assert result.energy == pytest.approx(-np.sqrt(1.25), abs=1e-12)

    def test_pure_field(self):
        """g = 0 gives |+>^n with E0 = -n and gap 2."""
        result = dense_ground_state(make_parameters(5, 0.0))
        assert result.energy == pytest.approx(-5.0, abs=1e-12)
        assert result.gap == pytest.approx(2.0, abs=1e-10)
        assert np.allclose(result.state.amplitudes, 2 ** -2.5)

    def test_pure_coupling_picks_even_combination(self):
        """g = 1, eps = 0: degenerate ground space; the returned state is the GHZ one."""
        result = dense_ground_state(make_parameters(6, 1.0))
        assert result.energy == pytest.approx(-5.0, abs=1e-12)
        assert result.near_degenerate()
        amplitudes = result.state.amplitudes
        assert abs(amplitudes[0]) == pytest.approx(1 / np.sqrt(2))
        assert abs(amplitudes[-1]) == pytest.approx(1 / np.sqrt(2))

    def test_residual_and_sign(self):
        params = make_parameters(8, 0.4, 0.05)
        result = dense_ground_state(params)
        vector = result.state.amplitudes
        assert np.linalg.norm(apply_hamiltonian(params, vector) - result.energy * vector) < 1e-10
        assert vector[np.argmax(np.abs(vector))].real > 0

    def test_even_sector_matches_full_spectrum(self):
        """The sector decomposition gives the same E0 as a field-broken limit."""
        e_symmetric = dense_ground_state(make_parameters(8, 0.55)).energy
        e_tiny_field = dense_ground_state(make_parameters(8, 0.55, 1e-12)).energy
        assert e_symmetric == pytest.approx(e_tiny_field, abs=1e-9)

    def test_rayleigh_quotients_never_undercut_energy(self, rng):
        params = make_parameters(8, 0.4, 0.01)
        energy = dense_ground_state(params).energy
        for _ in range(100):
            v = rng.standard_normal(params.dim) + 1j * rng.standard_normal(params.dim)
            quotient = np.vdot(v, apply_hamiltonian(params, v)).real / np.vdot(v, v).real
            assert quotient >= energy - 1e-12

    def test_energy_continuous_and_concave_in_g(self):
        """H is affine in g, so E0(g) is concave with slope at most 2n - 1 in magnitude."""
        n, step = 8, 0.01
        grid = np.round(np.arange(0.3, 0.7 + step / 2, step), 10)
        energies = np.array([dense_ground_state(make_parameters(n, g)).energy for g in grid])
        assert np.all(np.abs(np.diff(energies)) <= (2 * n - 1) * step + 1e-12)
        assert np.all(np.diff(energies, 2) <= 1e-10)

    def test_near_degenerate_close_to_pure_coupling(self):
        """Nine sites at g = 0.95: the two lowest levels are split by far less than the threshold."""
        result = ground_state(make_parameters(9, 0.95))
        assert result.near_degenerate()
        assert result.gap < 1e-10


class TestLanczos:
    """Matrix-free Lanczos against the dense reference."""

    @pytest.mark.parametrize("n, g, eps", [(4, 0.3, 0.0), (6, 0.5, 0.0), (7, 0.8, 1e-4), (8, 0.5, 1e-2), (10, 0.4, 0.0)])
    def test_agrees_with_dense(self, n, g, eps):
        params = make_parameters(n, g, eps)
        dense = dense_ground_state(params)
        krylov = lanczos_ground_state(params, seed=3)
        assert krylov.energy == pytest.approx(dense.energy, abs=1e-9)
        assert abs(np.vdot(dense.state.amplitudes, krylov.state.amplitudes)) == pytest.approx(1.0, abs=1e-8)
        assert krylov.solver == "lanczos"
        assert krylov.iterations >= 1

    def test_twelve_sites_certified(self):
        result = lanczos_ground_state(make_parameters(12, 0.5), tol=1e-10)
        assert result.residual <= 1e-10
        assert result.iterations < settings.lanczos_max_iter

    def test_reproducible_with_seed(self):
        params = make_parameters(9, 0.5)
        first = lanczos_ground_state(params, seed=5)
        second = lanczos_ground_state(params, seed=5)
        assert np.array_equal(first.state.amplitudes, second.state.amplitudes)

    def test_iteration_cap_raises(self):
        """Two iterations cannot reach 1e-12 on a 12-site chain."""
        with pytest.raises(SolverError) as info:
            lanczos_ground_state(make_parameters(12, 0.5), tol=1e-12, max_iter=2)
        assert info.value.best_residual > 1e-12
        assert info.value.exit_code == 3

    def test_at_coupling_names_g(self):
        error = SolverError("no convergence", best_residual=1e-3).at_coupling(0.42)
        assert "g=0.42" in error.detail
        assert error.g == 0.42


class TestDispatch:
    """Solver selection and gap."""

    def test_auto_uses_dense_for_small_chains(self):
        assert ground_state(make_parameters(6, 0.5)).solver == "dense"

    def test_unknown_solver(self):
        with pytest.raises(ContractViolation):
            ground_state(make_parameters(4, 0.5), solver="power")

    def test_gap_shrinks_toward_strong_coupling(self):
        gaps = [energy_gap(make_parameters(8, g)) for g in (0.2, 0.5, 0.8)]
        assert gaps[0] > gaps[1] > gaps[2] > 0

    def test_small_field_collapses_ghz_like_state(self):
        """Near g = 1 on 9 sites, eps = 1e-6 removes the cat-state contribution to mu."""
        parts = list(family_iter(balanced_bipartitions(9)))

        def mu(eps):
            state = ground_state(make_parameters(9, 0.95, eps)).state
            return np.mean([entanglement_record(state, part).participation for part in parts])

        assert mu(0.0) >= 1.8
        assert mu(1e-6) <= 1.2
