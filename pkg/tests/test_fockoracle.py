import numpy as np
import pytest

from darkcavity import (
    ResourceLimitError,
    SystemParams,
    ThresholdError,
    ValidationError,
    build_full_hamiltonian,
    build_hamiltonian,
    build_liouvillian,
    ground_state_population,
    make_uniform_coupling,
    solve_full_stationary,
    solve_stationary,
)
from darkcavity.fockoracle import FockBasis


def fock_params(n_atoms=1, g=1.0, eta=0.1, delta=0.0, gamma=0.0):
    return SystemParams(
        n_modes=1, n_atoms=n_atoms, delta_a=delta, delta_c=delta, gamma=gamma,
        drives=[eta], coupling=make_uniform_coupling(1, n_atoms, g),
    )


class TestFockBasis:
    def test_dimension(self):
        assert FockBasis(1, 1, 1).dimension == 4
        assert FockBasis(2, 3, 2).dimension == 9 * 8

    def test_index_round_trip(self):
        b = FockBasis(2, 2, 2)
        seen = set()
        for idx in range(b.dimension):
            occ, bits = b.occupations_of(idx)
            assert b.index_of(occ, bits) == idx
            seen.add((tuple(occ), tuple(bits)))
        assert len(seen) == b.dimension

    def test_vacuum_is_index_zero(self):
        b = FockBasis(2, 3, 2)
        assert b.index_of([0, 0], [0, 0, 0]) == 0

    def test_index_validation(self):
        b = FockBasis(1, 1, 2)
        with pytest.raises(ValidationError):
            b.index_of([3], [0])
        with pytest.raises(ValidationError):
            b.index_of([0], [2])
        with pytest.raises(ValidationError):
            b.occupations_of(b.dimension)

    def test_annihilation_truncates_top_level(self):
        b = FockBasis(1, 1, 3)
        a = b.annihilation(0)
        adag = a.conj().T
        top = np.zeros(b.dimension)
        top[b.index_of([3], [0])] = 1.0
        assert np.linalg.norm(adag @ top) == 0.0

    def test_number_operator_diagonal(self):
        b = FockBasis(1, 1, 3)
        n = b.number(0)
        for idx in range(b.dimension):
            occ, _ = b.occupations_of(idx)
            assert n[idx, idx] == pytest.approx(occ[0], abs=1e-14)


class TestFullHamiltonian:
    def test_single_excitation_block_matches_weak_model(self):
        p = fock_params(n_atoms=1, g=0.8, eta=0.13, delta=0.4)
        hf = build_full_hamiltonian(p, n_max=1)
        # states: 0 -> vacuum, 1 -> one photon, 2 -> excited atom
        block = hf[:3, :3] - hf[0, 0] * np.eye(3)
        hw = build_hamiltonian(p)
        np.testing.assert_allclose(block, hw, atol=1e-14)

    def test_free_hamiltonian_is_diagonal(self):
        p = fock_params(n_atoms=2, g=0.0, eta=0.0, delta=0.7)
        h = build_full_hamiltonian(p, n_max=2)
        assert np.linalg.norm(h - np.diag(np.diag(h))) == 0.0

    def test_driven_empty_cavity_has_displaced_spectrum(self):
        # g = 0, detuning -2: cavity eigenvalues 2k - eta^2/2, atom adds -+1
        p = fock_params(n_atoms=1, g=0.0, eta=0.1, delta=-2.0)
        w = np.linalg.eigvalsh(build_full_hamiltonian(p, n_max=14))
        np.testing.assert_allclose(
            w[:4], [-1.005, 0.995, 0.995, 2.995], atol=1e-6)

    def test_hermitian_with_complex_drive_and_coupling(self):
        p = SystemParams(n_modes=1, n_atoms=2, delta_a=0.2, delta_c=-0.1,
                         drives=[0.05 + 0.02j],
                         coupling=np.array([[0.3 + 0.1j, 0.2 - 0.4j]]))
        h = build_full_hamiltonian(p, n_max=2)
        assert np.linalg.norm(h - h.conj().T) == 0.0

    def test_excitation_number_conserved_without_drive(self):
        p = fock_params(n_atoms=2, g=0.6, eta=0.0, delta=0.3)
        basis = FockBasis(1, 2, 3)
        h = build_full_hamiltonian(p, n_max=3)
        n_exc = basis.total_excitation()
        comm = h @ n_exc - n_exc @ h
        assert np.linalg.norm(comm) <= 1e-12 * np.linalg.norm(h)

    def test_dimension_budget(self):
        p = fock_params(n_atoms=4)
        with pytest.raises(ResourceLimitError):
            build_full_hamiltonian(p, n_max=300)


class TestFullStationary:
    def test_driven_damped_cavity_closed_form(self):
        p = fock_params(n_atoms=1, g=0.0, eta=0.1, delta=0.3, gamma=0.5)
        st = solve_full_stationary(p, n_max=6)
        ref = 0.1**2 / (0.3**2 + 0.25)
        assert st.total_population == pytest.approx(ref, rel=1e-6)
        assert not st.truncation_warning

    def test_undriven_vacuum(self):
        p = fock_params(n_atoms=1, g=0.5, eta=0.0, delta=0.2, gamma=0.1)
        st = solve_full_stationary(p, n_max=3)
        assert st.total_population <= 1e-14
        assert st.ground_weight == pytest.approx(1.0, abs=1e-12)
        assert st.top_level_weight <= 1e-14

    def test_weak_drive_agrees_with_single_excitation_model(self):
        p = fock_params(n_atoms=2, g=1 / np.sqrt(2), eta=1e-3, delta=0.5, gamma=0.1)
        fock = solve_full_stationary(p, n_max=3)
        weak = solve_stationary(build_liouvillian(p))
        gap = abs(fock.total_population - weak.total_population) / weak.total_population
        assert gap <= 1e-4

    def test_truncation_stability(self):
        p = fock_params(n_atoms=2, g=1 / np.sqrt(2), eta=1e-3, delta=0.5, gamma=0.1)
        a = solve_full_stationary(p, n_max=3).total_population
        b = solve_full_stationary(p, n_max=4).total_population
        assert abs(a - b) < 1e-8
        assert abs(a - b) / a < 1e-3

    def test_truncation_warning_on_tight_cutoff(self):
        p = fock_params(n_atoms=1, g=0.0, eta=0.4, delta=0.0, gamma=0.1)
        st = solve_full_stationary(p, n_max=2)
        assert st.truncation_warning

    def test_state_invariants(self):
        p = fock_params(n_atoms=1, g=0.7, eta=0.1, delta=0.2, gamma=0.05)
        st = solve_full_stationary(p, n_max=4)
        assert np.linalg.norm(st.rho - st.rho.conj().T) <= 1e-10
        assert abs(np.trace(st.rho) - 1) <= 1e-10
        assert np.linalg.eigvalsh(st.rho)[0] >= -1e-8

    def test_solve_budget(self):
        p = fock_params(n_atoms=2)
        with pytest.raises(ResourceLimitError):
            solve_full_stationary(p, n_max=20)


class TestGroundState:
    def test_no_drive_gives_vacuum(self):
        res = ground_state_population(fock_params(n_atoms=2, g=1.0, eta=0.0), n_max=4)
        assert res.population <= 1e-12
        assert res.overlap == pytest.approx(1.0, abs=1e-12)
        assert abs(res.energy) <= 1e-12

    def test_collective_state_stays_near_zero_energy(self):
        res = ground_state_population(fock_params(n_atoms=3, g=1.0, eta=0.05), n_max=8)
        assert abs(res.energy) <= 1e-8
        assert res.overlap >= 0.99
        assert 0 < res.population < 1e-3

    def test_population_shrinks_with_more_atoms_at_fixed_drive(self):
        # the threshold parameter 4 eta/(N g) falls as 1/N, and with it the
        # residual population of the collective state
        pops = [ground_state_population(fock_params(n_atoms=n, g=1.0, eta=0.05),
                                        n_max=8).population
                for n in (2, 5)]
        assert pops[1] < pops[0] / 10

    def test_threshold_error(self):
        with pytest.raises(ThresholdError):
            ground_state_population(fock_params(n_atoms=2, g=1.0, eta=0.5), n_max=4)

    def test_requires_single_mode_uniform_coupling(self):
        p = SystemParams(n_modes=2, n_atoms=2, delta_a=0.0, delta_c=0.0,
                         drives=[0.1, 0.1], coupling=np.full((2, 2), 0.5))
        with pytest.raises(ValidationError):
            ground_state_population(p, n_max=2)
        q = SystemParams(n_modes=1, n_atoms=2, delta_a=0.0, delta_c=0.0,
                         drives=[0.1], coupling=[[0.5, 0.6]])
        with pytest.raises(ValidationError):
            ground_state_population(q, n_max=2)

    def test_budget(self):
        with pytest.raises(ResourceLimitError):
            ground_state_population(fock_params(n_atoms=2, eta=0.05), n_max=2000)
