import numpy as np
import pytest

from darkcavity import (
    DegenerateSteadyStateError,
    DensityMatrix,
    NumericalError,
    SystemParams,
    ValidationError,
    build_hamiltonian,
    build_liouvillian,
    collective_params,
    dark_state,
    decompose,
    make_uniform_coupling,
    population_delta_zero,
    population_gamma_zero,
    solve_stationary,
    sweep_detuning,
)
from darkcavity.superop import trace_vector, vectorize
from darkcavity.weaksolver import WeakBasis


def single_mode(lam, eta=0.1, gamma=0.0, delta=0.0, delta_c=None):
    return SystemParams(
        n_modes=1, n_atoms=1, delta_a=delta,
        delta_c=delta if delta_c is None else delta_c,
        gamma=gamma, drives=[eta], coupling=[[lam]],
    )


def random_params(seed, gamma=0.0, delta_a=0.0):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(1, 4))
    n = int(rng.integers(max(2, m), 7))
    return SystemParams(
        n_modes=m, n_atoms=n, delta_a=delta_a, delta_c=float(rng.uniform(-2, 2)),
        gamma=gamma,
        drives=0.1 * (rng.normal(size=m) + 1j * rng.normal(size=m)),
        coupling=rng.normal(size=(m, n)) + 1j * rng.normal(size=(m, n)),
    )


class TestBasis:
    def test_index_map(self):
        b = WeakBasis(2, 3)
        assert b.dimension == 6
        assert b.ground == 0
        assert [b.cavity_index(k) for k in range(2)] == [1, 2]
        assert [b.atom_index(l) for l in range(3)] == [3, 4, 5]
        assert len(set([0] + [b.cavity_index(k) for k in range(2)]
                       + [b.atom_index(l) for l in range(3)])) == 6

    def test_out_of_range(self):
        b = WeakBasis(1, 1)
        with pytest.raises(IndexError):
            b.cavity_index(1)
        with pytest.raises(IndexError):
            b.atom_index(-1)


class TestHamiltonian:
    def test_single_mode_single_atom_matrix(self):
        p = single_mode(lam=1.0, eta=0.3, delta=0.0)
        h = build_hamiltonian(p)
        expected = np.array([[0.0, 0.3, 0.0],
                             [0.3, 0.0, 0.5],
                             [0.0, 0.5, 0.0]])
        np.testing.assert_allclose(h, expected, atol=1e-15)

    def test_decoupled_limit_is_diagonal(self):
        p = SystemParams(n_modes=2, n_atoms=2, delta_a=0.7, delta_c=-0.4,
                         drives=[0, 0], coupling=np.zeros((2, 2)))
        h = build_hamiltonian(p)
        np.testing.assert_allclose(
            h, np.diag([0, 0.4, 0.4, -0.7, -0.7]), atol=1e-15)

    def test_coupling_block_eigenvalues(self):
        p = single_mode(lam=0.8, eta=0.0, delta=0.0)
        w = np.linalg.eigvalsh(build_hamiltonian(p))
        np.testing.assert_allclose(sorted(w), [-0.4, 0.0, 0.4], atol=1e-14)

    def test_hermitian_for_complex_inputs(self):
        p = random_params(9)
        h = build_hamiltonian(p)
        assert np.linalg.norm(h - h.conj().T) == 0.0


class TestLiouvillian:
    def test_trace_preservation_row(self):
        p = random_params(17, gamma=0.2)
        liou = build_liouvillian(p)
        assert liou.trace_defect() <= 1e-12 * np.linalg.norm(liou.matrix)

    def test_vacuum_stationary_without_drive(self):
        p = SystemParams(n_modes=1, n_atoms=2, delta_a=0.5, delta_c=-0.3,
                         gamma=0.4, drives=[0.0],
                         coupling=make_uniform_coupling(1, 2, 0.7))
        liou = build_liouvillian(p)
        rho0 = np.zeros((4, 4), dtype=complex)
        rho0[0, 0] = 1.0
        assert np.linalg.norm(liou.matrix @ vectorize(rho0)) <= 1e-14

    def test_bare_cavity_population_decays_at_kappa(self):
        p = single_mode(lam=0.0, eta=0.0, gamma=0.0)
        w = np.linalg.eigvals(build_liouvillian(p).matrix)
        assert np.min(np.abs(w - (-p.kappa))) <= 1e-12

    @pytest.mark.parametrize("seed", range(4))
    def test_dissipative_spectrum(self, seed):
        p = random_params(seed, gamma=0.1)
        w = np.linalg.eigvals(build_liouvillian(p).matrix)
        assert np.max(w.real) <= 1e-9


class TestSolveStationary:
    def test_undriven_system_decays_to_vacuum(self):
        p = SystemParams(n_modes=1, n_atoms=2, delta_a=0.9, delta_c=0.2,
                         gamma=0.3, drives=[0.0],
                         coupling=make_uniform_coupling(1, 2, 0.5))
        st = solve_stationary(build_liouvillian(p))
        assert st.ground_weight == pytest.approx(1.0, abs=1e-12)
        assert st.total_population <= 1e-14
        assert np.all(st.atom_excitations <= 1e-14)

    def test_dark_point_population_vanishes(self):
        st = solve_stationary(build_liouvillian(single_mode(lam=1.0)))
        assert st.total_population <= 1e-14
        assert st.residual <= 1e-10

    def test_matches_closed_form_and_eigen_route(self):
        p = single_mode(lam=1.0, eta=0.1, delta=1.0)
        liou = build_liouvillian(p)
        direct = solve_stationary(liou)
        eigen = solve_stationary(liou, method="eigen")
        ref = population_gamma_zero(1.0, 1.0, 0.1, 1.0)
        assert direct.method == "direct"
        assert direct.total_population == pytest.approx(ref, rel=1e-10)
        assert eigen.total_population == pytest.approx(ref, rel=1e-8)
        assert abs(direct.total_population - eigen.total_population) <= 1e-10

    def test_matches_delta_zero_closed_form(self):
        p = single_mode(lam=0.5, eta=0.1, gamma=0.1)
        st = solve_stationary(build_liouvillian(p))
        ref = population_delta_zero(0.1, 0.5, 0.1, 1.0)
        assert st.total_population == pytest.approx(ref, rel=1e-10)

    def test_state_invariants(self):
        p = single_mode(lam=0.7, eta=0.1, gamma=0.05, delta=0.4)
        st = solve_stationary(build_liouvillian(p))
        st.rho.validate()
        assert st.residual <= 1e-10 * np.linalg.norm(build_liouvillian(p).matrix)
        assert st.asymmetry <= 1e-12
        pops = np.concatenate(([st.ground_weight], st.mode_populations,
                               st.atom_excitations))
        assert np.all(pops >= -1e-10) and np.all(pops <= 1 + 1e-10)

    def test_degenerate_kernel_falls_back_to_vacuum_reachable_state(self):
        # gamma = 0 with more atoms than modes leaves undamped collective
        # modes: the direct solve is singular, the eigen projection recovers
        # the state reached from the vacuum
        p = SystemParams(n_modes=1, n_atoms=3, delta_a=0.0, delta_c=0.6,
                         drives=[0.1], coupling=make_uniform_coupling(1, 3, 0.5))
        st = solve_stationary(build_liouvillian(p))
        assert st.method == "eigen"
        dec = decompose(p)
        psi = dark_state(dec).weak_vector(dec)
        fidelity = np.real(psi.conj() @ st.rho.data @ psi)
        assert fidelity >= 1 - 1e-8

    def test_direct_method_raises_on_degenerate_kernel(self):
        p = SystemParams(n_modes=1, n_atoms=3, delta_a=0.0, delta_c=0.6,
                         drives=[0.1], coupling=make_uniform_coupling(1, 3, 0.5))
        with pytest.raises(NumericalError):
            solve_stationary(build_liouvillian(p), method="direct")

    def test_degeneracy_detected_on_request(self):
        p = SystemParams(n_modes=1, n_atoms=2, delta_a=0.0, delta_c=0.0,
                         drives=[0.1], coupling=make_uniform_coupling(1, 2, 0.5))
        with pytest.raises(DegenerateSteadyStateError):
            solve_stationary(build_liouvillian(p), check_unique=True)

    @pytest.mark.parametrize("seed", range(5))
    def test_dark_state_fidelity_random_couplings(self, seed):
        p = random_params(seed, gamma=0.0, delta_a=0.0)
        st = solve_stationary(build_liouvillian(p))
        dec = decompose(p)
        psi = dark_state(dec).weak_vector(dec)
        assert np.real(psi.conj() @ st.rho.data @ psi) >= 1 - 1e-8

    def test_collective_basis_equivalence(self):
        from scipy.optimize import linear_sum_assignment
        p = random_params(33, gamma=0.05, delta_a=0.4)
        pc = collective_params(p)
        lo = build_liouvillian(p).matrix
        lc = build_liouvillian(pc).matrix
        wo = np.linalg.eigvals(lo)
        wc = np.linalg.eigvals(lc)
        cost = np.abs(wo[:, None] - wc[None, :])
        rows, cols = linear_sum_assignment(cost)
        scale = max(np.max(np.abs(wo)), 1.0)
        assert cost[rows, cols].max() <= 1e-10 * scale
        so, sc = solve_stationary(build_liouvillian(p)), solve_stationary(build_liouvillian(pc))
        assert so.total_population == pytest.approx(sc.total_population, abs=1e-10)
        assert so.ground_weight == pytest.approx(sc.ground_weight, abs=1e-10)

    def test_symmetric_multimode_scaling(self):
        m, lam, eta = 2, 0.8, 0.1
        p = SystemParams(n_modes=m, n_atoms=m, delta_a=0.3, delta_c=0.3,
                         drives=[eta] * m, coupling=lam * np.eye(m))
        st = solve_stationary(build_liouvillian(p))
        ref = population_gamma_zero(0.3, lam, np.sqrt(m) * eta, 1.0)
        assert st.total_population == pytest.approx(ref, rel=1e-10)


class TestSweep:
    def test_two_peaks_at_half_splitting(self):
        grid = np.linspace(-5, 5, 401)
        res = sweep_detuning(single_mode(lam=5.0), grid)
        assert res.ok()
        pops = res.total_population
        interior = (np.diff(np.sign(np.diff(pops))) < 0).nonzero()[0] + 1
        peaks = sorted(grid[i] for i in interior if pops[i] > 0.5 * pops.max())
        assert len(peaks) == 2
        assert peaks[0] == pytest.approx(-2.5, abs=0.05)
        assert peaks[1] == pytest.approx(2.5, abs=0.05)

    def test_antiresonance_is_exactly_dark_at_origin(self):
        grid = np.linspace(-2, 2, 81)
        res = sweep_detuning(single_mode(lam=1.0), grid)
        i0 = np.argmin(np.abs(grid))
        assert res.total_population[i0] <= 1e-14
        assert res.total_population[i0 + 5] > 1e-4

    def test_single_point_matches_solve(self):
        p = single_mode(lam=0.5, eta=0.1, gamma=0.2, delta=0.7)
        res = sweep_detuning(p, [0.7])
        st = solve_stationary(build_liouvillian(p))
        assert res.n_points == 1
        assert res.total_population[0] == pytest.approx(st.total_population, rel=1e-12)

    def test_population_even_in_detuning_for_real_inputs(self):
        grid = np.linspace(-3, 3, 61)
        res = sweep_detuning(single_mode(lam=1.0, eta=0.1), grid)
        np.testing.assert_allclose(res.total_population, res.total_population[::-1],
                                   atol=1e-12)

    def test_failed_points_are_marked_not_fatal(self):
        # degenerate kernel with the direct method forced: every point fails,
        # the sweep still returns a complete result
        p = SystemParams(n_modes=1, n_atoms=2, delta_a=0.0, delta_c=0.0,
                         drives=[0.1], coupling=make_uniform_coupling(1, 2, 0.5))
        res = sweep_detuning(p, [0.0, 0.5], method="direct")
        assert all(s.startswith("error:") for s in res.statuses)
        assert np.all(np.isnan(res.total_population))

    def test_pinned_cavity_detuning(self):
        p = single_mode(lam=1.0, eta=0.1, gamma=0.1)
        res = sweep_detuning(p, [0.4], pinned_delta_c=-0.8)
        st = solve_stationary(build_liouvillian(p.with_detunings(0.4, -0.8)))
        assert res.total_population[0] == pytest.approx(st.total_population, rel=1e-12)

    def test_threads_do_not_change_results(self):
        grid = np.linspace(-2, 2, 17)
        p = single_mode(lam=1.0, eta=0.1, gamma=0.05)
        serial = sweep_detuning(p, grid, threads=1)
        parallel = sweep_detuning(p, grid, threads=4)
        np.testing.assert_array_equal(serial.total_population,
                                      parallel.total_population)
        assert serial.statuses == parallel.statuses

    def test_empty_grid_rejected(self):
        with pytest.raises(ValidationError):
            sweep_detuning(single_mode(1.0), [])


class TestDensityMatrixValidation:
    def test_rejects_non_hermitian(self):
        bad = np.array([[1.0, 0.5], [0.0, 0.0]], dtype=complex)
        with pytest.raises(ValidationError):
            DensityMatrix(basis=WeakBasis(1, 0), data=bad).validate()

    def test_rejects_wrong_trace(self):
        bad = np.eye(2, dtype=complex)
        with pytest.raises(ValidationError):
            DensityMatrix(basis=WeakBasis(1, 0), data=bad).validate()

    def test_rejects_negative_eigenvalue(self):
        bad = np.diag([1.5, -0.5]).astype(complex)
        with pytest.raises(ValidationError):
            DensityMatrix(basis=WeakBasis(1, 0), data=bad).validate()

    def test_trace_vector_matches_definition(self):
        t = trace_vector(3)
        rho = np.arange(9, dtype=complex).reshape(3, 3)
        assert t @ vectorize(rho) == pytest.approx(np.trace(rho))
