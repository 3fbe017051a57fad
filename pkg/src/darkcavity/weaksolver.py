"""Single-excitation model of the driven lossy atom-cavity system.

The basis spans the shared ground state |0>, one cavity-photon state per mode
|C_k>, and one excited-atom state per atom |A_l>; dimension 1 + M + N.  The
Hamiltonian carries -delta_c on cavity states, -delta_a on atomic states,
half the coupling matrix between them, and the drive amplitudes between the
ground state and the cavity states.  Cavity decay and spontaneous emission
enter as jump operators |0><C_k| (rate kappa) and |0><A_l| (rate gamma).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import superop
from .errors import NumericalError, ValidationError
from .model import SystemParams

HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-8


@dataclass(frozen=True)
class WeakBasis:
    """Index map for the single-excitation basis: 0 is the ground state,
    1..M the cavity states, M+1..M+N the atomic states."""

    n_modes: int
    n_atoms: int

    @property
    def dimension(self):
        return 1 + self.n_modes + self.n_atoms

    ground = 0

    def cavity_index(self, k):
        if not 0 <= k < self.n_modes:
            raise IndexError(f"cavity mode {k} out of range")
        return 1 + k

    def atom_index(self, l):
        if not 0 <= l < self.n_atoms:
            raise IndexError(f"atom {l} out of range")
        return 1 + self.n_modes + l

    def labels(self):
        return (["ground"]
                + [f"cavity_{k + 1}" for k in range(self.n_modes)]
                + [f"atom_{l + 1}" for l in range(self.n_atoms)])


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, positive-semidefinite matrix over a declared
    basis (within the tolerances below)."""

    basis: object
    data: np.ndarray

    def hermiticity_defect(self):
        return float(np.linalg.norm(self.data - self.data.conj().T))

    def trace_defect(self):
        return float(abs(np.trace(self.data) - 1.0))

    def min_eigenvalue(self):
        return float(np.linalg.eigvalsh(0.5 * (self.data + self.data.conj().T))[0])

    def validate(self, hermiticity_tol=HERMITICITY_TOL, trace_tol=TRACE_TOL,
                 psd_tol=PSD_TOL):
        h = self.hermiticity_defect()
        if h > hermiticity_tol:
            raise ValidationError(f"density matrix is not Hermitian: defect {h:.3e}")
        t = self.trace_defect()
        if t > trace_tol:
            raise ValidationError(f"density matrix trace differs from 1 by {t:.3e}")
        m = self.min_eigenvalue()
        if m < -psd_tol:
            raise ValidationError(f"density matrix has eigenvalue {m:.3e} < -{psd_tol:.1e}")
        return self


@dataclass(frozen=True)
class Liouvillian:
    """Vectorized master-equation generator over a weak basis."""

    basis: WeakBasis
    matrix: np.ndarray

    @property
    def dimension(self):
        return self.basis.dimension

    def trace_defect(self):
        return superop.trace_defect(self.matrix)


@dataclass(frozen=True)
class StationaryState:
    """Stationary density matrix with its residual and observables."""

    rho: DensityMatrix
    residual: float
    asymmetry: float
    mode_populations: np.ndarray
    atom_excitations: np.ndarray
    ground_weight: float
    method: str

    @property
    def total_population(self):
        return float(np.sum(self.mode_populations))


def build_hamiltonian(params: SystemParams):
    """Hermitian single-excitation Hamiltonian as a dense complex matrix."""
    M, N = params.n_modes, params.n_atoms
    basis = WeakBasis(M, N)
    d = basis.dimension
    H = np.zeros((d, d), dtype=complex)
    for k in range(M):
        ck = basis.cavity_index(k)
        H[ck, ck] = -params.delta_c
        H[ck, basis.ground] = params.drives[k]
        H[basis.ground, ck] = np.conj(params.drives[k])
    for l in range(N):
        al = basis.atom_index(l)
        H[al, al] = -params.delta_a
        for k in range(M):
            ck = basis.cavity_index(k)
            H[ck, al] = params.coupling[k, l] / 2.0
            H[al, ck] = np.conj(params.coupling[k, l]) / 2.0
    return H


def jump_operators(params: SystemParams):
    """(rate, operator) pairs: cavity decay |0><C_k| at kappa, spontaneous
    emission |0><A_l| at gamma."""
    basis = WeakBasis(params.n_modes, params.n_atoms)
    d = basis.dimension
    jumps = []
    for k in range(params.n_modes):
        op = np.zeros((d, d), dtype=complex)
        op[basis.ground, basis.cavity_index(k)] = 1.0
        jumps.append((params.kappa, op))
    for l in range(params.n_atoms):
        op = np.zeros((d, d), dtype=complex)
        op[basis.ground, basis.atom_index(l)] = 1.0
        jumps.append((params.gamma, op))
    return jumps


def build_liouvillian(params: SystemParams):
    basis = WeakBasis(params.n_modes, params.n_atoms)
    H = build_hamiltonian(params)
    mat = superop.lindblad_superoperator(H, jump_operators(params))
    return Liouvillian(basis=basis, matrix=mat)


def solve_stationary(liouvillian: Liouvillian, *, method="auto",
                     residual_tol=superop.DEFAULT_RESIDUAL_TOL,
                     check_unique=False):
    """Stationary state of the master equation.

    The trace-constrained direct solve handles the generic case; when the
    kernel is degenerate (undamped uncoupled sectors at gamma = 0) the
    vacuum-seeded eigen-projection supplies the state the dynamics reaches
    from the ground state.  `check_unique` requests an explicit kernel-
    dimension probe that raises DegenerateSteadyStateError on degeneracy.
    """
    basis = liouvillian.basis
    x, residual, used = superop.stationary_vector(
        liouvillian.matrix, method=method, residual_tol=residual_tol,
        check_unique=check_unique,
    )
    rho_raw = superop.unvectorize(x, basis.dimension)
    rho, asym = superop.hermitize(rho_raw)
    diag = np.real(np.diag(rho))
    mode_pops = diag[1:1 + basis.n_modes].copy()
    atom_exc = diag[1 + basis.n_modes:].copy()
    return StationaryState(
        rho=DensityMatrix(basis=basis, data=rho),
        residual=residual,
        asymmetry=asym,
        mode_populations=mode_pops,
        atom_excitations=atom_exc,
        ground_weight=float(diag[0]),
        method=used,
    )


@dataclass
class SweepResult:
    """Observables on a detuning grid; failed points are recorded, not fatal."""

    deltas: np.ndarray
    mode_populations: np.ndarray
    total_population: np.ndarray
    ground_weight: np.ndarray
    atom_excitations: np.ndarray
    residuals: np.ndarray
    statuses: list = field(default_factory=list)
    pinned_delta_c: float = None

    @property
    def n_points(self):
        return len(self.deltas)

    def ok(self):
        return all(s == "ok" for s in self.statuses)


def sweep_detuning(params: SystemParams, delta_values, *, pinned_delta_c=None,
                   method="auto", threads=1,
                   residual_tol=superop.DEFAULT_RESIDUAL_TOL):
    """Stationary observables for each detuning, with delta_a = delta_c =
    delta unless delta_c is pinned.  Rows keep the input order; a failed
    point marks its row instead of aborting the sweep."""
    deltas = np.atleast_1d(np.asarray(delta_values, dtype=float))
    if deltas.size == 0:
        raise ValidationError("delta_values must not be empty")
    M, N = params.n_modes, params.n_atoms
    n = deltas.size
    mode_pops = np.full((n, M), np.nan)
    total = np.full(n, np.nan)
    ground = np.full(n, np.nan)
    atom_exc = np.full((n, N), np.nan)
    residuals = np.full(n, np.nan)
    statuses = ["pending"] * n

    def solve_point(i):
        delta = deltas[i]
        point = params.with_detunings(delta, pinned_delta_c)
        liou = build_liouvillian(point)
        return solve_stationary(liou, method=method, residual_tol=residual_tol)

    def record(i):
        try:
            st = solve_point(i)
        except (NumericalError, np.linalg.LinAlgError) as exc:
            statuses[i] = f"error:{type(exc).__name__}"
            return
        mode_pops[i] = st.mode_populations
        total[i] = st.total_population
        ground[i] = st.ground_weight
        atom_exc[i] = st.atom_excitations
        residuals[i] = st.residual
        statuses[i] = "ok"

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(record, range(n)))
    else:
        for i in range(n):
            record(i)

    return SweepResult(
        deltas=deltas, mode_populations=mode_pops, total_population=total,
        ground_weight=ground, atom_excitations=atom_exc, residuals=residuals,
        statuses=statuses, pinned_delta_c=pinned_delta_c,
    )
