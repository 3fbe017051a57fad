"""Full model on a truncated Fock space, used as a brute-force cross-check of
the single-excitation solver and for the beyond-weak-excitation regime.

Each of the M cavity modes keeps Fock levels 0..n_max (the raising operator
annihilates the top level: hard cutoff, diagnosed via the top-level weight);
each of the N atoms is a two-level system.  Basis index = sum of mode
occupations in base (n_max + 1), least-significant mode first, followed by
the atomic bits.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import superop
from .errors import ResourceLimitError, ThresholdError, ValidationError
from .model import SystemParams

DEFAULT_MAX_DIMENSION = 4096
DEFAULT_MAX_SOLVE_DIMENSION = 64
TRUNCATION_THRESHOLD = 1e-6


@dataclass(frozen=True)
class FockBasis:
    """Deterministic index encoding for M bosonic modes (cutoff n_max) and N
    two-level atoms."""

    n_modes: int
    n_atoms: int
    n_max: int

    def __post_init__(self):
        if self.n_max < 1:
            raise ValidationError(f"n_max must be at least 1, got {self.n_max}")
        if self.n_modes < 1 or self.n_atoms < 0:
            raise ValidationError("need at least one mode and zero or more atoms")

    @property
    def dimension(self):
        return (self.n_max + 1) ** self.n_modes * 2 ** self.n_atoms

    @property
    def _site_dims(self):
        return [self.n_max + 1] * self.n_modes + [2] * self.n_atoms

    def index_of(self, occupations, excited_bits):
        """Index of the state with the given photon numbers and atomic bits."""
        if len(occupations) != self.n_modes or len(excited_bits) != self.n_atoms:
            raise ValidationError("occupation/bit lengths do not match the basis")
        idx = 0
        base = self.n_max + 1
        for k, n in enumerate(occupations):
            if not 0 <= n <= self.n_max:
                raise ValidationError(f"occupation {n} outside 0..{self.n_max}")
            idx += int(n) * base**k
        offset = base**self.n_modes
        for l, b in enumerate(excited_bits):
            if b not in (0, 1):
                raise ValidationError("atomic bits must be 0 or 1")
            idx += int(b) * offset * 2**l
        return idx

    def occupations_of(self, index):
        """Inverse of index_of: (occupations, excited_bits)."""
        if not 0 <= index < self.dimension:
            raise ValidationError(f"index {index} outside basis of size {self.dimension}")
        base = self.n_max + 1
        occ = []
        for _ in range(self.n_modes):
            occ.append(index % base)
            index //= base
        bits = []
        for _ in range(self.n_atoms):
            bits.append(index % 2)
            index //= 2
        return occ, bits

    def _site_operator(self, op, site):
        out = np.array([[1.0 + 0j]])
        dims = self._site_dims
        for s in range(len(dims) - 1, -1, -1):
            factor = op if s == site else np.eye(dims[s], dtype=complex)
            out = np.kron(out, factor)
        return out

    @cached_property
    def _single_annihilation(self):
        return np.diag(np.sqrt(np.arange(1, self.n_max + 1)), 1).astype(complex)

    def annihilation(self, k):
        """Photon annihilation operator for mode k."""
        if not 0 <= k < self.n_modes:
            raise IndexError(f"mode {k} out of range")
        return self._site_operator(self._single_annihilation, k)

    def number(self, k):
        a = self.annihilation(k)
        return a.conj().T @ a

    def lowering(self, l):
        """Atomic lowering operator |g><e| for atom l."""
        if not 0 <= l < self.n_atoms:
            raise IndexError(f"atom {l} out of range")
        sm = np.array([[0, 1], [0, 0]], dtype=complex)
        return self._site_operator(sm, self.n_modes + l)

    def sz(self, l):
        if not 0 <= l < self.n_atoms:
            raise IndexError(f"atom {l} out of range")
        return self._site_operator(np.diag([-1.0, 1.0]).astype(complex), self.n_modes + l)

    def total_excitation(self):
        """Photon number plus atomic excitation count; conserved by the
        undriven closed dynamics."""
        d = self.dimension
        op = np.zeros((d, d), dtype=complex)
        for k in range(self.n_modes):
            op += self.number(k)
        for l in range(self.n_atoms):
            op += 0.5 * (self.sz(l) + np.eye(d))
        return op

    def top_level_projector(self):
        """Projector onto states with any mode at the truncation boundary."""
        d = self.dimension
        diag = np.zeros(d)
        for idx in range(d):
            occ, _ = self.occupations_of(idx)
            if any(n == self.n_max for n in occ):
                diag[idx] = 1.0
        return np.diag(diag).astype(complex)


def build_full_hamiltonian(params: SystemParams, n_max, *,
                           max_dimension=DEFAULT_MAX_DIMENSION):
    """Dense Hamiltonian of the full driven model on the truncated Fock basis."""
    basis = FockBasis(params.n_modes, params.n_atoms, n_max)
    d = basis.dimension
    if d > max_dimension:
        raise ResourceLimitError(
            f"Fock dimension {d} exceeds the budget {max_dimension}"
        )
    H = np.zeros((d, d), dtype=complex)
    ann = [basis.annihilation(k) for k in range(params.n_modes)]
    low = [basis.lowering(l) for l in range(params.n_atoms)]
    for k in range(params.n_modes):
        H += -params.delta_c * (ann[k].conj().T @ ann[k])
        H += params.drives[k] * ann[k].conj().T + np.conj(params.drives[k]) * ann[k]
    for l in range(params.n_atoms):
        H += -(params.delta_a / 2.0) * basis.sz(l)
        for k in range(params.n_modes):
            g = params.coupling[k, l]
            H += 0.5 * (g * ann[k].conj().T @ low[l]
                        + np.conj(g) * ann[k] @ low[l].conj().T)
    return H


@dataclass(frozen=True)
class FockStationaryState:
    """Stationary state of the full model with true photon-number observables
    and truncation diagnostics."""

    basis: FockBasis
    rho: np.ndarray
    residual: float
    asymmetry: float
    mode_populations: np.ndarray
    atom_excitations: np.ndarray
    ground_weight: float
    top_level_weight: float
    truncation_warning: bool
    method: str

    @property
    def total_population(self):
        return float(np.sum(self.mode_populations))


def solve_full_stationary(params: SystemParams, n_max, *, method="auto",
                          residual_tol=superop.DEFAULT_RESIDUAL_TOL,
                          truncation_threshold=TRUNCATION_THRESHOLD,
                          max_solve_dimension=DEFAULT_MAX_SOLVE_DIMENSION):
    """Stationary density matrix of the full model via the same constrained
    solve as the single-excitation solver, with jump operators a_m (rate
    kappa) and sigma_l^- (rate gamma)."""
    basis = FockBasis(params.n_modes, params.n_atoms, n_max)
    d = basis.dimension
    if d > max_solve_dimension:
        raise ResourceLimitError(
            f"Fock dimension {d} exceeds the dense-superoperator solve budget "
            f"{max_solve_dimension} (superoperator would be {d * d}x{d * d})"
        )
    H = build_full_hamiltonian(params, n_max, max_dimension=max_solve_dimension)
    jumps = [(params.kappa, basis.annihilation(k)) for k in range(params.n_modes)]
    jumps += [(params.gamma, basis.lowering(l)) for l in range(params.n_atoms)]
    L = superop.lindblad_superoperator(H, jumps)
    x, residual, used = superop.stationary_vector(
        L, method=method, residual_tol=residual_tol,
    )
    rho_raw = superop.unvectorize(x, d)
    rho, asym = superop.hermitize(rho_raw)
    mode_pops = np.array([
        float(np.real(np.trace(basis.number(k) @ rho))) for k in range(params.n_modes)
    ])
    atom_exc = np.array([
        float(np.real(np.trace(basis.lowering(l).conj().T @ basis.lowering(l) @ rho)))
        for l in range(params.n_atoms)
    ])
    top_weight = float(np.real(np.trace(basis.top_level_projector() @ rho)))
    total = float(np.sum(mode_pops))
    warning = top_weight > truncation_threshold * max(total, 1e-300)
    return FockStationaryState(
        basis=basis, rho=rho, residual=residual, asymmetry=asym,
        mode_populations=mode_pops, atom_excitations=atom_exc,
        ground_weight=float(np.real(rho[0, 0])),
        top_level_weight=top_weight, truncation_warning=warning, method=used,
    )


@dataclass(frozen=True)
class GroundStateResult:
    """Cavity population of the below-threshold collective eigenstate of the
    isolated system, with its eigenvalue and truncation diagnostics."""

    population: float
    energy: float
    overlap: float
    top_level_weight: float
    truncation_warning: bool


def ground_state_population(params: SystemParams, n_max, *,
                            max_dimension=DEFAULT_MAX_DIMENSION,
                            truncation_threshold=TRUNCATION_THRESHOLD):
    """Cavity population of the isolated system's collective zero-energy
    eigenstate for a single uniformly coupled mode below threshold.

    The driven spectrum at resonance is unbounded below at any truncation,
    so "the" eigenstate is selected as the branch continuously connected to
    the weak-drive dark state (maximal overlap with it); at zero drive this
    is the bare vacuum.
    """
    if params.n_modes != 1:
        raise ValidationError("ground-state population is defined for a single mode")
    g0 = params.coupling[0, 0]
    if not np.allclose(params.coupling, g0):
        raise ValidationError("ground-state population requires uniform coupling")
    g = abs(g0)
    eta = params.drives[0]
    _check_threshold(eta, g, params.n_atoms)
    basis = FockBasis(1, params.n_atoms, n_max)
    if basis.dimension > max_dimension:
        raise ResourceLimitError(
            f"Fock dimension {basis.dimension} exceeds the budget {max_dimension}"
        )
    H = build_full_hamiltonian(params, n_max, max_dimension=max_dimension)
    energies, vectors = np.linalg.eigh(H)

    # weak-limit dark state embedded in the Fock basis
    lam = g * np.sqrt(params.n_atoms)
    psi = np.zeros(basis.dimension, dtype=complex)
    psi[basis.index_of([0], [0] * params.n_atoms)] = 1.0
    if lam > 0:
        amp = -2.0 * eta / lam / np.sqrt(params.n_atoms)
        for l in range(params.n_atoms):
            bits = [0] * params.n_atoms
            bits[l] = 1
            psi[basis.index_of([0], bits)] = amp
    psi /= np.linalg.norm(psi)

    overlaps = np.abs(vectors.conj().T @ psi) ** 2
    i = int(np.argmax(overlaps))
    v = vectors[:, i]
    population = float(np.real(v.conj() @ basis.number(0) @ v))
    top_weight = float(np.real(v.conj() @ basis.top_level_projector() @ v))
    warning = top_weight > truncation_threshold * max(population, 1e-300)
    return GroundStateResult(
        population=population, energy=float(energies[i]),
        overlap=float(overlaps[i]), top_level_weight=top_weight,
        truncation_warning=warning,
    )


def _check_threshold(eta, g, n_atoms):
    if g <= 0:
        raise ValidationError("uniform coupling must be nonzero for the threshold check")
    x = 4 * abs(eta) / (n_atoms * g)
    if x >= 1:
        raise ThresholdError(
            f"drive parameter 4*eta/(N*g) = {x:.4f} is at or above threshold"
        )
