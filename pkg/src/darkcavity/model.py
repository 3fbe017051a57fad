"""Physical parameters, coupling-matrix generators, and the collective-mode
decomposition.

All rates and energies are measured in units of the cavity loss rate kappa
(kappa = 1 by default).  The coupling matrix G has one row per cavity mode
and one column per atom; its singular value decomposition G = U diag(s) W^dag
defines collective cavity modes (columns of U) and collective atomic modes
(columns of W) such that the j-th collective pair couples with strength s_j
and the drive amplitudes transform as eta_tilde = U^dag eta.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ValidationError

DEFAULT_RANK_TOLERANCE = 1e-10


def _frozen_complex(a, shape, name):
    arr = np.array(a, dtype=complex)
    if arr.shape != shape:
        raise DimensionError(f"{name} must have shape {shape}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite entries")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class SystemParams:
    """All physical parameters of the driven lossy atom-cavity system.

    Immutable after construction; safe to share between workers.
    """

    n_modes: int
    n_atoms: int
    delta_c: float
    delta_a: float
    drives: np.ndarray
    coupling: np.ndarray
    kappa: float = 1.0
    gamma: float = 0.0

    def __post_init__(self):
        if not isinstance(self.n_modes, (int, np.integer)) or self.n_modes < 1:
            raise ValidationError(f"n_modes must be a positive integer, got {self.n_modes}")
        if not isinstance(self.n_atoms, (int, np.integer)) or self.n_atoms < 1:
            raise ValidationError(f"n_atoms must be a positive integer, got {self.n_atoms}")
        if self.n_modes > self.n_atoms:
            raise DimensionError(
                f"n_modes={self.n_modes} exceeds n_atoms={self.n_atoms}; "
                "the collective-mode construction requires at least as many atoms as modes"
            )
        for name in ("delta_c", "delta_a", "kappa", "gamma"):
            v = getattr(self, name)
            if not np.isfinite(v):
                raise ValidationError(f"{name} must be finite, got {v}")
        if self.kappa <= 0:
            raise ValidationError(f"kappa must be positive, got {self.kappa}")
        if self.gamma < 0:
            raise ValidationError(f"gamma must be non-negative, got {self.gamma}")
        M, N = self.n_modes, self.n_atoms
        object.__setattr__(self, "drives", _frozen_complex(self.drives, (M,), "drives"))
        object.__setattr__(self, "coupling", _frozen_complex(self.coupling, (M, N), "coupling"))

    def with_detunings(self, delta_a, delta_c=None):
        """Copy of the parameters at new detunings; delta_c follows delta_a
        unless pinned separately."""
        if delta_c is None:
            delta_c = delta_a
        return dataclasses.replace(self, delta_a=float(delta_a), delta_c=float(delta_c))

    def with_drives(self, drives):
        return dataclasses.replace(self, drives=np.asarray(drives, dtype=complex))


def make_uniform_coupling(n_modes, n_atoms, g):
    """Coupling matrix with every atom coupled identically to every mode.

    For a single mode this realises the collective splitting g*sqrt(n_atoms)
    exactly.
    """
    if n_modes < 1 or n_atoms < 1:
        raise DimensionError(
            f"mode/atom counts must be positive, got ({n_modes}, {n_atoms})"
        )
    return np.full((n_modes, n_atoms), complex(g))


def make_localized_coupling(n_modes, n_atoms, g, perturbation, seed):
    """All-ones coupling of strength g plus seeded uniform noise of magnitude
    at most `perturbation`.

    With perturbation = 0 exactly one collective pair survives, with
    splitting g*sqrt(n_modes*n_atoms); small perturbations lift the remaining
    singular values to order `perturbation`.
    """
    if n_modes < 1 or n_atoms < 1:
        raise DimensionError(
            f"mode/atom counts must be positive, got ({n_modes}, {n_atoms})"
        )
    if n_modes > n_atoms:
        raise DimensionError(
            f"n_modes={n_modes} exceeds n_atoms={n_atoms}"
        )
    if perturbation < 0:
        raise ValidationError(f"perturbation must be non-negative, got {perturbation}")
    base = np.full((n_modes, n_atoms), complex(g))
    if perturbation > 0:
        rng = np.random.default_rng(seed)
        base = base + perturbation * rng.uniform(-1.0, 1.0, size=(n_modes, n_atoms))
    return base


@dataclass(frozen=True)
class CollectiveDecomposition:
    """SVD factors of the coupling matrix and the transformed drives.

    `u` (MxM) and `w` (NxN) are unitary; `singular_values` are sorted
    descending; `rank` counts the values above the relative threshold;
    `transformed_drives` is U^dag applied to the physical drive vector.
    """

    u: np.ndarray
    w: np.ndarray
    singular_values: np.ndarray
    rank: int
    transformed_drives: np.ndarray

    @property
    def n_modes(self):
        return self.u.shape[0]

    @property
    def n_atoms(self):
        return self.w.shape[0]


def _fix_column_phases(u, w, n_fixed):
    """Rotate paired singular-vector phases so each column of `u` has its
    largest-magnitude entry real and non-negative.  Unpaired columns of `w`
    get the same treatment on their own entries."""
    u = u.copy()
    w = w.copy()
    m = u.shape[0]
    for j in range(m):
        k = int(np.argmax(np.abs(u[:, j])))
        mag = abs(u[k, j])
        if mag > 0:
            phase = u[k, j] / mag
            u[:, j] *= np.conj(phase)
            if j < n_fixed:
                w[:, j] *= np.conj(phase)
    for j in range(w.shape[1]):
        if j < n_fixed:
            continue
        k = int(np.argmax(np.abs(w[:, j])))
        mag = abs(w[k, j])
        if mag > 0:
            w[:, j] *= np.conj(w[k, j]) / mag
    return u, w


def decompose(params, rank_tolerance=DEFAULT_RANK_TOLERANCE):
    """Collective-mode decomposition of the coupling matrix.

    Returns unitary factors with G = U diag(s) W^dag, the descending singular
    values, the rank (count of values above rank_tolerance * max), and the
    drive amplitudes in the collective cavity basis.
    """
    if not 0 < rank_tolerance < 1:
        raise ValidationError(
            f"rank_tolerance must lie in (0, 1), got {rank_tolerance}"
        )
    G = params.coupling
    u, s, vh = np.linalg.svd(G, full_matrices=True)
    w = vh.conj().T
    u, w = _fix_column_phases(u, w, n_fixed=len(s))
    s_max = s[0] if len(s) else 0.0
    rank = int(np.count_nonzero(s > rank_tolerance * s_max)) if s_max > 0 else 0
    eta_t = u.conj().T @ params.drives
    for arr in (u, w, s, eta_t):
        arr.flags.writeable = False
    return CollectiveDecomposition(
        u=u, w=w, singular_values=s, rank=rank, transformed_drives=eta_t
    )


def collective_params(params, decomposition=None, rank_tolerance=DEFAULT_RANK_TOLERANCE):
    """The same physical system expressed in the collective basis: rectangular
    diagonal coupling diag(s) and transformed drives.

    Observable totals (eigenvalue spectra, total populations) are invariant
    under this change of basis.
    """
    dec = decomposition if decomposition is not None else decompose(params, rank_tolerance)
    M, N = params.n_modes, params.n_atoms
    lam = np.zeros((M, N), dtype=complex)
    lam[:M, :M] = np.diag(dec.singular_values)
    return dataclasses.replace(
        params, drives=dec.transformed_drives.copy(), coupling=lam
    )
