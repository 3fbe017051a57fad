"""Closed-form stationary populations, the dark state, and the observability
conditions for the anti-resonance.

These expressions serve as the independent oracle layer for the numerical
solver: they are evaluated directly from parameters and never call into the
solver.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoDarkStateError, ThresholdError, ValidationError
from .model import CollectiveDecomposition, SystemParams, decompose

OBSERVABILITY_STRONG_FACTOR = 10.0
WEAK_DRIVE_FACTOR = 10.0


def two_lorentzian_population(delta, splitting, drive, gamma, kappa):
    """Well-split-peak approximation: a Lorentzian at each of delta =
    -splitting/2 and +splitting/2 with half-width set by drive and the
    combined linewidth."""
    if kappa <= 0:
        raise ValidationError("kappa must be positive")
    total = 0.0
    for sign in (+1.0, -1.0):
        total += 4 * drive**2 / (
            16 * (delta + sign * splitting / 2) ** 2
            + 16 * drive**2 + (gamma + kappa) ** 2
        )
    return total


def population_gamma_zero(delta, splitting, drive, kappa):
    """Exact single-mode stationary cavity population without spontaneous
    emission; vanishes quadratically at delta = 0."""
    if kappa <= 0:
        raise ValidationError("kappa must be positive")
    num = 16 * delta**2 * drive**2
    den = (16 * delta**4
           + 4 * delta**2 * (8 * drive**2 + kappa**2 - 2 * splitting**2)
           + (4 * drive**2 + splitting**2) ** 2)
    return num / den


def population_delta_zero(gamma, splitting, drive, kappa):
    """Exact single-mode stationary cavity population at zero detuning as a
    function of the spontaneous-emission rate; vanishes linearly in gamma."""
    if kappa <= 0:
        raise ValidationError("kappa must be positive")
    if gamma < 0:
        raise ValidationError("gamma must be non-negative")
    sat = 4 * drive**2 + gamma * (gamma + kappa)
    num = 4 * drive**2 * gamma * sat
    den = (gamma * (8 * drive**2 + kappa**2) * sat
           + 2 * kappa * splitting**2 * (2 * drive**2 + gamma * (gamma + kappa))
           + (gamma + kappa) * splitting**4)
    if den == 0:
        return 0.0
    return num / den


def anti_resonance_width(splitting, drive, kappa):
    """Estimated width of the dark anti-resonance (order-of-magnitude)."""
    if kappa <= 0:
        raise ValidationError("kappa must be positive")
    return (4 * drive**2 + splitting**2) / np.sqrt(2 * (16 * drive**2 + kappa**2))


@dataclass(frozen=True)
class DarkState:
    """Zero-eigenvalue superposition of the shared ground state and the
    collective atomic excitations; it carries no cavity weight, so the cavity
    emission from it vanishes.

    `atomic_amplitudes` holds the un-normalized entries -2*eta_tilde_j /
    lambda_j over the collective atomic modes (zero beyond the coupling
    rank); `norm` is the normalization constant of the full state.
    """

    ground_amplitude: complex
    atomic_amplitudes: np.ndarray
    norm: float

    @property
    def n_collective_atoms(self):
        return len(self.atomic_amplitudes)

    def collective_vector(self, n_modes):
        """Normalized state vector in the collective single-excitation basis
        (ground, collective cavity modes, collective atomic modes)."""
        n = self.n_collective_atoms
        psi = np.zeros(1 + n_modes + n, dtype=complex)
        psi[0] = self.ground_amplitude / self.norm
        psi[1 + n_modes:] = self.atomic_amplitudes / self.norm
        return psi

    def weak_vector(self, decomposition: CollectiveDecomposition):
        """Normalized state vector in the original single-excitation basis,
        mapping the collective atomic amplitudes through W."""
        m = decomposition.n_modes
        n = decomposition.n_atoms
        psi = np.zeros(1 + m + n, dtype=complex)
        psi[0] = self.ground_amplitude / self.norm
        psi[1 + m:] = (decomposition.w @ self.atomic_amplitudes) / self.norm
        return psi


def dark_state(decomposition: CollectiveDecomposition):
    """Dark state of a decomposed coupling; exact stationary state at
    delta_a = 0 and gamma = 0 for any pinned cavity detuning.

    Raises NoDarkStateError when a drive feeds a collective cavity mode with
    no atomic partner (singular value below the rank threshold): nothing can
    cancel that mode's excitation.
    """
    s = decomposition.singular_values
    eta_t = decomposition.transformed_drives
    rank = decomposition.rank
    drive_scale = max(float(np.max(np.abs(eta_t))) if len(eta_t) else 0.0, 1.0)
    for j in range(decomposition.n_modes):
        if j >= rank and abs(eta_t[j]) > 1e-12 * drive_scale:
            raise NoDarkStateError(
                f"collective cavity mode {j + 1} is driven "
                f"(amplitude {abs(eta_t[j]):.3e}) but has no coupled atomic mode"
            )
    amps = np.zeros(decomposition.n_atoms, dtype=complex)
    amps[:rank] = -2.0 * eta_t[:rank] / s[:rank]
    norm = float(np.sqrt(1.0 + np.sum(np.abs(amps) ** 2)))
    return DarkState(ground_amplitude=1.0 + 0j, atomic_amplitudes=amps, norm=norm)


def milburn_alsing_population(drive, g, n_atoms):
    """Mean cavity population of the below-threshold collective state of the
    symmetrically coupled, cavity-driven ensemble (a large-atom-number
    result)."""
    x = _threshold_parameter(drive, g, n_atoms)
    return -0.25 * np.log1p(-x * x)


def milburn_alsing_weak_approx(drive, g, n_atoms):
    """Small-drive limit of the collective-state population."""
    _threshold_parameter(drive, g, n_atoms)
    return (2 * abs(drive) / (n_atoms * g)) ** 2


def _threshold_parameter(drive, g, n_atoms):
    if g <= 0:
        raise ValidationError("single-atom coupling g must be positive")
    if n_atoms < 1:
        raise ValidationError("n_atoms must be at least 1")
    x = 4 * abs(drive) / (n_atoms * g)
    if x >= 1:
        raise ThresholdError(
            f"drive parameter 4*eta/(N*g) = {x:.4f} is at or above the "
            "instability threshold 1"
        )
    return x


@dataclass(frozen=True)
class ObservabilityReport:
    """Per-collective-mode observability of the dark anti-resonance.

    condition1: the splitting is small enough that the anti-resonance is not
    just two well-separated peaks (lambda^2 <= kappa^2 + 16 eta^2).
    condition2: spontaneous emission is weak enough not to fill the dip
    (lambda^2 >= factor * (2 gamma / kappa)(8 eta^2 + kappa^2), factor 10
    standing in for "much greater").  Margins are the ratios the caller can
    re-threshold.  The combined window [sqrt(2 gamma kappa), kappa] is the
    summary interval for lambda.
    """

    splittings: np.ndarray
    condition1_ok: np.ndarray
    condition1_margin: np.ndarray
    condition2_ok: np.ndarray
    condition2_margin: np.ndarray
    window_low: float
    window_high: float
    window_empty: bool
    in_window: np.ndarray
    width_estimates: np.ndarray
    weak_driving_ok: bool
    drive_ratio: float
    observable: bool
    atom_number_estimate: float
    target_splitting: float


def observability_report(params: SystemParams,
                         decomposition: CollectiveDecomposition = None, *,
                         target_splitting=None, single_atom_g=None):
    """Evaluate the anti-resonance observability conditions for every
    retained collective mode.

    The drive strength entering the conditions is the total drive power
    across modes (the symmetric multi-mode case scales exactly this way).
    `single_atom_g` enables the atom-number estimate N = (target/g)^2 for
    reaching `target_splitting` (default kappa).
    """
    dec = decomposition if decomposition is not None else decompose(params)
    kappa, gamma = params.kappa, params.gamma
    if target_splitting is None:
        target_splitting = kappa
    lam = dec.singular_values[:dec.rank].astype(float)
    eta_sq = float(np.sum(np.abs(params.drives) ** 2))

    bound1 = kappa**2 + 16 * eta_sq
    margin1 = lam**2 / bound1
    ok1 = margin1 <= 1.0

    bound2 = OBSERVABILITY_STRONG_FACTOR * (2 * gamma / kappa) * (8 * eta_sq + kappa**2)
    if bound2 > 0:
        margin2 = lam**2 / bound2
    else:
        margin2 = np.where(lam > 0, np.inf, 0.0)
    ok2 = margin2 >= 1.0

    window_low = float(np.sqrt(2 * gamma * kappa))
    window_high = float(kappa)
    window_empty = window_low >= window_high
    in_window = (lam > window_low) & (lam <= window_high)

    widths = np.array([anti_resonance_width(l, np.sqrt(eta_sq), kappa) for l in lam])
    drive_ratio = float(np.max(np.abs(params.drives)) / kappa) if len(params.drives) else 0.0
    weak_ok = drive_ratio <= 1.0 / WEAK_DRIVE_FACTOR

    observable = (not window_empty) and bool(np.any(ok1 & ok2))

    atom_estimate = np.nan
    if single_atom_g is not None:
        if single_atom_g <= 0:
            raise ValidationError("single_atom_g must be positive")
        atom_estimate = float((target_splitting / single_atom_g) ** 2)

    return ObservabilityReport(
        splittings=lam,
        condition1_ok=ok1, condition1_margin=margin1,
        condition2_ok=ok2, condition2_margin=margin2,
        window_low=window_low, window_high=window_high,
        window_empty=window_empty, in_window=in_window,
        width_estimates=widths,
        weak_driving_ok=weak_ok, drive_ratio=drive_ratio,
        observable=observable,
        atom_number_estimate=atom_estimate,
        target_splitting=float(target_splitting),
    )


def measured_antiresonance_width(deltas, populations):
    """Width of the central dip extracted from sweep data: the distance
    between the two points, one on each side of delta = 0, where the
    population first reaches half its shoulder (first local maximum) value.

    The grid must be sorted ascending and bracket delta = 0.
    """
    deltas = np.asarray(deltas, dtype=float)
    pops = np.asarray(populations, dtype=float)
    if deltas.ndim != 1 or deltas.shape != pops.shape or len(deltas) < 5:
        raise ValidationError("need matching 1-d arrays with at least 5 points")
    if np.any(np.diff(deltas) <= 0):
        raise ValidationError("deltas must be strictly increasing")
    i0 = int(np.argmin(np.abs(deltas)))
    if i0 == 0 or i0 == len(deltas) - 1:
        raise ValidationError("grid must bracket delta = 0")

    def half_crossing(indices):
        shoulder = None
        prev = pops[i0]
        for j in indices[:-1]:
            if pops[j] < prev:
                shoulder = prev
                break
            prev = pops[j]
        if shoulder is None or shoulder <= 0:
            raise ValidationError("no shoulder found on one side of the dip")
        target = shoulder / 2.0
        lo_i = i0
        for j in indices:
            if pops[j] >= target:
                # linear interpolation between the bracketing grid points
                d0, d1 = deltas[lo_i], deltas[j]
                p0, p1 = pops[lo_i], pops[j]
                if p1 == p0:
                    return d1
                return d0 + (target - p0) * (d1 - d0) / (p1 - p0)
            lo_i = j
        raise ValidationError("population never reaches half the shoulder value")

    right = half_crossing(list(range(i0 + 1, len(deltas))))
    left = half_crossing(list(range(i0 - 1, -1, -1)))
    return float(right - left)
