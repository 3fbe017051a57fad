"""Dense superoperator machinery shared by the weak-excitation solver and the
truncated-Fock oracle: column-stacking vectorization, Lindblad assembly, and
the constrained stationary solve.

The stationary state is obtained by replacing the first row of the vectorized
generator with the trace constraint and solving the dense system.  Two or
three steps of iterative refinement with extended-precision residuals push
the forward error to working precision, which the near-dark populations
(absolute size down to ~1e-16) require.  When the kernel of the generator is
degenerate (e.g. undamped uncoupled collective modes at gamma = 0) the
constrained system is singular; the fallback projects the vacuum-seeded
initial state onto the kernel through an eigendecomposition, which selects
the state the dissipative dynamics actually reaches.
"""

from __future__ import annotations

import warnings

import numpy as np
import scipy.linalg
from scipy.linalg import LinAlgWarning, lapack

from .errors import DegenerateSteadyStateError, NumericalError

DEFAULT_RESIDUAL_TOL = 1e-10
KERNEL_TOL = 1e-10
REFINE_STEPS = 3
RCOND_FLOOR = 1e-14


def vectorize(rho):
    """Column-stacking vec: vec(rho)[i + d*j] = rho[i, j]."""
    return np.asarray(rho).reshape(-1, order="F")


def unvectorize(x, dim):
    return np.asarray(x).reshape((dim, dim), order="F")


def trace_vector(dim):
    """Row vector t with t @ vec(rho) = trace(rho)."""
    t = np.zeros(dim * dim, dtype=complex)
    t[np.arange(dim) * (dim + 1)] = 1.0
    return t


def lindblad_superoperator(hamiltonian, jumps):
    """Vectorized generator of -i[H, rho] + sum_k (r_k/2)(2 L rho L^dag
    - L^dag L rho - rho L^dag L) for `jumps` given as (rate, operator) pairs.

    Zero-rate jumps are skipped.
    """
    H = np.asarray(hamiltonian, dtype=complex)
    d = H.shape[0]
    eye = np.eye(d, dtype=complex)
    L = -1j * (np.kron(eye, H) - np.kron(H.T, eye))
    for rate, c in jumps:
        if rate == 0:
            continue
        c = np.asarray(c, dtype=complex)
        cdc = c.conj().T @ c
        L += (rate / 2.0) * (
            2.0 * np.kron(c.conj(), c) - np.kron(eye, cdc) - np.kron(cdc.T, eye)
        )
    return L


def trace_defect(superoperator):
    """Norm of the trace-evolution row; zero for any Lindblad generator."""
    d2 = superoperator.shape[0]
    d = int(round(np.sqrt(d2)))
    return float(np.linalg.norm(trace_vector(d) @ superoperator))


def kernel_dimension(superoperator, tol=KERNEL_TOL):
    """Number of singular values of the generator below tol * largest."""
    s = np.linalg.svd(superoperator, compute_uv=False)
    if s[0] == 0:
        return superoperator.shape[0]
    return int(np.count_nonzero(s <= tol * s[0]))


def _refined_solve(a, b, steps=REFINE_STEPS):
    """LU solve with extended-precision iterative refinement.

    Returns the solution and the LAPACK reciprocal-condition estimate of the
    matrix; a reciprocal condition at the singularity floor means the system
    has no unique solution.
    """
    anorm = float(np.linalg.norm(a, 1))
    with warnings.catch_warnings():
        # exact singularity is an anticipated outcome, reported via rcond
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(a)
    rcond, _ = lapack.zgecon(lu, anorm, norm="1")
    rcond = float(rcond)
    if rcond < RCOND_FLOOR:
        return None, rcond
    x = scipy.linalg.lu_solve((lu, piv), b)
    a_ext = a.astype(np.clongdouble)
    b_ext = b.astype(np.clongdouble)
    for _ in range(steps):
        r = b_ext - a_ext @ x.astype(np.clongdouble)
        dx = scipy.linalg.lu_solve((lu, piv), r.astype(np.complex128))
        if not np.all(np.isfinite(dx)):
            break
        x = x + dx
        if np.linalg.norm(dx) <= 1e-18 * max(np.linalg.norm(x), 1.0):
            break
    return x, rcond


def _direct_stationary(superoperator, residual_tol):
    d2 = superoperator.shape[0]
    d = int(round(np.sqrt(d2)))
    a = superoperator.copy()
    a[0, :] = trace_vector(d)
    b = np.zeros(d2, dtype=complex)
    b[0] = 1.0
    try:
        x, rcond = _refined_solve(a, b)
    except scipy.linalg.LinAlgError as exc:
        raise NumericalError(f"constrained stationary solve failed: {exc}") from exc
    if x is None:
        raise NumericalError(
            f"constrained stationary system is singular to working precision "
            f"(reciprocal condition {rcond:.2e}): the stationary state is not "
            "determined by a direct solve",
            condition=(np.inf if rcond == 0 else 1.0 / rcond),
        )
    if not np.all(np.isfinite(x)):
        raise NumericalError("constrained stationary solve produced non-finite entries")
    scale = np.linalg.norm(superoperator)
    residual = float(np.linalg.norm(superoperator @ x))
    if residual > residual_tol * max(scale, 1.0):
        raise NumericalError(
            f"stationary residual {residual:.3e} exceeds tolerance "
            f"{residual_tol:.1e} * {scale:.3e}",
            condition=1.0 / rcond,
            residual=residual,
        )
    return x, residual


def _eigen_stationary(superoperator, residual_tol, initial=None):
    """Steady state reached from `initial` (default: unit weight on the first
    basis state), computed by projecting onto the kernel of the generator."""
    d2 = superoperator.shape[0]
    d = int(round(np.sqrt(d2)))
    if initial is None:
        rho0 = np.zeros((d, d), dtype=complex)
        rho0[0, 0] = 1.0
        initial = vectorize(rho0)
    w, v = np.linalg.eig(superoperator)
    scale = max(1.0, float(np.linalg.norm(superoperator)) / d2)
    keep = np.abs(w) <= KERNEL_TOL * scale
    if not np.any(keep):
        raise NumericalError("generator has no kernel mode within tolerance")
    try:
        coeff = np.linalg.solve(v, initial)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigenbasis is singular: {exc}") from exc
    x = v[:, keep] @ coeff[keep]
    tr = trace_vector(d) @ x
    if abs(tr) < 1e-12:
        raise NumericalError("kernel projection of the initial state has zero trace")
    x = x / tr
    residual = float(np.linalg.norm(superoperator @ x))
    norm_l = float(np.linalg.norm(superoperator))
    if residual > residual_tol * max(norm_l, 1.0):
        raise NumericalError(
            f"eigen-projection residual {residual:.3e} exceeds tolerance",
            residual=residual,
        )
    return x, residual


def stationary_vector(superoperator, *, method="auto", residual_tol=DEFAULT_RESIDUAL_TOL,
                      check_unique=False, initial=None):
    """Unit-trace stationary vector of a Lindblad generator.

    method: "direct" (constrained solve), "eigen" (kernel projection of the
    vacuum-seeded initial state), or "auto" (direct with eigen fallback).
    Returns (vec, residual, method_used).
    """
    if check_unique and kernel_dimension(superoperator) > 1:
        raise DegenerateSteadyStateError(
            "stationary state is not unique: generator kernel dimension > 1"
        )
    if method == "direct":
        x, res = _direct_stationary(superoperator, residual_tol)
        return x, res, "direct"
    if method == "eigen":
        x, res = _eigen_stationary(superoperator, residual_tol, initial)
        return x, res, "eigen"
    if method != "auto":
        raise ValueError(f"unknown method {method!r}")
    try:
        x, res = _direct_stationary(superoperator, residual_tol)
        return x, res, "direct"
    except NumericalError:
        x, res = _eigen_stationary(superoperator, residual_tol, initial)
        return x, res, "eigen"


def hermitize(rho):
    """Symmetrized density matrix and the asymmetry norm removed by doing so."""
    asym = float(np.linalg.norm(rho - rho.conj().T))
    return 0.5 * (rho + rho.conj().T), asym
