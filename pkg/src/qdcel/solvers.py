"""
Steady-state and time-evolution solvers for vectorized generators.

Every function accepts either a :class:`~qdcel.liouvillian.GeneratorBundle`
or a bare (sparse) generator matrix acting on column-stacked density
matrices.
"""
import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.integrate import solve_ivp

__all__ = [
    "SteadyStateReport", "EvolutionResult", "NumericalError", "AmbiguousSteadyStateError",
    "NegativityError", "IntegrationError", "CutoffConvergenceError",
    "steady_state", "evolve", "auto_cutoff", "trace_distance", "hermitize",
]

log = logging.getLogger(__name__)

NEG_TOL = 1e-8
DENSE_FILL = 0.02        # use LAPACK when the generator is this dense ...
DENSE_MAX = 8000         # ... and not larger than this


class NumericalError(RuntimeError):
    """Base class for solver failures."""


class AmbiguousSteadyStateError(NumericalError):
    """The generator has more than one steady state."""


class NegativityError(NumericalError):
    """A computed density matrix has an eigenvalue below -1e-8."""


class IntegrationError(NumericalError):
    """Adaptive time stepping failed (step-size underflow)."""


class CutoffConvergenceError(NumericalError):
    """Observable did not converge before the cutoff cap."""


@dataclass
class SteadyStateReport:
    rho: np.ndarray
    residual: float
    relative_residual: float
    min_eigenvalue: float
    cutoff_converged: bool = False
    iterations: int = 1
    method: str = "splu"
    history: list = field(default_factory=list)


@dataclass
class EvolutionResult:
    rho: np.ndarray
    trace_drift: float
    nfev: int


def _matrix(L):
    m = getattr(L, "L_total", L)
    return m if sp.issparse(m) else np.asarray(m)


def hermitize(rho):
    return 0.5 * (rho + rho.conj().T)


def trace_distance(rho1, rho2):
    """Half the trace norm of the difference."""
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(hermitize(rho1 - rho2)))))


def _norm1(m):
    if sp.issparse(m):
        return float(abs(m).sum(axis=0).max())
    return float(np.abs(m).sum(axis=0).max())


def steady_state(L, tol=1e-8, neg_tol=NEG_TOL):
    """Unique trace-one null vector of ``L`` by a bordered direct solve.

    Row 0 of the generator is replaced by the trace functional.  The result
    is Hermitized and checked for positivity; eigenvalues in (-neg_tol, 0)
    are tolerated.

    Raises
    ------
    AmbiguousSteadyStateError
        If the bordered system is singular (degenerate steady states).
    NegativityError
        If the solution has an eigenvalue below ``-neg_tol``.
    NumericalError
        If the residual exceeds ``tol`` times the generator norm.
    """
    mat = _matrix(L)
    n = mat.shape[0]
    d = int(round(np.sqrt(n)))
    if d * d != n:
        raise ValueError(f"generator size {n} is not a square of a Hilbert dimension")
    diag = np.arange(d) * (d + 1)
    rhs = np.zeros(n, dtype=complex)
    rhs[0] = 1.0
    nnz = mat.nnz if sp.issparse(mat) else n * n
    dense = (not sp.issparse(mat)) or (nnz > DENSE_FILL * n * n and n <= DENSE_MAX)
    if dense:
        a = mat.toarray() if sp.issparse(mat) else np.array(mat, dtype=complex)
        a[0, :] = 0.0
        a[0, diag] = 1.0
        try:
            lu = sla.lu_factor(a, check_finite=True)
        except (sla.LinAlgError, ValueError) as exc:
            raise AmbiguousSteadyStateError(f"bordered generator is singular: {exc}") from exc
        piv_min = np.min(np.abs(np.diag(lu[0])))
        if piv_min < 1e-14 * np.max(np.abs(np.diag(lu[0]))):
            raise AmbiguousSteadyStateError(
                f"bordered generator is numerically singular (pivot ratio {piv_min:.2e}); "
                "the generator has more than one steady state")
        x = sla.lu_solve(lu, rhs)
        method = "dense-lu"
    else:
        a = sp.lil_matrix(mat, dtype=complex)
        a[0, :] = 0.0
        a[0, diag] = 1.0
        try:
            lu = spla.splu(sp.csc_matrix(a), permc_spec="COLAMD")
        except RuntimeError as exc:
            raise AmbiguousSteadyStateError(
                f"bordered generator is singular ({exc}); the generator has more than one "
                "steady state") from exc
        x = lu.solve(rhs)
        method = "splu"
    if not np.all(np.isfinite(x)):
        raise AmbiguousSteadyStateError("steady-state solve produced non-finite values")

    rho = x.reshape((d, d), order="F")
    rho = hermitize(rho)
    rho = rho / np.trace(rho).real
    resid = float(np.linalg.norm(mat @ rho.flatten(order="F")))
    lnorm = _norm1(mat)
    rel = resid / lnorm if lnorm > 0 else resid
    if rel > tol:
        raise NumericalError(
            f"steady-state residual {resid:.3e} exceeds {tol:.1e} x ||L|| ({lnorm:.3e})")
    emin = float(np.linalg.eigvalsh(rho).min())
    if emin < -neg_tol:
        raise NegativityError(f"steady state has eigenvalue {emin:.3e} < -{neg_tol:g}")
    return SteadyStateReport(rho, resid, rel, emin, method=method)


def evolve(L, rho0, t_final, rtol=1e-10, atol=1e-13, max_step=np.inf):
    """Propagate ``rho0`` under ``d vec(rho)/dt = L vec(rho)`` to ``t_final``.

    Uses the 8th-order Dormand-Prince pair with embedded error control.  The
    trace is monitored (``trace_drift``) but never renormalized.
    """
    mat = _matrix(L)
    rho0 = np.asarray(rho0, dtype=complex)
    d = rho0.shape[0]
    y0 = rho0.flatten(order="F")
    if t_final == 0:
        return EvolutionResult(rho0.copy(), 0.0, 0)
    sol = solve_ivp(lambda t, y: mat @ y, (0.0, float(t_final)), y0, method="DOP853",
                    rtol=rtol, atol=atol, max_step=max_step)
    if sol.status != 0:
        raise IntegrationError(f"time integration failed: {sol.message}")
    rho = sol.y[:, -1].reshape((d, d), order="F")
    drift = abs(np.trace(rho) - np.trace(rho0))
    if drift > 1e-10:
        log.warning("trace drift %.3e during evolution", drift)
    return EvolutionResult(rho, float(drift), int(sol.nfev))


def auto_cutoff(params, builder, observable, rel_tol, start=1, cap=12, tol=1e-8,
                neg_tol=NEG_TOL):
    """Raise both Fock cutoffs until ``observable`` settles.

    ``builder(params)`` returns a generator bundle for the given cutoffs and
    ``observable(rho, bundle)`` a real number.  The first cutoff whose value
    agrees with the next one to ``rel_tol`` (relative) is returned with its
    report; the increments seen along the way are kept in
    ``report.history`` as ``(cutoff, value)`` pairs.
    """
    if rel_tol <= 0:
        raise ValueError("rel_tol must be positive")
    history = []
    prev = None
    for c in range(start, cap + 1):
        bundle = builder(params.with_cutoff(c))
        report = steady_state(bundle, tol=tol, neg_tol=neg_tol)
        val = float(observable(report.rho, bundle))
        history.append((c, val))
        log.info("auto_cutoff: cutoff %d -> %.10g", c, val)
        if prev is not None:
            p_cut, p_val, p_report = prev
            if abs(val - p_val) <= rel_tol * max(abs(val), 1e-300) or val == p_val:
                p_report.cutoff_converged = True
                p_report.history = history
                return p_cut, p_report
        prev = (c, val, report)
    raise CutoffConvergenceError(
        f"observable not converged to {rel_tol:g} by cutoff cap {cap}; history {history}")
