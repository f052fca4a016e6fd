"""
Acoustic-phonon bath of the quantum dot.

Energies are in meV and times in ps throughout.  The super-ohmic spectral
density is

    J(w) = alpha_p / (2 pi hbar)^2 * w^3 * exp(-w^2 / (2 w_b^2)),    w in meV,

i.e. ``alpha_p`` (ps^2) multiplies frequencies measured in cycles per ps.
With alpha_p = 2.36 ps^2 and w_b = 1 meV this yields <B> = 0.90, 0.85, 0.74
at 5, 10, 20 K.
"""
import threading
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize, special
from scipy.interpolate import CubicSpline

__all__ = [
    "HBAR", "KB", "PhononBathParams", "PhononTables", "PhononRates",
    "QuadratureError", "spectral_density", "phi_of_tau", "mean_displacement", "phi_transform",
    "build_tables", "green_functions", "half_fourier_transform", "filon_transform",
    "compute_rates",
]

HBAR = 0.6582    # meV ps
KB = 0.08617     # meV / K


class QuadratureError(RuntimeError):
    """A phonon integral failed to reach its tolerance."""


@dataclass(frozen=True)
class PhononBathParams:
    alpha_p: float = 2.36       # ps^2
    omega_b: float = 1.0        # meV
    temperature: float = 5.0    # K

    def __post_init__(self):
        if self.alpha_p < 0:
            raise ValueError(f"alpha_p must be >= 0, got {self.alpha_p}")
        if self.omega_b <= 0:
            raise ValueError(f"omega_b must be > 0, got {self.omega_b}")
        if self.temperature < 0:
            raise ValueError(f"temperature must be >= 0, got {self.temperature}")

    @property
    def coupling(self):
        """Prefactor of w^3 in J(w) for w in meV (units meV^-2)."""
        return self.alpha_p / (2 * np.pi * HBAR) ** 2


def spectral_density(omega, params):
    """Super-ohmic spectral density J(omega), omega in meV, result in meV."""
    omega = np.asarray(omega, dtype=float)
    if np.any(omega < 0):
        raise ValueError("spectral density is defined for omega >= 0")
    return params.coupling * omega**3 * np.exp(-omega**2 / (2 * params.omega_b**2))


def _omega_coth(omega, temperature):
    # omega * coth(omega / 2kT), finite at omega -> 0 (limit 2kT); coth -> 1 at T = 0
    omega = np.asarray(omega, dtype=float)
    if temperature == 0:
        return omega
    x = omega / (2 * KB * temperature)
    small = x < 1e-6
    xs = np.where(small, 1.0, x)
    return np.where(small, 2 * KB * temperature * (1 + x**2 / 3), omega / np.tanh(xs))


def _omega_upper(params, rel=1e-12):
    # w exp(-w^2/2wb^2) falls below rel * its peak value
    wb = params.omega_b
    peak = wb * np.exp(-0.5)
    g = lambda w: np.log(w) - w**2 / (2 * wb**2) - np.log(rel * peak)
    return optimize.brentq(g, wb, 50 * wb)


def phi_of_tau(tau, params, epsrel=1e-9):
    """Phonon correlation function phi(tau) for tau (ps, scalar or array).

    Adaptive Gauss-Kronrod quadrature over omega in (0, omega_hi) where the
    Gaussian tail of the integrand is below 1e-12 of its peak.
    """
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    if np.any(tau < 0):
        raise ValueError("phi(tau) is evaluated for tau >= 0")
    scalar = tau.size == 1 and np.ndim(tau) == 1
    if params.alpha_p == 0:
        out = np.zeros(tau.shape, dtype=complex)
        return complex(out[0]) if scalar else out

    c = params.coupling
    wb2 = params.omega_b**2
    temp = params.temperature
    wt = tau / HBAR

    def integrand(w):
        # J(w)/w^2 = c w exp(...); the coth factor multiplies w
        damp = c * np.exp(-w * w / (2 * wb2))
        return damp * (_omega_coth(w, temp) * np.cos(w * wt) - 1j * w * np.sin(w * wt))

    res, err, info = integrate.quad_vec(
        integrand, 0.0, _omega_upper(params), epsrel=epsrel, epsabs=1e-14,
        limit=20000, full_output=True)
    # status 2 (round-off) with a negligible error estimate is still a usable result
    if not info.success and err > max(1e-12, epsrel * float(np.max(np.abs(res)))):
        raise QuadratureError(
            f"phi(tau) quadrature did not converge: status={info.status}, "
            f"error estimate={err:.3e}, intervals={info.intervals.shape[0]}")
    return complex(res[0]) if scalar else res


def mean_displacement(params):
    """<B> = exp(-Re phi(0) / 2)."""
    if params.alpha_p == 0:
        return 1.0
    return float(np.exp(-phi_of_tau(0.0, params).real / 2))


def half_fourier_transform(values, tau_grid, delta, return_error=False):
    """Composite Simpson estimate of  int_0^tmax values(tau) exp(i delta tau / hbar) dtau.

    ``tau_grid`` must be uniform with an odd number of points; ``delta`` is in
    meV (scalar or array).  With ``return_error`` a Richardson estimate from
    the half-resolution rule is also returned.
    """
    tau_grid = np.asarray(tau_grid, dtype=float)
    values = np.asarray(values, dtype=complex)
    n = tau_grid.size
    if n % 2 == 0 or n < 5:
        raise ValueError("Simpson rule needs an odd number (>= 5) of grid points")
    h = tau_grid[1] - tau_grid[0]
    w = np.ones(n)
    w[1:-1:2] = 4
    w[2:-1:2] = 2
    w *= h / 3
    delta = np.asarray(delta, dtype=float)
    flat = delta.ravel()
    out = np.empty(flat.shape, dtype=complex)
    err = np.empty(flat.shape)
    wv = w * values
    coarse = None
    if return_error:
        if (n - 1) % 4 == 0:
            wc = np.ones((n + 1) // 2)
            wc[1:-1:2] = 4
            wc[2:-1:2] = 2
            wc *= 2 * h / 3
            coarse = wc * values[::2]
        else:
            coarse = None
    step = max(1, 4_000_000 // n)
    for start in range(0, flat.size, step):
        sl = slice(start, start + step)
        ph = np.exp(1j * np.outer(flat[sl] / HBAR, tau_grid))
        out[sl] = ph @ wv
        if return_error:
            if coarse is not None:
                err[sl] = np.abs(out[sl] - ph[:, ::2] @ coarse) / 15
            else:
                err[sl] = np.nan
    out = out.reshape(delta.shape)
    if return_error:
        return out, err.reshape(delta.shape)
    return out if out.ndim else complex(out)


def filon_transform(values, tau_grid, delta):
    """Filon estimate of  int values(tau) exp(i delta tau / hbar) dtau  over a uniform grid.

    ``values`` is interpolated linearly between nodes and the oscillatory
    factor is integrated exactly, so the step only has to resolve
    ``values`` itself, whatever the size of ``delta``.
    """
    tau_grid = np.asarray(tau_grid, dtype=float)
    values = np.asarray(values, dtype=complex)
    if tau_grid.size < 2:
        raise ValueError("Filon rule needs at least two grid points")
    h = tau_grid[1] - tau_grid[0]
    delta = np.asarray(delta, dtype=float)
    w = delta.ravel() / HBAR
    th = w * h
    # moments of 1 and s against exp(i th s) on [0, 1]; series where they cancel
    i0 = np.empty(th.shape, dtype=complex)
    i1 = np.empty(th.shape, dtype=complex)
    small = np.abs(th) < 0.5
    k = np.arange(14)
    z = (1j * th[small])[:, None] ** k / np.cumprod(np.r_[1.0, np.arange(1.0, 14.0)])
    i0[small] = (z / (k + 1)).sum(axis=1)
    i1[small] = (z / (k + 2)).sum(axis=1)
    t = th[~small]
    e = np.exp(1j * t)
    i0[~small] = (e - 1) / (1j * t)
    i1[~small] = e / (1j * t) + (e - 1) / t**2
    out = np.empty(w.shape, dtype=complex)
    step = max(1, 4_000_000 // tau_grid.size)
    for start in range(0, w.size, step):
        sl = slice(start, start + step)
        ph = np.exp(1j * np.outer(w[sl], tau_grid))
        left = ph[:, :-1] @ values[:-1]
        right = ph[:, 1:] @ values[1:]
        out[sl] = h * ((i0[sl] - i1[sl]) * left + i1[sl] * np.exp(-1j * th[sl]) * right)
    out = out.reshape(delta.shape)
    return out if out.ndim else complex(out)


def _occupation_weight(e, params):
    # F(E) = J(E)/E^2 (n(E) + 1) continued to E < 0; F(0) = c kT
    e = np.asarray(e, dtype=float)
    c = params.coupling
    gauss = np.exp(-e * e / (2 * params.omega_b**2))
    temp = params.temperature
    if temp == 0:
        return np.where(e > 0, c * e * gauss, 0.0)
    kt = KB * temp
    x = e / kt
    with np.errstate(over="ignore"):
        small = np.abs(x) < 1e-8
        ratio = np.where(small, 1.0 + x / 2, x / -np.expm1(-np.where(small, 1.0, x)))
    return c * kt * gauss * ratio


def phi_transform(delta, params, panel=0.05, order=16):
    """Exact  int_0^inf phi(tau) exp(i delta tau / hbar) dtau  (ps).

    With F(E) = J(E)/E^2 (n(E) + 1) on the whole real line this equals
    hbar (pi F(delta) + i P int F(E) / (delta - E) dE).  The principal value
    is taken by subtracting F(delta) under the integral and applying a
    composite Gauss-Legendre rule on panels of width ``panel`` meV, graded
    geometrically towards E = 0 where F has a kink at T = 0 (and structure
    on the scale kT at low temperature).
    """
    delta = np.asarray(delta, dtype=float)
    flat = np.atleast_1d(delta).ravel()
    if params.alpha_p == 0:
        out = np.zeros(flat.shape, dtype=complex)
        return out.reshape(delta.shape) if delta.ndim else complex(out[0])
    lim = _omega_upper(params)
    npan = int(np.ceil(lim / panel))
    outer = np.linspace(panel, lim, npan)
    inner = panel * 2.0 ** -np.arange(1, 45)
    right = np.concatenate([[0.0], inner[::-1], outer])
    edges = np.concatenate([-right[:0:-1], right])
    x, w = np.polynomial.legendre.leggauss(order)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x).ravel()
    weights = (half[:, None] * w).ravel()
    f_n = _occupation_weight(nodes, params)
    f_d = _occupation_weight(flat, params)
    h = 1e-7
    slope = (_occupation_weight(flat + h, params) - _occupation_weight(flat - h, params)) / (2 * h)

    pv = np.empty(flat.shape)
    step = max(1, 2_000_000 // nodes.size)
    for a in range(0, flat.size, step):
        sl = slice(a, a + step)
        diff = flat[sl, None] - nodes[None, :]
        near = np.abs(diff) < 1e-9
        ratio = (f_n[None, :] - f_d[sl, None]) / np.where(near, 1.0, diff)
        ratio = np.where(near, -slope[sl, None], ratio)
        pv[sl] = ratio @ weights
    with np.errstate(divide="ignore"):
        log_term = np.log(np.abs((lim + flat) / (lim - flat)))
    pv = pv + f_d * np.where(np.isfinite(log_term), log_term, 0.0)
    out = HBAR * (np.pi * f_d + 1j * pv)
    return out.reshape(delta.shape) if delta.ndim else complex(out[0])


_KERNELS = ("g", "u", "plus", "minus")
# coefficients of phi and phi^2 in the Taylor expansion of each Green's function (over <B>^2)
_LINEAR = {"g": 0.0, "u": 1.0, "plus": 1.0, "minus": -1.0}
_QUADRATIC = {"g": 0.5, "u": 0.0, "plus": 0.5, "minus": 0.5}


def _power_tail_moment(theta):
    """int_1^inf x^-4 exp(i theta x) dx, via E_1 = -Ci + i (pi/2 - Si) and upward recurrence."""
    theta = np.asarray(theta, dtype=float)
    a = np.abs(theta)
    small = a < 1e-8
    safe = np.where(small, 1.0, a)
    si, ci = special.sici(safe)
    z = -1j * safe
    e = -ci + 1j * (np.pi / 2 - si)
    for n in (1, 2, 3):
        e = (np.exp(-z) - z * e) / n
    e = np.where(small, 1 / 3 + 0.5j * a, e)
    return np.where(theta < 0, np.conj(e), e)


@dataclass
class PhononTables:
    """phi(tau) on a uniform grid plus cached half-Fourier transforms of the
    polaron Green's functions.

    The part of each Green's function linear in phi is transformed exactly
    (:func:`phi_transform`); only the remainder, which decays like phi^2,
    is integrated on the grid.  This removes the truncation error of the
    slowly decaying zero-temperature tail.

    Beyond ``head`` ps the remainder is a smooth power-law tail (only
    reached at low temperature); there it is sampled every ``tail_stride``
    grid points and integrated with :func:`filon_transform`.

    Cache keys are ``(kernel, delta rounded to 1e-9 meV)``; reads are lock
    free, insertions are serialised.
    """

    params: PhononBathParams
    tau_grid: np.ndarray
    phi: np.ndarray
    mean_B: float
    head: float = 20.0
    tail_stride: int = 16
    _cache: dict = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def __post_init__(self):
        self._spline = None

    def kernel_values(self, kernel):
        g_g, g_u, g_p, g_m = green_functions(None, self)
        return {"g": g_g, "u": g_u, "plus": g_p, "minus": g_m}[kernel]

    def remainder_values(self, kernel):
        """Green's function minus its part linear in phi."""
        return self.kernel_values(kernel) - self.mean_B**2 * _LINEAR[kernel] * self.phi

    def phi_at(self, tau):
        """phi at arbitrary tau: grid interpolation inside, 0 beyond tau_max."""
        tau = np.asarray(tau, dtype=float)
        if self._spline is None:
            self._spline = (CubicSpline(self.tau_grid, self.phi.real),
                            CubicSpline(self.tau_grid, self.phi.imag))
        inside = tau <= self.tau_grid[-1]
        t = np.where(inside, tau, 0.0)
        val = self._spline[0](t) + 1j * self._spline[1](t)
        return np.where(inside, val, 0.0)

    def half_fourier(self, kernel, delta):
        """K(delta) = int_0^inf G_kernel(tau) exp(i delta tau/hbar) dtau  (ps).

        ``kernel`` is one of 'g', 'u', 'plus', 'minus'; ``delta`` in meV,
        scalar or array.
        """
        if kernel not in _KERNELS:
            raise ValueError(f"unknown kernel {kernel!r}; choose from {_KERNELS}")
        delta = np.asarray(delta, dtype=float)
        keys = np.round(delta.ravel(), 9)
        uniq, inverse = np.unique(keys, return_inverse=True)
        vals = np.empty(uniq.shape, dtype=complex)
        missing = []
        for k, d in enumerate(uniq):
            hit = self._cache.get((kernel, d))
            if hit is None:
                missing.append(k)
            else:
                vals[k] = hit
        if missing:
            missing = np.asarray(missing)
            fresh = np.atleast_1d(self._remainder_transform(kernel, uniq[missing]))
            if _LINEAR[kernel]:
                fresh = fresh + self.mean_B**2 * _LINEAR[kernel] * np.atleast_1d(
                    phi_transform(uniq[missing], self.params))
            with self._lock:
                for k, v in zip(missing, fresh):
                    self._cache[(kernel, uniq[k])] = v
            vals[missing] = fresh
        out = vals[inverse].reshape(delta.shape)
        return out if out.ndim else complex(out)

    def _split_index(self):
        """Grid index where the Filon tail starts, or None for a pure Simpson grid."""
        n = self.tau_grid.size
        m = self.tail_stride
        dt = self.tau_grid[1] - self.tau_grid[0]
        i = int(self.head / dt)
        i -= i % 2
        while i < n - 1 and (n - 1 - i) % m:
            i += 2
        if i < 4 or (n - 1 - i) < 2 * m:
            return None
        return i

    def _remainder_transform(self, kernel, delta):
        rem = self.remainder_values(kernel)
        i = self._split_index()
        if i is None:
            out = half_fourier_transform(rem, self.tau_grid, delta)
        else:
            m = self.tail_stride
            out = (half_fourier_transform(rem[:i + 1], self.tau_grid[:i + 1], delta)
                   + filon_transform(rem[i::m], self.tau_grid[i::m], delta))
        return out + self._tail_beyond_grid(kernel, delta)

    def _tail_beyond_grid(self, kernel, delta):
        """Remainder transform beyond tau_max at T = 0.

        There phi -> phi(tau_max) (tau_max/tau)^2 and the remainder is
        <B>^2 c2 phi^2, integrated in closed form.  At T > 0 phi decays
        exponentially and the grid already covers it.
        """
        if self.params.temperature > 0 or not _QUADRATIC[kernel] or self.params.alpha_p == 0:
            return 0.0
        tm = self.tau_grid[-1]
        theta = np.asarray(delta, dtype=float) / HBAR * tm
        amp = self.mean_B**2 * _QUADRATIC[kernel] * self.phi[-1] ** 2 * tm
        return amp * _power_tail_moment(theta)

    def richardson_error(self, kernel, delta):
        _, err = half_fourier_transform(self.remainder_values(kernel), self.tau_grid, delta,
                                        return_error=True)
        return err


def build_tables(params, dt=0.005, tail=1e-10, tau_search=400.0):
    """Tabulate phi(tau) on [0, tau_max].

    Only the part of the Green's functions beyond linear order in phi is
    integrated on the grid, so tau_max is chosen where the tail bound
    |phi|^2 tau / 6 of that remainder (exact for a 1/tau^2 decay) drops
    below ``tail``.
    """
    if params.alpha_p == 0:
        grid = np.linspace(0.0, 1.0, 201)
        return PhononTables(params, grid, np.zeros(grid.size, dtype=complex), 1.0)
    coarse = np.arange(0.0, tau_search + 1e-12, 0.25)
    phic = phi_of_tau(coarse, params)
    above = np.nonzero(np.abs(phic) ** 2 * np.maximum(coarse, 1.0) / 6 >= tail)[0]
    tau_max = coarse[min(above[-1] + 2, coarse.size - 1)]
    n = int(np.ceil(tau_max / dt))
    n += (4 - n % 4) % 4          # n intervals divisible by 4 -> Richardson check available
    grid = np.linspace(0.0, n * dt, n + 1)
    phi = phi_of_tau(grid, params)
    mean_B = float(np.exp(-phi[0].real / 2))
    return PhononTables(params, grid, phi, mean_B)


def green_functions(tau, tables):
    """Polaron Green's functions (G_g, G_u, G_+, G_-) at ``tau``.

    G_g = <B>^2 (cosh phi - 1), G_u = <B>^2 sinh phi, G_pm = <B>^2 (exp(+-phi) - 1).
    ``tau=None`` returns values on the table grid.
    """
    phi = tables.phi if tau is None else tables.phi_at(tau)
    b2 = tables.mean_B**2
    g_plus = b2 * np.expm1(phi)
    g_minus = b2 * np.expm1(-phi)
    g_g = 0.5 * (g_plus + g_minus)
    g_u = 0.5 * (g_plus - g_minus)
    return g_g, g_u, g_plus, g_minus


@dataclass(frozen=True)
class PhononRates:
    """Phonon-induced shifts and scattering rates, all in meV.

    Single-index quantities are length-2 arrays (index 0 <-> dot transition /
    mode 1).  Pair quantities are 2x2 arrays ``[i, j]``.  Pair rates such as
    ``Gamma_x[0, 1]`` are complex unless the two transitions share the same
    detuning.
    """

    delta_plus: np.ndarray
    delta_minus: np.ndarray
    delta_p_plus: np.ndarray
    delta_p_minus: np.ndarray
    Omega: np.ndarray
    Omega_p: np.ndarray
    Gamma_plus: np.ndarray
    Gamma_minus: np.ndarray
    Gamma_p_plus: np.ndarray
    Gamma_p_minus: np.ndarray
    Gamma_x: np.ndarray
    Gamma_x_p: np.ndarray
    Lambda_plus: np.ndarray
    Lambda_minus: np.ndarray
    Lambda_pp: np.ndarray
    Lambda_mm: np.ndarray
    Lambda_pm: np.ndarray
    Lambda_p_plus: np.ndarray
    Lambda_p_minus: np.ndarray
    Lambda_p_pp: np.ndarray
    Lambda_p_mm: np.ndarray
    Lambda_p_pm: np.ndarray

    @property
    def Omega_12(self):
        return self.Omega[0, 1]

    @property
    def Omega_12_p(self):
        return self.Omega_p[0, 1]

    @property
    def Gamma_12(self):
        return self.Gamma_x[0, 1]

    @property
    def Gamma_12_p(self):
        return self.Gamma_x_p[0, 1]

    def as_dict(self):
        out = {}
        for name in self.__dataclass_fields__:
            arr = np.asarray(getattr(self, name))
            if arr.ndim == 1:
                for i in range(2):
                    out[f"{name}_{i + 1}"] = arr[i]
            else:
                for i in range(2):
                    for j in range(2):
                        out[f"{name}_{i + 1}{j + 1}"] = arr[i, j]
        return out


def transition_detunings(system):
    """(Delta_i, Delta_ip, Delta_pump_i) in meV for i = 1, 2.

    Delta_i = exciton - cavity detuning, Delta_ip = exciton - pump detuning,
    Delta_pump_i is what enters delta_ip and Gamma_ip (exciton-pump detuning,
    or the cavity-pump detuning when ``appendixA_pump_detuning == 'cavity'``).
    """
    d_ip = np.array([system.Delta_xp, system.Delta_yp], dtype=float)
    d_cp = np.array([system.Delta_c1p, system.Delta_c2p], dtype=float)
    d_i = d_ip - d_cp
    choice = getattr(system, "appendixA_pump_detuning", "exciton")
    if choice == "exciton":
        d_pump = d_ip
    elif choice == "cavity":
        d_pump = d_cp
    else:
        raise ValueError(f"appendixA_pump_detuning must be 'exciton' or 'cavity', got {choice!r}")
    return d_i, d_ip, d_pump


def compute_rates(system, tables):
    """Every phonon-induced shift, rate and residue coefficient of the
    simplified master equation (meV)."""
    d_i, d_ip, d_pump = transition_detunings(system)
    g = np.array([system.g1, system.g2], dtype=float)
    eta = np.array([system.eta1, system.eta2], dtype=float)
    Kp = lambda d: tables.half_fourier("plus", d)
    Km = lambda d: tables.half_fourier("minus", d)
    cj = np.conj

    kp_i, km_i = Kp(d_i), Kp(-d_i)
    kp_pump, km_pump = Kp(d_pump), Kp(-d_pump)
    kp_ip = Kp(d_ip)
    # G_- transforms at +-Delta
    lm_i_neg, lm_i_pos = Km(-d_i), Km(d_i)
    lm_ip_neg, lm_ip_pos = Km(-d_ip), Km(d_ip)

    gg = np.outer(g, g)
    ee = np.outer(eta, eta)

    rates = dict(
        delta_plus=g**2 * kp_i.imag,
        delta_minus=g**2 * km_i.imag,
        delta_p_plus=eta**2 * kp_pump.imag,
        delta_p_minus=eta**2 * km_pump.imag,
        # Omega_ij = g_i g_j / 2 int (G+ e^{i D_j t} - G+^* e^{-i D_i t})
        Omega=gg / 2 * (kp_i[None, :] - cj(kp_i)[:, None]),
        Omega_p=ee / 2 * (kp_ip[None, :] - cj(kp_ip)[:, None]),
        Gamma_plus=2 * g**2 * kp_i.real,
        Gamma_minus=2 * g**2 * km_i.real,
        Gamma_p_plus=2 * eta**2 * kp_pump.real,
        Gamma_p_minus=2 * eta**2 * km_pump.real,
        # Gamma_ij = g_i g_j int (G+ e^{i D_i t} + G+^* e^{-i D_j t})
        Gamma_x=gg * (kp_i[:, None] + cj(kp_i)[None, :]),
        Gamma_x_p=ee * (kp_ip[:, None] + cj(kp_ip)[None, :]),
        # Lambda_i^pm = g_i^2 int (G- + G-^*) e^{-+ i D_i t}
        Lambda_plus=g**2 * (lm_i_neg + cj(lm_i_pos)),
        Lambda_minus=g**2 * (lm_i_pos + cj(lm_i_neg)),
        # Lambda_ij^{pm pm} = g_i g_j int (G- e^{-+ i D_i t} + G-^* e^{-+ i D_j t})
        Lambda_pp=gg * (lm_i_neg[:, None] + cj(lm_i_pos)[None, :]),
        Lambda_mm=gg * (lm_i_pos[:, None] + cj(lm_i_neg)[None, :]),
        # Lambda_ij^{+-} = g_i g_j int (G- e^{-i D_i t} + G-^* e^{i D_j t})
        Lambda_pm=gg * (lm_i_neg[:, None] + cj(lm_i_neg)[None, :]),
        Lambda_p_plus=eta**2 * (lm_ip_neg + cj(lm_ip_pos)),
        Lambda_p_minus=eta**2 * (lm_ip_pos + cj(lm_ip_neg)),
        Lambda_p_pp=ee * (lm_ip_neg[:, None] + cj(lm_ip_pos)[None, :]),
        Lambda_p_mm=ee * (lm_ip_pos[:, None] + cj(lm_ip_neg)[None, :]),
        Lambda_p_pm=ee * (lm_ip_neg[:, None] + cj(lm_ip_neg)[None, :]),
    )
    # half-Fourier values are in ps; energy^2 * ps / hbar -> meV
    return PhononRates(**{k: np.asarray(v) / HBAR for k, v in rates.items()})


def dump_phi_csv(tables, path):
    """Write phi(tau) as CSV columns tau_ps, re, im."""
    data = np.column_stack([tables.tau_grid, tables.phi.real, tables.phi.imag])
    np.savetxt(path, data, delimiter=",", header="tau_ps,re,im", comments="", fmt="%.12e")


def dump_kernel_csv(tables, kernel, deltas, path):
    """Write the half-Fourier transform of one kernel as CSV columns delta_meV, re, im."""
    vals = np.atleast_1d(tables.half_fourier(kernel, np.asarray(deltas, dtype=float)))
    data = np.column_stack([np.asarray(deltas, dtype=float), vals.real, vals.imag])
    np.savetxt(path, data, delimiter=",", header="delta_meV,re,im", comments="", fmt="%.12e")
