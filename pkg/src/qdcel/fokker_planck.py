"""
Phase drift and diffusion coefficients from adiabatic elimination of the dot.

Pipeline
--------
1. The dot alone (drive, decay and, with phonons, the single-dot parts of
   the simplified master equation) gives an 8x8 matrix ``M`` and drive
   vector ``X`` for ``R = (rho_xg, rho_yg, rho_gx, rho_gy, rho_xx, rho_yy,
   rho_xy, rho_yx)`` with ``dR/dt = M R - X`` once ``rho_gg = 1 - rho_xx -
   rho_yy`` is substituted.  Zeroth order: ``R0 = M^-1 X``.
2. To first order in the dot-cavity coupling each dot element is a
   combination of the eight field forms ``rho a1, rho a2, rho a1^dag,
   rho a2^dag, a1 rho, a2 rho, a1^dag rho, a2^dag rho``.  A form rotating as
   ``exp(-i w t)`` is obtained through the resolvent ``-(M + i w)^-1``.
3. Tracing the coupling commutator over the dot yields the reduced field
   equation, whose coefficients are ``alpha_1k`` (mode 1) and ``nu_2k``
   (mode 2).
4. The drift/diffusion coefficients follow from closed formulas in the
   amplitudes ``r_i`` and phases ``phi``, ``Phi``.

All energies are in meV.
"""
import csv
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .operators import lindblad_cross, lindblad_term, sprepost, spre, spost

__all__ = [
    "SingularPointError", "AdiabaticState", "FPCoefficients", "DriftDiffusion",
    "FIELD_FORMS", "build_M_X", "qd_liouvillian", "reduce_qd_liouvillian",
    "zeroth_order", "first_order_sources", "solve_orders", "drift_diffusion",
    "with_phonon_variant", "direct_field_terms", "fit_field_coefficients",
    "dip_width", "write_fp_csv",
]

R_LABELS = ("xg", "yg", "gx", "gy", "xx", "yy", "xy", "yx")
_LEVEL = {"g": 0, "x": 1, "y": 2}
_R_INDEX = [(_LEVEL[s[0]], _LEVEL[s[1]]) for s in R_LABELS]

# field forms (left word, right word) in coefficient order k = 1..8
FIELD_FORMS = (
    ((), ("a1",)), ((), ("a2",)), ((), ("a1d",)), ((), ("a2d",)),
    (("a1",), ()), (("a2",), ()), (("a1d",), ()), (("a2d",), ()),
)


class SingularPointError(np.linalg.LinAlgError):
    """A resolvent (M +- i Delta_c) is singular at this parameter point."""


@dataclass(frozen=True)
class AdiabaticState:
    R0: np.ndarray
    rho_gg: complex
    M: np.ndarray
    X: np.ndarray

    @property
    def qd_matrix(self):
        """Zeroth-order dot density matrix in the (g, x, y) basis."""
        c = np.zeros((3, 3), dtype=complex)
        for k, (i, j) in enumerate(_R_INDEX):
            c[i, j] = self.R0[k]
        c[0, 0] = self.rho_gg
        return c


@dataclass(frozen=True)
class FPCoefficients:
    """``alpha[k-1] = alpha_1k`` and ``nu[k-1] = nu_2k`` for k = 1..8."""

    alpha: np.ndarray
    nu: np.ndarray

    def __getattr__(self, name):
        if name.startswith("alpha_1") and len(name) == 8:
            return self.alpha[int(name[-1]) - 1]
        if name.startswith("nu_2") and len(name) == 5:
            return self.nu[int(name[-1]) - 1]
        raise AttributeError(name)

    def __add__(self, other):
        return FPCoefficients(self.alpha + other.alpha, self.nu + other.nu)


@dataclass(frozen=True)
class DriftDiffusion:
    D_phi: float
    D_Phi: float
    D_phiphi: float
    D_PhiPhi: float
    evaluated_at: tuple


# --- dot-only generator -----------------------------------------------------

def _ket_bra(i, j):
    m = np.zeros((3, 3), dtype=complex)
    m[_LEVEL[i], _LEVEL[j]] = 1.0
    return m


SP = (_ket_bra("x", "g"), _ket_bra("y", "g"))
SM = (_ket_bra("g", "x"), _ket_bra("g", "y"))


def qd_liouvillian(params, rates=None, mean_B=1.0):
    """9x9 generator of the dot alone (column-stacked 3x3 density matrix).

    Without ``rates`` this is the drive plus radiative decay (pure dephasing
    only if ``params.dephasing_in_no_phonon``).  With ``rates`` it holds every
    single-dot term of the simplified master equation: drive scaled by
    ``mean_B``, pump Stark shifts, pump-induced exchange, the pump and decay
    Lindblad rates, pure dephasing and the pump residue terms.
    """
    eta = (params.eta1, params.eta2)
    det = (params.Delta_xp, params.Delta_yp)
    gam = (params.gamma1, params.gamma2)
    gamp = (params.gamma1p, params.gamma2p)
    ee = [p @ m for p, m in zip(SP, SM)]
    gg = _ket_bra("g", "g")
    h = sum(det[i] * ee[i] + mean_B * eta[i] * (SP[i] + SM[i]) for i in range(2))
    if rates is None:
        L = -1j * (spre(h) - spost(h))
        for i in range(2):
            L = L - gam[i] / 2 * lindblad_term(SM[i])
            if params.dephasing_in_no_phonon:
                L = L - gamp[i] / 2 * lindblad_term(ee[i])
        return np.asarray(L.todense())

    r = rates
    for i in range(2):
        h = h + r.delta_p_plus[i] * ee[i] + r.delta_p_minus[i] * gg
    t = 1j * r.Omega_12_p * (SP[0] @ SM[1])
    h = h - (t + t.conj().T)
    L = -1j * (spre(h) - spost(h))
    for i in range(2):
        L = L - (gam[i] + r.Gamma_p_plus[i]) / 2 * lindblad_term(SM[i])
        L = L - gamp[i] / 2 * lindblad_term(ee[i])
        L = L - r.Gamma_p_minus[i] / 2 * lindblad_term(SP[i])
    for i, j in ((0, 1), (1, 0)):
        L = L - r.Gamma_x_p[i, j] / 2 * lindblad_cross(SP[i], SM[j])
        L = L - (r.Lambda_p_plus[i] * sprepost(SP[i], SP[i])
                 + r.Lambda_p_pp[i, j] * sprepost(SP[i], SP[j])
                 + r.Lambda_p_pm[i, j] * sprepost(SP[i], SM[j])
                 + np.conj(r.Lambda_p_plus[i]) * sprepost(SM[i], SM[i])
                 + np.conj(r.Lambda_p_pp[i, j]) * sprepost(SM[j], SM[i]))
    return np.asarray(L.todense())


def _vec_index(i, j):
    return i + 3 * j


def reduce_qd_liouvillian(L9):
    """(M, X) from a 9x9 dot generator using rho_gg = 1 - rho_xx - rho_yy."""
    rows = [_vec_index(i, j) for i, j in _R_INDEX]
    igg = _vec_index(0, 0)
    pops = (4, 5)
    M = L9[np.ix_(rows, rows)].astype(complex)
    col_gg = L9[rows, igg]
    for p in pops:
        M[:, p] -= col_gg
    X = -col_gg
    return M, X


def build_M_X(params):
    """Drift matrix and drive of the phonon-free dot, ``dR/dt = M R - X``."""
    return reduce_qd_liouvillian(qd_liouvillian(params))


def zeroth_order(M, X):
    try:
        R0 = np.linalg.solve(M, X)
    except np.linalg.LinAlgError as exc:
        raise SingularPointError(f"M is singular: {exc}") from exc
    return AdiabaticState(R0, 1.0 - R0[4] - R0[5], M, X)


# --- first order --------------------------------------------------------------

def first_order_sources(state, g1, g2):
    """Source 8-vectors of every field form from -i[H_g, c (x) rho_f].

    Returns an (8 forms, 8 rows) array.  The coupling is
    H_g = sum_i g_i (s_i^+ a_i + a_i^dag s_i^-).
    """
    c = state.qd_matrix
    g = (g1, g2)
    out = np.zeros((8, 8), dtype=complex)
    for i in range(2):
        mats = {
            "rho a": 1j * g[i] * c @ SP[i],        # rho a_i   (form k = i + 1)
            "rho ad": 1j * g[i] * c @ SM[i],       # rho a_i^dag (k = i + 3)
            "a rho": -1j * g[i] * SP[i] @ c,       # a_i rho   (k = i + 5)
            "ad rho": -1j * g[i] * SM[i] @ c,      # a_i^dag rho (k = i + 7)
        }
        for key, k in (("rho a", i), ("rho ad", i + 2), ("a rho", i + 4), ("ad rho", i + 6)):
            m = mats[key]
            out[k] = [m[a, b] for a, b in _R_INDEX]
    return out


def _form_frequency(k, params):
    # forms containing a_i rotate as exp(-i Delta_ci t); a_i^dag as exp(+i Delta_ci t)
    dc = (params.Delta_c1p, params.Delta_c2p)
    mode = (0, 1, 0, 1, 0, 1, 0, 1)[k]
    sign = (1, 1, -1, -1, 1, 1, -1, -1)[k]
    return sign * dc[mode]


def _resolve(M, omega, b):
    a = M + 1j * omega * np.eye(8)
    try:
        x = np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise SingularPointError(f"resolvent (M + i*{omega:g}) is singular") from exc
    nb = np.linalg.norm(b)
    if not np.all(np.isfinite(x)) or np.linalg.norm(a @ x - b) > 1e-10 * max(nb, 1e-300):
        raise SingularPointError(f"resolvent (M + i*{omega:g}) is numerically singular")
    return -x


def solve_orders(params, M=None, X=None, couplings=None):
    """Zeroth-order dot state and the alpha/nu coefficient set.

    ``M``/``X`` default to the phonon-free dot; ``couplings`` defaults to
    ``(g1, g2)``.
    """
    if M is None:
        M, X = build_M_X(params)
    state = zeroth_order(M, X)
    g1, g2 = couplings if couplings is not None else (params.g1, params.g2)
    sources = first_order_sources(state, g1, g2)
    alpha = np.zeros(8, dtype=complex)
    nu = np.zeros(8, dtype=complex)
    for k in range(8):
        if not np.any(sources[k]):
            continue
        v = _resolve(M, _form_frequency(k, params), sources[k])
        alpha[k] = 1j * g1 * v[0]     # row rho_xg
        nu[k] = 1j * g2 * v[1]        # row rho_yg
    return state, FPCoefficients(alpha, nu)


# --- drift and diffusion ------------------------------------------------------

def drift_diffusion(coeffs, r1, r2, phi, Phi, params):
    """Relative/average phase drift and diffusion (each expression + c.c.)."""
    if r1 <= 0 or r2 <= 0:
        raise ValueError("field amplitudes must be positive")
    a = np.concatenate([[0], coeffs.alpha])      # 1-based
    n = np.concatenate([[0], coeffs.nu])
    em = np.exp(-1j * phi)
    ep = np.exp(1j * phi)
    e2P = np.exp(-2j * Phi)
    eA = np.exp(-1j * (2 * Phi + phi))
    eB = np.exp(-1j * (2 * Phi - phi))
    q = r2 / r1
    rr = r1 * r2

    b_phi = ((a[1] - n[2])
             + (a[2] * q * em - n[1] / q * ep)
             - (a[2] / rr * em - n[1] / rr * ep)
             + (a[3] * eA - n[4] * eB)
             + (a[4] * q * e2P - n[3] / q * e2P)
             + (a[5] - n[6])
             + (a[6] * q * em - n[5] / q * ep)
             + (a[7] * eA - n[8] * eB)
             - (3 * a[7] / (2 * r1**2) * eA - 3 * n[8] / (2 * r2**2) * eB)
             + (a[8] * q * e2P - n[7] / q * e2P))
    d_phi = params.Delta_c1p - params.Delta_c2p + 2 * np.real(-0.5j * b_phi)

    b_Phi = ((a[1] + n[2])
             + (a[2] * q * em + n[1] / q * ep)
             + (a[3] * eA + n[4] * eB)
             + (a[4] * q * e2P + n[3] / q * e2P)
             + (a[5] + n[6])
             + (a[6] * q * em + n[5] / q * ep)
             + (a[7] * eA + n[8] * eB)
             - (3 * a[7] / (2 * r1**2) * eA + 3 * n[8] / (2 * r2**2) * eB)
             + (a[8] * q * e2P + n[7] / q * e2P)
             - (a[8] / rr * e2P + n[7] / rr * e2P))
    d_Phi = (params.Delta_c1p + params.Delta_c2p) / 2 + 2 * np.real(-0.25j * b_Phi)

    b_pp = (-(a[1] / r1**2 + n[2] / r2**2)
            + (a[2] / rr * em + n[1] / rr * ep)
            + (a[7] / r1**2 * eA + n[8] / r2**2 * eB)
            - (a[8] / rr * e2P + n[7] / rr * e2P))
    b_PP = (-(a[1] / r1**2 + n[2] / r2**2)
            - (a[2] / rr * em + n[1] / rr * ep)
            + (a[7] / r1**2 * eA + n[8] / r2**2 * eB)
            + (a[8] / rr * e2P + n[7] / rr * e2P))
    return DriftDiffusion(float(d_phi), float(d_Phi), float(2 * np.real(b_pp / 4)),
                          float(2 * np.real(b_PP / 16)), (r1, r2, phi, Phi))


# --- phonon-dressed variant ---------------------------------------------------

_DAG = {"a1": "a1d", "a1d": "a1", "a2": "a2d", "a2d": "a2"}


def _dag_word(word):
    return tuple(_DAG[s] for s in reversed(word))


def _normal_order_mode(word, ann, cre):
    """Normal-order a word in one mode; returns {(n_cre, n_ann): coeff}."""
    # count a^dag moving left past a: each swap a a^dag -> a^dag a + 1
    terms = {tuple(word): 1.0}
    done = defaultdict(float)
    while terms:
        nxt = defaultdict(float)
        for w, c in terms.items():
            for pos in range(len(w) - 1):
                if w[pos] == ann and w[pos + 1] == cre:
                    nxt[w[:pos] + (cre, ann) + w[pos + 2:]] += c
                    nxt[w[:pos] + w[pos + 2:]] += c
                    break
            else:
                done[(w.count(cre), w.count(ann))] += c
        terms = nxt
    return done


def _normal_order(word):
    """{(p1, p2, r1, r2): coeff} for a1d^p1 a2d^p2 a1^r1 a2^r2."""
    w1 = [s for s in word if s in ("a1", "a1d")]
    w2 = [s for s in word if s in ("a2", "a2d")]
    m1 = _normal_order_mode(w1, "a1", "a1d")
    m2 = _normal_order_mode(w2, "a2", "a2d")
    out = {}
    for (p1, r1), c1 in m1.items():
        for (p2, r2), c2 in m2.items():
            out[(p1, p2, r1, r2)] = out.get((p1, p2, r1, r2), 0) + c1 * c2
    return out


def _monomials(terms):
    """Canonical {(left, right): coeff} from a list of (coeff, left word, right word)."""
    acc = defaultdict(complex)
    for coeff, left, right in terms:
        for lk, lc in _normal_order(left).items():
            for rk, rc in _normal_order(right).items():
                acc[(lk, rk)] += coeff * lc * rc
    return acc


def _basis_terms(family, k):
    """Field superoperator of one unit coefficient: (T, T^dag) as term lists."""
    left, right = FIELD_FORMS[k]
    c = "a1d" if family == "alpha" else "a2d"
    a = _DAG[c]
    t = [(1.0, left, right + (c,)), (-1.0, (c,) + left, right)]
    t_dag = [(1.0, (a,) + _dag_word(right), _dag_word(left)),
             (-1.0, _dag_word(right), _dag_word(left) + (a,))]
    return t, t_dag


def fit_field_coefficients(terms, tol=1e-10):
    """Express a field superoperator as alpha/nu coefficients.

    ``terms`` is a list of ``(coeff, left word, right word)``.  The
    coefficients are fitted over the real-linear span of
    ``alpha T + conj(alpha) T^dag``; a residual above ``tol`` relative to
    the input norm raises ``ValueError``.
    """
    target = _monomials(terms)
    columns = []
    for family in ("alpha", "nu"):
        for k in range(8):
            t, t_dag = _basis_terms(family, k)
            mt, md = _monomials(t), _monomials(t_dag)
            re = {key: mt.get(key, 0) + md.get(key, 0) for key in set(mt) | set(md)}
            im = {key: 1j * (mt.get(key, 0) - md.get(key, 0)) for key in set(mt) | set(md)}
            columns += [re, im]
    keys = sorted(set(target).union(*[set(c) for c in columns]))
    A = np.array([[col.get(key, 0) for col in columns] for key in keys], dtype=complex)
    b = np.array([target.get(key, 0) for key in keys], dtype=complex)
    A_r = np.vstack([A.real, A.imag])
    b_r = np.concatenate([b.real, b.imag])
    x, *_ = np.linalg.lstsq(A_r, b_r, rcond=None)
    resid = np.linalg.norm(A_r @ x - b_r)
    if resid > tol * max(np.linalg.norm(b_r), 1.0):
        raise ValueError(f"field terms outside the alpha/nu span (residual {resid:.2e})")
    z = x[0::2] + 1j * x[1::2]
    return FPCoefficients(z[:8], z[8:])


def _qd_trace_terms(superterms, c):
    """Trace the dot out of (coeff, Q_L, F_L, Q_R, F_R) terms with rho = c (x) rho_f."""
    return [(coeff * np.trace(ql @ c @ qr), fl, fr) for coeff, ql, fl, qr, fr in superterms]


def _op(q, f):
    return (np.asarray(q, dtype=complex), tuple(f))


def _mul(o1, o2):
    return (o1[0] @ o2[0], o1[1] + o2[1])


def _dag(o):
    return (o[0].conj().T, _dag_word(o[1]))


_I3 = np.eye(3, dtype=complex)


def _hamiltonian_terms(h, o):
    return [(-1j * h, o[0], o[1], _I3, ()), (1j * h, _I3, (), o[0], o[1])]


def _lindblad_terms(rate, o):
    od = _dag(o)
    odo = _mul(od, o)
    return [(-rate / 2, odo[0], odo[1], _I3, ()), (rate, o[0], o[1], od[0], od[1]),
            (-rate / 2, _I3, (), odo[0], odo[1])]


def _cross_terms(rate, o1, o2):
    o21 = _mul(o2, o1)
    return [(-rate / 2, o21[0], o21[1], _I3, ()), (rate, o1[0], o1[1], o2[0], o2[1]),
            (-rate / 2, _I3, (), o21[0], o21[1])]


def direct_field_terms(rates):
    """Phonon-induced second-order cavity terms as dot-field product terms.

    Covers the cavity-assisted Stark shifts, the exciton-exchange photon
    exchange, the cavity-assisted scattering rates and their cross terms.
    Residue terms drop out after the dot trace and are not listed.
    """
    r = rates
    modes = ("a1", "a2")
    out = []
    for i in range(2):
        a = modes[i]
        ad = _DAG[a]
        ee = SP[i] @ SM[i]
        gg = SM[i] @ SP[i]
        out += _hamiltonian_terms(r.delta_plus[i], _op(ee, (a, ad)))
        out += _hamiltonian_terms(r.delta_minus[i], _op(gg, (ad, a)))
        out += _lindblad_terms(r.Gamma_minus[i], _op(SP[i], (a,)))
        out += _lindblad_terms(r.Gamma_plus[i], _op(SM[i], (ad,)))
    x12 = _op(SP[0] @ SM[1], ("a1", "a2d"))
    out += _hamiltonian_terms(-1j * r.Omega_12, x12)
    out += _hamiltonian_terms(1j * np.conj(r.Omega_12), _dag(x12))
    for i, j in ((0, 1), (1, 0)):
        out += _cross_terms(r.Gamma_x[i, j], _op(SM[j], (_DAG[modes[j]],)),
                            _op(SP[i], (modes[i],)))
    return out


def with_phonon_variant(params, rates, mean_B):
    """alpha/nu set of the phonon-dressed dot.

    ``M`` and ``X`` come from the single-dot part of the simplified master
    equation; the first-order path uses couplings ``g_i * mean_B`` (or bare
    ``g_i`` when ``params.renormalize_fp_coupling`` is off); the
    cavity-assisted phonon terms are traced over the zeroth-order dot state
    and added to the coefficients.
    """
    M, X = reduce_qd_liouvillian(qd_liouvillian(params, rates, mean_B))
    scale = mean_B if params.renormalize_fp_coupling else 1.0
    state, coeffs = solve_orders(params, M, X, (params.g1 * scale, params.g2 * scale))
    direct = fit_field_coefficients(_qd_trace_terms(direct_field_terms(rates), state.qd_matrix))
    return state, coeffs + direct


def dip_width(phi, values, level=0.5):
    """Width (rad) of the dip around the minimum of a periodic phase curve.

    The dip is the connected stretch around the grid minimum where
    ``values < level * max(values)``; its edges are located by linear
    interpolation.  ``phi`` must be a uniform grid covering one period
    (the endpoint may be repeated).
    """
    phi = np.asarray(phi, dtype=float)
    v = np.asarray(values, dtype=float)
    if np.isclose(phi[-1] - phi[0], 2 * np.pi):
        phi, v = phi[:-1], v[:-1]
    n = len(v)
    step = phi[1] - phi[0]
    thr = level * v.max()
    i0 = int(np.argmin(v))
    if v[i0] >= thr:
        return 0.0
    if np.all(v < thr):
        return 2 * np.pi

    def edge(direction):
        k = 0
        while v[(i0 + direction * (k + 1)) % n] < thr:
            k += 1
        a, b = v[(i0 + direction * k) % n], v[(i0 + direction * (k + 1)) % n]
        return (k + (thr - a) / (b - a)) * step

    return float(edge(1) + edge(-1))


def write_fp_csv(path, rows):
    """rows: iterable of (delta_cp_over_g1, phi1_rad, DriftDiffusion)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["delta_cp_over_g1", "phi1_rad", "D_phi", "D_Phi", "D_phiphi", "D_PhiPhi"])
        for dcp, phi1, dd in rows:
            w.writerow([repr(float(dcp)), repr(float(phi1)), repr(dd.D_phi), repr(dd.D_Phi),
                        repr(dd.D_phiphi), repr(dd.D_PhiPhi)])
