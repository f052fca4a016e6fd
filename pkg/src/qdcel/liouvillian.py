"""
Master-equation generators for the driven dot in a bimodal cavity.

All energies and rates are in meV with hbar absorbed, so a generator ``L``
returned here evolves ``d vec(rho) / dt = L vec(rho)`` with ``t`` measured in
units of hbar / meV (0.6582 ps).  Three variants are provided:

``no_phonon``
    coherent dynamics with cavity loss and radiative decay only.
``full``
    polaron master equation with the phonon kernel evaluated in the
    eigenbasis of the system Hamiltonian.
``sme``
    simplified master equation with the phonon-induced Lindblad rates,
    Stark shifts, exchange terms and non-Lindblad residue terms.
"""
from dataclasses import dataclass, field, fields, replace

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .operators import (
    ConfigurationError, SpaceLayout, commutator_super, identity, lindblad_cross,
    lindblad_term, make_annihilation, make_number, make_qd_sigma, sandwich, spost,
    spre, sprepost,
)
from .phonon import HBAR, PhononBathParams, compute_rates

__all__ = [
    "SystemParams", "GeneratorBundle", "SystemOperators", "rabi_frequency",
    "build_H_s", "build_no_phonon", "build_full_polaron", "build_sme",
    "build_generator", "exchange_operator", "phonon_coupling_operators",
]

VARIANTS = ("full", "sme", "no_phonon")


def rabi_frequency(delta, eta):
    """Generalized Rabi frequency sqrt(delta^2 + 8 eta^2) of the driven dot."""
    return float(np.sqrt(delta**2 + 8 * eta**2))


@dataclass(frozen=True)
class SystemParams:
    """Model parameters, energies and rates in meV.

    ``Delta_c1p``/``Delta_c2p`` default to ``-Omega`` built from ``Delta_xp``
    and ``eta1``.  Remaining defaults: g = 0.1, Delta = -10 g, eta = 2 g,
    kappa = 0.5 g, gamma = gamma' = 0.01 g, T = 5 K.
    """

    g1: float = 0.1
    g2: float = 0.1
    eta1: float = 0.2
    eta2: float = 0.2
    Delta_xp: float = -1.0
    Delta_yp: float = -1.0
    Delta_c1p: float = None
    Delta_c2p: float = None
    delta_fss: float = 0.0
    kappa1: float = 0.05
    kappa2: float = 0.05
    gamma1: float = 0.001
    gamma2: float = 0.001
    gamma1p: float = 0.001
    gamma2p: float = 0.001
    phi1: float = 0.0
    phi2: float = 0.0
    bath: PhononBathParams = field(default_factory=PhononBathParams)
    cutoff1: int = 4
    cutoff2: int = 4
    appendixA_pump_detuning: str = "exciton"
    dephasing_in_no_phonon: bool = False
    renormalize_fp_coupling: bool = True

    def __post_init__(self):
        omega = rabi_frequency(self.Delta_xp, self.eta1)
        if self.Delta_c1p is None:
            object.__setattr__(self, "Delta_c1p", -omega)
        if self.Delta_c2p is None:
            object.__setattr__(self, "Delta_c2p", -omega)
        for name in ("kappa1", "kappa2", "gamma1", "gamma2", "gamma1p", "gamma2p"):
            if getattr(self, name) < 0:
                raise ConfigurationError(f"{name} must be >= 0, got {getattr(self, name)}")
        for name in fields(self):
            v = getattr(self, name.name)
            if isinstance(v, float) and not np.isfinite(v):
                raise ConfigurationError(f"{name.name} must be finite")
        if self.appendixA_pump_detuning not in ("exciton", "cavity"):
            raise ConfigurationError(
                "appendixA_pump_detuning must be 'exciton' or 'cavity', "
                f"got {self.appendixA_pump_detuning!r}")
        SpaceLayout(self.cutoff1, self.cutoff2)

    @property
    def layout(self):
        return SpaceLayout(self.cutoff1, self.cutoff2)

    @property
    def rabi(self):
        return rabi_frequency(self.Delta_xp, self.eta1)

    def with_cutoff(self, cutoff1, cutoff2=None):
        return replace(self, cutoff1=cutoff1, cutoff2=cutoff1 if cutoff2 is None else cutoff2)

    def swapped(self):
        """Parameters with the labels 1 and 2 exchanged."""
        pairs = [("g1", "g2"), ("eta1", "eta2"), ("Delta_xp", "Delta_yp"),
                 ("Delta_c1p", "Delta_c2p"), ("kappa1", "kappa2"), ("gamma1", "gamma2"),
                 ("gamma1p", "gamma2p"), ("phi1", "phi2"), ("cutoff1", "cutoff2")]
        kw = {}
        for a, b in pairs:
            kw[a], kw[b] = getattr(self, b), getattr(self, a)
        return replace(self, **kw)


class SystemOperators:
    """Elementary operators of one layout, built once."""

    def __init__(self, layout):
        self.layout = layout
        self.a = (make_annihilation(layout, 1), make_annihilation(layout, 2))
        self.ad = tuple(x.conj().T.tocsr() for x in self.a)
        self.n = (make_number(layout, 1), make_number(layout, 2))
        self.sp = (make_qd_sigma(layout, "x", "+"), make_qd_sigma(layout, "y", "+"))
        self.sm = (make_qd_sigma(layout, "x", "-"), make_qd_sigma(layout, "y", "-"))
        self.ee = tuple((p @ m).tocsr() for p, m in zip(self.sp, self.sm))
        self.gg = tuple((m @ p).tocsr() for p, m in zip(self.sp, self.sm))
        self.eye = identity(layout)


@dataclass
class GeneratorBundle:
    """A generator together with the pieces needed downstream.

    ``L_total`` includes everything; ``L_cavity`` is the cavity-decay part
    alone, kept separately so photon-flow bookkeeping can subtract it.
    """

    H_s: sp.csr_matrix
    L_total: sp.csr_matrix
    variant: str
    params: SystemParams
    layout: SpaceLayout
    L_cavity: sp.csr_matrix = None
    mean_B: float = 1.0
    extra: dict = field(default_factory=dict)

    def apply(self, rho):
        d = rho.shape[0]
        return (self.L_total @ rho.flatten(order="F")).reshape((d, d), order="F")


def build_H_s(params, mean_B=1.0, ops=None):
    """Polaron-frame system Hamiltonian (meV), couplings scaled by ``mean_B``."""
    ops = ops or SystemOperators(params.layout)
    h = (params.Delta_xp * ops.ee[0] + params.Delta_yp * ops.ee[1]
         + params.Delta_c1p * ops.n[0] + params.Delta_c2p * ops.n[1])
    x_g = _coupling_A(params, ops)
    h = h + mean_B * (x_g + x_g.conj().T)
    return sp.csr_matrix(h)


def _coupling_A(params, ops):
    # A = sum_i g_i s_i^+ a_i + eta_i s_i^+   (mode-resolved pairing)
    g = (params.g1, params.g2)
    eta = (params.eta1, params.eta2)
    a = sum(g[i] * (ops.sp[i] @ ops.a[i]) + eta[i] * ops.sp[i] for i in range(2))
    return sp.csr_matrix(a)


def phonon_coupling_operators(params, ops=None):
    """Hermitian system operators (X_g, X_u) coupled to the phonon fluctuations."""
    ops = ops or SystemOperators(params.layout)
    a = _coupling_A(params, ops)
    ad = a.conj().T
    return sp.csr_matrix(a + ad), sp.csr_matrix(1j * (a - ad))


def _cavity_loss(params, ops):
    return -(params.kappa1 / 2 * lindblad_term(ops.a[0])
             + params.kappa2 / 2 * lindblad_term(ops.a[1]))


def _radiative(params, ops, dephasing):
    out = -(params.gamma1 / 2 * lindblad_term(ops.sm[0])
            + params.gamma2 / 2 * lindblad_term(ops.sm[1]))
    if dephasing:
        out = out - (params.gamma1p / 2 * lindblad_term(ops.ee[0])
                     + params.gamma2p / 2 * lindblad_term(ops.ee[1]))
    return out


def build_no_phonon(params):
    """Generator without exciton-phonon coupling (pure dephasing only when
    ``params.dephasing_in_no_phonon`` is set)."""
    layout = params.layout
    ops = SystemOperators(layout)
    h = build_H_s(params, 1.0, ops)
    l_cav = _cavity_loss(params, ops).tocsr()
    L = commutator_super(h) + l_cav + _radiative(params, ops, params.dephasing_in_no_phonon)
    return GeneratorBundle(h, L.tocsr(), "no_phonon", params, layout, l_cav, 1.0)


def build_full_polaron(params, tables):
    """Polaron master equation with the phonon kernel in the H_s eigenbasis.

    For each j in (g, u) the operator X_j(-tau) is expanded in eigenstates of
    H_s, and the tau integral becomes the half-Fourier weight K_j evaluated at
    the Bohr frequency E_b - E_a.
    """
    layout = params.layout
    ops = SystemOperators(layout)
    mean_B = tables.mean_B
    h = build_H_s(params, mean_B, ops)
    l_cav = _cavity_loss(params, ops).tocsr()
    L = commutator_super(h) + l_cav + _radiative(params, ops, True)

    if params.bath.alpha_p > 0:
        try:
            energies, vecs = sla.eigh(h.toarray())
        except sla.LinAlgError as exc:
            raise np.linalg.LinAlgError(f"H_s diagonalisation failed: {exc}") from exc
        bohr = energies[None, :] - energies[:, None]       # [a, b] = E_b - E_a
        x_g, x_u = phonon_coupling_operators(params, ops)
        l_ph = None
        for x, kernel in ((x_g, "g"), (x_u, "u")):
            weights = tables.half_fourier(kernel, bohr)      # ps
            xe = vecs.conj().T @ (x @ vecs)
            x_tilde = vecs @ (weights * xe) @ vecs.conj().T
            x_tilde = sp.csr_matrix(_prune(x_tilde))
            xs = sp.csr_matrix(x)
            term = (spre(xs @ x_tilde) - sprepost(x_tilde, xs)
                    + spost(x_tilde.conj().T @ xs) - sprepost(xs, x_tilde.conj().T.tocsr()))
            l_ph = term if l_ph is None else l_ph + term
        L = L - l_ph / HBAR
    return GeneratorBundle(h, sp.csr_matrix(L), "full", params, layout, l_cav, mean_B)


def _prune(m, rel=1e-15):
    m = np.array(m)
    scale = np.max(np.abs(m)) if m.size else 0.0
    m[np.abs(m) < rel * scale] = 0.0
    return m


def build_sme(params, rates, mean_B=None):
    """Simplified master equation built from precomputed phonon rates.

    ``mean_B`` renormalises the coherent couplings in H_s; pass the value the
    rates were computed with.  Label-exchanged partners of every bracketed
    dissipator and residue term are included, which (together with the
    conjugate partners written out explicitly) makes the generator trace and
    Hermiticity preserving.
    """
    layout = params.layout
    ops = SystemOperators(layout)
    mean_B = 1.0 if mean_B is None else mean_B
    r = rates
    sp_, sm, a, ad = ops.sp, ops.sm, ops.a, ops.ad

    h = build_H_s(params, mean_B, ops)
    h_eff = h.copy()
    for i in range(2):
        h_eff = h_eff + r.delta_plus[i] * (ops.ee[i] @ a[i] @ ad[i])
        h_eff = h_eff + r.delta_minus[i] * (ops.gg[i] @ ad[i] @ a[i])
        h_eff = h_eff + r.delta_p_plus[i] * ops.ee[i] + r.delta_p_minus[i] * ops.gg[i]
    x12 = sp_[0] @ sm[1]
    t = 1j * r.Omega_12 * (x12 @ a[0] @ ad[1]) + 1j * r.Omega_12_p * x12
    h_eff = sp.csr_matrix(h_eff - (t + t.conj().T))

    l_cav = _cavity_loss(params, ops).tocsr()
    L = commutator_super(h_eff) + l_cav
    gam = (params.gamma1, params.gamma2)
    gamp = (params.gamma1p, params.gamma2p)
    for i in range(2):
        L = L - (gam[i] + r.Gamma_p_plus[i]) / 2 * lindblad_term(sm[i])
        L = L - gamp[i] / 2 * lindblad_term(ops.ee[i])
        L = L - r.Gamma_minus[i] / 2 * lindblad_term(sp_[i] @ a[i])
        L = L - r.Gamma_plus[i] / 2 * lindblad_term(sm[i] @ ad[i])
        L = L - r.Gamma_p_minus[i] / 2 * lindblad_term(sp_[i])

    bracket = None
    for i, j in ((0, 1), (1, 0)):
        up_i = sp_[i] @ a[i]          # s_i^+ a_i
        up_j = sp_[j] @ a[j]
        dn_j = sm[j] @ ad[j]          # s_j^- a_j^dag
        terms = [
            r.Gamma_x[i, j] / 2 * lindblad_cross(ad[j] @ sm[j], up_i),
            r.Gamma_x_p[i, j] / 2 * lindblad_cross(sp_[i], sm[j]),
            r.Lambda_plus[i] * sandwich(up_i, up_i),
            r.Lambda_pp[i, j] * sandwich(up_i, up_j),
            r.Lambda_pm[i, j] * sandwich(up_i, dn_j),
            r.Lambda_p_plus[i] * sandwich(sp_[i], sp_[i]),
            r.Lambda_p_pp[i, j] * sandwich(sp_[i], sp_[j]),
            r.Lambda_p_pm[i, j] * sandwich(sp_[i], sm[j]),
        ]
        # explicit conjugate partners of the grouped residue terms
        up_i_d = up_i.conj().T
        up_j_d = up_j.conj().T
        terms += [
            np.conj(r.Lambda_plus[i]) * sandwich(up_i_d, up_i_d),
            np.conj(r.Lambda_pp[i, j]) * sandwich(up_j_d, up_i_d),
            np.conj(r.Lambda_p_plus[i]) * sandwich(sm[i], sm[i]),
            np.conj(r.Lambda_p_pp[i, j]) * sandwich(sm[j], sm[i]),
        ]
        for term in terms:
            bracket = term if bracket is None else bracket + term
    L = L - bracket
    return GeneratorBundle(h_eff, sp.csr_matrix(L), "sme", params, layout, l_cav, mean_B,
                           extra={"rates": rates, "H_s": h})


def build_generator(params, variant, tables=None):
    """Dispatch on ``variant``; phonon tables are built on demand."""
    if variant not in VARIANTS:
        raise ConfigurationError(f"variant must be one of {VARIANTS}, got {variant!r}")
    if variant == "no_phonon":
        return build_no_phonon(params)
    if tables is None:
        from .phonon import build_tables
        tables = build_tables(params.bath)
    if variant == "full":
        return build_full_polaron(params, tables)
    return build_sme(params, compute_rates(params, tables), tables.mean_B)


def exchange_operator(layout):
    """Unitary swapping |x> <-> |y> and the two mode factors (equal cutoffs)."""
    if layout.cutoff1 != layout.cutoff2:
        raise ConfigurationError("label exchange needs equal cutoffs")
    d = layout.cutoff1 + 1
    perm = np.empty(layout.dim, dtype=int)
    qd_swap = (0, 2, 1)
    for q in range(3):
        for n in range(d):
            for m in range(d):
                perm[layout.index(qd_swap[q], m, n)] = layout.index(q, n, m)
    return sp.csr_matrix((np.ones(layout.dim), (perm, np.arange(layout.dim))),
                         shape=(layout.dim, layout.dim), dtype=complex)
