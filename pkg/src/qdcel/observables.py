"""
Expectation values on the composite space: photon numbers, coherences,
zero-delay correlations, phase-quadrature variances, dressed-state
populations and the two-mode entanglement witness.

Quadrature second moments are evaluated in normal order with the exact
commutator ``[a, a^dag] = 1`` added back by hand, so vacuum and coherent
values are exact at any Fock truncation.
"""
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .operators import ConfigurationError, SpaceLayout, make_annihilation, qd_projector

__all__ = [
    "UndefinedValueError", "QuadratureOps", "DressedBasis",
    "expect", "mean_photons", "coherences", "g2_zero",
    "quadrature_ops", "quadrature_variance", "quadrature_coefficients",
    "dressed_basis", "dressed_populations", "dgcz_witness", "layout_of",
]


class UndefinedValueError(ValueError):
    """An observable is undefined for the given state (e.g. g2 without light)."""


def layout_of(rho):
    """Recover the symmetric-cutoff layout from a density matrix size."""
    d = rho.shape[0]
    if d % 3:
        raise ConfigurationError(f"dimension {d} is not 3 x (N+1)^2")
    n = int(round(np.sqrt(d // 3)))
    if 3 * n * n != d:
        raise ConfigurationError(
            f"dimension {d} does not correspond to equal cutoffs; pass the layout explicitly")
    return SpaceLayout(n - 1, n - 1)


def expect(op, rho):
    """Tr(op rho)."""
    if op.shape != rho.shape:
        raise ConfigurationError(f"operator shape {op.shape} does not match state {rho.shape}")
    if sp.issparse(op):
        return complex(op.multiply(rho.T).sum())
    return complex(np.einsum("ij,ji->", op, rho))


def _ladders(rho, layout):
    layout = layout or layout_of(rho)
    return layout, make_annihilation(layout, 1), make_annihilation(layout, 2)


def mean_photons(rho, layout=None):
    """(<n1>, <n2>) as reals."""
    layout, a1, a2 = _ladders(rho, layout)
    return tuple(expect(a.conj().T @ a, rho).real for a in (a1, a2))


def coherences(rho, layout=None):
    """Return ``(<a1^dag a2>, <s1^+ s2^->)``, both complex."""
    layout, a1, a2 = _ladders(rho, layout)
    s12 = qd_projector(layout, ("x", "y"))
    return expect(a1.conj().T @ a2, rho), expect(s12, rho)


def g2_zero(rho, i, j, layout=None, floor=1e-14):
    """Zero-delay correlation <a_i^dag a_j^dag a_i a_j> / (<n_i><n_j>).

    Raises
    ------
    UndefinedValueError
        If either mean photon number is below ``floor``.
    """
    layout, a1, a2 = _ladders(rho, layout)
    a = {1: a1, 2: a2}
    if i not in a or j not in a:
        raise ConfigurationError("mode indices must be 1 or 2")
    ai, aj = a[i], a[j]
    ni = expect(ai.conj().T @ ai, rho).real
    nj = expect(aj.conj().T @ aj, rho).real
    if ni < floor or nj < floor:
        raise UndefinedValueError(f"g2 undefined: <n{i}>={ni:.3e}, <n{j}>={nj:.3e}")
    num = expect(ai.conj().T @ aj.conj().T @ ai @ aj, rho).real
    return num / (ni * nj)


# --- phase quadratures ------------------------------------------------------

_QUAD = {
    # B = sum_j (c_j a_j^dag + c_j^* a_j); entries give c_j / exp(i phi_j)
    "phi": (0.5j, -0.5j),
    "Phi": (0.25j, 0.25j),
    "r": (0.5, -0.5),
    "R": (0.25, 0.25),
}


def quadrature_coefficients(which, phi1, phi2):
    """Coefficients ``(c1, c2)`` with ``B = sum_j c_j a_j^dag + h.c.``."""
    if which not in _QUAD:
        raise ConfigurationError(f"quadrature must be one of {tuple(_QUAD)}, got {which!r}")
    k1, k2 = _QUAD[which]
    return k1 * np.exp(1j * phi1), k2 * np.exp(1j * phi2)


@dataclass(frozen=True)
class QuadratureOps:
    B_phi: sp.csr_matrix
    B_Phi: sp.csr_matrix
    B_r: sp.csr_matrix
    B_R: sp.csr_matrix
    phi1: float
    phi2: float


def _linear_op(coeffs, a1, a2):
    op = sum(c * a.conj().T + np.conj(c) * a for c, a in zip(coeffs, (a1, a2)))
    return sp.csr_matrix(op)


def quadrature_ops(layout, phi1, phi2):
    """Relative/average phase and amplitude operators as sparse matrices."""
    a1, a2 = make_annihilation(layout, 1), make_annihilation(layout, 2)
    ops = {w: _linear_op(quadrature_coefficients(w, phi1, phi2), a1, a2) for w in _QUAD}
    return QuadratureOps(ops["phi"], ops["Phi"], ops["r"], ops["R"], phi1, phi2)


def _moments(rho, layout):
    layout, a1, a2 = _ladders(rho, layout)
    a = (a1, a2)
    first = np.array([expect(x, rho) for x in a])                  # <a_j>
    aa = np.array([[expect(a[j] @ a[k], rho) for k in range(2)] for j in range(2)])
    ada = np.array([[expect(a[j].conj().T @ a[k], rho) for k in range(2)] for j in range(2)])
    return first, aa, ada


def _linear_variance(coeffs, moments):
    """Variance of sum_j c_j a_j^dag + h.c. from normal-ordered moments."""
    first, aa, ada = moments
    c = np.asarray(coeffs, dtype=complex)
    cc = np.conj(c)
    mean = 2 * np.real(np.sum(c * np.conj(first)))
    # <B^2> = sum_jk c_j c_k <a_j^dag a_k^dag> + c.c. + 2 Re(c_j c_k^* <a_j^dag a_k>) + sum |c_j|^2
    adad = np.conj(aa).T
    second = (np.einsum("j,k,jk->", c, c, adad) + np.einsum("j,k,jk->", cc, cc, aa)
              + np.einsum("j,k,jk->", c, cc, ada) + np.einsum("j,k,kj->", cc, c, ada)
              + np.sum(np.abs(c) ** 2))
    return float(np.real(second) - mean**2)


def quadrature_variance(rho, which, phi1, phi2, layout=None):
    """<B^2> - <B>^2 for ``which`` in {'phi', 'Phi', 'r', 'R'}."""
    rho = 0.5 * (rho + rho.conj().T)
    return _linear_variance(quadrature_coefficients(which, phi1, phi2), _moments(rho, layout))


def dgcz_witness(rho, phi1, phi2, layout=None):
    """Delta u^2 + Delta v^2 with u = x1 + x2 and v = p1 - p2.

    x_j = (a_j^dag e^{-i phi_j} + a_j e^{i phi_j}) / sqrt(2) and
    p_j = i (a_j^dag e^{-i phi_j} - a_j e^{i phi_j}) / sqrt(2).  Values
    below 2 certify entanglement between the two modes.
    """
    rho = 0.5 * (rho + rho.conj().T)
    m = _moments(rho, layout)
    e1, e2 = np.exp(-1j * phi1) / np.sqrt(2), np.exp(-1j * phi2) / np.sqrt(2)
    var_u = _linear_variance((e1, e2), m)
    var_v = _linear_variance((1j * e1, -1j * e2), m)
    return var_u + var_v


# --- pump-dressed states ----------------------------------------------------

@dataclass(frozen=True)
class DressedBasis:
    """Dressed states of the symmetrically driven dot.

    |psi_+> = cos a |+> + sin a |g>, |psi_0> = |->, |psi_-> = -sin a |+> + cos a |g>
    with |+-> = (|x> +- |y>)/sqrt(2) and tan 2a = 2 sqrt(2) eta / Delta.
    """

    alpha: float
    omega: float
    P_plus: sp.csr_matrix
    P_zero: sp.csr_matrix
    P_minus: sp.csr_matrix


def dressed_basis(layout, delta, eta):
    omega = float(np.sqrt(delta**2 + 8 * eta**2))
    alpha = 0.5 * float(np.arctan2(2 * np.sqrt(2) * eta, delta))
    c, s = np.cos(alpha), np.sin(alpha)
    r2 = 1 / np.sqrt(2)
    kets = {
        "plus": np.array([s, c * r2, c * r2]),     # order (g, x, y)
        "zero": np.array([0.0, r2, -r2]),
        "minus": np.array([c, -s * r2, -s * r2]),
    }
    d1, d2 = layout.cutoff1 + 1, layout.cutoff2 + 1
    eye = sp.identity(d1 * d2, format="csr")
    proj = {k: sp.kron(sp.csr_matrix(np.outer(v, v)), eye, format="csr").astype(complex)
            for k, v in kets.items()}
    return DressedBasis(alpha, omega, proj["plus"], proj["zero"], proj["minus"])


def dressed_populations(rho, params, mean_B=1.0, layout=None):
    """Populations of (|psi_+>, |psi_0>, |psi_->) traced over the photons.

    The dressing uses ``Delta_xp`` and the drive ``mean_B * eta``; pass the
    mean phonon displacement to dress with the polaron-renormalised drive.
    """
    if not np.isclose(params.eta1, params.eta2) or not np.isclose(params.Delta_xp, params.Delta_yp):
        raise ConfigurationError("dressed states need eta1 == eta2 and Delta_xp == Delta_yp")
    layout = layout or params.layout
    basis = dressed_basis(layout, params.Delta_xp, mean_B * params.eta1)
    return tuple(expect(p, rho).real for p in (basis.P_plus, basis.P_zero, basis.P_minus))
