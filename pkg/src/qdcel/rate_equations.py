"""
Photon-number rate equations and excess emission rates.

The populations ``P[i, n, m] = <i, n, m| rho |i, n, m>`` are coupled through
an effective rate matrix obtained by eliminating every coherence of the
generator,

    W = L_PP - L_PQ L_QQ^-1 L_QP,

which is exact for stationary states (``rho_Q = -L_QQ^-1 L_QP rho_P``).  The
cavity-decay part of ``L_PP`` is split off and reported separately as the
analytic ``kappa n`` flows.  Every remaining off-diagonal rate is classified
by the photon-number change ``(dn, dm)`` it produces.
"""
import csv
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

__all__ = ["SectorFlows", "EERReport", "FLOW_CLASSES", "sector_flows", "excess_emission",
           "write_eer_csv"]

FLOW_CLASSES = ((1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1),
                (2, 0), (-2, 0), (0, 2), (0, -2))


@dataclass
class SectorFlows:
    """Sector populations and classified transition rates.

    ``P`` has shape (3, N1 + 1, N2 + 1) over (dot level, n, m).  ``rates``
    maps a class ``(dn, dm)`` to an array of the same shape holding the
    total rate out of ``|i, n, m>`` into sector ``(n + dn, m + dm)``.
    Classes not in :data:`FLOW_CLASSES` are kept in ``other_rates``.
    """

    P: np.ndarray
    rates: dict
    other_rates: dict
    kappa_rates: tuple
    skipped: list = field(default_factory=list)

    @property
    def sector_P(self):
        return self.P.sum(axis=0)

    def flux(self, cls):
        """Probability flux sum_i,n,m rate * P for one class."""
        table = self.rates.get(cls, self.other_rates.get(cls))
        if table is None:
            return 0.0
        return float(np.sum(table * self.P))

    @property
    def remainder(self):
        """Total probability flux carried by unlisted classes."""
        return float(sum(np.sum(t * self.P) for t in self.other_rates.values()))

    def net_change(self):
        """dP/dt per sector reconstructed from every flow (should vanish)."""
        total = np.zeros(self.P.shape[1:])
        n1, n2 = total.shape
        tables = dict(self.rates)
        tables.update(self.other_rates)
        for (dn, dm), t in tables.items():
            flux = (t * self.P).sum(axis=0)
            total -= flux
            for n in range(n1):
                for m in range(n2):
                    if 0 <= n + dn < n1 and 0 <= m + dm < n2:
                        total[n + dn, m + dm] += flux[n, m]
        k1, k2 = self.kappa_rates
        for kr, (dn, dm) in ((k1, (-1, 0)), (k2, (0, -1))):
            flux = (kr * self.P).sum(axis=0)
            total -= flux
            total[:n1 + dn if dn else n1, :n2 + dm if dm else n2] += flux[-dn:, -dm:]
        return total


@dataclass(frozen=True)
class EERReport:
    N1: float
    M1: float
    N2: float
    M2: float
    N1M1: float
    remainder: float = 0.0


def _photon_index(layout):
    d1, d2 = layout.cutoff1 + 1, layout.cutoff2 + 1
    level = np.repeat(np.arange(3), d1 * d2)
    n = np.tile(np.repeat(np.arange(d1), d2), 3)
    m = np.tile(np.arange(d2), 3 * d1)
    return level, n, m


def sector_flows(bundle, rho_ss, p_floor=1e-14):
    """Classified population flows of a generator bundle at its steady state.

    Sectors with probability below ``p_floor`` are recorded in ``skipped``
    (their rates are still computed; they simply carry no flux).
    """
    layout = bundle.layout
    L = sp.csc_matrix(bundle.L_total)
    L_cav = sp.csc_matrix(bundle.L_cavity)
    d = layout.dim
    p_idx = np.arange(d) * (d + 1)
    mask = np.ones(d * d, dtype=bool)
    mask[p_idx] = False
    q_idx = np.nonzero(mask)[0]

    L_pp = L[p_idx][:, p_idx].toarray()
    L_pq = L[p_idx][:, q_idx]
    L_qp = L[q_idx][:, p_idx].toarray()
    L_qq = L[q_idx][:, q_idx]
    try:
        lu = spla.splu(sp.csc_matrix(L_qq), permc_spec="COLAMD")
    except RuntimeError as exc:
        raise np.linalg.LinAlgError(f"coherence block is singular: {exc}") from exc
    W = L_pp - L_pq @ lu.solve(L_qp.astype(complex))
    W = W - L_cav[p_idx][:, p_idx].toarray()
    if np.max(np.abs(W.imag)) > 1e-8 * max(np.max(np.abs(W.real)), 1e-300):
        raise np.linalg.LinAlgError("effective population rates are not real")
    W = W.real

    level, n, m = _photon_index(layout)
    shape = (3, layout.cutoff1 + 1, layout.cutoff2 + 1)
    P = np.real(np.diag(rho_ss)).reshape(shape)
    rates, other = {}, {}
    dn = n[:, None] - n[None, :]          # [target, source]
    dm = m[:, None] - m[None, :]
    for cls in set(zip(dn.ravel(), dm.ravel())):
        cls = (int(cls[0]), int(cls[1]))
        if cls == (0, 0):
            continue
        sel = (dn == cls[0]) & (dm == cls[1])
        out = np.where(sel, W, 0.0).sum(axis=0).reshape(shape)
        if not np.any(out):
            continue
        (rates if cls in FLOW_CLASSES else other)[cls] = out
    for cls in FLOW_CLASSES:
        rates.setdefault(cls, np.zeros(shape))
    k1 = bundle.params.kappa1 * n.reshape(shape)
    k2 = bundle.params.kappa2 * m.reshape(shape)
    sector = P.sum(axis=0)
    skipped = [(int(a), int(b)) for a, b in zip(*np.nonzero(sector < p_floor))]
    return SectorFlows(P, rates, other, (k1.astype(float), k2.astype(float)), skipped)


def excess_emission(flows):
    """Single- and two-photon excess emission rates (emission minus absorption)."""
    f = flows.flux
    return EERReport(
        N1=f((1, 0)) - f((-1, 0)),
        M1=f((0, 1)) - f((0, -1)),
        N2=f((2, 0)) - f((-2, 0)),
        M2=f((0, 2)) - f((0, -2)),
        N1M1=f((1, 1)) - f((-1, -1)),
        remainder=flows.remainder,
    )


def write_eer_csv(path, rows):
    """rows: iterable of (delta_cp_over_g1, EERReport)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["delta_cp_over_g1", "N1", "M1", "N2", "M2", "N1M1", "remainder"])
        for x, e in rows:
            w.writerow([repr(float(x))] + [repr(float(v)) for v in
                                           (e.N1, e.M1, e.N2, e.M2, e.N1M1, e.remainder)])
