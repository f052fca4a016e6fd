"""Single- and two-photon excess emission rates from the simplified master equation.

Run:  python demos/excess_emission.py
"""
import numpy as np

from qdcel.liouvillian import SystemParams, build_sme
from qdcel.observables import mean_photons
from qdcel.phonon import build_tables, compute_rates
from qdcel.rate_equations import excess_emission, sector_flows
from qdcel.solvers import steady_state

g1 = 0.1
tables = build_tables(SystemParams().bath)
print(" Delta_cp/g1      N1         N2        N1M1    (N1+2N2+N1M1)/(kappa n1)")
for d in (-12.0, -11.5, -11.0, -8.0, -6.0, -5.75, -5.5):
    p = SystemParams(cutoff1=3, cutoff2=3, Delta_c1p=d * g1, Delta_c2p=d * g1)
    b = build_sme(p, compute_rates(p, tables), tables.mean_B)
    rho = steady_state(b).rho
    e = excess_emission(sector_flows(b, rho))
    bal = (e.N1 + 2 * e.N2 + e.N1M1) / (p.kappa1 * mean_photons(rho)[0])
    print(f"{d:10.2f}  {e.N1:.3e}  {e.N2:.3e}  {e.N1M1:.3e}   {bal:.3f}")
