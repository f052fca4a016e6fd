"""Cavity population across the Rabi resonance, with and without phonons.

The driven dot splits into dressed states separated by Omega; a cavity tuned
to Delta_cp = -Omega is fed by the dressed-state transition and lights up.

Run:  python demos/rabi_resonance.py        (about half a minute)
"""
from dataclasses import replace

import numpy as np

from qdcel.liouvillian import SystemParams, build_full_polaron, build_no_phonon
from qdcel.observables import dressed_populations, g2_zero, mean_photons
from qdcel.phonon import build_tables
from qdcel.solvers import steady_state

g1 = 0.1
base = SystemParams(cutoff1=3, cutoff2=3)
tables = build_tables(base.bath)
print(f"Omega = {base.rabi / g1:.3f} g1, <B>(5 K) = {tables.mean_B:.4f}")

print(" Delta_cp/g1   n1 (no phonons)   n1 (5 K)   g2_11 (5 K)")
for d in np.arange(-13.0, -9.9, 0.5):
    p = replace(base, Delta_c1p=d * g1, Delta_c2p=d * g1)
    bare = steady_state(build_no_phonon(p)).rho
    dressed = steady_state(build_full_polaron(p, tables)).rho
    print(f"{d:10.2f}   {mean_photons(bare)[0]:14.4f}   {mean_photons(dressed)[0]:8.4f}"
          f"   {g2_zero(dressed, 1, 1):9.4f}")

rho = steady_state(build_full_polaron(base, tables)).rho
pp, p0, pm = dressed_populations(rho, base, tables.mean_B)
print(f"dressed populations at -Omega: +{pp:.3f}  0 {p0:.3f}  -{pm:.3f}")
