"""Relative-phase locking and diffusion quenching.

Drift and diffusion of the relative phase phi and mean phase Phi of the two
modes, from the adiabatically eliminated dot.  Without phonons the relative
phase diffusion vanishes at the locking point; phonons leave a small floor
and widen the dip as the temperature rises.

Run:  python demos/phase_locking.py
"""
import numpy as np

from qdcel.fokker_planck import dip_width, drift_diffusion, solve_orders, with_phonon_variant
from qdcel.liouvillian import SystemParams, build_full_polaron, build_no_phonon
from qdcel.observables import mean_photons
from qdcel.phonon import PhononBathParams, build_tables, compute_rates
from qdcel.solvers import steady_state

phis = np.linspace(-np.pi, np.pi, 145)


def curves(p, coeffs, rho):
    r1, r2 = np.sqrt(mean_photons(rho))
    dd = [drift_diffusion(coeffs, r1, r2, f, 0.0, p) for f in phis]
    return np.array([d.D_phiphi for d in dd]) / p.g1, np.array([d.D_PhiPhi for d in dd]) / p.g1


p = SystemParams(cutoff1=3, cutoff2=3)
_, coeffs = solve_orders(p)
Dpp, DPP = curves(p, coeffs, steady_state(build_no_phonon(p)).rho)
print(f"no phonons: min/max D_phiphi {Dpp.min() / Dpp.max():.1e}, "
      f"D_PhiPhi {DPP.min() / DPP.max():.1e}")

for T in (5.0, 10.0, 20.0):
    p = SystemParams(cutoff1=3, cutoff2=3, bath=PhononBathParams(temperature=T))
    tb = build_tables(p.bath)
    _, coeffs = with_phonon_variant(p, compute_rates(p, tb), tb.mean_B)
    Dpp, DPP = curves(p, coeffs, steady_state(build_full_polaron(p, tb)).rho)
    print(f"{T:4.0f} K: floor {Dpp.min() / Dpp.max():.3f}, "
          f"dip widths {dip_width(phis, Dpp):.3f} / {dip_width(phis, DPP):.3f} rad")
