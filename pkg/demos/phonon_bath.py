"""Phonon bath: mean displacement, correlation function and scattering rates.

Run:  python demos/phonon_bath.py
"""
import numpy as np

from qdcel.liouvillian import SystemParams
from qdcel.phonon import PhononBathParams, build_tables, compute_rates, mean_displacement, phi_of_tau

print("T [K]   <B>      phi(0)")
for T in (0.0, 5.0, 10.0, 20.0):
    bath = PhononBathParams(temperature=T)
    print(f"{T:5.1f}  {mean_displacement(bath):.4f}   {phi_of_tau(0.0, bath).real:.4f}")

# phi(tau) decays within a few ps at 5 K; at T = 0 it keeps a slow 1/tau^2 tail
bath = PhononBathParams(temperature=5.0)
for tau in (0.0, 0.5, 1.0, 2.0, 4.0):
    print(f"phi({tau:3.1f} ps) = {phi_of_tau(tau, bath):.5f}")

tables = build_tables(bath)
print(f"tabulated on [0, {tables.tau_grid[-1]:.2f}] ps with {tables.tau_grid.size} points")

# rates at the desk point: cavity feeding dominates on the red side of the dressed dot
rates = compute_rates(SystemParams(), tables)
for name in ("Gamma_plus", "Gamma_minus", "Gamma_p_plus", "Gamma_p_minus"):
    v = np.asarray(getattr(rates, name))
    print(f"{name:14s} mode 1 {v[0]:.3e} meV   mode 2 {v[1]:.3e} meV")
