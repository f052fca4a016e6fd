"""Two-mode entanglement witness (Delta u)^2 + (Delta v)^2 versus drive strength.

Values below 2 certify entanglement.  Uses the full polaron master equation
at photon cutoff 3 to keep the run short (the acceptance sweep uses 4).

Run:  python demos/entanglement.py        (a few minutes)
"""
import numpy as np

from qdcel.cli import figure_config, run_config

cfg = figure_config("fig8", ["system.cutoff1=3", "system.cutoff2=3", "sweep.points=7",
                             "sweep.temperatures=0, 20"])
table = run_config(cfg)
for T in (0.0, 20.0):
    rows = table.column("temperature") == T
    print(f"T = {T:g} K")
    for eta, w, n in zip(table.column("eta")[rows], table.column("dgcz")[rows],
                         table.column("n1")[rows]):
        print(f"  eta = {eta:5.2f} g1   witness {w:.4f}   n1 {n:.3f}")
