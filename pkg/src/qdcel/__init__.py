"""
qdcel: steady states, phase noise and entanglement of a driven quantum dot
in a bimodal cavity with exciton-phonon coupling.

Modules
-------
operators       Fock/dot operators and superoperator algebra.
phonon          Phonon bath correlation functions, half-Fourier tables and rates.
liouvillian     Generators of the no-phonon, simplified and full polaron master equations.
solvers         Steady state, time evolution and cutoff control.
observables     Photon statistics, phase quadratures, dressed states, entanglement witness.
fokker_planck   Phase drift and diffusion coefficients.
rate_equations  Photon-number flows and excess emission rates.
cli             Configuration, sweeps and the ``qdcel`` command.
"""
__version__ = "0.1.0"
