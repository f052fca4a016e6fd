import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from qdcel.liouvillian import SystemParams
from qdcel.phonon import (HBAR, PhononBathParams, build_tables, compute_rates, dump_kernel_csv,
                          dump_phi_csv, filon_transform, green_functions,
                          half_fourier_transform, mean_displacement, phi_of_tau, phi_transform,
                          spectral_density)
from qdcel.phonon import _occupation_weight, _omega_upper, _power_tail_moment

# Reference values from an independent 30-digit mpmath quadrature of the
# correlation integral (frozen).
PHI0 = {5.0: 0.204241054593802, 10.0: 0.329537733119096, 20.0: 0.612544802241069}
MEAN_B = {5.0: 0.902920718516807, 10.0: 0.848089703326996, 20.0: 0.73618605423415}
PHI_TAU_5K = {0.5: 0.132138260262802 - 0.0984465818361755j,
              1.0: 0.0263988085518017 - 0.0828527325476994j,
              3.0: -0.000177055442174694 - 2.4298206287634e-5j}
PHI_TAU_0K = {1.0: -0.0191528246404951 - 0.0828527325476994j}


@pytest.mark.parametrize("temperature", sorted(PHI0))
def test_phi0_and_mean_displacement_oracle(temperature):
    p = PhononBathParams(temperature=temperature)
    assert abs(phi_of_tau(0.0, p) - PHI0[temperature]) < 1e-10
    assert abs(mean_displacement(p) - MEAN_B[temperature]) < 1e-10


@pytest.mark.parametrize("temperature,expected", [(5.0, 0.90), (10.0, 0.84), (20.0, 0.73)])
def test_mean_displacement_published_values(temperature, expected):
    assert abs(mean_displacement(PhononBathParams(temperature=temperature)) - expected) < 0.01


def test_phi_of_tau_oracle():
    p5 = PhononBathParams(temperature=5.0)
    taus = np.array(sorted(PHI_TAU_5K))
    got = phi_of_tau(taus, p5)
    assert np.allclose(got, [PHI_TAU_5K[t] for t in taus], atol=1e-10, rtol=0)
    p0 = PhononBathParams(temperature=0.0)
    assert abs(phi_of_tau(1.0, p0) - PHI_TAU_0K[1.0]) < 1e-10


def test_phi_imaginary_part_is_temperature_independent():
    a = phi_of_tau(0.7, PhononBathParams(temperature=2.0))
    b = phi_of_tau(0.7, PhononBathParams(temperature=30.0))
    assert abs(a.imag - b.imag) < 1e-12


def test_spectral_density():
    p = PhononBathParams()
    w = np.array([0.0, 0.5, 1.0, 2.0])
    expected = p.alpha_p / (2 * np.pi * HBAR) ** 2 * w**3 * np.exp(-w**2 / 2)
    assert np.allclose(spectral_density(w, p), expected)
    with pytest.raises(ValueError):
        spectral_density(-1.0, p)


@pytest.mark.parametrize("kw", [dict(alpha_p=-1), dict(omega_b=0), dict(temperature=-0.1)])
def test_bath_validation(kw):
    with pytest.raises(ValueError):
        PhononBathParams(**kw)


def test_negative_tau_rejected():
    with pytest.raises(ValueError):
        phi_of_tau(-1.0, PhononBathParams())


def test_half_fourier_closed_form():
    # int_0^T exp(-a tau) exp(i w tau) dtau = (1 - exp((-a + i w) T)) / (a - i w)
    a, tmax = 2.0, 20.0
    tau = np.linspace(0, tmax, 8001)
    delta = np.array([-3.0, -0.4, 0.0, 0.25, 2.0])
    w = delta / HBAR
    exact = (1 - np.exp((-a + 1j * w) * tmax)) / (a - 1j * w)
    got, err = half_fourier_transform(np.exp(-a * tau), tau, delta, return_error=True)
    assert np.allclose(got, exact, rtol=1e-9, atol=1e-12)
    assert np.all(np.abs(err) < 1e-8)


def test_half_fourier_rejects_even_grid():
    tau = np.linspace(0, 1, 10)
    with pytest.raises(ValueError):
        half_fourier_transform(np.ones(10), tau, 0.0)


@pytest.mark.parametrize("delta", [-2.0, -1e-3, 0.0, 1e-9, 0.7, 40.0])
def test_filon_exact_for_linear_values(delta):
    tmax, b = 5.0, 0.3
    tau = np.linspace(0.0, tmax, 11)
    w = delta / HBAR
    if abs(w * tmax) < 1e-4:
        # Taylor form; the closed form cancels catastrophically here
        exact = tmax + b * tmax**2 / 2 + 1j * w * (tmax**2 / 2 + b * tmax**3 / 3)
    else:
        e = np.exp(1j * w * tmax)
        exact = (e - 1) / (1j * w) + b * (tmax * e / (1j * w) + (e - 1) / w**2)
    assert abs(filon_transform(1 + b * tau, tau, delta) - exact) < 1e-12 * max(1.0, abs(exact))


@pytest.mark.parametrize("theta", [0.3, -2.0, 17.0, 150.0])
def test_power_tail_moment_against_fourier_quadrature(theta):
    re = integrate.quad(lambda x: x**-4, 1, np.inf, weight="cos", wvar=theta)[0]
    im = integrate.quad(lambda x: x**-4, 1, np.inf, weight="sin", wvar=theta)[0]
    assert abs(_power_tail_moment(theta) - (re + 1j * im)) < 1e-9


def test_power_tail_moment_small_argument():
    # 1/3 + i theta/2 - theta^2/2 + O(theta^3 log theta)
    for theta in (0.0, 1e-9, 1e-5, -1e-5):
        series = 1 / 3 + 0.5j * theta - theta**2 / 2
        assert abs(_power_tail_moment(theta) - series) < 1e-12


def _cauchy_reference(delta, params):
    # P int F(E)/(delta - E) dE by QUADPACK's Cauchy rule; at T = 0 split at
    # the kink E = 0, where F vanishes so neither half is singular there
    f = lambda x: _occupation_weight(x, params)
    lim = _omega_upper(params)
    opts = dict(epsabs=1e-14, epsrel=1e-12, limit=2000)
    pieces = ((-lim, 0.0), (0.0, lim)) if params.temperature == 0 else ((-lim, lim),)
    total = 0.0
    for a, b in pieces:
        if a < delta < b:
            total -= integrate.quad(f, a, b, weight="cauchy", wvar=delta, **opts)[0]
        else:
            total += integrate.quad(lambda x: f(x) / (delta - x), a, b, **opts)[0]
    return HBAR * (np.pi * f(delta) + 1j * total)


@pytest.mark.parametrize("temperature", [0.0, 0.1, 5.0, 20.0])
def test_phi_transform_against_cauchy_quadrature(temperature):
    p = PhononBathParams(temperature=temperature)
    deltas = np.array([-7.3, -0.75, -1e-4, 0.0, 1e-4, 0.3, 2.0, 25.0])
    got = phi_transform(deltas, p)
    for d, g in zip(deltas, got):
        assert abs(g - _cauchy_reference(d, p)) < 1e-12


def test_zero_temperature_split_transform():
    # Simpson head + Filon tail against plain Simpson over the whole grid
    tb = build_tables(PhononBathParams(temperature=0.0))
    assert tb._split_index() is not None
    deltas = np.linspace(-12.0, 12.0, 25)
    for kernel in ("g", "plus"):
        ref = half_fourier_transform(tb.remainder_values(kernel), tb.tau_grid, deltas)
        assert np.abs(tb._remainder_transform(kernel, deltas) - ref).max() < 1e-10


def test_table_transform_against_adaptive_quadrature(tables5):
    # independent route: adaptive oscillatory quadrature on phi(tau) itself
    p = tables5.params
    b2 = tables5.mean_B**2
    for delta in (-0.6, 0.35):
        w = delta / HBAR
        f_re = lambda t: b2 * np.real(np.expm1(phi_of_tau(t, p)))
        f_im = lambda t: b2 * np.imag(np.expm1(phi_of_tau(t, p)))
        opts = dict(limit=400, epsabs=1e-12)
        cc = integrate.quad(f_re, 0, 40, weight="cos", wvar=w, **opts)[0]
        ss = integrate.quad(f_re, 0, 40, weight="sin", wvar=w, **opts)[0]
        ci = integrate.quad(f_im, 0, 40, weight="cos", wvar=w, **opts)[0]
        si = integrate.quad(f_im, 0, 40, weight="sin", wvar=w, **opts)[0]
        ref = (cc - si) + 1j * (ss + ci)
        got = tables5.half_fourier("plus", delta)
        assert abs(got - ref) < 1e-7 * abs(ref)


def test_half_fourier_cache(tables5):
    d = np.array([0.1, 0.2])
    first = tables5.half_fourier("g", d)
    again = tables5.half_fourier("g", d)
    assert np.array_equal(first, again)
    with pytest.raises(ValueError):
        tables5.half_fourier("nope", d)


def test_green_functions_identities(tables5):
    gg, gu, gp, gm = green_functions(None, tables5)
    assert np.allclose(gg + gu, gp)
    assert np.allclose(gg - gu, gm)
    # the grid ends where the beyond-linear remainder is negligible
    tail = abs(tables5.phi[-1]) ** 2 * tables5.tau_grid[-1] / 6
    assert tail < 1e-10


def test_richardson_error_small(tables5):
    assert tables5.richardson_error("plus", np.linspace(-3, 3, 7)).max() < 1e-7


@settings(max_examples=15, deadline=None)
@given(st.sampled_from([0.0, 5.0, 20.0]),
       st.lists(st.floats(min_value=-3.0, max_value=3.0), min_size=1, max_size=8))
def test_cavity_feeding_rates_nonnegative(temperature, deltas):
    tb = _tables(temperature)
    full = 2 * tb.half_fourier("plus", np.asarray(deltas)).real
    assert np.all(full >= -1e-10)


_CACHE = {}


def _tables(temperature):
    if temperature not in _CACHE:
        _CACHE[temperature] = build_tables(PhononBathParams(temperature=temperature))
    return _CACHE[temperature]


def test_rates_nonnegative_on_detuning_grid(tables5):
    for d in np.linspace(-3, 3, 25):
        p = SystemParams(Delta_xp=d, Delta_yp=d, cutoff1=1, cutoff2=1)
        r = compute_rates(p, tables5)
        for name in ("Gamma_plus", "Gamma_minus", "Gamma_p_plus", "Gamma_p_minus"):
            v = getattr(r, name)
            assert np.all(np.isreal(v)) and np.all(v >= -1e-10), (d, name, v)


def test_rates_desk_values_and_pair_structure(tables5):
    r = compute_rates(SystemParams(cutoff1=1, cutoff2=1), tables5)
    # frozen regression values (meV) at the default parameters
    assert np.allclose(r.Gamma_plus, 0.00373, atol=2e-5)
    assert np.allclose(r.Gamma_minus, 0.00264, atol=2e-5)
    assert np.allclose(r.Gamma_p_plus, 0.00199, atol=2e-5)
    assert np.allclose(r.Gamma_p_minus, 0.0203, atol=2e-4)
    assert np.allclose(r.Gamma_x[1, 0], np.conj(r.Gamma_x[0, 1]))
    assert np.allclose(r.Lambda_pm[1, 0], np.conj(r.Lambda_pm[0, 1]))
    assert np.allclose(np.diag(r.Gamma_x).real, r.Gamma_plus)


def test_rates_vanish_without_phonons():
    p = SystemParams(bath=PhononBathParams(alpha_p=0.0), cutoff1=1, cutoff2=1)
    tb = build_tables(p.bath)
    assert tb.mean_B == 1.0
    r = compute_rates(p, tb)
    for v in r.as_dict().values():
        assert abs(v) < 1e-15


def test_zero_temperature_tables():
    tb = build_tables(PhononBathParams(temperature=0.0))
    assert 0.9 < tb.mean_B < 1.0
    # the 1/tau^2 tail of phi forces a long grid for the phi^2 remainder
    assert 40.0 < tb.tau_grid[-1] <= 400.0
    assert abs(tb.phi[-1]) ** 2 * tb.tau_grid[-1] / 6 < 1e-10


def test_csv_dumps(tmp_path, tables5):
    dump_phi_csv(tables5, tmp_path / "phi.csv")
    data = np.loadtxt(tmp_path / "phi.csv", delimiter=",", skiprows=1)
    assert np.allclose(data[:, 1] + 1j * data[:, 2], tables5.phi, atol=1e-12)
    dump_kernel_csv(tables5, "minus", [0.1, 0.2], tmp_path / "k.csv")
    k = np.loadtxt(tmp_path / "k.csv", delimiter=",", skiprows=1)
    assert k.shape == (2, 3)
