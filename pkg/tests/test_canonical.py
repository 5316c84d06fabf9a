import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from magbose import canonical, grand
from magbose.errors import DomainError, QuadratureError
from magbose.spectrum import GasParams, GridSpec, Spectrum, get_spectrum

BETA = 1.0


def brute_log_z(levels, beta, N):
    """log Z_N by enumerating bosonic occupation multisets."""
    total = sum(math.exp(-beta * sum(levels[i] for i in occ))
                for occ in itertools.combinations_with_replacement(range(len(levels)), N))
    return math.log(total)


def single_mode(e2=0.6, L=3.0):
    return Spectrum([e2], L, 1.0, e1d_count=1)


def toy(omega, L=4.0):
    return Spectrum([0.5, 0.9, 1.4], L, omega, e1d_count=2)


def test_recursion_single_mode():
    s = single_mode()
    E = s.ground
    logz = canonical.partition_recursion(s, BETA, 8)
    assert np.allclose(logz, -np.arange(9) * BETA * E, atol=1e-13)


def test_recursion_two_modes():
    E1, E2, L = 0.4, 1.3, 5.0
    s = Spectrum([E1 - math.pi**2 / (2 * L**2), E2 - math.pi**2 / (2 * L**2)], L, 1.0, e1d_count=1)
    ref = math.exp(-2 * BETA * E1) + math.exp(-BETA * (E1 + E2)) + math.exp(-2 * BETA * E2)
    assert canonical.partition_recursion(s, BETA, 2)[2] == pytest.approx(math.log(ref), abs=1e-14)


def test_recursion_ground_state_bound(spec_l6):
    logz = canonical.partition_recursion(spec_l6, BETA, 20)
    n = np.arange(21)
    assert logz[0] == 0.0
    assert np.all(logz >= -n * BETA * spec_l6.ground - 1e-12)


def test_recursion_rejects_zero():
    with pytest.raises(DomainError):
        canonical.partition_recursion(single_mode(), BETA, 0)


@settings(max_examples=40, deadline=None)
@given(e2=st.lists(st.floats(0.05, 3.0), min_size=1, max_size=3),
       m1=st.integers(1, 2), N=st.integers(1, 5), beta=st.floats(0.3, 2.0))
def test_recursion_and_contour_vs_enumeration(e2, m1, N, beta):
    s = Spectrum(e2, 3.0, 1.0, e1d_count=m1)
    lev = list(s.levels(beta))
    ref = brute_log_z(lev, beta, N)
    assert canonical.partition_recursion(s, beta, N)[N] == pytest.approx(ref, rel=1e-10, abs=1e-12)
    assert canonical.partition_contour(s, beta, N).logZ == pytest.approx(ref, rel=1e-9, abs=1e-10)


def test_contour_single_mode():
    s = single_mode()
    res = canonical.partition_contour(s, BETA, 5)
    assert abs(res.logZ - canonical.partition_recursion(s, BETA, 5)[5]) < 1e-10


@pytest.mark.parametrize("N", [5, 11, 27])
def test_contour_matches_recursion(N):
    s = get_spectrum(6.0, 1.0, GridSpec(40))
    res = canonical.partition_contour(s, BETA, N)
    rec = canonical.partition_recursion(s, BETA, N)[N]
    assert abs(res.logZ - rec) <= 1e-8 * abs(rec)
    assert res.rel_residual_imag < canonical.IMAG_RESIDUAL_TOL
    assert res.A_L > 0 and res.quad_points == canonical.quad_points_min(N)


def test_contour_large_n(spec_l6):
    N = 60
    rec = canonical.partition_recursion(spec_l6, BETA, N)[N]
    assert abs(canonical.partition_contour(spec_l6, BETA, N).logZ - rec) <= 1e-8 * abs(rec)


def test_quadrature_doubling(spec_l6):
    a = canonical.partition_contour(spec_l6, BETA, 11)
    b = canonical.partition_contour(spec_l6, BETA, 11, M=2 * a.quad_points)
    assert abs(a.logZ - b.logZ) < 1e-10


def test_quadrature_too_coarse(spec_l6):
    with pytest.raises(DomainError):
        canonical.partition_contour(spec_l6, BETA, 27, M=8)


def test_imaginary_residual_guard(monkeypatch, spec_l6):
    # a complex-valued log Xi that breaks conjugate symmetry must trip the reality check
    real = grand.log_xi
    monkeypatch.setattr(grand, "log_xi", lambda s, b, z: real(s, b, z) + 1e-3j * np.sign(np.angle(z) + 0.5))
    with pytest.raises(QuadratureError):
        canonical.partition_contour(spec_l6, BETA, 11)


def test_odd_quadrature_rejected(spec_l6):
    with pytest.raises(DomainError):
        canonical.partition_contour(spec_l6, BETA, 11, M=513)


def test_quad_points_rule():
    assert canonical.quad_points_min(1) == 512
    assert canonical.quad_points_min(100) == 640
    assert canonical.quad_points_min(101) == 704


def test_saddle_identities(spec_l6):
    N = 11
    d = canonical.saddle_diagnostics(spec_l6, BETA, N)
    rho = N / 6.0**3
    assert d.s_at_0 == 0.0
    assert abs(d.s_prime_0 - rho / BETA) <= 1e-6 * rho / BETA
    assert abs(d.s_second_0) <= 1e-6
    alt = -d.x_L / BETA * grand.density_finite_dx(spec_l6, BETA, d.x_L)
    assert d.p_tilde_2nd < 0
    assert abs(d.p_tilde_2nd - alt) <= 1e-8 * abs(alt)
    assert d.phi_L == pytest.approx(N ** (-0.5 + 0.1))
    assert d.A_inf > 0


def test_p_tilde_second_matches_fd(spec_l6):
    x, h = 0.7, 1e-3
    p = canonical.p_tilde(spec_l6, BETA, x, [-h, 0.0, h])
    fd = (p[0] - 2 * p[1] + p[2]) / h**2
    assert fd == pytest.approx(canonical.p_tilde_second(spec_l6, BETA, x), rel=1e-5)


def test_p_tilde_decreasing(spec_l6):
    x = grand.fugacity_finite(spec_l6, BETA, 11 / 216)
    p = canonical.p_tilde(spec_l6, BETA, x, np.linspace(0, math.pi, 50))
    assert np.all(np.diff(p) < 0)


def test_window_suppression(spec_l6):
    d = canonical.saddle_diagnostics(spec_l6, BETA, 11)
    phis = np.concatenate([np.linspace(d.phi_L, math.pi, 200), -np.linspace(d.phi_L, math.pi, 200)])
    excess = canonical.p_tilde(spec_l6, BETA, d.x_L, phis) - grand.pressure_finite(spec_l6, BETA, d.x_L).real
    assert np.max(excess) < 0


def test_delta_range(spec_l6):
    with pytest.raises(DomainError):
        canonical.saddle_diagnostics(spec_l6, BETA, 11, delta=0.5)


def test_a_infinite_gaussian_width():
    # Gaussian peak of width (-N beta p~''/rho)^{-1/2} integrates to sqrt(N) * that width / sqrt(2 pi)
    rho, omega = 0.05, 1.0
    x = grand.fugacity_infinite(BETA, rho, omega)
    p2 = -x / BETA * grand.density_infinite_dx(BETA, x, omega)
    assert canonical.a_infinite(BETA, rho, omega) == pytest.approx(1 / math.sqrt(2 * math.pi * BETA * -p2 / rho))


def test_single_mode_free_energy():
    s = single_mode()
    f = canonical.reduced_free_energy(s, BETA, 3)
    assert f == pytest.approx(3 * s.ground / s.L**3, rel=1e-10)


def test_free_energy_decomposition(spec_l6):
    f, dec = canonical.free_energy_decomposition(spec_l6, BETA, 11)
    assert abs(f - dec) < 1e-10


def test_free_energy_matches_recursion(spec_l6):
    f = canonical.reduced_free_energy(spec_l6, BETA, 11)
    rec = canonical.partition_recursion(spec_l6, BETA, 11)[11]
    assert f == pytest.approx(-rec / (BETA * 216.0), rel=1e-8)


@pytest.mark.slow
def test_free_energy_gap_shrinks(sweep_spectra):
    gaps = []
    for L, (s, _, _) in sweep_spectra.items():
        N = GasParams(BETA, 0.05, 1.0, L).n_particles
        x = grand.fugacity_finite(s, BETA, N / L**3)
        ft = grand.legendre_free_energy(grand.pressure_finite(s, BETA, x), x, BETA, N / L**3)
        gaps.append(abs(canonical.reduced_free_energy(s, BETA, N) - ft))
    assert np.all(np.diff(gaps) < 0)


@pytest.mark.slow
def test_saddle_factor_converges(sweep_spectra):
    gaps = []
    for L, (s, _, _) in sweep_spectra.items():
        N = GasParams(BETA, 0.05, 1.0, L).n_particles
        A_L = canonical.partition_contour(s, BETA, N).A_L
        gaps.append(abs(A_L - canonical.a_infinite(BETA, N / L**3, 1.0)))
    assert np.all(np.diff(gaps) < 0)


def test_toy_magnetization_vanishes():
    p = GasParams(BETA, 12 / 64, 1.0, 4.0)
    mag = canonical.canonical_magnetization(p, h_omega=1e-3, spectra=(toy(1.0), toy(0.999), toy(1.001)))
    assert mag.m_L == 0 and mag.m_tilde_L == 0 and mag.gap == 0
    assert mag.N == 12


def test_magnetization_needs_two_particles():
    p = GasParams(BETA, 0.001, 1.0, 4.0)
    with pytest.raises(DomainError):
        canonical.canonical_magnetization(p, spectra=(toy(1.0), toy(0.999), toy(1.001)))


def test_gap_below_grand_value(sweep_spectra):
    p = GasParams(BETA, 0.05, 1.0, 8.0)
    mag = canonical.canonical_magnetization(p, GridSpec(48), spectra=sweep_spectra[8.0])
    assert mag.gap < abs(mag.m_tilde_L)
    assert mag.rho_eff == pytest.approx(26 / 512)


def test_canonical_state(spec_l6):
    st_ = canonical.canonical_state(GasParams(BETA, 0.05, 1.0, 6.0), GridSpec(32))
    assert st_.N == 11 and st_.A_L > 0
    assert st_.rel_residual_imag < canonical.IMAG_RESIDUAL_TOL
    assert st_.f == pytest.approx(-st_.logZ / 216.0)
