import math

import numpy as np
import pytest
from scipy import integrate

from magbose.errors import DomainError
from magbose.kernels import (
    KernelQuery, diagonal_density, diagonal_density_domega, kernel_1d_dirichlet,
    kernel_free_3d, kernel_magnetic_free, magnetic_phase, trace_asymptote_check,
)
from magbose.spectrum import GridSpec, get_spectrum


def free_1d(x, xp, beta):
    return math.exp(-((x - xp) ** 2) / (2 * beta)) / math.sqrt(2 * math.pi * beta)


def test_1d_wall():
    assert kernel_1d_dirichlet(2.0 - 1e-8, 0.3, 1.0, 4.0) < 1e-6


def test_1d_free_limit():
    val = kernel_1d_dirichlet(0.0, 0.0, 0.1, 8.0)
    assert val == pytest.approx((2 * math.pi * 0.1) ** -0.5, rel=1e-12)


def test_1d_symmetry():
    rng = np.random.default_rng(3)
    for _ in range(20):
        x, xp = rng.uniform(-1.9, 1.9, 2)
        b = rng.uniform(0.1, 4.0)
        assert kernel_1d_dirichlet(x, xp, b, 4.0) == pytest.approx(kernel_1d_dirichlet(xp, x, b, 4.0), abs=1e-15)


def test_1d_outside_rejected():
    with pytest.raises(DomainError):
        kernel_1d_dirichlet(2.0, 0.0, 1.0, 4.0)


def test_1d_semigroup():
    rng = np.random.default_rng(11)
    L = 4.0
    for _ in range(5):
        xa, xb = rng.uniform(-1.8, 1.8, 2)
        b1, b2 = rng.uniform(0.2, 1.5, 2)
        lhs = integrate.quad(lambda y: kernel_1d_dirichlet(xa, y, b1, L) * kernel_1d_dirichlet(y, xb, b2, L),
                             -L / 2, L / 2, epsabs=1e-14, epsrel=1e-12, limit=200)[0]
        assert lhs == pytest.approx(kernel_1d_dirichlet(xa, xb, b1 + b2, L), rel=1e-8)


def test_1d_positive_and_dominated():
    rng = np.random.default_rng(5)
    L = 3.0
    for _ in range(300):
        x, xp = rng.uniform(-1.49, 1.49, 2)
        b = rng.uniform(0.05, 5.0)
        v = kernel_1d_dirichlet(x, xp, b, L)
        assert 0.0 <= v <= free_1d(x, xp, b) * (1 + 1e-12)


def test_1d_spectral_oracle():
    # eigenfunction expansion on (-L/2, L/2): sum_m (2/L) sin(k(x+L/2)) sin(k(x'+L/2)) e^{-beta k^2/2}
    L, x, xp, b = 2.0, 0.3, -0.4, 0.5
    m = np.arange(1, 200)
    k = m * math.pi / L
    ref = np.sum(2 / L * np.sin(k * (x + L / 2)) * np.sin(k * (xp + L / 2)) * np.exp(-b * k**2 / 2))
    assert kernel_1d_dirichlet(x, xp, b, L) == pytest.approx(ref, rel=1e-12)


def test_1d_large_box_limit():
    gaps = [abs(kernel_1d_dirichlet(0.2, -0.1, 2.0, L) - free_1d(0.2, -0.1, 2.0)) for L in (2, 4, 8, 16)]
    assert np.all(np.diff(gaps) < 0)
    assert gaps[-1] < 1e-12


def test_free_3d_value():
    q = KernelQuery((0.1, 0.2, 0.3), (0.1, 0.2, 0.3), 2 * math.pi)
    assert kernel_free_3d(q) == pytest.approx((2 * math.pi) ** -3, rel=1e-15)


def test_free_3d_translation():
    rng = np.random.default_rng(0)
    x, xp = rng.normal(size=3), rng.normal(size=3)
    base = kernel_free_3d(KernelQuery(x, xp, 0.8))
    for _ in range(10):
        a = rng.normal(size=3) * 5
        assert kernel_free_3d(KernelQuery(x + a, xp + a, 0.8)) == pytest.approx(base, rel=1e-12)


def test_free_3d_normalization():
    beta = 0.7
    # radial integral of the isotropic kernel over a ball of radius 12 sqrt(beta)
    f = lambda r: 4 * math.pi * r**2 * kernel_free_3d(KernelQuery((r, 0, 0), (0, 0, 0), beta))
    total = integrate.quad(f, 0, 12 * math.sqrt(beta), epsabs=1e-14, epsrel=1e-12)[0]
    assert total == pytest.approx(1.0, abs=1e-8)


def test_magnetic_zero_field_limit():
    q0 = KernelQuery((0.3, -0.2, 0.5), (-0.4, 0.1, 0.0), 1.3)
    q = KernelQuery(q0.x, q0.xp, 1.3, 1e-8)
    assert abs(kernel_magnetic_free(q) - kernel_free_3d(q0)) <= 1e-10


def test_magnetic_negative_field():
    with pytest.raises(DomainError):
        kernel_magnetic_free(KernelQuery((0, 0, 0), (0, 0, 0), 1.0, -1.0))


def test_magnetic_diagonal_is_density():
    rng = np.random.default_rng(9)
    for _ in range(20):
        x = rng.uniform(-5, 5, 3)
        b, w = rng.uniform(0.1, 3), rng.uniform(0.01, 4)
        val = kernel_magnetic_free(KernelQuery(x, x, b, w))
        assert abs(val - diagonal_density(b, w)) <= 1e-14 * diagonal_density(b, w)


def test_magnetic_diagonal_closed_form():
    b, w = 1.7, 0.9
    s = w * b / 2
    q = KernelQuery((1, 2, 3), (1, 2, 3), b, w)
    assert kernel_magnetic_free(q).real == pytest.approx((2 * math.pi * b) ** -1.5 * s / math.sinh(s), rel=1e-14)


def test_magnetic_diamagnetic():
    rng = np.random.default_rng(21)
    for _ in range(100):
        q = KernelQuery(rng.uniform(-3, 3, 3), rng.uniform(-3, 3, 3), rng.uniform(0.1, 3), rng.uniform(0, 3))
        assert abs(kernel_magnetic_free(q)) <= kernel_free_3d(q) * (1 + 1e-14)


def test_phase_antisymmetry():
    rng = np.random.default_rng(2)
    for _ in range(20):
        x, xp = rng.normal(size=3), rng.normal(size=3)
        assert magnetic_phase(x, xp) == -magnetic_phase(xp, x)


def test_magnetic_modulus_gauge_independent():
    # a gauge change multiplies the kernel by e^{i(chi(x) - chi(x'))}; shifting the
    # origin is such a change, so the modulus must be translation invariant
    rng = np.random.default_rng(4)
    x, xp = rng.normal(size=3), rng.normal(size=3)
    base = abs(kernel_magnetic_free(KernelQuery(x, xp, 1.0, 1.5)))
    for _ in range(5):
        a = rng.normal(size=3) * 3
        assert abs(kernel_magnetic_free(KernelQuery(x + a, xp + a, 1.0, 1.5))) == pytest.approx(base, rel=1e-12)


def test_diagonal_density_examples():
    assert diagonal_density(1.0, 1e-12) == pytest.approx((2 * math.pi) ** -1.5, rel=1e-14)
    assert diagonal_density(1.0, 0.0) == pytest.approx((2 * math.pi) ** -1.5, rel=1e-15)
    assert diagonal_density(1.0, 2.0) == pytest.approx((2 * math.pi) ** -1.5 / math.sinh(1.0), rel=1e-14)


def test_diagonal_density_decreasing():
    ws = np.linspace(0.0, 10.0, 50)
    g = [diagonal_density(1.3, w) for w in ws]
    assert np.all(np.diff(g) < 0) and g[-1] > 0


def test_diagonal_derivative():
    h = 1e-6
    fd = (diagonal_density(1.0, 1.0 + h) - diagonal_density(1.0, 1.0 - h)) / (2 * h)
    assert diagonal_density_domega(1.0, 1.0) == pytest.approx(fd, rel=1e-8)
    assert abs(diagonal_density_domega(1.0, 1e-9)) < 1e-9
    assert diagonal_density_domega(1.0, 0.0) == 0.0
    assert diagonal_density_domega(2.0, 0.5) < 0


def test_trace_asymptote_single_box():
    ta = trace_asymptote_check(get_spectrum(12.0, 1.0, GridSpec(64)), 1.0)
    assert ta.rhs == pytest.approx(diagonal_density(1.0, 1.0))
    assert abs(ta.lhs - ta.rhs) < 0.5 * ta.rhs
    assert ta.scaled_gap == pytest.approx(12.0 * abs(ta.lhs - ta.rhs))


@pytest.mark.slow
def test_trace_asymptote_sweep():
    gaps = [trace_asymptote_check(get_spectrum(L, 1.0, GridSpec(48)), 1.0).scaled_gap for L in (6, 8, 10, 12)]
    assert max(gaps) / min(gaps) < 10


def test_trace_asymptote_zero_field_rhs():
    spec = get_spectrum(6.0, 1e-9, GridSpec(16))
    assert trace_asymptote_check(spec, 2.0).rhs == pytest.approx((4 * math.pi) ** -1.5, rel=1e-12)
