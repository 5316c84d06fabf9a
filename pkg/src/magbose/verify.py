"""Runtime invariant suite behind ``magbose verify``.

Every check reports a measured error against a tolerance; the run fails if
any measured error exceeds ``tolerance * tolerance_scale``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from . import canonical, grand, kernels, specfun
from .kernels import KernelQuery
from .spectrum import GasParams, Gauge, GridSpec, get_spectrum, tol_disc, trace_heat


@dataclass(frozen=True)
class Check:
    name: str
    measured: float
    tolerance: float
    passed: bool

    def line(self):
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag}  {self.name:<44s} measured={self.measured:.3e}  tolerance={self.tolerance:.3e}"


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def _specfun_checks(rng):
    out = {}
    worst = 0.0
    for _ in range(200):
        r = rng.uniform(0.3, 0.7)
        z = r * np.exp(1j * rng.uniform(-math.pi, math.pi))
        s = rng.choice([0.5, 1.5, 2.5])
        worst = max(worst, _rel(specfun.bose_g_integral(s, z), specfun.bose_g_series(s, z)))
    out["specfun: series/integral agreement"] = (worst, 1e-11)
    worst = 0.0
    for _ in range(50):
        z = rng.uniform(0.05, 0.95) * np.exp(1j * rng.uniform(-3, 3))
        for s in (1.5, 2.5):
            worst = max(worst, abs(z * specfun.bose_g_derivative(s, z) - specfun.bose_g(s - 1, z)))
    out["specfun: derivative identity"] = (worst, 1e-11)
    h = 1e-6
    fd = (specfun.bose_g(1.5, 0.2 + h) - specfun.bose_g(1.5, 0.2 - h)) / (2 * h)
    out["specfun: derivative vs finite difference"] = (_rel(specfun.bose_g_derivative(1.5, 0.2), fd), 1e-8)
    xs = np.linspace(0.01, 0.99, 100)
    bad = sum(int(np.any(np.diff([specfun.bose_g_real(s, x) for x in xs]) <= 0)) for s in (0.5, 1.5))
    out["specfun: monotone on (0,1)"] = (bad, 0.0)
    return out


def run_checks(cfg, seed=12345):
    """Evaluate the suite at the first box side of ``cfg``; returns measured/tolerance pairs."""
    rng = np.random.default_rng(seed)
    beta, omega, h = cfg.beta, cfg.omega, cfg.step
    L = cfg.L_values[0] if cfg.L_values else 6.0
    grid = cfg.grid
    res = _specfun_checks(rng)

    sc = get_spectrum(L, omega, grid)
    sm = get_spectrum(L, omega - h, grid)
    sp = get_spectrum(L, omega + h, grid)
    other = Gauge.LANDAU if grid.gauge is Gauge.SYMMETRIC else Gauge.SYMMETRIC
    s_other = get_spectrum(L, omega, GridSpec(grid.n, other))
    res["spectrum: gauge invariance"] = (float(np.max(np.abs(sc.e2d - s_other.e2d) / sc.e2d)), 1e-9)
    res["spectrum: min-max bottom >= omega/2"] = (max(0.0, omega / 2 - sc.e2d[0]), tol_disc(omega, grid.n))
    worst = max(trace_heat(sc, t) / L**3 * (2 * math.pi * t) ** 1.5 - 1.0 for t in (0.5, 1.0, 2.0))
    res["spectrum: diamagnetic trace bound"] = (max(0.0, worst), 0.0)

    viol = 0.0
    for _ in range(100):
        x, xp = rng.uniform(-3, 3, 3), rng.uniform(-3, 3, 3)
        q = KernelQuery(x, xp, rng.uniform(0.1, 3.0), rng.uniform(0.0, 3.0))
        viol = max(viol, abs(kernels.kernel_magnetic_free(q)) - kernels.kernel_free_3d(q))
    res["kernels: magnetic diamagnetic inequality"] = (max(0.0, viol), 0.0)
    res["kernels: 1D Dirichlet free limit"] = (
        _rel(kernels.kernel_1d_dirichlet(0.0, 0.0, 0.1, 8.0), (2 * math.pi * 0.1) ** -0.5), 1e-12)
    b1, b2, Lk, xa, xb = 0.7, 1.1, 4.0, 0.3, -0.8
    lhs = integrate.quad(lambda y: kernels.kernel_1d_dirichlet(xa, y, b1, Lk)
                         * kernels.kernel_1d_dirichlet(y, xb, b2, Lk),
                         -Lk / 2, Lk / 2, epsabs=1e-14, epsrel=1e-12)[0]
    res["kernels: 1D semigroup property"] = (_rel(lhs, kernels.kernel_1d_dirichlet(xa, xb, b1 + b2, Lk)), 1e-8)
    hd = 1e-6
    fd = (kernels.diagonal_density(1.0, 1.0 + hd) - kernels.diagonal_density(1.0, 1.0 - hd)) / (2 * hd)
    res["kernels: dg/domega vs finite difference"] = (_rel(kernels.diagonal_density_domega(1.0, 1.0), fd), 1e-8)

    z = 0.3 + 0.2j
    res["grand: conjugation symmetry of P_L"] = (
        abs(grand.pressure_finite(sc, beta, np.conj(z)) - np.conj(grand.pressure_finite(sc, beta, z))), 1e-15)
    z = 0.5
    hz = 1e-7 * z
    fd = beta * z * (grand.pressure_finite(sc, beta, z + hz) - grand.pressure_finite(sc, beta, z - hz)) / (2 * hz)
    res["grand: rho_L = beta z dP_L/dz"] = (_rel(fd.real, grand.density_finite(sc, beta, z).real), 1e-5)
    fd = beta * z * (grand.pressure_infinite(beta, z + hz, omega)
                     - grand.pressure_infinite(beta, z - hz, omega)) / (2 * hz)
    res["grand: rho_inf = beta z dP_inf/dz"] = (_rel(fd.real, grand.density_infinite(beta, z, omega).real), 1e-5)
    hw = 1e-5
    fd = -(grand.pressure_infinite(beta, z, omega + hw) - grand.pressure_infinite(beta, z, omega - hw)) / (2 * hw)
    res["grand: Gamma_inf = -dP_inf/domega"] = (
        _rel(grand.magnetization_grand_infinite(beta, z, omega).real, fd.real), 1e-6)
    xs = np.linspace(0.01, 0.99, 20) * grand.x_max_finite(sc, beta)
    bad = int(np.any(np.diff(grand.density_finite(sc, beta, xs).real) <= 0))
    res["grand: rho_L increasing in x"] = (bad, 0.0)
    xm = grand.x_max_infinite(beta, omega)
    dens = [grand.density_infinite(beta, (1 - 10.0**-k) * xm, omega).real for k in range(2, 9)]
    bad = int(np.any(np.diff(dens) <= 0)) + int(dens[-1] <= 1e3 * dens[0])
    res["grand: no-condensation divergence"] = (bad, 0.0)
    worst = 0.0
    for r in (0.01, 0.1, 1.0):
        x = grand.fugacity_finite(sc, beta, r)
        worst = max(worst, _rel(grand.density_finite(sc, beta, x).real, r))
        x = grand.fugacity_infinite(beta, r, omega)
        worst = max(worst, _rel(grand.density_infinite(beta, x, omega).real, r))
    res["grand: fugacity round trip"] = (worst, 1e-10)

    N = GasParams(beta, cfg.rho, omega, L).n_particles
    N = max(N, 2)
    rec = canonical.partition_recursion(sc, beta, N)[-1]
    con = canonical.partition_contour(sc, beta, N)
    res["canonical: contour vs recursion log Z"] = (_rel(con.logZ, rec), 1e-8)
    con2 = canonical.partition_contour(sc, beta, N, M=2 * con.quad_points)
    res["canonical: quadrature doubling"] = (abs(con2.logZ - con.logZ), 1e-10)
    res["canonical: imaginary residual"] = (con.rel_residual_imag, canonical.IMAG_RESIDUAL_TOL)
    diag = canonical.saddle_diagnostics(sc, beta, N, cfg.delta)
    rho_eff = N / L**3
    res["canonical: s_L(0) = 0"] = (abs(diag.s_at_0), 0.0)
    res["canonical: s_L'(0) = rho/beta"] = (_rel(diag.s_prime_0, rho_eff / beta), 1e-6)
    res["canonical: s_L''(0) = 0"] = (abs(diag.s_second_0), 1e-6)
    alt = -diag.x_L / beta * grand.density_finite_dx(sc, beta, diag.x_L)
    res["canonical: p~''(0) identity"] = (_rel(diag.p_tilde_2nd, alt), 1e-8)
    phis = np.linspace(0, math.pi, 50)
    bad = int(np.any(np.diff(canonical.p_tilde(sc, beta, diag.x_L, phis)) >= 0))
    res["canonical: p~ decreasing on [0, pi]"] = (bad, 0.0)
    phis = np.linspace(diag.phi_L, math.pi, 200)
    worst = float(np.max(canonical.p_tilde(sc, beta, diag.x_L, phis))
                  - grand.pressure_finite(sc, beta, diag.x_L).real)
    res["canonical: window suppression"] = (max(0.0, worst), 0.0)
    f_L, f_dec = canonical.free_energy_decomposition(sc, beta, N)
    res["canonical: free-energy decomposition"] = (abs(f_L - f_dec), 1e-10)
    mag = canonical.canonical_magnetization(GasParams(beta, N / L**3, omega, L),
                                            grid, h, spectra=(sc, sm, sp))
    res["canonical: |m_L - m~_L| / |m~_L| < 1"] = (mag.gap / abs(mag.m_tilde_L), 1.0)
    L_big = max(cfg.L_values) if cfg.L_values else L
    ta = kernels.trace_asymptote_check(get_spectrum(L_big, omega, grid), beta)
    res["kernels: trace asymptote sanity"] = (abs(ta.lhs - ta.rhs) / ta.rhs, 0.5)
    return res


def verify(cfg, tolerance_scale=1.0, seed=12345):
    checks = []
    for name, (measured, tol) in run_checks(cfg, seed).items():
        tol_eff = tol * tolerance_scale
        checks.append(Check(name, float(measured), tol_eff, bool(float(measured) <= tol_eff)))
    return checks


def report(checks):
    n_pass = sum(c.passed for c in checks)
    lines = [c.line() for c in checks]
    lines.append(f"{n_pass}/{len(checks)} checks passed")
    return "\n".join(lines)
