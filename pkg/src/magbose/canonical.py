"""Canonical ensemble: Z_N by contour quadrature and by exact recursion.

The contour route integrates Xi(z) z^{-N-1} over the circle |z| = x_L through
the real saddle, in the normalized form

    Z_N = exp(-beta f~_L L^3) N^{-1/2} A_L,
    A_L = sqrt(N)/(2 pi) int_{-pi}^{pi} exp{log Xi(x e^{i phi}) - log Xi(x) - i N phi} d phi,

so no exponent is ever taken relative to anything but the saddle value. The
trapezoid rule is spectrally accurate here because the integrand is periodic
and analytic in phi.

The recursion ``Z_n = (1/n) sum_k b_k Z_{n-k}``, ``b_k = tr exp(-k beta H)``,
is the independent oracle.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from . import grand
from .errors import DomainError, QuadratureError
from .spectrum import GridSpec, get_spectrum, log_trace_heat

DEFAULT_DELTA = 0.3
IMAG_RESIDUAL_TOL = 1e-8


def quad_points_min(N):
    """M_min(N) = max(512, 64 ceil(sqrt N)), rounded up to an even number."""
    m = max(512, 64 * math.ceil(math.sqrt(N)))
    return m + (m % 2)


def default_h_omega(omega):
    return max(1e-4, 1e-3 * omega)


@dataclass(frozen=True)
class ContourResult:
    logZ: float
    A_L: float
    rel_residual_imag: float
    quad_points: int
    x: float


@dataclass(frozen=True)
class CanonicalState:
    N: int
    logZ: float
    f: float
    m: float
    A_L: float
    quad_points: int
    rel_residual_imag: float


@dataclass(frozen=True)
class SaddleDiagnostics:
    p_tilde_2nd: float
    s_at_0: float
    s_prime_0: float
    s_second_0: float
    phi_L: float
    A_inf: float
    x_L: float
    x_inf: float


@dataclass(frozen=True)
class CanonicalMagnetization:
    m_L: float
    m_tilde_L: float
    gap: float
    N: int
    rho_eff: float


def partition_recursion(spec, beta, N):
    """log Z_n for n = 0..N from the single-particle traces b_k.

    Works on log Z_n + n beta E_0 so nothing underflows.
    """
    if N < 1:
        raise DomainError("N must be >= 1")
    e0 = spec.ground
    # log b_k + k beta E0
    logb = np.array([log_trace_heat(spec, k * beta) + k * beta * e0 for k in range(1, N + 1)])
    logz = np.empty(N + 1)
    logz[0] = 0.0
    for n in range(1, N + 1):
        k = np.arange(1, n + 1)
        logz[n] = logsumexp(logb[k - 1] + logz[n - k]) - math.log(n)
    return logz - np.arange(N + 1) * beta * e0


def _rho_eff(spec, N):
    return N / spec.L**3


def partition_contour(spec, beta, N, M=None, x=None):
    """Darwin-Fowler quadrature for log Z_N on the circle of radius x_L."""
    if N < 1:
        raise DomainError("N must be >= 1")
    M = M or quad_points_min(N)
    if M % 2:
        raise DomainError("quadrature points must be even")
    # on the symmetric grid the imaginary residual stays ~0 even when the peak
    # is unresolved (aliasing is real), so the resolution floor is enforced here
    if M < quad_points_min(N):
        raise DomainError(f"need at least {quad_points_min(N)} quadrature points for N={N}, got {M}")
    rho = _rho_eff(spec, N)
    if x is None:
        x = grand.fugacity_finite(spec, beta, rho)
    phi = -math.pi + 2.0 * math.pi * np.arange(M) / M
    lx0 = grand.log_xi(spec, beta, x).real
    expo = grand.log_xi(spec, beta, x * np.exp(1j * phi)) - lx0 - 1j * N * phi
    total = np.exp(expo).sum()
    A = math.sqrt(N) / M * total.real
    resid = abs(total.imag) / abs(total.real)
    if not A > 0 or resid >= IMAG_RESIDUAL_TOL:
        raise QuadratureError(f"contour quadrature unresolved with M={M} (imag residual {resid:.3g})",
                              estimate=resid)
    # -beta f~ L^3 = log Xi(x) - N log x
    logZ = lx0 - N * math.log(x) - 0.5 * math.log(N) + math.log(A)
    return ContourResult(float(logZ), float(A), float(resid), M, float(x))


def _s_of_phi(spec, beta, x, phi):
    return grand.pressure_finite(spec, beta, x * np.exp(1j * np.asarray(phi))).imag


def p_tilde(spec, beta, x, phi):
    """Re P_L(x e^{i phi})."""
    return grand.pressure_finite(spec, beta, x * np.exp(1j * np.asarray(phi))).real


def p_tilde_second(spec, beta, x):
    """Closed form -(x / beta L^3) sum_j w_j / |1 - x w_j|^2 of d^2 p~/d phi^2 at 0."""
    w = np.exp(-beta * spec.levels(beta))
    return -x / (beta * spec.L**3) * float(np.sum(w / (1.0 - x * w) ** 2))


def a_infinite(beta, rho, omega, x_inf=None):
    """Limit of the saddle factor, sqrt(-rho / (2 pi beta p~''_inf(0)))."""
    if x_inf is None:
        x_inf = grand.fugacity_infinite(beta, rho, omega)
    p2 = -x_inf / beta * grand.density_infinite_dx(beta, x_inf, omega)
    return math.sqrt(-rho / (2.0 * math.pi * beta * p2))


def saddle_diagnostics(spec, beta, N, delta=DEFAULT_DELTA, step=1e-3):
    """Local shape of the contour integrand at the saddle."""
    if not 0 < delta < 0.5:
        raise DomainError("delta must lie in (0, 1/2)")
    rho = _rho_eff(spec, N)
    x = grand.fugacity_finite(spec, beta, rho)
    h = step
    s = _s_of_phi(spec, beta, x, [-2 * h, -h, 0.0, h, 2 * h])
    s_m2, s_m1, s0, s_p1, s_p2 = (float(v) for v in s)
    s1 = (-s_p2 + 8 * s_p1 - 8 * s_m1 + s_m2) / (12 * h)
    s2 = (-s_p2 + 16 * s_p1 - 30 * s0 + 16 * s_m1 - s_m2) / (12 * h * h)
    x_inf = grand.fugacity_infinite(beta, rho, spec.omega)
    return SaddleDiagnostics(
        p_tilde_2nd=p_tilde_second(spec, beta, x),
        s_at_0=s0,
        s_prime_0=s1,
        s_second_0=s2,
        phi_L=N ** (-0.5 + delta / 3.0),
        A_inf=a_infinite(beta, rho, spec.omega, x_inf),
        x_L=x,
        x_inf=x_inf,
    )


def reduced_free_energy(spec, beta, N, M=None):
    """f_L = -log Z_N / (beta L^3) via the contour route."""
    return -partition_contour(spec, beta, N, M).logZ / (beta * spec.L**3)


def free_energy_decomposition(spec, beta, N, M=None):
    """Return (f_L, f~_L + log N/(2 beta L^3) - log A_L/(beta L^3)) from separate pieces."""
    res = partition_contour(spec, beta, N, M)
    V = spec.L**3
    rho = N / V
    P = grand.pressure_finite(spec, beta, res.x).real
    ft = grand.legendre_free_energy(P, res.x, beta, rho)
    rhs = ft + math.log(N) / (2 * beta * V) - math.log(res.A_L) / (beta * V)
    return -res.logZ / (beta * V), rhs


def canonical_magnetization(params, grid=None, h_omega=None, M=None, spectra=None):
    """m_L, m~_L and their gap at fixed N = round(rho L^3).

    Both are central differences over omega +- h on the same grid; ``spectra``
    may supply the (centre, minus, plus) triple directly.
    """
    grid = grid or GridSpec()
    h = h_omega or default_h_omega(params.omega)
    if spectra is None:
        spectra = tuple(get_spectrum(params.L, w, grid) for w in
                        (params.omega, params.omega - h, params.omega + h))
    sc, sm, sp = spectra
    N = params.n_particles
    if N < 2:
        raise DomainError(f"need N >= 2 particles, got {N}")
    beta = params.beta
    rho = N / params.L**3
    f_minus = reduced_free_energy(sm, beta, N, M)
    f_plus = reduced_free_energy(sp, beta, N, M)
    m_L = (f_plus - f_minus) / (2.0 * h)
    mt = grand.m_tilde(sc, sm, sp, beta, rho, h)
    return CanonicalMagnetization(m_L, mt, abs(m_L - mt), N, rho)


def canonical_state(params, grid=None, h_omega=None, M=None):
    grid = grid or GridSpec()
    spec = get_spectrum(params.L, params.omega, grid)
    N = params.n_particles
    res = partition_contour(spec, params.beta, N, M)
    mag = canonical_magnetization(params, grid, h_omega, M)
    return CanonicalState(N, res.logZ, -res.logZ / (params.beta * params.L**3), mag.m_L,
                          res.A_L, res.quad_points, res.rel_residual_imag)
