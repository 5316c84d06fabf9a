"""Grand-canonical thermodynamics at finite and infinite volume.

Finite-volume quantities are spectral sums over the 3D levels E_j of a
:class:`~magbose.spectrum.Spectrum`; infinite-volume ones are Landau-level
sums of Bose functions. The magnetization follows the convention
``Gamma = -dP/domega`` (e/c = 1).
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericalError
from .specfun import bose_g

# keep each vectorised block around this many complex elements
_BLOCK = 1 << 22
SINGULAR_GUARD = 1e-10


@dataclass(frozen=True)
class GrandState:
    """Grand-canonical state at fugacity ``x``; ``L=None`` means infinite volume."""

    x: float
    P: float
    rho: float
    Gamma: float
    f_tilde: float
    L: float | None = None

    @property
    def mu(self):
        return None if self.x <= 0 else math.log(self.x)


def _weights(spec, beta):
    return np.exp(-beta * spec.levels(beta))


def x_max_finite(spec, beta):
    """Radius of the dominant singularity e^{beta E_0}."""
    return math.exp(beta * spec.ground)


def x_max_infinite(beta, omega):
    return math.exp(beta * omega / 2.0)


def _check_z_finite(spec, beta, z):
    zs = np.atleast_1d(np.asarray(z, dtype=complex))
    xm = x_max_finite(spec, beta)
    on_cut = (np.abs(zs.imag) <= SINGULAR_GUARD * xm) & (zs.real >= xm * (1.0 - SINGULAR_GUARD))
    if np.any(on_cut):
        raise DomainError(f"fugacity on or within {SINGULAR_GUARD} of the cut [{xm:.6g}, inf)")
    return zs


def log_xi(spec, beta, z):
    """log Xi_L(z) = -sum_j log(1 - z e^{-beta E_j}), vectorised over ``z``."""
    scalar = np.ndim(z) == 0
    zs = _check_z_finite(spec, beta, z)
    w = _weights(spec, beta)
    out = np.empty(zs.shape, dtype=complex)
    step = max(1, _BLOCK // w.size)
    for i in range(0, zs.size, step):
        zb = zs[i:i + step]
        out[i:i + step] = -np.log1p(-zb[:, None] * w[None, :]).sum(axis=1)
    return out[0] if scalar else out


def pressure_finite(spec, beta, z):
    """P_L(z) = log Xi_L(z) / (beta L^3)."""
    return log_xi(spec, beta, z) / (beta * spec.L**3)


def density_finite(spec, beta, z):
    """rho_L(z) = L^-3 sum_j z w_j / (1 - z w_j), w_j = e^{-beta E_j}."""
    scalar = np.ndim(z) == 0
    zs = _check_z_finite(spec, beta, z)
    w = _weights(spec, beta)
    zw = zs[:, None] * w[None, :]
    out = (zw / (1.0 - zw)).sum(axis=1) / spec.L**3
    return out[0] if scalar else out


def density_finite_dx(spec, beta, x):
    """d rho_L / dx = L^-3 sum_j w_j / (1 - x w_j)^2, strictly positive."""
    _check_z_finite(spec, beta, x)
    w = _weights(spec, beta)
    return float(np.sum(w / (1.0 - x * w) ** 2) / spec.L**3)


def magnetization_grand_finite(spec_minus, spec_plus, beta, z, h_omega):
    """Gamma_L = -[P_L(omega + h) - P_L(omega - h)] / (2 h) on a shared grid."""
    return -(pressure_finite(spec_plus, beta, z) - pressure_finite(spec_minus, beta, z)) / (2.0 * h_omega)


def magnetization_grand_finite_hf(spec, slopes, beta, z):
    """Gamma_L from Hellmann-Feynman level slopes of the 2D factor.

    ``Gamma_L = L^-3 sum_j z w_j E_j' / (1 - z w_j)``; the 1D energies do not
    depend on omega, so ``E_j'`` is the slope of the 2D level in ``E_j``.
    ``slopes`` must be aligned with ``spec.e2d``.
    """
    slopes = np.asarray(slopes, dtype=float)
    E = spec.e2d[:, None] + spec.e1d(beta)[None, :]
    dE = np.broadcast_to(slopes[:, None], E.shape)
    w = np.exp(-beta * E)
    zw = complex(z) * w
    return (zw * dE / (1.0 - zw)).sum() / spec.L**3


# -- infinite volume -------------------------------------------------------

def _landau_args(beta, z, omega):
    xm = x_max_infinite(beta, omega)
    z = complex(z)
    if abs(z.imag) <= SINGULAR_GUARD * xm and z.real >= xm * (1.0 - SINGULAR_GUARD):
        raise DomainError(f"fugacity on or within {SINGULAR_GUARD} of the cut [{xm:.6g}, inf)")
    if z == 0:
        return np.zeros(0), np.zeros(0, dtype=complex)
    # |zeta_k| = |z| e^{-(k+1/2) omega beta} < 1e-18 terminates the sum
    kmax = int(math.ceil((math.log(abs(z)) + 18.0 * math.log(10.0)) / (omega * beta) - 0.5))
    k = np.arange(0, max(kmax, 0) + 1)
    return k + 0.5, z * np.exp(-(k + 0.5) * omega * beta)


def _g_sum(sigma, zetas, coeffs=None):
    vals = np.array([bose_g(sigma, zk) for zk in zetas], dtype=complex)
    if coeffs is not None:
        vals = vals * coeffs
    # small terms first
    return complex(np.sum(vals[::-1]))


def pressure_infinite(beta, z, omega):
    """P_inf = omega (2 pi beta)^{-3/2} sum_k g_{3/2}(z e^{-(k+1/2) omega beta})."""
    _, zetas = _landau_args(beta, z, omega)
    return omega * (2.0 * math.pi * beta) ** -1.5 * _g_sum(1.5, zetas)


def density_infinite(beta, z, omega):
    """rho_inf = beta omega (2 pi beta)^{-3/2} sum_k g_{1/2}(z e^{-(k+1/2) omega beta})."""
    _, zetas = _landau_args(beta, z, omega)
    return beta * omega * (2.0 * math.pi * beta) ** -1.5 * _g_sum(0.5, zetas)


def density_infinite_dx(beta, x, omega):
    """d rho_inf / dx via x g_{1/2}'(zeta) = g_{-1/2}(zeta)."""
    if x == 0:
        _, e = _landau_args(beta, 1.0, omega)
        return beta * omega * (2.0 * math.pi * beta) ** -1.5 * float(np.sum(e.real))
    _, zetas = _landau_args(beta, x, omega)
    return beta * omega * (2.0 * math.pi * beta) ** -1.5 * _g_sum(-0.5, zetas).real / x


def magnetization_grand_infinite(beta, z, omega):
    """Gamma_inf = -dP_inf/domega
    = -(2 pi beta)^{-3/2} sum_k [g_{3/2}(zeta_k) - omega beta (k+1/2) g_{1/2}(zeta_k)].
    """
    kh, zetas = _landau_args(beta, z, omega)
    if zetas.size == 0:
        return 0j
    s = _g_sum(1.5, zetas) - _g_sum(0.5, zetas, omega * beta * kh)
    return -(2.0 * math.pi * beta) ** -1.5 * s


# -- fugacity inversion -----------------------------------------------------

def invert_fugacity(density_fn, rho, x_sup, slope_fn=None, rtol=1e-12, max_iter=200):
    """Solve density_fn(x) = rho for x in (0, x_sup) with safeguarded Newton.

    ``density_fn`` must be strictly increasing and diverge at ``x_sup``.
    Bisection keeps a bracket; a Newton step (needs ``slope_fn``) is accepted
    only while it stays inside the bracket.
    """
    if not rho > 0:
        raise DomainError(f"density must be positive, got {rho}")
    lo, hi = 0.0, None
    for k in range(2, 13):
        cand = x_sup * (1.0 - 10.0**-k)
        if float(np.real(density_fn(cand))) > rho:
            hi = cand
            break
        lo = cand
    if hi is None:
        raise NumericalError("could not bracket the fugacity below the singularity")
    x = 0.5 * (lo + hi)
    for _ in range(max_iter):
        r = float(np.real(density_fn(x))) - rho
        if abs(r) <= rtol * rho:
            return x
        if r > 0:
            hi = x
        else:
            lo = x
        nxt = None
        if slope_fn is not None:
            d = slope_fn(x)
            if d > 0:
                nxt = x - r / d
        if nxt is None or not lo < nxt < hi:
            nxt = 0.5 * (lo + hi)
        if hi - lo <= 4 * np.finfo(float).eps * hi:
            return nxt
        x = nxt
    raise NumericalError("fugacity inversion did not converge", estimate=abs(r) / rho)


def fugacity_finite(spec, beta, rho):
    """x_L: unique positive root of rho_L(x) = rho."""
    return invert_fugacity(
        lambda x: density_finite(spec, beta, x).real, rho,
        x_max_finite(spec, beta) * (1.0 - 1e-12),
        slope_fn=lambda x: density_finite_dx(spec, beta, x),
    )


def fugacity_infinite(beta, rho, omega):
    """x_inf: unique positive root of rho_inf(x) = rho."""
    return invert_fugacity(
        lambda x: density_infinite(beta, x, omega).real, rho,
        x_max_infinite(beta, omega) * (1.0 - 1e-12),
        slope_fn=lambda x: density_infinite_dx(beta, x, omega),
    )


def legendre_free_energy(P_value, x, beta, rho):
    """f~ = -P + (rho / beta) log x."""
    return -float(np.real(P_value)) + rho / beta * math.log(x)


def m_tilde(spec, spec_minus, spec_plus, beta, rho, h_omega, x=None):
    """Gamma_L at the central-field fugacity x_L(rho).

    The fugacity is held fixed while the pressure is differenced in omega;
    the terms from dx_L/domega cancel because dP/dx = rho/(beta x) at x_L.
    """
    if x is None:
        x = fugacity_finite(spec, beta, rho)
    return float(magnetization_grand_finite(spec_minus, spec_plus, beta, x, h_omega).real)


def grand_state_finite(spec, beta, rho, spec_minus=None, spec_plus=None, h_omega=None):
    x = fugacity_finite(spec, beta, rho)
    P = float(pressure_finite(spec, beta, x).real)
    gamma = math.nan
    if spec_minus is not None and spec_plus is not None:
        gamma = m_tilde(spec, spec_minus, spec_plus, beta, rho, h_omega, x=x)
    return GrandState(x, P, float(density_finite(spec, beta, x).real), gamma,
                      legendre_free_energy(P, x, beta, rho), spec.L)


def grand_state_infinite(beta, rho, omega):
    x = fugacity_infinite(beta, rho, omega)
    P = pressure_infinite(beta, x, omega).real
    return GrandState(x, P, density_infinite(beta, x, omega).real,
                      magnetization_grand_infinite(beta, x, omega).real,
                      legendre_free_energy(P, x, beta, rho), None)
