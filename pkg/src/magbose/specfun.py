"""Bose-Einstein functions g_sigma(zeta) on the cut plane C \\ [1, inf).

Two evaluation routes are kept side by side: the power series
``sum zeta**n / n**sigma`` for small ``|zeta|`` and the Bose integral

    g_sigma(zeta) = zeta / Gamma(sigma) * int_0^inf t**(sigma-1) e**-t / (1 - zeta e**-t) dt

everywhere else. The integral is taken in the variable ``u = sqrt(t)`` which
removes the endpoint singularity of the ``sigma = 1/2`` weight and keeps the
higher orders smooth at the origin.

Order ``-1/2`` is supported as well, because ``d g_{1/2}/d zeta`` needs it;
its integral is the differentiated form of the ``sigma = 1/2`` one.
"""

import math

import numpy as np
from scipy import integrate

from .errors import DomainError, NumericalError

ORDERS = (-0.5, 0.5, 1.5, 2.5)

SERIES_RADIUS = 0.5
CUT_GUARD = 1e-14
# e**-T < 1e-18 on the truncated t-interval
T_MAX = 42.0
_U_MAX = math.sqrt(T_MAX)
_EPSABS = 1e-14
_EPSREL = 1e-13


def _check_order(sigma):
    for s in ORDERS:
        if abs(sigma - s) < 1e-12:
            return s
    raise DomainError(f"unsupported Bose order {sigma!r}; expected one of {ORDERS}")


def _check_zeta(zeta):
    zeta = complex(zeta)
    if abs(zeta.imag) <= CUT_GUARD and zeta.real >= 1.0 - CUT_GUARD:
        raise DomainError(f"zeta={zeta!r} lies on (or within {CUT_GUARD} of) the cut [1, inf)")
    return zeta


def bose_g_series(sigma, zeta, rtol=1e-15, max_terms=100_000):
    """Power-series evaluation, valid for ``|zeta| < 1``."""
    sigma = _check_order(sigma)
    zeta = complex(zeta)
    r = abs(zeta)
    if r == 0.0:
        return 0j
    if r >= 1.0:
        raise DomainError("series route requires |zeta| < 1")
    total = 0j
    power = 1 + 0j
    for n in range(1, max_terms + 1):
        power *= zeta
        term = power / n**sigma
        total += term
        # geometric bound on the remaining tail
        tail = abs(power) * r / (1.0 - r) * max(1.0, (n + 1) ** (-sigma))
        if tail <= rtol * abs(total):
            return total
    raise NumericalError("Bose series did not converge", estimate=tail)


def _integrand_factory(sigma, zeta):
    # weight after t = u**2, dt = 2u du; 1 - zeta e**-t is formed without
    # cancellation so the peak near the cut keeps full relative accuracy
    one_minus = 1.0 - zeta
    if sigma == -0.5:
        def f(u):
            d = one_minus - zeta * math.expm1(-u * u)
            return zeta * math.exp(-u * u) / (d * d)
    else:
        p = 2.0 * sigma - 1.0

        def f(u):
            d = one_minus - zeta * math.expm1(-u * u)
            return u**p * math.exp(-u * u) / d
    return f


def bose_g_integral(sigma, zeta):
    """Quadrature evaluation of the Bose integral, valid on the whole cut plane."""
    sigma = _check_order(sigma)
    zeta = _check_zeta(zeta)
    if zeta == 0:
        return 0j
    f = _integrand_factory(sigma, zeta)
    # the integrand has a peak of width ~sqrt(|1 - zeta|) at u = 0 near the cut
    w = math.sqrt(abs(1.0 - zeta))
    points = [w * 4.0**j for j in range(12) if w * 4.0**j < 1.0] or None
    parts = []
    errs = []
    for part in (lambda u: f(u).real, lambda u: f(u).imag):
        val, err, info = integrate.quad(
            part, 0.0, _U_MAX, epsabs=_EPSABS, epsrel=_EPSREL, limit=400,
            points=points, full_output=True,
        )[:3]
        parts.append(val)
        errs.append(err)
    value = complex(parts[0], parts[1])
    err = math.hypot(*errs)
    if err > 1e-12 + 1e-9 * abs(value):
        raise NumericalError(f"Bose integral for sigma={sigma}, zeta={zeta} unresolved", estimate=err)
    if sigma == -0.5:
        # 1/Gamma(1/2) * 2 from the substitution
        return 2.0 / math.sqrt(math.pi) * value
    return 2.0 * zeta / math.gamma(sigma) * value


def bose_g(sigma, zeta):
    """Bose function g_sigma(zeta).

    Parameters
    ----------
    sigma : float
        One of -1/2, 1/2, 3/2, 5/2.
    zeta : complex
        Point of the cut plane C \\ [1, inf).

    Returns
    -------
    complex
    """
    sigma = _check_order(sigma)
    zeta = _check_zeta(zeta)
    if abs(zeta) <= SERIES_RADIUS:
        return bose_g_series(sigma, zeta)
    return bose_g_integral(sigma, zeta)


def bose_g_derivative(sigma, zeta):
    """d g_sigma / d zeta, from ``zeta g_sigma'(zeta) = g_{sigma-1}(zeta)``."""
    sigma = _check_order(sigma)
    if sigma == -0.5:
        raise DomainError("derivative of g_{-1/2} is not supported")
    zeta = _check_zeta(zeta)
    if zeta == 0:
        return 1 + 0j
    return bose_g(sigma - 1.0, zeta) / zeta


def bose_g_real(sigma, x):
    """Real-argument convenience wrapper; ``x < 1``."""
    return bose_g(sigma, x).real


def bose_g_array(sigma, zetas):
    """Elementwise :func:`bose_g` over an iterable, returned as a complex array."""
    return np.array([bose_g(sigma, z) for z in np.ravel(zetas)], dtype=complex)
