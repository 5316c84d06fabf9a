"""Closed-form heat kernels and the diagonal magnetic density g(beta, omega)."""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .spectrum import trace_heat


@dataclass(frozen=True)
class KernelQuery:
    """Evaluation point (x, x', beta) of a heat kernel; ``L=None`` is free space."""

    x: tuple
    xp: tuple
    beta: float
    omega: float = 0.0
    L: float | None = None

    def __post_init__(self):
        x = tuple(float(v) for v in np.atleast_1d(self.x))
        xp = tuple(float(v) for v in np.atleast_1d(self.xp))
        if len(x) != len(xp):
            raise DomainError("x and x' must have the same dimension")
        if not self.beta > 0:
            raise DomainError("beta must be positive")
        if self.L is not None:
            half = self.L / 2.0
            if any(abs(v) >= half for v in x + xp):
                raise DomainError("points must lie strictly inside the box")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "xp", xp)


def magnetic_phase(x, xp):
    """phi(x, x') = 1/2 e_3 . (x' ^ x) = (x'_1 x_2 - x'_2 x_1) / 2."""
    return 0.5 * (xp[0] * x[1] - xp[1] * x[0])


def _image_count(beta, L):
    # terms with |shift| >= 2|m|L - L carry weight below e^-37 of the leading one
    return int(math.ceil((math.sqrt(2.0 * beta * 37.0) + L) / (2.0 * L))) + 1


def kernel_1d_dirichlet(x, xp, beta, L):
    """Dirichlet heat kernel on (-L/2, L/2) by the method of images."""
    if not (abs(x) < L / 2 and abs(xp) < L / 2):
        raise DomainError("points must lie strictly inside (-L/2, L/2)")
    M = _image_count(beta, L)
    m = np.arange(-M, M + 1)
    direct = np.exp(-((x - xp + 2 * m * L) ** 2) / (2.0 * beta))
    mirror = np.exp(-((x + xp - 2 * m * L - L) ** 2) / (2.0 * beta))
    # sum the terms in ascending magnitude order to keep the wall cancellation clean
    val = np.sum(np.sort(direct - mirror)) / math.sqrt(2.0 * math.pi * beta)
    return max(float(val), 0.0)


def kernel_free_3d(q):
    """Free heat kernel (2 pi beta)^{-3/2} exp(-|x - x'|^2 / (2 beta))."""
    d2 = sum((a - b) ** 2 for a, b in zip(q.x, q.xp))
    return (2.0 * math.pi * q.beta) ** -1.5 * math.exp(-d2 / (2.0 * q.beta))


def _x_over_sinh(s):
    return 1.0 - s * s / 6.0 if abs(s) < 1e-6 else s / math.sinh(s)


def _x_over_tanh(s):
    return 1.0 + s * s / 3.0 if abs(s) < 1e-6 else s / math.tanh(s)


def kernel_magnetic_free(q):
    """Whole-space magnetic heat kernel with the field along e_3 (complex)."""
    if q.omega < 0:
        raise DomainError("omega must be non-negative")
    if len(q.x) != 3:
        raise DomainError("the magnetic kernel is three dimensional")
    s = q.omega * q.beta / 2.0
    d = [a - b for a, b in zip(q.x, q.xp)]
    perp2 = d[0] ** 2 + d[1] ** 2
    amp = (2.0 * math.pi * q.beta) ** -1.5 * _x_over_sinh(s)
    gauss = math.exp(-(_x_over_tanh(s) * perp2 + d[2] ** 2) / (2.0 * q.beta))
    phase = q.omega * magnetic_phase(q.x, q.xp)
    return amp * gauss * complex(math.cos(phase), math.sin(phase))


def diagonal_density(beta, omega):
    """g(beta, omega) = (2 pi beta)^{-3/2} (omega beta/2) / sinh(omega beta/2)."""
    return (2.0 * math.pi * beta) ** -1.5 * _x_over_sinh(omega * beta / 2.0)


def diagonal_density_domega(beta, omega):
    """Analytic d g / d omega; odd in omega, negative for omega > 0."""
    s = omega * beta / 2.0
    if abs(s) < 1e-4:
        dF = -s / 3.0 + 7.0 * s**3 / 90.0
    else:
        dF = (1.0 - s / math.tanh(s)) / math.sinh(s)
    return (2.0 * math.pi * beta) ** -1.5 * dF * beta / 2.0


@dataclass(frozen=True)
class TraceAsymptote:
    lhs: float
    rhs: float
    scaled_gap: float


def trace_asymptote_check(spec, beta):
    """Compare tr W_L / L^3 with g(beta, omega); ``scaled_gap = L |lhs - rhs|``."""
    lhs = trace_heat(spec, beta) / spec.L**3
    rhs = diagonal_density(beta, spec.omega)
    return TraceAsymptote(lhs, rhs, abs(lhs - rhs) * spec.L)
