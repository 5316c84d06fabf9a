"""One-particle spectrum of the magnetic Dirichlet Hamiltonian on a cube.

With the field along e_3 the cube Hamiltonian separates exactly into a 2D
magnetic Dirichlet problem on the square cross-section and a 1D Dirichlet
Laplacian along the field. The 1D factor is known in closed form; the 2D
factor is discretized on an ``n x n`` interior grid with Peierls link phases
and diagonalized in full.

Units: hbar = m = e/c = k_B = 1, so omega equals the field strength B.
"""

import enum
import math
import os
import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import linalg

from .errors import DomainError, NumericalError

CACHE_ENV = "MAGBOSE_CACHE_DIR"
# e**-x < 1e-18 for x above this
BOLTZMANN_CUTOFF = 18.0 * math.log(10.0)


class Gauge(str, enum.Enum):
    SYMMETRIC = "symmetric"
    LANDAU = "landau"


@dataclass(frozen=True)
class GasParams:
    """Physical point: inverse temperature, bulk density, field, box side."""

    beta: float
    rho: float
    omega: float
    L: float

    def __post_init__(self):
        if not self.beta > 0:
            raise DomainError(f"beta must be positive, got {self.beta}")
        if not self.rho > 0:
            raise DomainError(f"rho must be positive, got {self.rho}")
        if not self.omega > 0:
            raise DomainError(f"omega must be positive, got {self.omega}")
        if not self.L >= 1:
            raise DomainError(f"L must be >= 1, got {self.L}")

    @property
    def volume(self):
        return self.L**3

    @property
    def n_particles(self):
        """Particle number N = round(rho L^3)."""
        return int(round(self.rho * self.L**3))


@dataclass(frozen=True)
class GridSpec:
    n: int = 48
    gauge: Gauge = Gauge.SYMMETRIC

    def __post_init__(self):
        if self.n < 8:
            raise DomainError(f"grid needs n >= 8 interior points, got {self.n}")
        object.__setattr__(self, "gauge", Gauge(self.gauge))

    def spacing(self, L):
        return L / (self.n + 1)


@dataclass(frozen=True)
class Spectrum:
    """Sorted 2D eigenvalues plus the closed-form 1D Dirichlet ladder.

    ``e1d_count`` fixes the number of 1D modes; ``None`` means the count is
    chosen per inverse temperature so the dropped Boltzmann weights are below
    1e-18 of the dominant one.
    """

    e2d: np.ndarray
    L: float
    omega: float
    grid: GridSpec = field(default_factory=GridSpec)
    e1d_count: int | None = None

    def __post_init__(self):
        e = np.sort(np.asarray(self.e2d, dtype=float))
        if e.size == 0 or e[0] <= 0:
            raise DomainError("2D eigenvalues must be non-empty and positive")
        e.setflags(write=False)
        object.__setattr__(self, "e2d", e)

    @property
    def e1d_unit(self):
        """Lowest 1D Dirichlet energy pi^2 / (2 L^2)."""
        return math.pi**2 / (2.0 * self.L**2)

    def e1d(self, tau):
        """1D energies retained at Boltzmann time ``tau``."""
        if self.e1d_count is not None:
            return eigs_1d(self.L, self.e1d_count)
        return eigs_1d(self.L, _modes_1d(self.L, tau))

    @property
    def ground(self):
        return self.e2d[0] + self.e1d_unit

    def levels(self, beta):
        """Flattened 3D energies E = e2d + e1d, truncated at 1e-18 relative weight."""
        cut = self.ground + BOLTZMANN_CUTOFF / beta
        e2 = self.e2d[self.e2d + self.e1d_unit <= cut]
        e1 = self.e1d(beta)
        e = (e2[:, None] + e1[None, :]).ravel()
        return e[e <= cut]

    def with_levels_1d_count(self, count):
        return Spectrum(self.e2d, self.L, self.omega, self.grid, count)


def _modes_1d(L, tau):
    # pi^2 (m^2 - 1)/(2 L^2) tau < cutoff
    return max(1, int(math.ceil(math.sqrt(1.0 + 2.0 * L**2 * BOLTZMANN_CUTOFF / (math.pi**2 * tau)))))


def eigs_1d(L, count):
    """Exact Dirichlet energies pi^2 m^2 / (2 L^2), m = 1..count."""
    if count < 1:
        raise DomainError("count must be >= 1")
    m = np.arange(1, count + 1, dtype=float)
    return math.pi**2 * m**2 / (2.0 * L**2)


def _link_integrals(L, grid):
    """Line integrals of the vector potential along the +x1 and +x2 links.

    Returns arrays indexed ``[j, i]`` (row j along x2, column i along x1).
    """
    n = grid.n
    h = grid.spacing(L)
    c = -L / 2 + h * np.arange(1, n + 1)
    x1, x2 = np.meshgrid(c, c)
    if grid.gauge is Gauge.SYMMETRIC:
        # a = (-x2/2, x1/2)
        return -x2 * h / 2.0, x1 * h / 2.0
    # a = (-x2, 0)
    return -x2 * h, np.zeros_like(x1)


def hamiltonian_banded(L, omega, grid, derivative=False):
    """Upper banded storage (bandwidth n) of the discretized 2D Hamiltonian.

    Site (i, j) has flat index ``p = i + n j``; the 5-point stencil couples
    ``p`` to ``p + 1`` (x1 link) and ``p + n`` (x2 link) with hopping
    ``-exp(-i omega int a.dl) / (2 h^2)``. ``derivative=True`` returns dH/domega.
    """
    n = grid.n
    h = grid.spacing(L)
    flux = abs(omega) * h * h
    if flux > math.pi:
        raise DomainError(f"flux per plaquette {flux:.3g} exceeds pi; refine the grid")
    t = 1.0 / (2.0 * h * h)
    N = n * n
    ab = np.zeros((n + 1, N), dtype=complex)
    hops = []
    for I in _link_integrals(L, grid):
        hop = -t * np.exp(-1j * omega * I)
        if derivative:
            hop = hop * (-1j * I)
        hops.append(hop.ravel())
    if not derivative:
        ab[n, :] = 4.0 * t
    hop_x, hop_y = hops
    hop_x[n - 1::n] = 0.0  # no link across the right wall
    # H[p, p+1] sits in row n-1, column p+1
    ab[n - 1, 1:] = hop_x[:-1]
    ab[0, n:] = hop_y[:-n]
    return ab


def _banded_to_dense(ab):
    u = ab.shape[0] - 1
    N = ab.shape[1]
    H = np.diag(ab[u].astype(complex))
    for k in range(1, u + 1):
        d = ab[u - k, k:]
        idx = np.arange(N - k)
        H[idx, idx + k] = d
        H[idx + k, idx] = np.conj(d)
    return H


def hamiltonian_dense(L, omega, grid, derivative=False):
    """Dense Hermitian matrix of the discretized 2D Hamiltonian (or dH/domega)."""
    return _banded_to_dense(hamiltonian_banded(L, omega, grid, derivative))


def level_slopes(L, omega, grid=None):
    """Eigenvalues and Hellmann-Feynman slopes dE_k/domega = <k|dH/domega|k>.

    Dense eigenvector solve; intended for the moderate grids of cross-checks.
    """
    grid = grid or GridSpec()
    H = hamiltonian_dense(L, omega, grid)
    dH = hamiltonian_dense(L, omega, grid, derivative=True)
    w, v = linalg.eigh(H, check_finite=False)
    slopes = np.einsum("ik,ij,jk->k", v.conj(), dH, v, optimize=True).real
    return w, slopes


def eigs_2d_magnetic(L, omega, grid=None):
    """All n^2 eigenvalues of the 2D magnetic Dirichlet problem, ascending."""
    grid = grid or GridSpec()
    if omega < 0:
        raise DomainError("omega must be non-negative")
    ab = hamiltonian_banded(L, omega, grid)
    try:
        w = linalg.eig_banded(ab, lower=False, eigvals_only=True, check_finite=False)
    except linalg.LinAlgError as exc:
        raise NumericalError(f"eigensolver failed: {exc}") from exc
    return np.sort(w)


def tol_disc(omega, n):
    """Allowed discretization shortfall below the continuum bottom omega/2."""
    return 5e-3 * omega + 10.0 / n**2


def ground_energy(spec):
    """Lowest 3D energy e2d[0] + pi^2/(2 L^2)."""
    return float(spec.ground)


def _theta_count(L, tau):
    # weights with tau*e1d_unit*(m^2-1) > 37 are < 1e-16 of the first
    return max(1, int(math.ceil(math.sqrt(1.0 + 2.0 * L**2 * 37.0 / (math.pi**2 * tau)))) + 1)


def theta_1d(L, tau, count=None):
    """sum_m exp(-tau pi^2 m^2 / (2 L^2)) with the tail below 1e-16 relative."""
    count = count or _theta_count(L, tau)
    return float(np.exp(-tau * eigs_1d(L, count)).sum())


def trace_heat(spec, tau):
    """tr exp(-tau H) = (sum_k exp(-tau e2d_k)) (sum_m exp(-tau pi^2 m^2/(2L^2)))."""
    return math.exp(log_trace_heat(spec, tau))


def log_trace_heat(spec, tau):
    """log of :func:`trace_heat`, both factors summed relative to their ground level."""
    if not tau > 0:
        raise DomainError("tau must be positive")
    e0 = spec.e2d[0]
    s2 = np.exp(-tau * (spec.e2d - e0)).sum()
    e1 = eigs_1d(spec.L, spec.e1d_count or _theta_count(spec.L, tau))
    s1 = np.exp(-tau * (e1 - e1[0])).sum()
    return math.log(s2) + math.log(s1) - tau * (e0 + e1[0])


# -- cache ---------------------------------------------------------------

_cache = {}
_cache_lock = threading.Lock()


def _cache_key(L, omega, grid):
    return (float(L), float(omega), int(grid.n), grid.gauge.value)


def _cache_path(key):
    root = os.environ.get(CACHE_ENV)
    if not root:
        return None
    L, omega, n, gauge = key
    return Path(root) / f"spec_L{L!r}_w{omega!r}_n{n}_{gauge}.txt"


def get_spectrum(L, omega, grid=None, use_cache=True):
    """Cached :class:`Spectrum` for (L, omega, grid).

    The in-memory cache is shared across threads; set ``MAGBOSE_CACHE_DIR`` to
    also persist spectra on disk.
    """
    grid = grid or GridSpec()
    key = _cache_key(L, omega, grid)
    if use_cache:
        with _cache_lock:
            hit = _cache.get(key)
        if hit is not None:
            return hit
        path = _cache_path(key)
        if path is not None and path.exists():
            spec = load_spectrum(path)
            with _cache_lock:
                _cache[key] = spec
            return spec
    spec = Spectrum(eigs_2d_magnetic(L, omega, grid), float(L), float(omega), grid)
    if use_cache:
        with _cache_lock:
            _cache[key] = spec
        path = _cache_path(key)
        if path is not None:
            path.parent.mkdir(parents=True, exist_ok=True)
            tmp = path.with_suffix(f".tmp{threading.get_ident()}")
            save_spectrum(spec, tmp)
            os.replace(tmp, path)
    return spec


def clear_cache():
    with _cache_lock:
        _cache.clear()


def save_spectrum(spec, path):
    """Write ``L omega n gauge`` then one 2D eigenvalue per line."""
    lines = [f"{spec.L!r} {spec.omega!r} {spec.grid.n} {spec.grid.gauge.value}"]
    lines.extend(repr(float(e)) for e in spec.e2d)
    Path(path).write_text("\n".join(lines) + "\n")


def load_spectrum(path):
    text = Path(path).read_text().split("\n")
    L, omega, n, gauge = text[0].split()
    e = np.array([float(v) for v in text[1:] if v.strip()])
    return Spectrum(e, float(L), float(omega), GridSpec(int(n), Gauge(gauge)))
