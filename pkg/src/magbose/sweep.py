"""L-sweep driver: configuration, per-L rows, output files and slope fits."""

from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import canonical, grand, kernels
from .errors import ConfigError, DomainError, MagboseError
from .spectrum import Gauge, GasParams, GridSpec, get_spectrum

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
LOGZ_RTOL = 1e-8

TABLE_COLUMNS = [
    "L", "N", "x_L", "x_inf", "P_L", "P_inf", "rho_check", "Gamma_L", "Gamma_inf",
    "f_tilde_L", "f_inf", "logZ_contour", "logZ_recursion", "f_L", "m_L", "m_tilde_L",
    "gap", "A_L", "A_inf",
]

SCALING_COLUMNS = [
    "L", "N", "gap_m", "gap_Gamma", "gap_P", "gap_rho", "gap_x", "gap_A", "trace_scaled_gap",
]


@dataclass
class SweepConfig:
    beta: float = 1.0
    rho: float = 0.05
    omega: float = 1.0
    L_values: list = field(default_factory=lambda: [6.0, 8.0, 10.0, 12.0])
    grid_n: int = 48
    gauge: str = "symmetric"
    delta: float = canonical.DEFAULT_DELTA
    h_omega: float | None = None
    output_dir: str = "out"
    z_probe: float = 0.5
    workers: int = 1

    def validate(self):
        for name in ("beta", "rho", "omega"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and v > 0 and math.isfinite(v)):
                raise ConfigError(f"{name} must be a positive number, got {v!r}")
        if not 0 < self.delta < 0.5:
            raise ConfigError(f"delta must lie in (0, 0.5), got {self.delta}")
        if self.h_omega is not None and not self.h_omega > 0:
            raise ConfigError("h_omega must be positive")
        if self.h_omega is not None and self.h_omega >= self.omega:
            raise ConfigError("h_omega must be smaller than omega")
        Ls = [float(v) for v in self.L_values]
        if any(v < 1 for v in Ls):
            raise ConfigError("every L must be >= 1")
        if Ls != sorted(Ls):
            raise ConfigError("L_values must be sorted ascending")
        if self.grid_n < 8:
            raise ConfigError("grid_n must be >= 8")
        try:
            Gauge(self.gauge)
        except ValueError:
            raise ConfigError(f"unknown gauge {self.gauge!r}") from None
        if not 0 < self.z_probe:
            raise ConfigError("z_probe must be positive")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        self.L_values = Ls
        return self

    @property
    def step(self):
        return self.h_omega or canonical.default_h_omega(self.omega)

    @property
    def grid(self):
        return GridSpec(self.grid_n, Gauge(self.gauge))


_ALIASES = {"L": "L_values", "out": "output_dir", "n": "grid_n"}


def _coerce(name, raw):
    kinds = {f.name: f.type for f in fields(SweepConfig)}
    kind = kinds[name]
    try:
        if name == "L_values":
            if isinstance(raw, (list, tuple)):
                return [float(v) for v in raw]
            text = str(raw).strip()
            return [float(v) for v in text.replace(",", " ").split()] if text else []
        if raw is None:
            return None
        if "int" in kind:
            return int(raw)
        if "float" in kind:
            if str(raw).strip().lower() in ("", "none", "auto"):
                return None
            return float(raw)
        return str(raw)
    except ValueError:
        raise ConfigError(f"cannot parse {name} = {raw!r}") from None


def parse_config_text(text):
    """Parse flat ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, val = (s.strip() for s in line.split("=", 1))
        key = _ALIASES.get(key, key)
        if key not in {f.name for f in fields(SweepConfig)}:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[key] = _coerce(key, val)
    return values


def build_config(path=None, overrides=None):
    """Config file values, then non-None ``overrides`` on top; validated."""
    values = {}
    if path is not None:
        try:
            values.update(parse_config_text(Path(path).read_text()))
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
    for key, val in (overrides or {}).items():
        if val is not None:
            key = _ALIASES.get(key, key)
            values[key] = _coerce(key, val)
    return SweepConfig(**values).validate()


# -- per-L computation ---------------------------------------------------------

def _spectra(cfg, L):
    h = cfg.step
    return tuple(get_spectrum(L, w, cfg.grid) for w in (cfg.omega, cfg.omega - h, cfg.omega + h))


def compute_row(cfg, L):
    """All table and scaling quantities at one box side."""
    beta, omega, h = cfg.beta, cfg.omega, cfg.step
    sc, sm, sp = _spectra(cfg, L)
    params = GasParams(beta, cfg.rho, omega, L)
    N = params.n_particles
    if N < 2:
        raise DomainError(f"L={L}: N = round(rho L^3) = {N} < 2")
    rho = N / L**3
    contour = canonical.partition_contour(sc, beta, N)
    logz_rec = float(canonical.partition_recursion(sc, beta, N)[-1])
    x_L = contour.x
    x_inf = grand.fugacity_infinite(beta, rho, omega)
    P_L = float(grand.pressure_finite(sc, beta, x_L).real)
    P_inf = float(grand.pressure_infinite(beta, x_inf, omega).real)
    mag = canonical.canonical_magnetization(params, spectra=(sc, sm, sp), h_omega=h)
    gamma_inf = float(grand.magnetization_grand_infinite(beta, x_inf, omega).real)
    A_inf = canonical.a_infinite(beta, rho, omega, x_inf)
    row = {
        "L": L, "N": N, "x_L": x_L, "x_inf": x_inf, "P_L": P_L, "P_inf": P_inf,
        "rho_check": float(grand.density_finite(sc, beta, x_L).real),
        "Gamma_L": mag.m_tilde_L, "Gamma_inf": gamma_inf,
        "f_tilde_L": grand.legendre_free_energy(P_L, x_L, beta, rho),
        "f_inf": grand.legendre_free_energy(P_inf, x_inf, beta, rho),
        "logZ_contour": contour.logZ, "logZ_recursion": logz_rec,
        "f_L": -contour.logZ / (beta * L**3),
        "m_L": mag.m_L, "m_tilde_L": mag.m_tilde_L, "gap": mag.gap,
        "A_L": contour.A_L, "A_inf": A_inf,
    }
    z = cfg.z_probe
    scaling = {
        "L": L, "N": N, "gap_m": mag.gap,
        "gap_Gamma": abs(grand.magnetization_grand_finite(sm, sp, beta, z, h)
                         - grand.magnetization_grand_infinite(beta, z, omega)),
        "gap_P": abs(grand.pressure_finite(sc, beta, z) - grand.pressure_infinite(beta, z, omega)),
        "gap_rho": abs(grand.density_finite(sc, beta, z) - grand.density_infinite(beta, z, omega)),
        "gap_x": abs(x_L - x_inf),
        "gap_A": abs(contour.A_L - A_inf),
        "trace_scaled_gap": kernels.trace_asymptote_check(sc, beta).scaled_gap,
    }
    return row, scaling


def sweep(cfg):
    """Rows in config order; failures are returned as ``(L, exception)`` pairs."""

    def one(L):
        try:
            return compute_row(cfg, L)
        except MagboseError as exc:
            log.warning("L=%s failed: %s", L, exc)
            return exc

    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        results = list(pool.map(one, cfg.L_values))
    rows, scaling, errors = [], [], []
    for L, res in zip(cfg.L_values, results):
        if isinstance(res, Exception):
            errors.append((L, res))
        else:
            rows.append(res[0])
            scaling.append(res[1])
    return rows, scaling, errors


# -- output ------------------------------------------------------------------------

def fmt(v):
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.17g}"


def write_csv(path, columns, rows):
    lines = [f"# schema-version: {SCHEMA_VERSION}", ",".join(columns)]
    lines.extend(",".join(fmt(r[c]) for c in columns) for r in rows)
    Path(path).write_text("\n".join(lines) + "\n")


def write_dat(path, columns, rows):
    """Whitespace-separated columns with a ``#`` header, readable by gnuplot."""
    lines = ["# " + " ".join(columns)]
    lines.extend(" ".join(fmt(r[c]) for c in columns) for r in rows)
    Path(path).write_text("\n".join(lines) + "\n")


def write_errors(path, errors):
    if not errors:
        return
    Path(path).write_text("".join(f"L={fmt(L)}\t{type(e).__name__}\t{e}\n" for L, e in errors))


def logz_mismatches(rows):
    """Rows whose contour and recursion log Z disagree beyond 1e-8 relative."""
    bad = []
    for r in rows:
        rel = abs(r["logZ_contour"] - r["logZ_recursion"]) / abs(r["logZ_recursion"])
        if not rel <= LOGZ_RTOL:
            bad.append((r["L"], rel))
    return bad


# -- scaling summary --------------------------------------------------------------

def fit_loglog_slope(L_values, gaps):
    """Least-squares slope of log(gap) against log(L)."""
    L = np.asarray(L_values, dtype=float)
    g = np.asarray(gaps, dtype=float)
    if L.size < 3:
        raise ConfigError("need at least 3 L values to fit a slope")
    if np.any(g <= 0):
        raise DomainError("gaps must be positive for a log-log fit")
    return float(np.polyfit(np.log(L), np.log(g), 1)[0])


def strictly_decreasing(values):
    v = np.asarray(values, dtype=float)
    return bool(np.all(np.diff(v) < 0))


@dataclass
class ScalingSummary:
    slope_gap_m: float
    slope_pass: bool
    decreasing: dict
    trace_ratio: float
    trace_pass: bool

    def to_dict(self):
        return asdict(self)


def summarize_scaling(rows, slope_threshold=-1.0):
    L = [r["L"] for r in rows]
    slope = fit_loglog_slope(L, [r["gap_m"] for r in rows])
    dec = {c: strictly_decreasing([r[c] for r in rows])
           for c in ("gap_m", "gap_Gamma", "gap_P", "gap_rho", "gap_x", "gap_A")}
    tr = [r["trace_scaled_gap"] for r in rows]
    ratio = max(tr) / min(tr)
    return ScalingSummary(slope, slope <= slope_threshold, dec, ratio, ratio < 10.0)


def run_table(cfg):
    """Write ``table.csv``/``table.dat``; returns (rows, errors, logZ mismatches)."""
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows, _, errors = sweep(cfg) if cfg.L_values else ([], [], [])
    write_csv(out / "table.csv", TABLE_COLUMNS, rows)
    write_dat(out / "table.dat", TABLE_COLUMNS, rows)
    write_errors(out / "table.errors.log", errors)
    return rows, errors, logz_mismatches(rows)


def run_scaling(cfg):
    """Write ``scaling.csv``/``scaling.dat``/``scaling_summary.json``."""
    if len(cfg.L_values) < 3:
        raise ConfigError("scaling needs at least 3 L values")
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    _, rows, errors = sweep(cfg)
    write_csv(out / "scaling.csv", SCALING_COLUMNS, rows)
    write_dat(out / "scaling.dat", SCALING_COLUMNS, rows)
    write_errors(out / "scaling.errors.log", errors)
    summary = summarize_scaling(rows) if len(rows) >= 3 else None
    if summary is not None:
        (out / "scaling_summary.json").write_text(json.dumps(summary.to_dict(), indent=2) + "\n")
    return rows, summary, errors


def with_overrides(cfg, **kw):
    return replace(cfg, **kw).validate()
