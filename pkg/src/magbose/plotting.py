"""Matplotlib figures rendered next to the sweep's CSV/gnuplot files.

matplotlib is imported lazily so the numerical core never depends on it.
"""

from pathlib import Path

import numpy as np

GAP_LABELS = {
    "gap_m": r"$|m_L - \tilde m_L|$",
    "gap_Gamma": r"$|\Gamma_L - \Gamma_\infty|$",
    "gap_P": r"$|P_L - P_\infty|$",
    "gap_rho": r"$|\rho_L - \rho_\infty|$",
    "gap_x": r"$|x_L - x_\infty|$",
    "gap_A": r"$|\mathcal{A}_L - \mathcal{A}_\infty|$",
}


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams.update({
        "font.size": 10,
        "axes.labelsize": 11,
        "legend.fontsize": 8,
        "figure.figsize": (5.0, 3.6),
        "savefig.dpi": 150,
    })
    return plt


def plot_scaling(rows, summary, out_dir):
    """Log-log plot of every convergence gap against L; returns the written paths."""
    plt = _pyplot()
    out_dir = Path(out_dir)
    L = np.array([r["L"] for r in rows], dtype=float)
    fig, ax = plt.subplots()
    for key, label in GAP_LABELS.items():
        y = np.array([r[key] for r in rows], dtype=float)
        if np.all(y > 0):
            ax.loglog(L, y, "o-", label=label, ms=4)
    if summary is not None:
        g0 = rows[0]["gap_m"]
        ax.loglog(L, g0 * (L / L[0]) ** -1.0, "k:", lw=1, label=r"$L^{-1}$ reference")
        ax.set_title(f"gap slope {summary.slope_gap_m:.2f}")
    ax.set_xlabel("$L$")
    ax.set_ylabel("gap")
    ax.legend(loc="best")
    fig.tight_layout()
    path = out_dir / "scaling.png"
    fig.savefig(path)
    plt.close(fig)

    fig, ax = plt.subplots()
    ax.plot(L, [r["trace_scaled_gap"] for r in rows], "s-")
    ax.set_xlabel("$L$")
    ax.set_ylabel(r"$L\,|\mathrm{tr}\,W_L/L^3 - g(\beta,\omega)|$")
    fig.tight_layout()
    path2 = out_dir / "trace_asymptote.png"
    fig.savefig(path2)
    plt.close(fig)
    return [path, path2]


def plot_table(rows, out_dir):
    """Canonical vs grand-canonical magnetization along the sweep."""
    plt = _pyplot()
    out_dir = Path(out_dir)
    L = [r["L"] for r in rows]
    fig, ax = plt.subplots()
    ax.plot(L, [r["m_L"] for r in rows], "o-", label=r"$m_L$")
    ax.plot(L, [r["m_tilde_L"] for r in rows], "s--", label=r"$\tilde m_L$")
    ax.plot(L, [r["Gamma_inf"] for r in rows], "k:", label=r"$\Gamma_\infty(x_\infty)$")
    ax.set_xlabel("$L$")
    ax.set_ylabel("magnetization")
    ax.legend()
    fig.tight_layout()
    path = out_dir / "magnetization.png"
    fig.savefig(path)
    plt.close(fig)
    return [path]
