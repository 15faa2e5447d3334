"""
Figure rendering for experiment reports (PNG files next to the tables).
"""

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def render(path, draw, description=None):
    """Render one figure via ``draw(ax)``; embed provenance as PNG text."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0), dpi=120)
    draw(ax)
    fig.tight_layout()
    meta = {"Description": description} if description else None
    fig.savefig(path, metadata=meta)
    plt.close(fig)


def convergence_curve(gaps, errors, xlabel, ylabel, title):
    """Log-log decay of errors against the exponent gaps."""
    def draw(ax):
        ax.loglog(gaps, errors, "o-")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        ax.set_title(title)
        ax.grid(True, which="both", alpha=0.3)
    return draw


def decomposition_curves(ks, series, title):
    """Semilog curves of the error-splitting terms against k."""
    def draw(ax):
        for label, vals in series.items():
            ax.semilogy(ks, vals, "o-", label=label)
        ax.set_xlabel("k")
        ax.set_ylabel("sup-t error")
        ax.set_title(title)
        ax.legend()
        ax.grid(True, which="both", alpha=0.3)
    return draw


def gap_table_curves(p_gaps, gap_matrix, labels, tol, title):
    """Envelope-gap decay per sample with the tolerance line."""
    def draw(ax):
        for j, lab in enumerate(labels):
            ax.loglog(p_gaps, gap_matrix[:, j], "o-", label=lab)
        ax.axhline(tol, color="k", ls="--", lw=1, label="tolerance")
        ax.set_xlabel("p_n - p_limit")
        ax.set_ylabel("envelope gap")
        ax.set_title(title)
        ax.legend()
        ax.grid(True, which="both", alpha=0.3)
    return draw


def distance_bars(p_values, distances, errs, title):
    """Weak distances to the limit exponent with error bars."""
    def draw(ax):
        x = np.arange(len(p_values))
        ax.bar(x, distances, yerr=2 * np.asarray(errs), capsize=4)
        ax.set_xticks(x)
        ax.set_xticklabels(["p=%g" % p for p in p_values])
        ax.set_ylabel("panel weak distance to limit")
        ax.set_title(title)
        ax.grid(True, axis="y", alpha=0.3)
    return draw


def trajectory_norms(times, series, ylabel, title):
    def draw(ax):
        for label, vals in series.items():
            ax.plot(times, vals, label=label)
        ax.set_xlabel("t")
        ax.set_ylabel(ylabel)
        ax.set_title(title)
        ax.legend()
        ax.grid(True, alpha=0.3)
    return draw
