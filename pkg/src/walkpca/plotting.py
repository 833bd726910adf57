"""Static figures rendered next to the CSV artifacts.

Uses the object-oriented Agg canvas rather than pyplot. rcParams and the
mathtext parser are process-global, so rendering is serialised with a lock
when seeds run on worker threads.
"""

import functools
import threading

import matplotlib as mpl
import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from .analytic import lissajous_projection

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "lines.linewidth": 1.2,
}
GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0
_LOCK = threading.Lock()


def styled(func):
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        with _LOCK, mpl.rc_context(STYLE):
            return func(*args, **kwargs)
    return wrapper


def new_figure(width=4.5, height=None, nrows=1, ncols=1):
    height = width * GOLDEN if height is None else height
    fig = Figure(figsize=(width, height))
    FigureCanvasAgg(fig)
    return fig, fig.subplots(nrows, ncols, squeeze=False)


def save(fig, path, dpi=120):
    fig.tight_layout()
    fig.savefig(path, dpi=dpi)


@styled
def plot_spectrum(path, empirical, predicted=None, limit=None, title=None):
    """Explained-variance ratio against component index, log-log."""
    fig, ax = new_figure()
    ax = ax[0, 0]
    k = np.arange(1, len(empirical) + 1)
    ax.loglog(k, empirical, "-", label="empirical")
    if predicted is not None:
        ax.loglog(np.arange(1, len(predicted) + 1), predicted, ":", color="k", label="predicted")
    if limit is not None:
        ax.loglog(np.arange(1, len(limit) + 1), limit, "--", color="tab:orange", label=r"$6/\pi^2k^2$")
    ax.set_xlabel("PCA component")
    ax.set_ylabel("explained variance ratio")
    if title:
        ax.set_title(title)
    ax.legend(frameon=False)
    save(fig, path)


@styled
def plot_tableau(path, projections, eigenvalues, pairs, with_lissajous=True):
    """Pairwise projection scatter; the right-hand column of each cell pair shows the cosines."""
    n = projections.shape[0]
    cols = 2 if with_lissajous else 1
    fig, axes = new_figure(width=2.2 * cols, height=2.0 * len(pairs), nrows=len(pairs), ncols=cols)
    for row, (i, j) in enumerate(pairs):
        ax = axes[row, 0]
        ax.plot(projections[:, i - 1], projections[:, j - 1], lw=0.6)
        ax.set_xlabel(f"PC{i}")
        ax.set_ylabel(f"PC{j}")
        if with_lissajous:
            li = lissajous_projection(i, n, eigenvalues[i - 1])
            lj = lissajous_projection(j, n, eigenvalues[j - 1])
            axes[row, 1].plot(li, lj, lw=0.6, color="tab:red")
            axes[row, 1].set_xlabel(f"cos {i}")
            axes[row, 1].set_ylabel(f"cos {j}")
    save(fig, path)


@styled
def plot_series(path, series, ylabel, reference=None, reference_label=None, logy=False, xmarker=None):
    fig, ax = new_figure()
    ax = ax[0, 0]
    t = np.arange(1, len(series) + 1)
    ax.plot(t, series)
    if reference is not None:
        ax.axhline(reference, ls=":", color="k", label=reference_label)
        ax.legend(frameon=False)
    if xmarker is not None:
        ax.axvline(xmarker, ls="--", color="gray")
    if logy:
        ax.set_yscale("log")
        ax.set_xscale("log")
    ax.set_xlabel("step")
    ax.set_ylabel(ylabel)
    save(fig, path)


@styled
def plot_decay_fit(path, steps, norms, rate):
    fig, ax = new_figure()
    ax = ax[0, 0]
    ax.semilogy(steps, norms, ".", ms=3, label="step norm")
    i = np.arange(len(norms))
    fit = np.exp(np.mean(np.log(norms)) + (i - i.mean()) * np.log(rate))
    ax.semilogy(steps, fit, "--", color="tab:orange", label="exponential fit")
    ax.set_xlabel("step")
    ax.set_ylabel("step norm")
    ax.legend(frameon=False)
    save(fig, path)
