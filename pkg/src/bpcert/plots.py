"""Figure rendering for experiment outputs.

Each experiment CSV gets a companion figure: certified regions in the
coupling/field plane, critical radii on polar axes, and a win-count
heatmap.  Matplotlib is imported lazily with the Agg backend so headless
runs work.
"""

import numpy as np


def _pyplot():
    import matplotlib
    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt
    return plt


def plot_plane(rows, path):
    """Shade, per bound, the grid cells where the bound holds."""
    plt = _pyplot()
    bounds = sorted({r[2] for r in rows})
    js = np.array(sorted({r[0] for r in rows}))
    thetas = np.array(sorted({r[1] for r in rows}))
    fig, axes = plt.subplots(1, len(bounds), squeeze=False,
                             figsize=(3.2 * len(bounds), 3.0), sharey=True)
    holds = {(r[0], r[1], r[2]): r[3] for r in rows}
    for ax, bound in zip(axes[0], bounds):
        grid = np.zeros((len(thetas), len(js)))
        for a, theta in enumerate(thetas):
            for b, j in enumerate(js):
                grid[a, b] = 1.0 if holds[(j, theta, bound)] else 0.0
        ax.pcolormesh(js, thetas, grid, shading="nearest",
                      cmap="Greens", vmin=0.0, vmax=1.3)
        ax.set_title(bound)
        ax.set_xlabel("J")
    axes[0][0].set_ylabel("theta")
    fig.suptitle("certified region per bound")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_polar(rows, path):
    """Critical radius versus angle, one trace per bound with a std band."""
    plt = _pyplot()
    bounds = sorted({r[1] for r in rows})
    fig = plt.figure(figsize=(5, 5))
    ax = fig.add_subplot(projection="polar")
    for bound in bounds:
        sub = sorted([r for r in rows if r[1] == bound])
        phi = np.array([r[0] for r in sub])
        mean = np.array([r[2] for r in sub])
        std = np.array([r[3] for r in sub])
        line, = ax.plot(phi, mean, label=bound)
        ax.fill_between(phi, mean - std, mean + std,
                        color=line.get_color(), alpha=0.2)
    ax.set_thetamin(0)
    ax.set_thetamax(180)
    ax.set_title("critical coupling radius")
    ax.legend(loc="lower right", fontsize=8)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def plot_wins(table, path):
    """Annotated heatmap of win counts (row beats column)."""
    plt = _pyplot()
    k = len(table.bounds)
    fig, ax = plt.subplots(figsize=(1.2 * k + 2, 1.2 * k + 1.5))
    im = ax.imshow(table.counts, cmap="Blues")
    ax.set_xticks(range(k), table.bounds, rotation=30)
    ax.set_yticks(range(k), table.bounds)
    for a in range(k):
        for b in range(k):
            ax.text(b, a, str(int(table.counts[a, b])),
                    ha="center", va="center", fontsize=9)
    ax.set_title("wins: row holds, column fails")
    fig.colorbar(im, shrink=0.8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
