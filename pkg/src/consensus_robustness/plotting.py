"""Figure rendering for the CLI report paths.

Every function writes a PNG next to the delimited output and closes the
figure; nothing is shown interactively (Agg backend).
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

_RC = {
    "figure.figsize": (6.0, 4.0),
    "figure.dpi": 120,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.markersize": 5,
}


def _new_axes(title):
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
    ax.set_title(title)
    return fig, ax


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def render_sweep(result, path) -> None:
    """Log-log metric curves of a scaling sweep with fitted slopes."""
    fig, ax = _new_axes(f"scaling sweep: {result.family}")
    ns = [row.n for row in result.rows]
    for metric, marker in (("trace_P", "o"), ("sigma1_P", "s"), ("t_half", "^")):
        values = [getattr(row, metric) for row in result.rows]
        label = metric
        if metric in result.fits:
            label += f" (slope {result.fits[metric].slope:.2f})"
        ax.loglog(ns, values, marker=marker, label=label)
    ax.set_xlabel("n")
    ax.set_ylabel("metric value")
    ax.legend()
    _save(fig, path)


def render_ratio(points, family, path) -> None:
    """sigma1(P(QA)) / t(1/2) against the number of nodes."""
    fig, ax = _new_axes(f"sigma1/t(1/2) ratio: {family}")
    ns = [n for n, _ in points]
    ratios = [r for _, r in points]
    ax.plot(ns, ratios, marker="o")
    ax.set_xlabel("number of nodes")
    ax.set_ylabel("sigma1(P(QA)) / t(1/2)")
    ax.set_ylim(bottom=0.0)
    _save(fig, path)


def render_curve(pairs, path, title, xlabel="k", ylabel="value", logy=True) -> None:
    """Generic probe curve, e.g. distance to consensus against k."""
    fig, ax = _new_axes(title)
    xs = [k for k, _ in pairs]
    ys = [v for _, v in pairs]
    if logy:
        positive = [(x, y) for x, y in zip(xs, ys) if y > 0]
        if positive:
            ax.semilogy([x for x, _ in positive], [y for _, y in positive], marker="o")
    else:
        ax.plot(xs, ys, marker="o")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    _save(fig, path)


def render_shock(response, path) -> None:
    """Trajectory norms of a shock response on a log scale."""
    fig, ax = _new_axes(f"shock response (alpha ~ {response.alpha_estimate:.4f})")
    ks = range(response.horizon + 1)
    ax.semilogy(ks, [max(v, 1e-300) for v in response.norms_x], label="||x(k)||_inf")
    ax.semilogy(ks, [max(v, 1e-300) for v in response.norms_xq], label="||x_Q(k)||_inf")
    ax.set_xlabel("k")
    ax.set_ylabel("norm")
    ax.legend()
    _save(fig, path)
