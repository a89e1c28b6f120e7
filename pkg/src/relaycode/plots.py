"""Figure rendering for the report path: FER curves, EXIT charts and the
capacity-threshold table, written next to the delimited output files."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

plt.rcParams["figure.figsize"] = (6.0, 4.2)
plt.rcParams["axes.grid"] = True
plt.rcParams["grid.alpha"] = 0.35
plt.rcParams["font.size"] = 10

_MARKERS = ("o", "s", "^", "v", "D", "*", "x", "+")


def render_fer_plot(curves: dict[str, list], path) -> Path:
    """Semilog FER-vs-SNR plot; ``curves`` maps a legend label to a list
    of FerRecord."""
    fig, ax = plt.subplots()
    for idx, (label, records) in enumerate(curves.items()):
        xs = [r.gamma_sd_db for r in records]
        ys = [max(r.fer, 1e-12) for r in records]
        ax.semilogy(xs, ys, marker=_MARKERS[idx % len(_MARKERS)], label=label)
    ax.set_xlabel(r"$\gamma_{sd}$ [dB]")
    ax.set_ylabel("FER")
    ax.set_ylim(top=1.2)
    ax.legend()
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_exit_plot(inner_curves: list, outer_curve, path) -> Path:
    """EXIT chart: inner transfer curves plus the swapped outer curve."""
    fig, ax = plt.subplots()
    for idx, inner in enumerate(inner_curves):
        label = f"inner, $\\gamma_{{sd}}$={inner.gamma_sd_db:.2f} dB"
        ax.plot(inner.i_a, inner.i_e, marker=_MARKERS[idx % len(_MARKERS)],
                markersize=3, label=label)
    if outer_curve is not None:
        ax.plot(outer_curve.i_e, outer_curve.i_a, "k--", label="outer (swapped)")
    ax.set_xlabel(r"$I_A$ inner / $I_E$ outer")
    ax.set_ylabel(r"$I_E$ inner / $I_A$ outer")
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1)
    ax.legend(loc="lower right")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_limits_plot(rows: list[dict], path) -> Path:
    """Capacity threshold versus number of sources."""
    fig, ax = plt.subplots()
    qs = [row["q"] for row in rows]
    ax.semilogx(qs, [row["threshold_db"] for row in rows], "o-",
                label="sum-constrained")
    ax.semilogx(qs, [row["threshold_per_user_db"] for row in rows], "s--",
                label="per-user form")
    ax.set_xlabel("number of sources q")
    ax.set_ylabel(r"capacity threshold $\gamma_{sd}$ [dB]")
    ax.legend()
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_threshold_plot(rows: list[dict], path) -> Path:
    """Convergence thresholds per strategy versus number of sources."""
    fig, ax = plt.subplots()
    strategies = sorted({row["strategy"] for row in rows})
    for idx, strat in enumerate(strategies):
        sel = [row for row in rows if row["strategy"] == strat]
        ax.semilogx([r["q"] for r in sel], [r["threshold_db"] for r in sel],
                    marker=_MARKERS[idx % len(_MARKERS)],
                    label=f"strategy {strat}")
    ax.set_xlabel("number of sources q")
    ax.set_ylabel(r"convergence threshold $\gamma_{sd}$ [dB]")
    ax.legend()
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
