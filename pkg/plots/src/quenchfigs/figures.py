"""Renderers for the seven figure kinds.

Every renderer consumes CSVs produced by the ``sptquench`` CLI, writes one
image, and returns a small metadata dict.  Rendering never mutates the
inputs, and re-rendering overwrites the output idempotently.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .csvio import EmptyData, read_csv


def _first_crossing(t, gap, threshold):
    for i in range(1, len(t)):
        if gap[i - 1] < threshold <= gap[i]:
            g0 = np.log(max(gap[i - 1], 1e-300))
            g1 = np.log(gap[i])
            return t[i - 1] + (np.log(threshold) - g0) * (t[i] - t[i - 1]) / (g1 - g0)
    return None


def render_es_fan(spec):
    """Full single-particle ES vs time with the splitting time marked."""
    table = read_csv(spec["csv_paths"][0])
    t = table.col("t")
    _, xi = table.cols_matching("xi_")
    threshold = spec.get("style", {}).get("threshold", 1e-3)
    tstar = _first_crossing(t, table.col("gap"), threshold)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(t, xi, lw=0.7, color="tab:red", alpha=0.7)
    if tstar is not None:
        ax.axvline(tstar, ls="--", color="tab:blue")
        ax.annotate(f"$t^* = {tstar:.1f}$", (tstar, 1.02),
                    ha="center", fontsize=9)
    ax.set_xlabel("$t$")
    ax.set_ylabel(r"$\xi_n$")
    ax.set_ylim(-0.05, 1.1)
    fig.tight_layout()
    fig.savefig(spec["output"], dpi=150)
    plt.close(fig)
    return {"output": spec["output"], "t_star": tstar}


def render_gap_bound(spec):
    """Measured gap vs time on a log scale with the bound curve overlaid.

    csv_paths = [quench CSV, lr-constants CSV]; the bound uses the largest
    tabulated kappa and the segment length from the style (default: half
    the number of ES columns).
    """
    table = read_csv(spec["csv_paths"][0])
    consts = read_csv(spec["csv_paths"][1])
    t = table.col("t")
    gap = table.col("gap")
    names, _ = table.cols_matching("xi_")
    style = spec.get("style", {})
    l = style.get("l", len(names) // 2)
    kappa = consts.col("kappa")[-1]
    v = consts.col("v")[-1]
    c = consts.col("C")[-1]
    bound = c * np.exp(-kappa * (l - v * t))
    fig, ax = plt.subplots(figsize=(6, 4))
    positive = gap > 0
    ax.semilogy(t[positive], gap[positive], color="tab:red",
                label=r"$\Delta^{\rm sp}_{\rm E}$")
    ax.semilogy(t, np.minimum(bound, 1e3), ls="--", color="tab:blue",
                label=rf"$C e^{{-\kappa(l - vt)}}$, $\kappa = {kappa:g}$")
    ax.set_xlabel("$t$")
    ax.set_ylabel("gap")
    ax.legend()
    fig.tight_layout()
    fig.savefig(spec["output"], dpi=150)
    plt.close(fig)
    return {"output": spec["output"]}


def render_velocity_scan(spec):
    """Lieb-Robinson velocity v(kappa)/2 against kappa."""
    table = read_csv(spec["csv_paths"][0])
    kappa = table.col("kappa")
    v = table.col("v")
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(kappa, v / 2.0, marker="o", ms=3)
    ax.set_xlabel(r"$\kappa$")
    ax.set_ylabel(r"$v_{\rm LR} = v/2$")
    fig.tight_layout()
    fig.savefig(spec["output"], dpi=150)
    plt.close(fig)
    return {"output": spec["output"]}


def render_flatband(spec):
    """Numeric ES curves with the analytic roots dotted on top."""
    table = read_csv(spec["csv_paths"][0])
    t = table.col("t")
    _, num = table.cols_matching("xi_num_")
    _, ana = table.cols_matching("xi_ana_")
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(t, num, color="tab:blue", lw=1.0)
    ax.plot(t, ana, color="tab:orange", ls=":", lw=1.2)
    ax.axhline(0.5, color="0.8", lw=0.5)
    ax.set_xlabel("$t$")
    ax.set_ylabel(r"$\xi$")
    fig.tight_layout()
    fig.savefig(spec["output"], dpi=150)
    plt.close(fig)
    return {"output": spec["output"]}


def render_cocycle(spec):
    """Many-body ES traces of the two-site cocycle state."""
    table = read_csv(spec["csv_paths"][0])
    t = table.col("t")
    _, zeta = table.cols_matching("zeta_")
    keep = np.max(zeta, axis=0) > 1e-12
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(t, zeta[:, keep], lw=1.0)
    ax.set_xlabel("$t$")
    ax.set_ylabel(r"$\zeta$")
    fig.tight_layout()
    fig.savefig(spec["output"], dpi=150)
    plt.close(fig)
    return {"output": spec["output"]}


def render_disorder(spec):
    """Disorder-averaged gap (log-linear) and entropy panels."""
    fig, (ax_g, ax_s) = plt.subplots(1, 2, figsize=(8, 3.5))
    for path in spec["csv_paths"]:
        table = read_csv(path)
        t = table.col("t")
        gap = table.col("gap_mean")
        err = table.col("gap_stderr")
        label = table.meta.get("config_hash", path)[:8]
        positive = gap > 0
        ax_g.errorbar(t[positive], gap[positive], yerr=err[positive],
                      marker="o", ms=3, label=label)
        ax_s.errorbar(t, table.col("entropy_mean"),
                      yerr=table.col("entropy_stderr"), marker="o", ms=3)
    ax_g.set_yscale("log")
    ax_g.set_xlabel("$t$")
    ax_g.set_ylabel(r"$\overline{\Delta^{\rm sp}_{\rm E}}$")
    ax_g.legend(fontsize=7)
    ax_s.set_xscale("log")
    ax_s.set_xlabel("$t$")
    ax_s.set_ylabel(r"$\overline{S}$")
    fig.tight_layout()
    fig.savefig(spec["output"], dpi=150)
    plt.close(fig)
    return {"output": spec["output"]}


def render_mbl(spec):
    """Entropy and many-body gap of the localized interacting quench."""
    table = read_csv(spec["csv_paths"][0])
    t = table.col("t")
    fig, (ax_s, ax_g) = plt.subplots(1, 2, figsize=(8, 3.5))
    ax_s.errorbar(t, table.col("entropy_mean"),
                  yerr=table.col("entropy_stderr"), marker="o", ms=3)
    ax_s.set_xscale("log")
    ax_s.set_xlabel("$t$")
    ax_s.set_ylabel(r"$\overline{S}$")
    gap = table.col("gap_mean")
    positive = gap > 0
    ax_g.errorbar(t[positive], gap[positive],
                  yerr=table.col("gap_stderr")[positive], marker="o", ms=3)
    ax_g.set_xscale("log")
    ax_g.set_yscale("log")
    ax_g.set_xlabel("$t$")
    ax_g.set_ylabel(r"$\overline{\Delta^{\rm mb}_{\rm E}}$")
    fig.tight_layout()
    fig.savefig(spec["output"], dpi=150)
    plt.close(fig)
    return {"output": spec["output"]}


FIGURE_KINDS = {
    "es_fan": render_es_fan,
    "gap_bound": render_gap_bound,
    "velocity_scan": render_velocity_scan,
    "flatband": render_flatband,
    "cocycle": render_cocycle,
    "disorder": render_disorder,
    "mbl": render_mbl,
}


def render(spec):
    """Dispatch a figure spec dict to its renderer.

    The spec carries ``kind``, ``csv_paths`` (list), ``output`` (image
    path) and optional ``style``.  Raises MissingColumn/EmptyData without
    writing anything when the inputs do not match the schema.
    """
    kind = spec.get("kind")
    if kind not in FIGURE_KINDS:
        raise ValueError(f"unknown figure kind {kind!r}; "
                         f"expected one of {sorted(FIGURE_KINDS)}")
    if not spec.get("csv_paths"):
        raise EmptyData("figure spec names no CSV inputs")
    return FIGURE_KINDS[kind](spec)
