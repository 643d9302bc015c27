"""Vector plots of sweep datasets, laid out like the published figures."""

from collections import defaultdict
from pathlib import Path

import numpy as np

__all__ = ["PLOT_KINDS", "emit_plots", "plot_kinds_for_task"]

PLOT_KINDS = ("population", "figure2", "correlations", "lambda", "spectrum", "g2")

_TASK_PLOTS = {
    "steady": ("population",),
    "figure2": ("figure2",),
    "correlations": ("correlations",),
    "fit": ("lambda",),
    "figure3": ("lambda",),
    "analytic": ("lambda",),
    "spectrum": ("spectrum",),
    "oracle": ("g2",),
}


def plot_kinds_for_task(task):
    return _TASK_PLOTS.get(task, ())


def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    plt.rcParams["svg.hashsalt"] = "cavity-array"
    return plt


def _numeric(rows, column):
    out = []
    for row in rows:
        try:
            out.append(float(row.get(column, "nan") or "nan"))
        except ValueError:
            out.append(np.nan)
    return np.array(out)


def _load(dataset):
    from .sweep import read_csv
    if isinstance(dataset, (str, Path)):
        columns, rows = read_csv(dataset)
        stem = Path(dataset).stem
    else:
        columns, rows = dataset
        stem = "dataset"
    rows = [r for r in rows if r.get("status", "ok") == "ok"]
    return columns, rows, stem


def _varying(rows, candidates):
    for c in candidates:
        if len(set(r[c] for r in rows)) > 1:
            return c
    return candidates[0]


def _save(fig, path):
    fig.savefig(path, format="svg", metadata={"Date": None})
    return path


def _groups(rows, keys):
    out = defaultdict(list)
    for r in rows:
        out[tuple(r[k] for k in keys)].append(r)
    return out


def _population(plt, rows, path, x_candidates):
    xcol = _varying(rows, x_candidates)
    groups = _groups(rows, ("N", "J[g]"))
    fig, axes = plt.subplots(len(groups), 1, figsize=(5, 2.6 * len(groups)), squeeze=False)
    for ax, ((N, J), grp) in zip(axes[:, 0], sorted(groups.items(), key=lambda kv: (int(kv[0][0]), float(kv[0][1])))):
        x = _numeric(grp, xcol)
        order = np.argsort(x)
        ax.plot(x[order], _numeric(grp, "n_a")[order], color="tab:blue", label="$n_a$")
        ax.plot(x[order], _numeric(grp, "n_a_L")[order], "--", color="gray", lw=0.8, label="$n_a^L$")
        ax.set_ylabel("$n_a$")
        ax2 = ax.twinx()
        ax2.plot(x[order], _numeric(grp, "n_sigma")[order], color="tab:pink", label=r"$n_\sigma$")
        ax2.set_ylim(0, 1)
        ax2.set_ylabel(r"$n_\sigma$")
        if xcol == "P_sigma[g]":
            ax.set_xscale("log")
        ax.set_title(f"N = {int(N)}, J = {float(J):g} g", fontsize=9)
        ax.set_xlabel(xcol.replace("[g]", " [g]"))
        ax.legend(loc="upper left", fontsize=7)
    fig.tight_layout()
    return _save(fig, path)


def _correlations(plt, rows, path):
    deltas = sorted(set(float(r["delta[g]"]) for r in rows))
    fig, ax = plt.subplots(figsize=(5, 3.5))
    if len(deltas) > 1:
        xs = sorted(set(int(r["x"]) for r in rows))
        grid = np.full((len(deltas), len(xs)), np.nan)
        for r in rows:
            grid[deltas.index(float(r["delta[g]"])), xs.index(int(r["x"]))] = float(r["C"])
        mesh = ax.pcolormesh(xs, deltas, grid, cmap="RdBu_r", vmin=-1, vmax=1, shading="nearest")
        fig.colorbar(mesh, ax=ax, label="C(x)")
        ax.set_ylabel(r"$\Delta$ [g]")
    else:
        for key, grp in _groups(rows, ("point",)).items():
            ax.plot(_numeric(grp, "x"), _numeric(grp, "C"), ".-", label=f"point {key[0]}")
        ax.set_ylabel("C(x)")
        ax.legend(fontsize=7)
    ax.set_xlabel("x [sites]")
    fig.tight_layout()
    return _save(fig, path)


def _lambda(plt, rows, path):
    col = "lambda_fit[1/site]" if "lambda_fit[1/site]" in rows[0] else "lambda[1/site]"
    J = _numeric(rows, "J[g]")
    lam = _numeric(rows, col)
    delta = _numeric(rows, "delta[g]")
    ratio = np.round(np.divide(delta, J, out=np.zeros_like(J), where=J > 0), 6)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for rv, style in zip(sorted(set(ratio)), ("-", ":", "--", "-.")):
        sel = ratio == rv
        order = np.argsort(J[sel])
        ax.loglog(J[sel][order], lam[sel][order], style, marker=".",
                  label=rf"$\Delta = {rv:g} J$")
    good = (J > 0) & (lam > 0)
    if good.any():
        j_ref = np.geomspace(max(J[good].min(), 1.0), J[good].max(), 20)
        lam0 = np.interp(j_ref[0], np.sort(J[good]), lam[good][np.argsort(J[good])])
        ax.loglog(j_ref, lam0 * (j_ref / j_ref[0]) ** -1.0, color="gray", lw=0.7, label="slope -1")
        ax.loglog(j_ref, lam0 * (j_ref / j_ref[0]) ** -0.5, color="gray", lw=0.7, ls="--",
                  label="slope -1/2")
    ax.set_xlabel("J [g]")
    ax.set_ylabel(r"$\lambda$ [1/site]")
    ax.legend(fontsize=7)
    fig.tight_layout()
    return _save(fig, path)


def _spectrum(plt, rows, path):
    deltas = sorted(set(float(r["delta[g]"]) for r in rows))
    fig, ax = plt.subplots(figsize=(5, 3.5))
    if len(deltas) > 1:
        ws = sorted(set(float(r["omega[g]"]) for r in rows))
        grid = np.full((len(deltas), len(ws)), np.nan)
        for r in rows:
            grid[deltas.index(float(r["delta[g]"])), ws.index(float(r["omega[g]"]))] = float(r["S"])
        mesh = ax.pcolormesh(ws, deltas, grid, cmap="jet", shading="nearest")
        fig.colorbar(mesh, ax=ax, label="S (peak-normalized)")
        ax.set_ylabel(r"$\omega_\sigma$ [g]")
    else:
        ax.plot(_numeric(rows, "omega[g]"), _numeric(rows, "S"))
        ax.set_ylabel("S (peak-normalized)")
    ax.set_xlabel(r"$\omega$ [g]")
    fig.tight_layout()
    return _save(fig, path)


def _g2(plt, rows, path):
    xcol = _varying(rows, ("P_sigma[g]", "gamma_a[g]", "delta[g]"))
    x = _numeric(rows, xcol)
    order = np.argsort(x)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(x[order], _numeric(rows, "g2")[order], "o-")
    ax.axhline(1.0, color="gray", lw=0.7)
    ax.axhline(2.0, color="gray", lw=0.7, ls="--")
    ax.set_xscale("log")
    ax.set_xlabel(xcol.replace("[g]", " [g]"))
    ax.set_ylabel(r"$g^{(2)}$")
    fig.tight_layout()
    return _save(fig, path)


def emit_plots(dataset, kind, out_dir):
    """Render ``dataset`` (CSV path or ``(columns, rows)``) as SVG files.

    Returns the list of written paths.

    Raises
    ------
    ValueError
        For an unknown kind or a dataset without usable rows; no file is written.
    """
    if kind not in PLOT_KINDS:
        raise ValueError(f"unknown plot kind {kind!r}")
    columns, rows, stem = _load(dataset)
    if not rows:
        raise ValueError("empty dataset: nothing to plot")
    plt = _pyplot()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{stem}_{kind}.svg"
    try:
        if kind == "population":
            _population(plt, rows, path, ("P_sigma[g]", "delta[g]", "J[g]", "gamma_a[g]"))
        elif kind == "figure2":
            _population(plt, rows, path, ("delta[g]", "P_sigma[g]"))
        elif kind == "correlations":
            _correlations(plt, rows, path)
        elif kind == "lambda":
            _lambda(plt, rows, path)
        elif kind == "spectrum":
            _spectrum(plt, rows, path)
        elif kind == "g2":
            _g2(plt, rows, path)
    finally:
        plt.close("all")
    return [path]
