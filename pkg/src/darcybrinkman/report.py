"""Delimited report emission and companion figures.

CSV cells use the shortest round-trip decimal representation of each float
(Python ``repr``), missing values render as empty cells, and row order is
deterministic, so identical runs produce byte-identical files.  Figures are
rendered headlessly next to the CSVs they illustrate.
"""

from __future__ import annotations

import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .sweep import CSV_COLUMNS, ERROR_COLUMNS, ConvergenceReport


def fmt_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_csv(path: str, header, rows) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", newline="\n") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(fmt_cell(v) for v in row) + "\n")


def _savefig(fig, path: str) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


# --- sweep ---------------------------------------------------------------------

def write_sweep_csv(report: ConvergenceReport, outdir: str) -> str:
    path = os.path.join(outdir, "sweep.csv")
    rows = [[getattr(r, c) for c in CSV_COLUMNS] for r in report.rows]
    write_csv(path, CSV_COLUMNS, rows)
    return path

def write_rates_csv(report: ConvergenceReport, outdir: str) -> str:
    path = os.path.join(outdir, "rates.csv")
    rows = [[q, rate, r2] for q, (rate, r2) in report.rates.items()]
    write_csv(path, ("quantity", "rate", "r2"), rows)
    return path


def render_sweep_figures(report: ConvergenceReport, outdir: str) -> list[str]:
    ok = [r for r in report.rows if r.error is None]
    if not ok:
        return []
    eps = np.array([r.epsilon for r in ok])
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    for col in ERROR_COLUMNS:
        vals = np.array([getattr(r, col) for r in ok], dtype=float)
        if np.all(vals > 0):
            label = col
            if col in report.rates:
                label += f" (rate {report.rates[col][0]:.2f})"
            ax.loglog(eps, vals, "o-", label=label)
    ax.set_xlabel("epsilon")
    ax.set_ylabel("error vs limit solution")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    ax.set_title(f"strong convergence, grid {report.nx}x{report.ny}(+{report.nz})")
    p1 = os.path.join(outdir, "sweep_errors.png")
    _savefig(fig, p1)

    fig, axes = plt.subplots(1, 2, figsize=(9.5, 4.0))
    axes[0].semilogx(eps, [r.apriori_E for r in ok], "s-")
    axes[0].set_xlabel("epsilon")
    axes[0].set_ylabel("a-priori energy sum E")
    axes[0].grid(True, which="both", alpha=0.3)
    ratios = [r.ratio_T_N for r in ok if r.ratio_T_N is not None]
    reps = [r.epsilon for r in ok if r.ratio_T_N is not None]
    if ratios:
        axes[1].loglog(reps, ratios, "d-", label="ratio")
        axes[1].loglog(reps, ratios[0] * reps[0] / np.array(reps), "k--",
                       alpha=0.5, label="~1/eps")
        axes[1].legend(fontsize=8)
    axes[1].set_xlabel("epsilon")
    axes[1].set_ylabel("tangential/normal speed ratio")
    axes[1].grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    p2 = os.path.join(outdir, "sweep_diagnostics.png")
    _savefig(fig, p2)
    return [p1, p2]


# --- mms -----------------------------------------------------------------------

def write_mms_csv(result, outdir: str) -> list[str]:
    fields = sorted(result.errors)
    path = os.path.join(outdir, f"mms_{result.case}.csv")
    write_csv(path, ["level"] + [f"err_{f}" for f in fields], result.rows())
    rpath = os.path.join(outdir, f"mms_{result.case}_rates.csv")
    write_csv(rpath, ("field", "order", "r2"),
              [[f, *result.orders[f]] for f in sorted(result.orders)])
    return [path, rpath]


def render_mms_figure(result, outdir: str) -> str:
    hs = np.array([1.0 / n for n in result.levels])
    fig, ax = plt.subplots(figsize=(5.5, 4.2))
    for f in sorted(result.errors):
        errs = np.array(result.errors[f])
        if np.all(errs > 0):
            label = f
            if f in result.orders:
                label += f" (order {result.orders[f][0]:.2f})"
            ax.loglog(hs, errs, "o-", label=label)
    ax.loglog(hs, errs[0] * (hs / hs[0]), "k--", alpha=0.4, label="O(h)")
    ax.set_xlabel("h")
    ax.set_ylabel("L2 error")
    ax.set_title(f"manufactured case {result.case}")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    path = os.path.join(outdir, f"mms_{result.case}.png")
    _savefig(fig, path)
    return path


# --- inf-sup --------------------------------------------------------------------

def write_infsup_csv(reports, outdir: str) -> str:
    path = os.path.join(outdir, "infsup.csv")
    write_csv(path, ("problem", "level", "constant", "eigenvalue", "iterations"),
              [[r.problem, r.resolution, r.constant, r.eigenvalue,
                r.power_iterations] for r in reports])
    return path


def render_infsup_figure(reports, outdir: str) -> str:
    fig, ax = plt.subplots(figsize=(5.0, 3.8))
    levels = [r.resolution for r in reports]
    ax.plot(levels, [r.constant for r in reports], "o-")
    ax.set_xlabel("cells per direction")
    ax.set_ylabel("inf-sup constant")
    ax.set_ylim(bottom=0)
    ax.grid(True, alpha=0.3)
    ax.set_title(f"inf-sup robustness ({reports[0].problem})")
    path = os.path.join(outdir, "infsup.png")
    _savefig(fig, path)
    return path


# --- field dumps -----------------------------------------------------------------

def _dump_xy(path, xs, ys, values):
    rows = [[float(x), float(y), float(v)]
            for (x, y, v) in zip(np.ravel(xs), np.ravel(ys), np.ravel(values))]
    write_csv(path, ("x", "y", "value"), rows)


def _dump_xz(path, xs, zs, values):
    rows = [[float(x), float(z), float(v)]
            for (x, z, v) in zip(np.ravel(xs), np.ravel(zs), np.ravel(values))]
    write_csv(path, ("x", "z", "value"), rows)


def _dump_x(path, xs, values):
    write_csv(path, ("x", "value"),
              [[float(x), float(v)] for x, v in zip(xs, values)])


def dump_epsilon_fields(sol, outdir: str) -> list[str]:
    g = sol.grids
    paths = []
    XC, YC = np.meshgrid(g.x_centers, g.y_centers, indexing="ij")
    p = os.path.join(outdir, "p1.csv"); _dump_xy(p, XC, YC, sol.p1); paths.append(p)
    XU, YU = np.meshgrid(g.x_nodes, g.y_centers, indexing="ij")
    p = os.path.join(outdir, "v1_x.csv"); _dump_xy(p, XU, YU, sol.u1); paths.append(p)
    XV, YV = np.meshgrid(g.x_centers, g.y_nodes, indexing="ij")
    p = os.path.join(outdir, "v1_y.csv"); _dump_xy(p, XV, YV, sol.v1); paths.append(p)
    XP, ZP = np.meshgrid(g.x_centers, g.z_centers, indexing="ij")
    p = os.path.join(outdir, "p2.csv"); _dump_xz(p, XP, ZP, sol.p2); paths.append(p)
    XT, ZT = np.meshgrid(g.x_nodes[1:-1], g.z_centers, indexing="ij")
    p = os.path.join(outdir, "vT2.csv"); _dump_xz(p, XT, ZT, sol.vT); paths.append(p)
    XN, ZN = np.meshgrid(g.x_centers, g.z_nodes, indexing="ij")
    p = os.path.join(outdir, "vN2.csv"); _dump_xz(p, XN, ZN, sol.vN); paths.append(p)
    return paths


def dump_limit_fields(sol, outdir: str) -> list[str]:
    g = sol.grids
    paths = []
    XC, YC = np.meshgrid(g.x_centers, g.y_centers, indexing="ij")
    p = os.path.join(outdir, "p1.csv"); _dump_xy(p, XC, YC, sol.p1); paths.append(p)
    XU, YU = np.meshgrid(g.x_nodes, g.y_centers, indexing="ij")
    p = os.path.join(outdir, "v1_x.csv"); _dump_xy(p, XU, YU, sol.u1); paths.append(p)
    XV, YV = np.meshgrid(g.x_centers, g.y_nodes, indexing="ij")
    p = os.path.join(outdir, "v1_y.csv"); _dump_xy(p, XV, YV, sol.v1); paths.append(p)
    p = os.path.join(outdir, "p2.csv"); _dump_x(p, g.x_centers, sol.p2); paths.append(p)
    p = os.path.join(outdir, "vT2.csv"); _dump_x(p, g.x_nodes[1:-1], sol.vT); paths.append(p)
    XN, ZN = np.meshgrid(g.x_centers, g.z_nodes, indexing="ij")
    p = os.path.join(outdir, "xi.csv"); _dump_xz(p, XN, ZN, sol.xi); paths.append(p)
    return paths


def render_field_figure(sol, outdir: str, kind: str) -> str:
    """Two-region overview: pressures as heatmaps, interface profiles below."""
    g = sol.grids
    fig, axes = plt.subplots(2, 2, figsize=(10, 7.5))
    im = axes[0, 0].pcolormesh(g.x_nodes, g.y_nodes, sol.p1.T, shading="flat")
    axes[0, 0].set_title("porous pressure p1")
    fig.colorbar(im, ax=axes[0, 0])
    if kind == "eps":
        im = axes[0, 1].pcolormesh(g.x_nodes, g.z_nodes, sol.p2.T, shading="flat")
        axes[0, 1].set_title("channel pressure p2")
        fig.colorbar(im, ax=axes[0, 1])
        axes[1, 1].plot(g.x_nodes[1:-1], sol.vT[:, 0], label="vT (bottom row)")
        axes[1, 1].set_title("tangential velocity near Gamma")
    else:
        axes[0, 1].plot(g.x_centers, sol.p2)
        axes[0, 1].set_title("interface pressure p2(x)")
        axes[1, 1].plot(g.x_nodes[1:-1], sol.vT, label="vT2")
        axes[1, 1].set_title("interface tangential velocity")
    axes[1, 0].plot(g.x_centers, sol.interface_vn)
    axes[1, 0].set_title("interface normal velocity v1.n")
    for ax in axes.flat:
        ax.grid(True, alpha=0.3)
    fig.tight_layout()
    path = os.path.join(outdir, "fields.png")
    _savefig(fig, path)
    return path
