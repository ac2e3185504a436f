"""Render the spectra figures from scenario CSV files.

Input schemas (produced by the floquet-dce CLI):

  <name>_sweep.csv     omega0_prime,branch_id,re_z,im_z,sheet_plus,sheet_minus,residual
  <name>_critical.csv  kind,omega0_prime,re_z,im_z,branches

Bifurcation points are drawn as open circles, stationary points as filled
circles (gray when they sit inside a zoom panel of the shifted-band
figure, black otherwise).  fig5 additionally renders the two zoomed panels
around its critical points.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

SWEEP_COLUMNS = ["omega0_prime", "branch_id", "re_z", "im_z",
                 "sheet_plus", "sheet_minus", "residual"]
CRITICAL_COLUMNS = ["kind", "omega0_prime", "re_z", "im_z", "branches"]


class SchemaError(ValueError):
    """CSV header or field types do not match the documented schema."""


def _check_header(found: list[str] | None, expected: list[str], path: Path):
    if found is None or [h.strip() for h in found] != expected:
        raise SchemaError(
            f"{path}: header {found} does not match the documented schema {expected}")


def read_sweep_csv(path: str | Path) -> dict[int, np.ndarray]:
    """Branch id -> array of (omega0', Re z', Im z') rows, sweep order kept."""
    path = Path(path)
    branches: dict[int, list[tuple[float, float, float]]] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        _check_header(next(reader, None), SWEEP_COLUMNS, path)
        for i, row in enumerate(reader, start=2):
            try:
                om, bid = float(row[0]), int(row[1])
                re_z, im_z = float(row[2]), float(row[3])
            except (ValueError, IndexError) as exc:
                raise SchemaError(f"{path}:{i}: bad sweep row {row!r}: {exc}") from exc
            branches.setdefault(bid, []).append((om, re_z, im_z))
    return {bid: np.asarray(rows) for bid, rows in branches.items()}


def read_critical_csv(path: str | Path) -> list[dict]:
    path = Path(path)
    out = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        _check_header(next(reader, None), CRITICAL_COLUMNS, path)
        for i, row in enumerate(reader, start=2):
            try:
                out.append({"kind": row[0], "omega0_prime": float(row[1]),
                            "re_z": float(row[2]), "im_z": float(row[3]),
                            "branches": row[4]})
            except (ValueError, IndexError) as exc:
                raise SchemaError(f"{path}:{i}: bad critical row {row!r}: {exc}") from exc
    return out


MARKERS = {
    "exceptional": dict(marker="o", s=70, facecolors="none", edgecolors="k", zorder=5),
    "stationary": dict(marker="o", s=55, facecolors="k", edgecolors="k", zorder=5),
    "stationary-gray": dict(marker="o", s=55, facecolors="0.55", edgecolors="0.35", zorder=5),
}


@dataclass
class FigureSpec:
    name: str
    sweep_csv: Path
    critical_csv: Path | None = None
    xlim: tuple[float, float] | None = None
    ylim: tuple[float, float] | None = None
    zooms: list[tuple[float, float, float, float]] = field(default_factory=list)
    formats: tuple[str, ...] = ("png", "pdf")


def _plot_branches(ax, branches: dict[int, np.ndarray], markersize=1.2):
    for bid in sorted(branches):
        pts = branches[bid]
        ax.plot(pts[:, 0], pts[:, 2], ".", ms=markersize, color=f"C{bid % 10}")


def _plot_critical(ax, criticals, gray_window=None):
    for p in criticals:
        style = MARKERS["exceptional"]
        if p["kind"] == "stationary":
            in_gray = gray_window is not None and \
                gray_window[0] <= p["omega0_prime"] <= gray_window[1]
            style = MARKERS["stationary-gray"] if in_gray else MARKERS["stationary"]
        ax.scatter([p["omega0_prime"]], [p["im_z"]], **style)


def render(spec: FigureSpec, out_dir: str | Path) -> list[Path]:
    """One figure per spec; fig5 gets the zoom panels below the overview."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    branches = read_sweep_csv(spec.sweep_csv)
    criticals = read_critical_csv(spec.critical_csv) if spec.critical_csv else []

    if spec.zooms:
        fig = plt.figure(figsize=(9, 7))
        gs = fig.add_gridspec(2, len(spec.zooms), height_ratios=[1.6, 1.0])
        ax = fig.add_subplot(gs[0, :])
        axz = [fig.add_subplot(gs[1, i]) for i in range(len(spec.zooms))]
    else:
        fig, ax = plt.subplots(figsize=(8, 5))
        axz = []

    _plot_branches(ax, branches)
    gray = spec.zooms[0][:2] if spec.zooms else None
    _plot_critical(ax, criticals, gray_window=gray)
    ax.axhline(0.0, lw=0.5, color="0.7")
    ax.set_xlabel(r"$\omega_0' = \omega_0 - \Omega/2$  [B]")
    ax.set_ylabel(r"Im $z'$  [B]")
    ax.set_title(f"{spec.name}: imaginary parts of the eigenvalue branches")
    if spec.xlim:
        ax.set_xlim(*spec.xlim)
    if spec.ylim:
        ax.set_ylim(*spec.ylim)

    for axi, (x0, x1, y0, y1) in zip(axz, spec.zooms):
        _plot_branches(axi, branches, markersize=2.0)
        _plot_critical(axi, criticals, gray_window=(x0, x1))
        axi.axhline(0.0, lw=0.5, color="0.7")
        axi.set_xlim(x0, x1)
        axi.set_ylim(y0, y1)
        axi.set_xlabel(r"$\omega_0'$  [B]")
        if spec.zooms:
            ax.add_patch(plt.Rectangle((x0, y0), x1 - x0, y1 - y0, fill=False,
                                       ls=":", lw=1.0, color="0.3"))
    fig.tight_layout()
    written = []
    for fmt in spec.formats:
        path = out_dir / f"{spec.name}.{fmt}"
        fig.savefig(path, dpi=180)
        written.append(path)
    plt.close(fig)
    return written


def _zooms_from_critical(criticals, branches) -> list[tuple[float, float, float, float]]:
    """Data-driven zoom windows around stationary and band-edge points."""
    zooms = []
    stats = [p for p in criticals if p["kind"] == "stationary" and p["omega0_prime"] > 0]
    eps = [p for p in criticals if p["kind"] == "exceptional" and p["omega0_prime"] > 1.0]
    if stats:
        om = stats[0]["omega0_prime"]
        zooms.append((max(0.0, om - 0.15), om + 0.35, -0.05, 0.05))
    if eps:
        om = max(p["omega0_prime"] for p in eps)
        zooms.append((om - 0.15, om + 0.15, -0.01, 0.01))
    return zooms


def figure_spec_for(scenario: str, in_dir: str | Path,
                    formats: tuple[str, ...] = ("png", "pdf")) -> FigureSpec:
    in_dir = Path(in_dir)
    sweep = in_dir / f"{scenario}_sweep.csv"
    critical = in_dir / f"{scenario}_critical.csv"
    if not sweep.exists():
        raise FileNotFoundError(f"missing sweep CSV {sweep}")
    spec = FigureSpec(name=scenario, sweep_csv=sweep,
                      critical_csv=critical if critical.exists() else None,
                      formats=formats)
    if scenario == "fig5":
        criticals = read_critical_csv(critical) if critical.exists() else []
        branches = read_sweep_csv(sweep)
        spec.zooms = _zooms_from_critical(criticals, branches)
        spec.ylim = (-0.5, 0.5)
    return spec


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(prog="floquet-dce-figs")
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("render", help="render one scenario's figure from CSVs")
    p.add_argument("--scenario", required=True, help="fig4 | fig5 | fig6 | any prefix")
    p.add_argument("--in", dest="in_dir", required=True)
    p.add_argument("--out", dest="out_dir", required=True)
    p.add_argument("--formats", default="png,pdf",
                   help="comma-separated output formats (raster and vector)")
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    try:
        spec = figure_spec_for(args.scenario, args.in_dir,
                               tuple(args.formats.split(",")))
        written = render(spec, args.out_dir)
    except (SchemaError, FileNotFoundError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for path in written:
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
