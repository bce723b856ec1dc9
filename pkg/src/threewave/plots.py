"""Figure rendering for the delimited outputs.

Each figure kind consumes one CSV produced by the command-line runner and
its metadata sidecar:

* ``decay``       -- weighted evolution tables (t, v, r, delta): sup-norm
  decay over time;
* ``smoothing``   -- fitted Hölder exponents against the exponent floor,
  which is recomputed from the sidecar parameters and must agree with the
  table column to 1e-12;
* ``convergence`` -- mollification ladder with the fitted
  (M eps0)^p ln(min(M, 1/eps0)) reference curve overlaid;
* ``ratio-map``   -- a (v, r) field colored by its ratio column, color
  scale anchored at the table minimum.

Rendering is deterministic: fixed backend, figure geometry and font
settings, and no timestamps in the output file.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .params import Params  # noqa: E402
from .weights import HolderState  # noqa: E402

__all__ = ["FigureSpec", "PlotError", "render", "main"]

KINDS = ("decay", "smoothing", "convergence", "ratio-map")

FLOOR_TOL = 1.0e-12


class PlotError(ValueError):
    """A figure that cannot be rendered from the given table."""


@dataclass(frozen=True)
class FigureSpec:
    """One figure: source table(s), kind, destination, axis options."""

    csv: str
    kind: str
    out: str
    title: str = ""
    xlabel: str = ""
    ylabel: str = ""
    logx: bool = False
    logy: bool = False
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise PlotError(f"unknown figure kind {self.kind!r}; "
                            f"expected one of {KINDS}")


def _read_table(path) -> dict:
    """Column-name -> float array; non-numeric cells become NaN."""
    path = Path(path)
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if not header:
                raise PlotError(f"{path}: empty table")
            rows = list(reader)
    except OSError as e:
        raise PlotError(f"cannot read table {path}: {e}") from e

    def _num(s):
        try:
            return float(s)
        except ValueError:
            return float("nan")

    cols = {name: np.array([_num(row[i]) for row in rows])
            for i, name in enumerate(header)}
    return cols


def _need(cols: dict, names, path) -> tuple:
    missing = [n for n in names if n not in cols]
    if missing:
        raise PlotError(f"{path}: missing column(s) {missing}; "
                        f"table has {sorted(cols)}")
    return tuple(cols[n] for n in names)


def _sidecar(path) -> dict:
    meta = Path(path).with_suffix("").with_suffix(".meta.json")
    try:
        with open(meta) as fh:
            return json.load(fh)
    except OSError as e:
        raise PlotError(f"missing metadata sidecar {meta}: {e}") from e


def _sidecar_params(path) -> Params:
    meta = _sidecar(path)
    try:
        return Params(**meta["config"]["params"])
    except (KeyError, TypeError) as e:
        raise PlotError(f"sidecar of {path} has no usable params: {e}") from e


def _new_figure():
    return plt.subplots(figsize=(6.4, 4.2), dpi=120)


def _finish(fig, ax, spec: FigureSpec, default_title, default_x, default_y):
    ax.set_title(spec.title or default_title)
    ax.set_xlabel(spec.xlabel or default_x)
    ax.set_ylabel(spec.ylabel or default_y)
    if spec.logx:
        ax.set_xscale("log")
    if spec.logy:
        ax.set_yscale("log")
    fig.tight_layout()
    Path(spec.out).parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(spec.out, metadata={"Software": None})
    plt.close(fig)


def _plot_decay(spec: FigureSpec):
    cols = _read_table(spec.csv)
    t, delta = _need(cols, ["t", "delta"], spec.csv)
    times = np.unique(t)
    sup = np.array([np.max(np.abs(delta[t == ti])) for ti in times])
    fig, ax = _new_figure()
    ax.semilogy(times, np.maximum(sup, 1.0e-300), "o-")
    _finish(fig, ax, spec, "sup-norm decay", "t", "sup |Delta_t|")


def _plot_smoothing(spec: FigureSpec):
    cols = _read_table(spec.csv)
    t, v, gh, gf = _need(cols, ["t", "v_probe", "gamma_hat", "gamma_floor"],
                         spec.csv)
    p = _sidecar_params(spec.csv)
    recomputed = np.array([HolderState.at(ti, p).gamma(vi)
                           for ti, vi in zip(t, v)])
    err = np.max(np.abs(recomputed - gf))
    if err > FLOOR_TOL:
        raise PlotError(
            f"{spec.csv}: gamma_floor disagrees with the sidecar parameters "
            f"by {err:.3e} (tolerance {FLOOR_TOL:.0e})")
    fig, ax = _new_figure()
    for vi in np.unique(v):
        m = v == vi
        order = np.argsort(t[m])
        ax.plot(t[m][order], gh[m][order], "o-", label=f"v = {vi:g}")
        ax.plot(t[m][order], recomputed[m][order], "--", color="gray")
    ax.legend(loc="best", fontsize=8)
    _finish(fig, ax, spec, "local Hölder exponent vs floor", "t", "gamma")


def _plot_convergence(spec: FigureSpec):
    cols = _read_table(spec.csv)
    eps0, sup, fitted = _need(cols, ["eps0", "sup_ratio", "fitted_p"], spec.csv)
    p_exp = float(fitted[0])
    meta = _sidecar(spec.csv)
    try:
        bigM = float(meta["config"]["params"]["bigM"])
    except (KeyError, TypeError):
        bigM = float(Params().bigM)
    # reference (M eps0)^p ln(min(M, 1/eps0)), amplitude from least squares
    shape = (bigM * eps0) ** p_exp * np.log(np.minimum(bigM, 1.0 / eps0))
    amp = float(np.sum(shape * sup) / np.sum(shape * shape))
    xs = np.geomspace(eps0.min(), eps0.max(), 200)
    ref = amp * (bigM * xs) ** p_exp * np.log(np.minimum(bigM, 1.0 / xs))
    fig, ax = _new_figure()
    ax.loglog(eps0, sup, "o", label="measured")
    ax.loglog(xs, ref, "-", label=f"fit, p = {p_exp:.3g}")
    ax.legend(loc="best", fontsize=8)
    _finish(fig, ax, spec, "mollification convergence", "eps0", "sup ratio")


def _plot_ratio_map(spec: FigureSpec):
    cols = _read_table(spec.csv)
    v, r, ratio = _need(cols, ["v", "r", "ratio"], spec.csv)
    fig, ax = _new_figure()
    sc = ax.scatter(v, r, c=ratio, s=18, cmap="viridis",
                    vmin=float(np.nanmin(ratio)))
    ax.set_yscale("log")
    fig.colorbar(sc, ax=ax, label="ratio")
    _finish(fig, ax, spec, "ratio field", "v", "r")


_RENDERERS = {
    "decay": _plot_decay,
    "smoothing": _plot_smoothing,
    "convergence": _plot_convergence,
    "ratio-map": _plot_ratio_map,
}


def render(spec: FigureSpec) -> str:
    """Render one figure; returns the output path."""
    _RENDERERS[spec.kind](spec)
    return spec.out


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="threewave-plots",
        description="Render figures from threewave CSV outputs.")
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("--csv", required=True)
    parser.add_argument("--out", required=True)
    parser.add_argument("--title", default="")
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0
    try:
        render(FigureSpec(csv=args.csv, kind=args.kind, out=args.out,
                          title=args.title))
    except PlotError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
