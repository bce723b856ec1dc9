import json

import numpy as np
import pytest

from threewave.config import RunConfig, config_hash
from threewave.params import Params
from threewave.plots import FigureSpec, PlotError, main, render
from threewave.weights import HolderState


def _write(path, header, rows):
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(f"{x:.17g}" for x in row) + "\n")


def _sidecar(csv_path, params=None):
    cfg = RunConfig(params=params or Params())
    meta = {"config_hash": config_hash(cfg), "seed": 0,
            "versions": {}, "config": cfg.to_dict()}
    side = csv_path.with_suffix("").with_suffix(".meta.json")
    side.write_text(json.dumps(meta))


@pytest.fixture
def decay_csv(tmp_path):
    path = tmp_path / "evolve.csv"
    rows = [(t, v, 0.1, np.exp(-t) * np.exp(-v * v))
            for t in (0.0, 0.5, 1.0) for v in (-1.0, 0.0, 1.0)]
    _write(path, "t,v,r,delta", rows)
    _sidecar(path)
    return path


@pytest.fixture
def smoothing_csv(tmp_path):
    p = Params()
    path = tmp_path / "smoothing.csv"
    rows = []
    for t in (0.0, 1.0):
        for v in (-5.0, 0.0):
            floor = HolderState.at(t, p).gamma(v)
            rows.append((t, v, floor + 0.02, floor))
    _write(path, "t,v_probe,gamma_hat,gamma_floor", rows)
    _sidecar(path, p)
    return path


@pytest.fixture
def converge_csv(tmp_path):
    path = tmp_path / "converge.csv"
    eps = [1e-1, 3e-2, 1e-2]
    rows = [(e, 0.3 * e ** 0.5, 0.5) for e in eps]
    _write(path, "eps0,sup_ratio,fitted_p", rows)
    _sidecar(path)
    return path


@pytest.fixture
def ratio_csv(tmp_path):
    path = tmp_path / "ratio.csv"
    rows = [(v, r, 0.01 + 0.001 * abs(v))
            for v in (-10.0, 0.0, 10.0) for r in (0.1, 1.0)]
    _write(path, "v,r,ratio", rows)
    _sidecar(path)
    return path


def test_each_kind_renders(tmp_path, decay_csv, smoothing_csv, converge_csv,
                           ratio_csv):
    for kind, src in [("decay", decay_csv), ("smoothing", smoothing_csv),
                      ("convergence", converge_csv), ("ratio-map", ratio_csv)]:
        out = tmp_path / f"{kind}.png"
        render(FigureSpec(csv=str(src), kind=kind, out=str(out)))
        assert out.stat().st_size > 0


def test_rendering_is_deterministic(tmp_path, decay_csv):
    a = tmp_path / "a.png"
    b = tmp_path / "b.png"
    render(FigureSpec(csv=str(decay_csv), kind="decay", out=str(a)))
    render(FigureSpec(csv=str(decay_csv), kind="decay", out=str(b)))
    assert a.read_bytes() == b.read_bytes()


def test_missing_column_is_named(tmp_path):
    path = tmp_path / "bad.csv"
    _write(path, "t,v", [(0.0, 1.0)])
    with pytest.raises(PlotError, match="delta"):
        render(FigureSpec(csv=str(path), kind="decay", out=str(tmp_path / "x.png")))


def test_unknown_kind_rejected(tmp_path):
    with pytest.raises(PlotError, match="kind"):
        FigureSpec(csv="x.csv", kind="pie", out="y.png")


def test_smoothing_floor_mismatch_detected(tmp_path):
    p = Params()
    path = tmp_path / "smoothing.csv"
    floor = HolderState.at(1.0, p).gamma(0.0)
    _write(path, "t,v_probe,gamma_hat,gamma_floor",
           [(1.0, 0.0, floor, floor + 1e-6)])
    _sidecar(path, p)
    with pytest.raises(PlotError, match="gamma_floor"):
        render(FigureSpec(csv=str(path), kind="smoothing",
                          out=str(tmp_path / "x.png")))


def test_cli_exit_codes(tmp_path, decay_csv):
    out = tmp_path / "fig.png"
    assert main(["decay", "--csv", str(decay_csv), "--out", str(out)]) == 0
    assert out.exists()
    missing = tmp_path / "nope.csv"
    assert main(["decay", "--csv", str(missing), "--out", str(out)]) == 2
