"""Command-line entry point.

``threewave <command> --config <path> [--seed N] [--out <dir>]`` with commands

* ``kernels``   -- sampled kernel values in the three representations;
* ``spectrum``  -- lowest two eigenvalues of the weighted-L2 form;
* ``evolve``    -- Duhamel evolution of a difference field;
* ``duhamel``   -- the evolved field against its time-dependent weight;
* ``converge``  -- mollification-ladder convergence table;
* ``smoothing`` -- fitted local Hölder exponents against their floor;
* ``verify``    -- the sampled inequality suite and measured constants;
* ``all``       -- everything above into one output directory.

Every table is written as a comma-delimited file with a header row and a
metadata sidecar (config hash, seed, library versions); floats carry 17
significant digits so identical configuration and seed reproduce outputs
byte for byte.  ``CK_THREADS`` caps the worker pool; work is partitioned
deterministically and merged by index, so the thread count never changes
results.  Exit status: 0 on success, 1 when a measured property fails,
2 on usage or configuration errors.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .config import ConfigError, RunConfig, config_hash, load_config
from .evolution import (compare_dpsi_delta, make_grids, smoothing_diagnostic,
                        solve_delta, tstar)
from .fields import DifferenceField, ScalarField
from .kernels import kernel_log, kernel_regularized, kernel_weighted
from .spectral_l2 import assemble_form, make_grid, spectral_gap
from .verification import (check_g_eps_lemmas, check_g_lemmas,
                           check_kernel_lemmas_D, check_tilt,
                           estimate_contraction_constants)
from .weights import weight_profiles

__all__ = ["main"]

# mollification ladder whose effect is visible at double precision: at the
# production exponents the diagonal scale collapses below 1e-26 and every
# rung produces the same bits, so the ladder is probed at admissible
# parameters with a mild tilt exponent instead
CONVERGE_TUNING = {"alpha": 0.01, "mu": 0.02, "mu_prime": 0.025, "c0": 0.833}

DEFAULT_EPS_LADDER = (1.0e-1, 3.0e-2, 1.0e-2, 3.0e-3)


def _n_workers() -> int:
    cap = os.environ.get("CK_THREADS")
    avail = os.cpu_count() or 1
    if cap:
        try:
            avail = max(1, min(avail, int(cap)))
        except ValueError:
            pass
    return avail


def _fmt(x) -> str:
    if x is None:
        return "nan"
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return f"{float(x):.17g}"


def _write_csv(path: Path, header, rows, cfg: RunConfig):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(x) for x in row) + "\n")
    meta = {
        "config_hash": config_hash(cfg),
        "seed": cfg.seed,
        "versions": {
            "threewave": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": sys.version.split()[0],
        },
        "config": cfg.to_dict(),
    }
    with open(path.with_suffix("").with_suffix(".meta.json"), "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_json(path: Path, payload, cfg: RunConfig):
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = dict(payload)
    payload["config_hash"] = config_hash(cfg)
    payload["seed"] = cfg.seed
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _render_figure(kind, csv_path, out_path):
    """Best-effort figure next to the table; skipped if plotting is absent."""
    try:
        from .plots import FigureSpec, render
    except ImportError:
        return
    try:
        render(FigureSpec(csv=str(csv_path), kind=kind, out=str(out_path)))
    except Exception as e:  # a bad figure should not fail the data run
        print(f"figure {out_path}: {e}", file=sys.stderr)


def _default_psi0() -> ScalarField:
    return ScalarField(fn=lambda v: np.exp(-0.125 * np.asarray(v, float) ** 2))


def _constants(cfg: RunConfig, cache: dict) -> dict:
    """Measured contraction constants, from options override or measurement."""
    if "constants" in cache:
        return cache["constants"]
    given = cfg.options.get("constants")
    if given is not None:
        needed = {"q0", "q1", "A"}
        missing = needed - set(given)
        if missing:
            raise ConfigError(f"options.constants missing keys: {sorted(missing)}")
        cache["constants"] = dict(given)
    else:
        cache["constants"] = estimate_contraction_constants(cfg.params, q=cfg.quadrature)
    return cache["constants"]


def _evolution_grids(cfg: RunConfig, T: float):
    g = cfg.grids
    return make_grids(T, nv=int(g.get("nv", 40)), nr=int(g.get("nr", 24)),
                      v_max=float(g.get("v_max", 12.0)),
                      n_steps=int(g.get("n_steps", 8)))


# ----------------------------------------------------------------- commands


def cmd_kernels(cfg: RunConfig, out: Path) -> int:
    n = int(cfg.options.get("n_kernel_samples", 2000))
    rng = np.random.default_rng(cfg.seed)
    u = rng.uniform(-30.0, 30.0, size=n)
    v = rng.uniform(-30.0, 30.0, size=n)
    v = np.where(u == v, v + 1.0e-9, v)
    p = cfg.params

    def _chunk(idx):
        return (kernel_log(u[idx], v[idx], p),
                kernel_weighted(u[idx], v[idx], p),
                kernel_regularized(u[idx], v[idx], p))

    parts = np.array_split(np.arange(n), _n_workers())
    parts = [idx for idx in parts if len(idx)]
    with ThreadPoolExecutor(max_workers=len(parts)) as ex:
        results = list(ex.map(_chunk, parts))
    k3 = np.concatenate([np.atleast_1d(r[0]) for r in results])
    k3bar = np.concatenate([np.atleast_1d(r[1]) for r in results])
    k3eps = np.concatenate([np.atleast_1d(r[2]) for r in results])
    rows = zip(u, v, k3, k3bar, k3eps)
    _write_csv(out / "kernels.csv", ["u", "v", "K3", "K3bar", "K3_eps"], rows, cfg)
    return 0


def cmd_spectrum(cfg: RunConfig, out: Path) -> int:
    nodes = cfg.grids.get("spectrum_nodes", [128, 256])
    rows = []
    ok = True
    for n in nodes:
        form = assemble_form(make_grid(int(n)), cfg.params)
        lam0, lam1, _ = spectral_gap(form)
        rows.append((int(n), lam0, lam1))
        ok = ok and lam1 > 0
    _write_csv(out / "spectrum.csv", ["n_nodes", "lambda0", "lambda1"], rows, cfg)
    return 0 if ok else 1


def _solve_default_delta(cfg: RunConfig, cache: dict):
    consts = _constants(cfg, cache)
    T = float(cfg.options.get("T", tstar(consts, cfg.params)))
    grids = _evolution_grids(cfg, T)
    delta0 = DifferenceField.from_scalar(_default_psi0())
    traj, report = solve_delta(delta0, T, grids, cfg.quadrature, cfg.params,
                               constants=consts)
    return traj, report, grids


def cmd_evolve(cfg: RunConfig, out: Path, cache=None) -> int:
    traj, report, grids = _solve_default_delta(cfg, cache if cache is not None else {})
    vv, rr = grids.space.meshes()
    rows = []
    for k, t in enumerate(traj.times):
        for vi, ri, di in zip(vv, rr, traj.values[k].ravel()):
            rows.append((t, vi, ri, di))
    csv = out / "evolve.csv"
    _write_csv(csv, ["t", "v", "r", "delta"], rows, cfg)
    _write_json(out / "evolve_report.json", {
        "status": report.status, "iterations": report.iterations,
        "residual": report.residual,
        "contraction_factor": report.contraction_factor,
        "f_bound_total": report.f_bound_total,
    }, cfg)
    _render_figure("decay", csv, out / "evolve_decay.png")
    return 0 if report.status == "converged" else 1


def cmd_duhamel(cfg: RunConfig, out: Path, cache=None) -> int:
    traj, report, grids = _solve_default_delta(cfg, cache if cache is not None else {})
    vv, rr = grids.space.meshes()
    rows = []
    for k, t in enumerate(traj.times):
        gam = weight_profiles(vv, rr, float(t), cfg.params)["gamma_t_w"]
        dk = traj.values[k].ravel()
        for vi, ri, di, gi in zip(vv, rr, dk, gam):
            rows.append((t, vi, ri, di, gi, abs(di) / gi))
    csv = out / "duhamel.csv"
    _write_csv(csv, ["t", "v", "r", "delta", "gamma_t", "ratio"], rows, cfg)
    _render_figure("ratio-map", csv, out / "duhamel_ratio.png")
    return 0 if report.status == "converged" else 1


def cmd_converge(cfg: RunConfig, out: Path) -> int:
    p = cfg.params
    if cfg.options.get("tuned", True):
        p = p.replace(**CONVERGE_TUNING)
    ladder = [float(e) for e in cfg.options.get("eps_ladder", DEFAULT_EPS_LADDER)]
    T = float(cfg.options.get("T", 1.0e-2))
    grids = _evolution_grids(cfg, T)
    table = compare_dpsi_delta(_default_psi0(), T, ladder, grids,
                               cfg.quadrature, p)
    rows = [(r["eps0"], r["sup_ratio"], table["fitted_p"]) for r in table["rows"]]
    csv = out / "converge.csv"
    _write_csv(csv, ["eps0", "sup_ratio", "fitted_p"], rows, cfg)
    _render_figure("convergence", csv, out / "converge.png")
    sup = [r["sup_ratio"] for r in table["rows"]]
    ok = all(b < a for a, b in zip(sup, sup[1:])) and table["fitted_p"] > 0
    return 0 if ok else 1


def cmd_smoothing(cfg: RunConfig, out: Path, cache=None) -> int:
    cache = cache if cache is not None else {}
    opts = cfg.options
    if "times" in opts:
        times = [float(t) for t in opts["times"]]
    else:
        ts = tstar(_constants(cfg, cache), cfg.params)
        times = [0.0, ts / 4.0, ts / 2.0, ts]
    v_probes = [float(v) for v in opts.get("v_probes", (-5.0, 0.0, 5.0))]
    r_ladder = opts.get("r_ladder")
    if r_ladder is None:
        r_ladder = np.geomspace(1.0e-4, 1.0e-1, 8)
    T = max(times)
    grids = _evolution_grids(cfg, T if T > 0 else 1.0)
    diag = smoothing_diagnostic(_default_psi0(), times, v_probes, r_ladder,
                                grids, cfg.quadrature, cfg.params)
    rows = [(r["t"], r["v"], r["gamma_hat"], r["gamma_floor"])
            for r in diag["rows"]]
    csv = out / "smoothing.csv"
    _write_csv(csv, ["t", "v_probe", "gamma_hat", "gamma_floor"], rows, cfg)
    _render_figure("smoothing", csv, out / "smoothing.png")
    fitted = [r for r in diag["rows"] if r["fit_ok"]]
    ok = all(r["gamma_hat"] >= r["gamma_floor"] - 0.01 for r in fitted)
    return 0 if ok else 1


def cmd_verify(cfg: RunConfig, out: Path, cache=None) -> int:
    cache = cache if cache is not None else {}
    n = int(cfg.options.get("n_samples", 100_000))
    seed = cfg.seed
    p = cfg.params
    tilt = check_tilt(p, n=n, seed=seed)
    reports = list(tilt["plain"]) + list(tilt["regularized"])
    reports += check_g_lemmas(cfg.options.get("t_values", (0.0, 0.5, 5.0)),
                              p, n=n, seed=seed)
    reports += check_g_eps_lemmas(p, n=n, seed=seed)
    reports += check_kernel_lemmas_D(p, n=n, seed=seed)
    failed = [r for r in reports if not r.passed]

    payload = {
        "reports": [r.to_dict() for r in reports],
        "probes": [tilt["gate_probe"].to_dict()],
        "n_failed": len(failed),
    }
    code = 1 if failed else 0
    try:
        consts = _constants(cfg, cache)
    except RuntimeError as e:
        payload["constants_error"] = str(e)
        code = 1
    else:
        payload["constants"] = {k: consts[k] for k in
                                ("q0", "q1", "A", "s0", "sigma", "sigma_bar")
                                if k in consts}
        if "ratio_rows" in consts:
            csv = out / "ratio.csv"
            _write_csv(csv, ["v", "r", "ratio"], consts["ratio_rows"], cfg)
            _render_figure("ratio-map", csv, out / "ratio_map.png")
        try:
            ts = tstar(consts, p)
            payload["tstar"] = ts
            lnM = math.log(p.bigM)
            payload["f_norm_bound"] = (1.0 - consts["q0"] / lnM + consts["A"] * ts
                                       + consts["q1"] / (p.bigM ** p.gamma0 * lnM))
        except ValueError as e:
            payload["tstar_error"] = str(e)
            code = 1
    _write_json(out / "verify.json", payload, cfg)
    for r in reports:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.lemma_id} "
              f"violations={r.n_violations}/{r.n_samples} "
              f"worst={r.worst_margin:.3e}")
    return code


def cmd_all(cfg: RunConfig, out: Path) -> int:
    cache = {}
    codes = [cmd_kernels(cfg, out), cmd_spectrum(cfg, out),
             cmd_verify(cfg, out, cache), cmd_evolve(cfg, out, cache),
             cmd_duhamel(cfg, out, cache), cmd_converge(cfg, out),
             cmd_smoothing(cfg, out, cache)]
    return max(codes)


_COMMANDS = {
    "kernels": cmd_kernels,
    "spectrum": cmd_spectrum,
    "evolve": cmd_evolve,
    "duhamel": cmd_duhamel,
    "converge": cmd_converge,
    "smoothing": cmd_smoothing,
    "verify": cmd_verify,
    "all": cmd_all,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="threewave",
        description="Kernel, spectral, evolution and verification runs for "
                    "the linearized three-wave collision operator.")
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", help="JSON run configuration")
    parser.add_argument("--seed", type=int, help="override the config seed")
    parser.add_argument("--out", help="override the output directory")
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0
    try:
        cfg = load_config(args.config) if args.config else RunConfig()
        if args.seed is not None:
            cfg = cfg.replace(seed=args.seed)
        if args.out is not None:
            cfg = cfg.replace(out_dir=args.out)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    try:
        return _COMMANDS[args.command](cfg, Path(cfg.out_dir))
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
