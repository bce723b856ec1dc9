import numpy as np
import pytest

from threewave.evolution import (EvolutionGrids, ProductGrid, TimeGrid,
                                 make_grids, solve_delta, solve_psi_eps,
                                 tstar)
from threewave.fields import DifferenceField, ScalarField


def _psi0():
    return ScalarField(fn=lambda v: np.exp(-0.125 * np.asarray(v, float) ** 2))


def test_product_grid_validation():
    with pytest.raises(ValueError):
        ProductGrid([0.0, 0.0, 1.0], [0.1, 0.2])
    with pytest.raises(ValueError):
        ProductGrid([0.0, 1.0], [0.0, 0.1])
    g = ProductGrid.make(nv=10, nr=6)
    vv, rr = g.meshes()
    assert vv.shape == rr.shape == (60,)


def test_time_grid_uniform():
    tg = TimeGrid.uniform(2.0, 4)
    assert tg.array[0] == 0.0 and tg.array[-1] == 2.0 and len(tg.array) == 5


def test_tstar_formula(p):
    consts = {"q0": 0.006, "q1": 1e-13, "A": 1e8}
    lnM = np.log(p.bigM)
    ref = 0.5 * (0.006 - 1e-13 / p.bigM ** p.gamma0) / (1e8 * lnM)
    assert tstar(consts, p) == pytest.approx(ref, rel=1e-14)
    with pytest.raises(ValueError):
        tstar({"q0": -1.0, "q1": 0.0, "A": 1.0}, p)


def test_solve_delta_converges_and_zero_data_stays_zero(p, q):
    T = 1e-10
    grids = make_grids(T, nv=16, nr=10, n_steps=3)
    zero = DifferenceField(lambda v, r: np.zeros_like(np.asarray(v, float)),
                           is_difference=True)
    traj, report = solve_delta(zero, T, grids, q, p)
    assert report.status == "converged"
    assert np.max(np.abs(traj.values)) == 0.0


def test_solve_delta_short_horizon_tracks_initial_data(p, q):
    T = 1e-10
    grids = make_grids(T, nv=16, nr=10, n_steps=3)
    delta0 = DifferenceField.from_scalar(_psi0())
    traj, report = solve_delta(delta0, T, grids, q, p)
    assert report.status == "converged"
    vv, rr = grids.space.meshes()
    d0 = delta0(vv, rr)
    # over a vanishing horizon the field barely moves
    drift = np.max(np.abs(traj.values[-1].ravel() - d0))
    assert drift <= 1e-6 * max(1.0, np.max(np.abs(d0)))


def test_solve_psi_eps_decays_in_weighted_norm(p, q):
    from threewave.kernels import nu_density

    T = 1.0
    grids = make_grids(T, nv=24, nr=10, n_steps=4)
    traj, report = solve_psi_eps(_psi0(), T, grids, q, p)
    assert report.status == "converged"
    assert 0 < report.contraction_factor < 1
    vn = grids.space.v_nodes
    w = np.gradient(vn) * nu_density(vn)

    def norm(y):
        return float(np.sqrt(np.sum(w * y * y)))

    assert norm(traj.values[-1]) < norm(traj.values[0])


def test_trajectory_field_accessor_interpolates(p, q):
    T = 1e-10
    grids = make_grids(T, nv=16, nr=10, n_steps=2)
    delta0 = DifferenceField.from_scalar(_psi0())
    traj, _ = solve_delta(delta0, T, grids, q, p)
    f = traj[0]
    vv, rr = grids.space.meshes()
    k = 37
    assert f(vv[k], rr[k]) == pytest.approx(traj.values[0].ravel()[k], rel=1e-10)
