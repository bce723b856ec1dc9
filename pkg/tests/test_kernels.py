import mpmath
import numpy as np
import pytest

from threewave.kernels import (eps_pair, eps_scale, k3_1, k3_1_down, k3_2,
                               k3_2_down, k3_down, k3_reg_down, k3_reg_up,
                               k3_up, k3bar_1, k3bar_1_up, k3bar_2,
                               k3bar_2_up, kernel_log, kernel_regularized,
                               kernel_weighted, nu_density, reg_factor)

mpmath.mp.dps = 40


def _k3_oracle(v, w, p):
    """Flat kernel from its printed formula at 40-digit precision."""
    v, w = mpmath.mpf(v), mpmath.mpf(w)
    L = lambda s: mpmath.log(1 + mpmath.exp(s))
    hi, lo = max(v, w), min(v, w)
    core = (4 * p.nbar * L(v) ** mpmath.mpf("-1.5") * L(w)
            * (1 + 2 * mpmath.exp(-hi)) / (1 + mpmath.exp(-v) + mpmath.exp(-w)))
    return float(core * mpmath.exp(-max(w - v, 0)) / (1 - mpmath.exp(-(hi - lo))))


def test_kernel_log_matches_high_precision_formula(p, rng):
    v = rng.uniform(-25, 25, 200)
    w = rng.uniform(-25, 25, 200)
    w[w == v] += 0.5
    got = kernel_log(v, w, p)
    for vi, wi, gi in zip(v, w, got):
        ref = _k3_oracle(vi, wi, p)
        assert abs(gi - ref) <= 1e-12 * abs(ref)


def test_kernel_log_raises_on_diagonal(p):
    with pytest.raises(ValueError):
        kernel_log(1.0, 1.0, p)


def test_nu_density_formula(rng):
    w = rng.uniform(-30, 30, 50)
    ref = np.exp(-w) * np.log1p(np.exp(w)) ** 2.5
    assert np.allclose(nu_density(w), ref, rtol=1e-12)


def test_weighted_kernel_symmetry_and_relation(p, rng):
    u = rng.uniform(-20, 20, 300)
    v = rng.uniform(-20, 20, 300)
    v[v == u] += 0.25
    kb = kernel_weighted(u, v, p)
    assert np.allclose(kb, kernel_weighted(v, u, p), rtol=1e-12)
    assert np.allclose(kernel_log(u, v, p), kb * nu_density(v), rtol=1e-11)


def test_down_splits_sum_to_kernel(p, rng):
    v = rng.uniform(-20, 20, 300)
    w = v - np.exp(rng.uniform(np.log(1e-8), np.log(20.0), 300))
    total = k3_1(v, w, p) + k3_2(v, w, p)
    assert np.allclose(total, kernel_log(v, w, p), rtol=1e-12)


def test_up_splits_sum_to_kernel(p, rng):
    v = rng.uniform(-20, 20, 300)
    w = v + np.exp(rng.uniform(np.log(1e-8), np.log(20.0), 300))
    total = k3bar_1(v, w, p) + k3bar_2(v, w, p)
    assert np.allclose(total, kernel_log(v, w, p), rtol=1e-12)


def test_radial_forms_match_two_argument_forms(p, rng):
    v = rng.uniform(-15, 15, 200)
    rho = np.exp(rng.uniform(np.log(1e-6), np.log(10.0), 200))
    # both sides must see the same representable radius
    dn = v - (v - rho)
    up = (v + rho) - v
    assert np.allclose(k3_down(v, dn, p), kernel_log(v, v - dn, p), rtol=1e-12)
    assert np.allclose(k3_up(v, up, p), kernel_log(v, v + up, p), rtol=1e-12)
    assert np.allclose(k3_1_down(v, dn, p), k3_1(v, v - dn, p), rtol=1e-12)
    assert np.allclose(k3_2_down(v, dn, p), k3_2(v, v - dn, p), rtol=1e-12)
    assert np.allclose(k3bar_1_up(v, up, p), k3bar_1(v, v + up, p), rtol=1e-12)
    assert np.allclose(k3bar_2_up(v, up, p), k3bar_2(v, v + up, p), rtol=1e-12)


def test_eps_scale_formula(p):
    # flat below the knee at a1 = a/c0, exponential decay above
    assert eps_scale(-50.0, p) == eps_scale(p.a1, p)
    v = p.a1 + 3.0
    ref = p.eps0 * np.exp(-(p.mu_prime / p.gamma0) * v)
    assert eps_scale(v, p) == pytest.approx(ref, rel=1e-14)
    assert eps_pair(0.0, v, p) == eps_scale(v, p)


def test_reg_factor_range_and_saturation():
    assert reg_factor(1e-3, 5.0) == 1.0
    assert 0 < reg_factor(1e-3, 1e-5) < 1.0
    assert reg_factor(2.0, 2.0) == 1.0


def test_regularized_sandwich(p, rng):
    # the default mollification scale is far below float resolution, so the
    # sandwich is also exercised at a hugely inflated (still admissible) eps0
    for pp in (p, p.replace(eps0=1e22)):
        u = rng.uniform(-25, 25, 500)
        v = rng.uniform(-25, 25, 500)
        v[v == u] += 0.3
        k = kernel_log(u, v, pp)
        ke = kernel_regularized(u, v, pp)
        assert np.all(ke >= 0)
        assert np.all(ke <= k * (1 + 1e-12))
        far = np.abs(u - v) >= eps_pair(u, v, pp)
        assert np.allclose(ke[far], k[far], rtol=1e-12)


def test_regularized_strict_inside_layer(p, rng):
    pp = p.replace(eps0=1e22)  # lifts eps(v) to ~8.6e-3 below the knee
    u = rng.uniform(-20, 10, 200)
    eps = eps_scale(u, p=pp)
    v = u + eps * rng.uniform(0.05, 0.95, 200)
    assert np.all(kernel_regularized(u, v, pp) < kernel_log(u, v, pp))


def test_regularized_finite_on_diagonal(p):
    # the mollified kernel extends continuously across u = v
    val = kernel_regularized(1.0, 1.0, p)
    assert np.isfinite(val) and val > 0


def test_radial_regularized_match(p, rng):
    v = rng.uniform(-15, 15, 100)
    rho = np.exp(rng.uniform(np.log(1e-9), np.log(5.0), 100))
    dn = v - (v - rho)
    up = (v + rho) - v
    assert np.allclose(k3_reg_down(v, dn, p),
                       kernel_regularized(v, v - dn, p), rtol=1e-11)
    assert np.allclose(k3_reg_up(v, up, p),
                       kernel_regularized(v, v + up, p), rtol=1e-11)
