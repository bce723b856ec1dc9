"""Closed-form collision kernels.

Energy-variable kernel H(x, y), the flat log-variable kernel K3(v, w) with its
two analytic branches, the weighted kernel Kbar3(u, v) of the L^2 picture, the
near/far splittings used by the operator decomposition, and the diagonal
regularization K3^eps.

Conventions
-----------
* The flat and weighted kernels are singular on the diagonal (a
  1/(1 - e^{-|u-v|}) blow-up); evaluating them at u = v raises ``ValueError``.
  Only the regularized kernel is extended continuously across the diagonal.
* Branch dispatch at v > w versus w > v is strict.
* The flat and weighted pictures are tied together by
  K3(u, v) = Kbar3(u, v) * nu(v), which fixes the Jacobian convention of the
  log-variable change x = ln(1 + e^v).
"""

from __future__ import annotations

import numpy as np

from .numerics import bose_einstein, log1pexp, one_minus_exp_neg
from .params import Params

__all__ = [
    "bose_einstein",
    "hbar_sq",
    "kernel_energy",
    "kernel_log",
    "nu_density",
    "kernel_weighted",
    "kernel_splits",
    "k3_1",
    "k3_2",
    "k3bar_1",
    "k3bar_2",
    "eps_scale",
    "eps_pair",
    "reg_factor",
    "kernel_regularized",
    "k3_1_reg",
    "k3_2_reg",
    "k3bar_1_reg",
    "k3bar_2_reg",
]


def _as_arrays(*xs):
    arrs = np.broadcast_arrays(*[np.asarray(x, dtype=float) for x in xs])
    return arrs


def _ret(x):
    x = np.asarray(x)
    return float(x) if x.ndim == 0 else x


def hbar_sq(x):
    """hbar(x)^2 = (x^{5/2} f_BE(x) (1+f_BE(x)))^{-1} = x^{-5/2} e^x (1-e^{-x})^2."""
    x = np.asarray(x, dtype=float)
    return x ** (-2.5) * np.exp(x) * one_minus_exp_neg(x) ** 2


def kernel_energy(x, y, p: Params):
    """Energy-variable kernel H(x, y), positive and finite off the diagonal.

    H(x,y) = 4 nbar hbar(x)^2 x y e^{-min} f_BE(|x-y|) (1+f_BE(max))
             (1+f_BE(x+y)) (1+e^{-max}).
    """
    x, y = _as_arrays(x, y)
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("kernel_energy requires positive energies")
    if np.any(x == y):
        raise ValueError("kernel_energy is singular on the diagonal x = y")
    lo = np.minimum(x, y)
    hi = np.maximum(x, y)
    ftilde_hi = 1.0 + bose_einstein(hi)
    ftilde_sum = 1.0 + bose_einstein(x + y)
    val = (
        4.0
        * p.nbar
        * hbar_sq(x)
        * x
        * y
        * np.exp(-lo)
        * bose_einstein(hi - lo)
        * ftilde_hi
        * ftilde_sum
        * (1.0 + np.exp(-hi))
    )
    return _ret(val)


def _k3_core(v, w):
    """Common prefactor 4 L(v)^{-3/2} L(w) (1+2e^{-max})/(1+e^{-v}+e^{-w}).

    This is the branch-independent part of the flat kernel (the printed
    branches differ only in the singular factor); equal to K3^2 for v > w.
    """
    lv = log1pexp(v)
    lw = log1pexp(w)
    hi = np.maximum(v, w)
    g = (1.0 + 2.0 * np.exp(-hi)) / (1.0 + np.exp(-v) + np.exp(-w))
    return 4.0 * np.asarray(lv) ** (-1.5) * lw * g


def kernel_log(v, w, p: Params):
    """Flat log-variable kernel K3(v, w); strict two-branch formula."""
    v, w = _as_arrays(v, w)
    if np.any(v == w):
        raise ValueError("kernel_log is singular on the diagonal v = w")
    r = np.abs(v - w)
    sing = np.exp(-np.maximum(w - v, 0.0)) / one_minus_exp_neg(r)
    return _ret(p.nbar * _k3_core(v, w) * sing)


def nu_density(w):
    """L^2 weight density nu(w) = e^{-w} (ln(1+e^w))^{5/2}."""
    w = np.asarray(w, dtype=float)
    return _ret(np.exp(-w) * np.asarray(log1pexp(w)) ** 2.5)


def kernel_weighted(u, v, p: Params):
    """Weighted kernel Kbar3(u, v), symmetric in (u, v).

    Kbar3 = 4 nbar [L(u)L(v)]^{-3/2} e^{-|u-v|}/(1+e^{-min}+e^{-max})
            (2+e^{max})/(1-e^{-|u-v|}), and K3(u,v) = Kbar3(u,v) nu(v).
    """
    u, v = _as_arrays(u, v)
    if np.any(u == v):
        raise ValueError("kernel_weighted is singular on the diagonal u = v")
    lo = np.minimum(u, v)
    hi = np.maximum(u, v)
    r = hi - lo
    lu = np.asarray(log1pexp(u))
    lv = np.asarray(log1pexp(v))
    # (2+e^{hi})/(1+e^{-lo}+e^{-hi}) rewritten with e^{-hi} to avoid overflow
    mid = (2.0 * np.exp(-hi) + 1.0) / (np.exp(-hi) + np.exp(-hi - lo) + np.exp(-2.0 * hi))
    val = 4.0 * p.nbar * (lu * lv) ** (-1.5) * np.exp(-r) * mid / one_minus_exp_neg(r)
    return _ret(val)


def k3_1(v, w, p: Params):
    """Near-branch split K3^1(v, w) for v > w: K3 with the extra e^{-(v-w)} decay."""
    v, w = _as_arrays(v, w)
    if np.any(v <= w):
        raise ValueError("k3_1 requires v > w")
    r = v - w
    return _ret(p.nbar * _k3_core(v, w) * np.exp(-r) / one_minus_exp_neg(r))


def k3_2(v, w, p: Params):
    """Split K3^2(v, w) for v > w: no line singularity."""
    v, w = _as_arrays(v, w)
    if np.any(v <= w):
        raise ValueError("k3_2 requires v > w")
    return _ret(p.nbar * _k3_core(v, w))


def k3bar_1(v, w, p: Params):
    """Split K3bar^1(v, w) = K3(v, w)(1 - e^{-(w-v)/2}) for w > v."""
    v, w = _as_arrays(v, w)
    if np.any(w <= v):
        raise ValueError("k3bar_1 requires w > v")
    return _ret(kernel_log(v, w, p) * one_minus_exp_neg(0.5 * (w - v)))


def k3bar_2(v, w, p: Params):
    """Split K3bar^2(v, w) = K3(v, w) e^{-(w-v)/2} for w > v."""
    v, w = _as_arrays(v, w)
    if np.any(w <= v):
        raise ValueError("k3bar_2 requires w > v")
    return _ret(kernel_log(v, w, p) * np.exp(-0.5 * (w - v)))


def kernel_splits(v, w, p: Params):
    """The split pair at (v, w): (K3^1, K3^2) if v > w, (K3bar^1, K3bar^2) if w > v."""
    v = float(v)
    w = float(w)
    if v == w:
        raise ValueError("kernel_splits is singular on the diagonal v = w")
    if v > w:
        return k3_1(v, w, p), k3_2(v, w, p)
    return k3bar_1(v, w, p), k3bar_2(v, w, p)


# Radial forms: the second argument is v -/+ rho with the separation rho given
# exactly, so the singular factor 1/(1 - e^{-rho}) never loses the distance to
# floating-point cancellation. Needed for quadrature at radii below ~1e-16.

def k3_down(v, rho, p: Params):
    """K3(v, v - rho) for rho > 0."""
    v, rho = _as_arrays(v, rho)
    return _ret(p.nbar * _k3_core(v, v - rho) / one_minus_exp_neg(rho))


def k3_up(v, rho, p: Params):
    """K3(v, v + rho) for rho > 0."""
    v, rho = _as_arrays(v, rho)
    return _ret(p.nbar * _k3_core(v, v + rho) * np.exp(-rho) / one_minus_exp_neg(rho))


def k3_1_down(v, rho, p: Params):
    """K3^1(v, v - rho) = K3(v, v - rho) e^{-rho}."""
    v, rho = _as_arrays(v, rho)
    return _ret(p.nbar * _k3_core(v, v - rho) * np.exp(-rho) / one_minus_exp_neg(rho))


def k3_2_down(v, rho, p: Params):
    """K3^2(v, v - rho) = K3(v, v - rho)(1 - e^{-rho}); finite at rho = 0."""
    v, rho = _as_arrays(v, rho)
    return _ret(p.nbar * _k3_core(v, v - rho))


def k3bar_1_up(v, rho, p: Params):
    """Kbar3^1(v, v + rho) = K3(v, v + rho)(1 - e^{-rho/2})."""
    v, rho = _as_arrays(v, rho)
    return _ret(np.asarray(k3_up(v, rho, p)) * one_minus_exp_neg(0.5 * rho))


def k3bar_2_up(v, rho, p: Params):
    """Kbar3^2(v, v + rho) = K3(v, v + rho) e^{-rho/2}."""
    v, rho = _as_arrays(v, rho)
    return _ret(np.asarray(k3_up(v, rho, p)) * np.exp(-0.5 * rho))


def _reg_rad(core, decay, rho, eps):
    """Assemble core * decay * regularized singular factor with exact radius."""
    rho = np.asarray(rho, dtype=float)
    eps = np.asarray(eps, dtype=float)
    with np.errstate(over="ignore"):
        out = np.where(
            rho < eps,
            core * decay / one_minus_exp_neg(eps),
            core * decay / one_minus_exp_neg(np.maximum(rho, 1.0e-300)),
        )
    return out


def k3_reg_down(v, rho, p: Params):
    """K3^eps(v, v - rho) with eps = eps(v); smooth across rho = 0."""
    v, rho = _as_arrays(v, rho)
    core = p.nbar * np.asarray(_k3_core(v, v - rho))
    return _ret(_reg_rad(core, 1.0, rho, np.asarray(eps_scale(v, p))))


def k3_reg_up(v, rho, p: Params):
    """K3^eps(v, v + rho) with eps = eps(v + rho)."""
    v, rho = _as_arrays(v, rho)
    core = p.nbar * np.asarray(_k3_core(v, v + rho))
    return _ret(_reg_rad(core, np.exp(-rho), rho, np.asarray(eps_scale(v + rho, p))))


def k3_1_reg_down(v, rho, eps, p: Params):
    """K3^{1, eps}(v, v - rho) with an explicitly supplied mollification scale."""
    v, rho = _as_arrays(v, rho)
    core = p.nbar * np.asarray(_k3_core(v, v - rho))
    return _ret(_reg_rad(core, np.exp(-rho), rho, eps))


def k3_2_reg_down(v, rho, eps, p: Params):
    """K3^{2, eps}(v, v - rho) = K3^2 * (1 - e^{-min(eps, rho)})/(1 - e^{-eps})."""
    v, rho = _as_arrays(v, rho)
    core = p.nbar * np.asarray(_k3_core(v, v - rho))
    return _ret(core * np.asarray(reg_factor(eps, rho)))


def k3bar_1_reg_up(v, rho, eps, p: Params):
    """Kbar3^{1, eps}(v, v + rho) = K3^eps(v, v + rho)(1 - e^{-rho/2})."""
    v, rho = _as_arrays(v, rho)
    core = p.nbar * np.asarray(_k3_core(v, v + rho))
    return _ret(_reg_rad(core, np.exp(-rho), rho, eps) * one_minus_exp_neg(0.5 * rho))


def k3bar_2_reg_up(v, rho, p: Params):
    """Kbar3^{2, eps(v+rho)}(v, v + rho) = K3^eps(v, v + rho) e^{-rho/2}."""
    v, rho = _as_arrays(v, rho)
    core = p.nbar * np.asarray(_k3_core(v, v + rho))
    eps = np.asarray(eps_scale(v + rho, p))
    return _ret(_reg_rad(core, np.exp(-rho), rho, eps) * np.exp(-0.5 * rho))


def eps_scale(v, p: Params):
    """Diagonal regularization scale eps(v) = eps0 e^{-(mu'/gamma0) max(a1, v)}."""
    v = np.asarray(v, dtype=float)
    return _ret(p.eps0 * np.exp(-(p.mu_prime / p.gamma0) * np.maximum(p.a1, v)))


def eps_pair(u, v, p: Params):
    """eps(u, v) = eps(max(u, v))."""
    return eps_scale(np.maximum(np.asarray(u, float), np.asarray(v, float)), p)


def reg_factor(eps, dist):
    """Mollifier (1 - e^{-min(eps, dist)})/(1 - e^{-eps}); in [0, 1], = 1 for dist >= eps."""
    eps = np.asarray(eps, dtype=float)
    dist = np.asarray(dist, dtype=float)
    return _ret(one_minus_exp_neg(np.minimum(eps, dist)) / one_minus_exp_neg(eps))


def kernel_regularized(u, v, p: Params):
    """Regularized kernel K3^eps(u, v) = K3 * reg_factor, extended across u = v.

    Satisfies 0 <= K3^eps <= K3 with equality whenever |u - v| >= eps(u, v).
    On the diagonal it takes the continuous-extension value
    nbar * core(u, u) / (1 - e^{-eps(u, u)}).
    """
    u, v = _as_arrays(u, v)
    eps = np.asarray(eps_pair(u, v, p))
    r = np.abs(u - v)
    core = p.nbar * np.asarray(_k3_core(u, v))
    # K3 * (1-e^{-min(eps,r)})/(1-e^{-eps}) with the 1/(1-e^{-r}) singularity
    # cancelled analytically when r < eps (incl. the diagonal itself).
    out = np.empty_like(core)
    decay_all = np.exp(-np.maximum(np.asarray(v) - np.asarray(u), 0.0))
    inner = r < eps
    if np.any(inner):
        out[inner] = core[inner] * decay_all[inner] / one_minus_exp_neg(eps[inner])
    outer = ~inner
    if np.any(outer):
        out[outer] = core[outer] * decay_all[outer] / one_minus_exp_neg(r[outer])
    return _ret(out)


def k3_1_reg(v, w, eps, p: Params):
    """K3^{1, eps}(v, w) = K3^1(v, w) * reg_factor(eps, v - w), for v > w."""
    return _ret(np.asarray(k3_1(v, w, p)) * np.asarray(reg_factor(eps, np.asarray(v, float) - np.asarray(w, float))))


def k3_2_reg(v, w, eps, p: Params):
    """K3^{2, eps}(v, w) = K3^2(v, w) * reg_factor(eps, v - w), for v > w."""
    return _ret(np.asarray(k3_2(v, w, p)) * np.asarray(reg_factor(eps, np.asarray(v, float) - np.asarray(w, float))))


def k3bar_1_reg(v, w, eps, p: Params):
    """K3bar^{1, eps}(v, w) = K3bar^1(v, w) * reg_factor(eps, w - v), for w > v."""
    return _ret(np.asarray(k3bar_1(v, w, p)) * np.asarray(reg_factor(eps, np.asarray(w, float) - np.asarray(v, float))))


def k3bar_2_reg(v, w, eps, p: Params):
    """K3bar^{2, eps}(v, w) = K3bar^2(v, w) * reg_factor(eps, w - v), for w > v."""
    return _ret(np.asarray(k3bar_2(v, w, p)) * np.asarray(reg_factor(eps, np.asarray(w, float) - np.asarray(v, float))))
