"""Weight functions, Hölder factors, and cut-off scales.

The Banach-space weights share a common envelope
``(f(v-r) + f(v)) e^{mu max(a, c0 v, v-r)}`` and differ only in the Hölder
factor multiplying it:

* ``Gamma_t``  uses g_t(v,r) = (1 - e^{-kappa r})^{gamma_t(v-r)} with the
  time-dependent exponent gamma_t(w) = gamma0 + abar(t)/(1 + e^{beta w});
* ``Gamma0``   is Gamma_t at t = 0 (abar(0) = 0 collapses the exponent);
* ``Gamma_bar_eps`` uses (1 - e^{-kappa (r + eps(v))})^{gamma0/2};
* ``Gamma_hat`` uses (1 - e^{-kappa r})^{gamma0/2}.

All functions accept scalars or broadcastable arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernels import eps_scale, nu_density  # noqa: F401  (re-exported)
from .numerics import log1pexp, one_minus_exp_neg
from .params import Params

__all__ = [
    "nu_density",
    "HolderState",
    "abar",
    "gamma_exponent",
    "f_profile",
    "envelope",
    "holder_factor",
    "holder_factor_bar",
    "holder_factor_tilde",
    "weight_profiles",
    "cutoff_functions",
    "gamma_time_derivative",
]


def abar(t, p: Params):
    """Time ramp abar(t) = (1/8) min(1, nbar) t/(1+t); 0 at t = 0, < 1/8 min(1,nbar)."""
    t = np.asarray(t, dtype=float)
    val = 0.125 * min(1.0, p.nbar) * t / (1.0 + t)
    return float(val) if val.ndim == 0 else val


@dataclass(frozen=True)
class HolderState:
    """Frozen snapshot of the time-dependent Hölder exponent data."""

    t: float
    gamma0: float
    abar: float
    beta_h: float
    kappa: float

    def __post_init__(self):
        if self.t < 0:
            raise ValueError("time must be nonnegative")

    @classmethod
    def at(cls, t: float, p: Params) -> "HolderState":
        return cls(t=float(t), gamma0=p.gamma0, abar=float(abar(t, p)),
                   beta_h=p.beta_h, kappa=p.kappa)

    def gamma(self, w):
        """Exponent gamma_t(w) = gamma0 + abar/(1 + e^{beta w})."""
        w = np.asarray(w, dtype=float)
        val = self.gamma0 + self.abar / (1.0 + np.exp(self.beta_h * w))
        return float(val) if val.ndim == 0 else val


def gamma_exponent(w, t, p: Params):
    """gamma_t(w) for throwaway use without building a HolderState."""
    return HolderState.at(t, p).gamma(w)


def f_profile(v, p: Params):
    """Low-end envelope f(v) = max((ln(1+e^v))^{-alpha}, (ln 2)^{-alpha})."""
    v = np.asarray(v, dtype=float)
    val = np.maximum(np.asarray(log1pexp(v)) ** (-p.alpha), np.log(2.0) ** (-p.alpha))
    return float(val) if val.ndim == 0 else val


def envelope(v, r, p: Params):
    """Common weight envelope (f(v-r) + f(v)) e^{mu max(a, c0 v, v-r)}."""
    v = np.asarray(v, dtype=float)
    r = np.asarray(r, dtype=float)
    expo = np.maximum(np.maximum(p.a, p.c0 * v), v - r)
    val = (f_profile(v - r, p) + f_profile(v, p)) * np.exp(p.mu * expo)
    return float(val) if val.ndim == 0 else val


def holder_factor(v, r, state: HolderState):
    """g_t(v, r) = (1 - e^{-kappa r})^{gamma_t(v-r)}; requires r > 0."""
    v = np.asarray(v, dtype=float)
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("holder_factor requires r > 0")
    val = one_minus_exp_neg(state.kappa * r) ** state.gamma(v - r)
    return float(np.asarray(val)) if np.asarray(val).ndim == 0 else val

def holder_factor_bar(v, r, p: Params):
    """gbar(v, r) = (1 - e^{-kappa (r + eps(v))})^{gamma0/2}; defined for r >= 0."""
    v = np.asarray(v, dtype=float)
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("holder_factor_bar requires r >= 0")
    val = one_minus_exp_neg(p.kappa * (r + np.asarray(eps_scale(v, p)))) ** (0.5 * p.gamma0)
    return float(np.asarray(val)) if np.asarray(val).ndim == 0 else val


def holder_factor_tilde(v, r, p: Params, exponent: float):
    """Generic gtilde(v, r) = (1 - e^{-kappa (r + eps(v))})^{exponent}.

    ``exponent`` is 0 (constant 1, the unweighted comparison space) or
    gamma0/2.
    """
    if exponent == 0.0:
        out = np.broadcast_arrays(np.asarray(v, float), np.asarray(r, float))[0]
        res = np.ones_like(out)
        return float(res) if res.ndim == 0 else res
    v = np.asarray(v, dtype=float)
    r = np.asarray(r, dtype=float)
    val = one_minus_exp_neg(p.kappa * (r + np.asarray(eps_scale(v, p)))) ** exponent
    return float(np.asarray(val)) if np.asarray(val).ndim == 0 else val


def weight_profiles(v, r, t, p: Params) -> dict:
    """All pointwise weights at (v, r, t).

    Returns a dict with keys ``f_v``, ``f_vmr``, ``gamma_tilde`` (the
    r-independent weight f(v) e^{mu max(a, c0 v)}), ``gamma0_w`` (Gamma_0),
    ``gamma_t_w`` (Gamma_t), ``gamma_bar_eps`` and ``gamma_hat``.
    """
    r = np.asarray(r, dtype=float)
    t = float(t)
    if np.any(r < 0) or t < 0:
        raise ValueError("weight_profiles requires r >= 0 and t >= 0")
    v = np.asarray(v, dtype=float)
    env = envelope(v, r, p)
    base = one_minus_exp_neg(p.kappa * r)
    st = HolderState.at(t, p)
    st0 = HolderState.at(0.0, p)
    with np.errstate(divide="ignore"):
        g_t = np.where(r > 0, base ** np.asarray(st.gamma(v - r)), 0.0)
        g_0 = np.where(r > 0, base ** st0.gamma0, 0.0)
        g_hat = np.where(r > 0, base ** (0.5 * p.gamma0), 0.0)
    out = {
        "f_v": f_profile(v, p),
        "f_vmr": f_profile(v - r, p),
        "gamma_tilde": f_profile(v, p) * np.exp(p.mu * np.maximum(p.a, p.c0 * v)),
        "gamma0_w": env * g_0,
        "gamma_t_w": env * g_t,
        "gamma_bar_eps": env * holder_factor_bar(v, r, p),
        "gamma_hat": env * g_hat,
    }
    if np.asarray(v).ndim == 0 and r.ndim == 0:
        out = {k: float(np.asarray(x)) for k, x in out.items()}
    return out


def cutoff_functions(v, r, p: Params) -> dict:
    """Cut-off scales delta1, delta2, eps, and the boundary radius rtilde.

    delta1(v, r) = (1 - e^{-alpha r})^{4/gamma0} / (M e^{(mu'/gamma0) max(a1, v-r)}),
    delta2 the same with max(a1, v); eps(v) = eps0 e^{-(mu'/gamma0) max(a1, v)};
    rtilde = max(-v - b0, r) for v < -b0, else max(-b0 - v + r, 0).
    """
    v = np.asarray(v, dtype=float)
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("cutoff_functions requires r >= 0")
    num = one_minus_exp_neg(p.alpha * r) ** (4.0 / p.gamma0)
    d1 = num * np.exp(-(p.mu_prime / p.gamma0) * np.maximum(p.a1, v - r)) / p.bigM
    d2 = num * np.exp(-(p.mu_prime / p.gamma0) * np.maximum(p.a1, v)) / p.bigM
    rt = np.where(v < -p.b0, np.maximum(-v - p.b0, r), np.maximum(-p.b0 - v + r, 0.0))
    out = {"delta1": d1, "delta2": d2, "eps": np.asarray(eps_scale(v, p)), "rtilde": rt}
    if v.ndim == 0 and r.ndim == 0:
        out = {k: float(np.asarray(x)) for k, x in out.items()}
    return out


def gamma_time_derivative(v, r, t, p: Params):
    """d/dt Gamma_t(v, r); always <= 0 (the weight relaxes in time).

    Equals -(1/8) min(1,nbar) (1+e^{beta(v-r)})^{-1} (1+t)^{-2}
    ln((1-e^{-kappa r})^{-1}) Gamma_t(v,r).
    """
    v = np.asarray(v, dtype=float)
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("gamma_time_derivative requires r > 0")
    t = float(t)
    if t < 0:
        raise ValueError("gamma_time_derivative requires t >= 0")
    gam = weight_profiles(v, r, t, p)["gamma_t_w"]
    pref = (
        -0.125
        * min(1.0, p.nbar)
        / (1.0 + np.exp(p.beta_h * (v - r)))
        / (1.0 + t) ** 2
        * (-np.log(one_minus_exp_neg(p.kappa * r)))
    )
    val = pref * gam
    val = np.asarray(val)
    return float(val) if val.ndim == 0 else val
