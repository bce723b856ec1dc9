"""The linearized operator, its regularization, and the working decomposition.

Everything here evaluates integrals of the closed-form kernels against scalar
or difference fields:

* ``apply_L3`` / ``apply_L3_eps`` — the operator in the log variable, with the
  line singularity either paired against a Hölder certificate or mollified;
* ``potential_Vu`` — the multiplication part of the difference-variable
  splitting L = Vu - Ku - Lb - Ldelta;
* ``apply_decomposition`` — all four blocks of that splitting at one (v, r);
* ``regularized_splittings`` — the scalar-form (V, Ku, Kb) and
  difference-form (Vtilde, Ku, Ls, Kb) block decompositions of the
  regularized operator;
* ``apply_Leps_diff`` — the regularized difference operator evaluated
  directly from its four-integral form (the reconstruction oracle);
* ``sesquilinear_form`` — the symmetric double-integral form in L^2(nu).

Integrals whose variable is a distance to a kernel argument are evaluated in
that radial variable with the radius passed to the kernel exactly, so nothing
degrades when cut-offs drop below float spacing. Radial truncation is
relative: tails stop a halfwidth U beyond the relevant kernel argument, which
keeps the neglected mass below ~e^{-U} of the local scale.
All operations return ``(value, error_estimate)`` or records thereof.
"""

from __future__ import annotations

import numpy as np

from .fields import DifferenceField, ScalarField
from .kernels import (
    eps_scale,
    k3_1_down,
    k3_1_reg_down,
    k3_2_down,
    k3_2_reg_down,
    k3_down,
    k3_reg_down,
    k3_reg_up,
    k3_up,
    k3bar_1_reg_up,
    k3bar_1_up,
    k3bar_2_reg_up,
    k3_2,
    kernel_log,
)
from .params import Params
from .quadrature import QuadratureSpec, integrate, integrate_log, integrate_power
from .weights import cutoff_functions

__all__ = [
    "QuadratureSpec",
    "apply_L3",
    "apply_L3_eps",
    "potential_Vu",
    "apply_decomposition",
    "regularized_splittings",
    "apply_Leps_diff",
    "sesquilinear_form",
]

_TINY_R = 1.0e-12


def _rho_down(x: float, U: float) -> float:
    # toward -inf the kernel from base x only decays once w = x - rho < 0
    return max(x, 0.0) + U


def _rho_up(x: float, U: float) -> float:
    # toward +inf decay sets in once w = x + rho > 0
    return max(-x, 0.0) + U


def _acc(parts):
    val = 0.0
    err = 0.0
    for v, e in parts:
        val += v
        err += e
    return val, err


def _quad_sing(f, a: float, b: float, q: QuadratureSpec):
    """∫_a^b f(rho) drho for f ~ 1/rho near a; a may be far below float-unit scale.

    Log-substituted panels resolve the blow-up below rho = 1; above that the
    integrand is mild and linear panels keep localized field features visible
    to the adaptive refinement (a narrow bump at rho ~ 30 occupies a sliver
    of a 60-decade log range and would be skipped there).
    """
    if not (b > a):
        return 0.0, 0.0
    if a >= 1.0:
        return integrate(f, a, b, q)
    parts = [integrate_log(f, a, min(b, 1.0), q)]
    if b > 1.0:
        parts.append(integrate(f, 1.0, b, q))
    return _acc(parts)


def _quad_plateau(f, eps_floor: float, b: float, q: QuadratureSpec):
    """∫_0^b f(rho) drho for f smooth on (0, eps_floor) and ~1/rho beyond."""
    if b <= 0:
        return 0.0, 0.0
    a = min(eps_floor, b)
    parts = []
    if a > 0:
        parts.append(integrate(f, 0.0, a, q))
    if b > a:
        parts.append(_quad_sing(f, a, b, q))
    return _acc(parts)


def apply_L3(psi: ScalarField, u: float, q: QuadratureSpec, p: Params):
    """(L3 psi)(u) = ∫ K3(u, w)(psi(u) - psi(w)) dw.

    The inner layer around w = u is integrated in the radial variable with a
    Hölder-exponent substitution; a certificate on psi is mandatory because
    the 1/|u - w| kernel singularity is only integrable against the certified
    modulus.
    """
    if psi.certificate is None:
        raise ValueError("apply_L3 requires a Hölder certificate on psi")
    u = float(u)
    gamma = psi.certificate.exponent
    layer = q.singular_layer_width
    U = q.halfwidth
    pu = psi(u)

    def inner(rho):
        left = k3_down(u, rho, p) * (pu - psi(u - rho))
        right = k3_up(u, rho, p) * (pu - psi(u + rho))
        return left + right

    parts = [integrate_power(inner, layer, gamma, q)]
    parts.append(integrate(lambda w: kernel_log(u, w, p) * (pu - psi(w)),
                           min(u, 0.0) - U, u - layer, q))
    parts.append(integrate(lambda w: kernel_log(u, w, p) * (pu - psi(w)),
                           u + layer, max(u, 0.0) + U, q))
    return _acc(parts)


def apply_L3_eps(psi: ScalarField, u: float, q: QuadratureSpec, p: Params):
    """(L3^eps psi)(u) with the mollified kernel; no certificate required.

    Inside the mollification radius the regularized kernel is smooth (the
    singular factor is cancelled analytically), so a plain panel handles the
    plateau and a log-graded panel the 1/rho region beyond it.
    """
    u = float(u)
    layer = q.singular_layer_width
    U = q.halfwidth
    pu = psi(u)
    eps_floor = min(float(eps_scale(u, p)), float(eps_scale(u + layer, p)))

    def inner(rho):
        left = k3_reg_down(u, rho, p) * (pu - psi(u - rho))
        right = k3_reg_up(u, rho, p) * (pu - psi(u + rho))
        return left + right

    parts = [_quad_plateau(inner, eps_floor, layer, q)]
    parts.append(integrate(
        lambda w: k3_down(u, u - w, p) * (pu - psi(w)), min(u, 0.0) - U, u - layer, q))
    parts.append(integrate(
        lambda w: k3_up(u, w - u, p) * (pu - psi(w)), u + layer, max(u, 0.0) + U, q))
    return _acc(parts)


def potential_Vu(v: float, r: float, q: QuadratureSpec, p: Params):
    """The multiplication potential of the difference-variable splitting.

    Six kernel integrals with the delta1/delta2 cut-offs excising the
    diagonal; positive, and growing like ln M + ln(1 - e^{-r})^{-1} at the
    condensate end.
    """
    v = float(v)
    r = float(r)
    if r <= 0:
        raise ValueError("potential_Vu requires r > 0")
    cut = cutoff_functions(v, r, p)
    d1, d2 = cut["delta1"], cut["delta2"]
    U = q.halfwidth
    parts = []
    parts.append(_quad_sing(lambda rho: k3_1_down(v - r, rho, p), d1, U, q))
    parts.append(_quad_sing(lambda rho: k3_up(v, rho, p), d2, _rho_up(v, U), q))
    if d1 < r:
        parts.append(_quad_sing(lambda rho: k3_up(v - r, rho, p), d1, r, q))
    if d2 < r:
        parts.append(_quad_sing(lambda rho: k3_1_down(v, rho, p), d2, r, q))
    parts.append(integrate(lambda w: k3_2(v, w, p), v - r, v, q))
    parts.append(integrate(lambda w: k3_2(v - r, w, p), min(v - r, 0.0) - U, v - r, q))
    return _acc(parts)


def _pp_blocks(delta: DifferenceField, v: float, r: float, q: QuadratureSpec, p: Params):
    """The eight integrals subtracted from Vu*Delta in the splitting."""
    cut = cutoff_functions(v, r, p)
    d1, d2 = cut["delta1"], cut["delta2"]
    U = q.halfwidth
    parts = []
    parts.append(_quad_sing(
        lambda rho: (k3_1_down(v - r, rho, p) - k3_1_down(v, r + rho, p))
        * delta(v, r + rho), d1, U, q))
    parts.append(_quad_sing(
        lambda rho: (k3_up(v, rho, p) - k3_up(v - r, r + rho, p))
        * delta(v + rho, rho + r), d1, _rho_up(v, U), q))
    parts.append(integrate(
        lambda w: (k3_2(v - r, w, p) - k3_2(v, w, p)) * delta(v, v - w),
        min(v - r, 0.0) - U, v - r, q))
    if d1 < r:
        parts.append(_quad_sing(
            lambda rho: k3_1_down(v, rho, p) * delta(v - rho, r - rho), d1, r, q))
        parts.append(_quad_sing(
            lambda rho: k3_up(v - r, rho, p) * delta(v, r - rho), d1, r, q))
    parts.append(integrate(
        lambda w: k3_2(v, w, p) * delta(w, w - v + r), v - r, v, q))
    if d2 < d1:
        parts.append(_quad_sing(
            lambda rho: k3_up(v, rho, p) * delta(v + rho, rho + r), d2, d1, q))
        parts.append(_quad_sing(
            lambda rho: k3_1_down(v, rho, p) * delta(v - rho, r - rho), d2, d1, q))
    return _acc(parts)


def _lb_blocks(delta: DifferenceField, v: float, r: float, q: QuadratureSpec, p: Params):
    """The eleven indicator-gated bounded integrals carved out of Ku."""
    cut = cutoff_functions(v, r, p)
    d1 = cut["delta1"]
    rt = cut["rtilde"]
    U = q.halfwidth
    a1, b0, m0, c0 = p.a1, p.b0, p.m0, p.c0
    parts = []
    if v < -b0:
        parts.append(integrate(
            lambda w: (k3bar_1_up(v, w - v, p) - k3bar_1_up(v - r, w - v + r, p))
            * delta(w, w - v + r), a1, a1 + U, q))
    if v >= b0:
        parts.append(_quad_sing(
            lambda rho: (k3bar_1_up(v, rho, p) - k3bar_1_up(v - r, r + rho, p))
            * delta(v + rho, rho + r), d1, U, q))
    if v - r < -b0 and v > 0:
        parts.append(integrate(
            lambda w: kernel_log(v - r, w, p) * delta(v, v - w), 0.0, v, q))
    if v - r >= -b0 and d1 < r:
        parts.append(_quad_sing(
            lambda rho: k3bar_1_up(v - r, rho, p) * delta(v, r - rho), d1, r, q))
    if v < -m0:
        lo = min(r, -v - b0)
        if lo < r:
            parts.append(_quad_sing(
                lambda rho: k3_1_down(v, rho, p) * delta(v - rho, r - rho), lo, r, q))
    if -m0 < v < m0:
        parts.append(integrate(
            lambda w: k3_2(v, w, p) * delta(w, w - v + r), v - r, v, q))
    diff2 = lambda w: (k3_2(v - r, w, p) - k3_2(v, w, p)) * delta(v, v - w)
    if v - r <= -m0:
        parts.append(integrate(diff2, v - r - U, v - r - rt, q))
    if -m0 < v - r < m0:
        parts.append(integrate(diff2, min(v - r, 0.0) - U, v - r, q))
    if v - r >= m0:
        if v <= 3 * r:
            parts.append(integrate(diff2, -U, 0.0, q))
        else:
            parts.append(integrate(diff2, c0 * v, v - r, q))
    if v <= -m0 and v + r > -b0:
        parts.append(integrate(
            lambda w: k3_2(v, w, p) * delta(w, w - v + r), v - r, 2 * v + b0, q))
    if v >= m0:
        if v <= r:
            parts.append(integrate(
                lambda w: k3_2(v, w, p) * delta(w, w - v + r), v - r, v, q))
        elif 0 < v - r < c0 * v:
            parts.append(integrate(
                lambda w: k3_2(v, w, p) * delta(w, w - v + r), (v - r) / c0, v, q))
    return _acc(parts)


def _ldelta_blocks(delta: DifferenceField, v: float, r: float, q: QuadratureSpec, p: Params):
    """The six diagonal-layer integrals (signed as a single perturbation block)."""
    cut = cutoff_functions(v, r, p)
    d1, d2 = cut["delta1"], cut["delta2"]
    g = p.gamma0
    pos = []
    neg = []
    pos.append(integrate(
        lambda s: k3_1_down(v, r + s, p) * delta(v, r + s), 0.0, d1, q))
    pos.append(integrate(
        lambda s: k3_up(v - r, r + s, p) * delta(v + s, s + r), 0.0, d1, q))
    pos.append(integrate_power(
        lambda rho: k3_up(v - r, rho, p) * delta(v - r + rho, rho), d1, g, q))
    neg.append(integrate_power(
        lambda rho: k3_1_down(v - r, rho, p) * delta(v - r, rho), d1, g, q))
    pos.append(integrate_power(
        lambda rho: k3_1_down(v, rho, p) * delta(v, rho), d2, g, q))
    neg.append(integrate_power(
        lambda rho: k3_up(v, rho, p) * delta(v + rho, rho), d2, g, q))
    pv, pe = _acc(pos)
    nv, ne = _acc(neg)
    # the block enters the evolution as -(printed sum)
    return -(pv - nv), pe + ne


def apply_decomposition(delta: DifferenceField, v: float, r: float,
                        q: QuadratureSpec, p: Params) -> dict:
    """All four blocks of L = Vu - Ku - Lb - Ldelta at one point (v, r).

    Returns ``{"Vu": potential, "Vu_delta", "Ku_delta", "Lb_delta",
    "Ldelta_delta", "errors": {...}}``. Radii below 1e-12 short-circuit the
    difference blocks to zero (a genuine difference vanishes at r = 0).
    """
    v = float(v)
    r = float(r)
    if r <= 0:
        raise ValueError("apply_decomposition requires r > 0")
    if r < _TINY_R:
        zero = {"Vu": 0.0, "Vu_delta": 0.0, "Ku_delta": 0.0, "Lb_delta": 0.0,
                "Ldelta_delta": 0.0}
        zero["errors"] = {k: 0.0 for k in zero}
        return zero
    vu, vu_err = potential_Vu(v, r, q, p)
    dval = delta(v, r)
    pp, pp_err = _pp_blocks(delta, v, r, q, p)
    lb, lb_err = _lb_blocks(delta, v, r, q, p)
    ld, ld_err = _ldelta_blocks(delta, v, r, q, p)
    return {
        "Vu": vu,
        "Vu_delta": vu * dval,
        "Ku_delta": pp - lb,
        "Lb_delta": lb,
        "Ldelta_delta": ld,
        "errors": {
            "Vu": vu_err,
            "Vu_delta": vu_err * abs(dval),
            "Ku_delta": pp_err + lb_err,
            "Lb_delta": lb_err,
            "Ldelta_delta": ld_err,
        },
    }


# --------------------------------------------------------------------------
# regularized scalar-form splitting: L3^eps = V^eps - Ku^eps - Kb^eps
# --------------------------------------------------------------------------

def _v_eps(v: float, q: QuadratureSpec, p: Params):
    U = q.halfwidth
    ev = float(eps_scale(v, p))
    up = _rho_up(v, U)
    left = _quad_plateau(lambda rho: k3_reg_down(v, rho, p), ev, _rho_down(v, U), q)
    floor = float(eps_scale(v + up, p))
    right = _quad_plateau(lambda rho: k3_reg_up(v, rho, p), floor, up, q)
    return _acc([left, right])


def _ku_eps(psi: ScalarField, v: float, q: QuadratureSpec, p: Params):
    U = q.halfwidth
    b0, m0, a1 = p.b0, p.m0, p.a1
    ev = float(eps_scale(v, p))
    parts = []
    if v < -b0:
        r0 = -v - b0
        parts.append(_quad_plateau(
            lambda rho: k3_1_reg_down(v, rho, ev, p) * psi(v - rho), ev, r0, q))
        parts.append(integrate(
            lambda rho: k3_1_reg_down(v, rho, ev, p) * np.exp(-rho) * psi(v - rho),
            r0, r0 + U, q))
        floor = min(ev, float(eps_scale(v + r0, p)))
        parts.append(_quad_plateau(
            lambda rho: k3_reg_up(v, rho, p) * psi(v + rho), floor, r0, q))
        parts.append(integrate(
            lambda rho: k3_reg_up(v, rho, p) * np.exp(-rho) * psi(v + rho),
            r0, r0 + U, q))
    else:
        if v <= m0:
            parts.append(_quad_plateau(
                lambda rho: k3_1_reg_down(v, rho, ev, p) * np.exp(-rho) * psi(v - rho),
                ev, U, q))
            floor = float(eps_scale(v + U, p))
            parts.append(_quad_plateau(
                lambda rho: k3_reg_up(v, rho, p) * np.exp(-rho) * psi(v + rho),
                floor, U, q))
        else:
            parts.append(_quad_plateau(
                lambda rho: k3_1_reg_down(v, rho, ev, p) * psi(v - rho), ev, v, q))
            floor = float(eps_scale(v + U, p))
            parts.append(_quad_plateau(
                lambda rho: k3_reg_up(v, rho, p) * psi(v + rho), floor, U, q))
    if v < -m0:
        parts.append(integrate(
            lambda rho: k3_2_reg_down(v, rho, ev, p) * psi(v - rho), 0.0, -v - b0, q))
    if v > m0:
        parts.append(integrate(
            lambda rho: k3_2_reg_down(v, rho, ev, p) * psi(v - rho), 0.0, v - a1, q))
    return _acc(parts)


def _kb_eps(psi: ScalarField, v: float, q: QuadratureSpec, p: Params):
    U = q.halfwidth
    b0, m0, a1 = p.b0, p.m0, p.a1
    ev = float(eps_scale(v, p))
    parts = []
    if v < -b0:
        r0 = -v - b0
        parts.append(integrate(
            lambda rho: k3_1_reg_down(v, rho, ev, p) * (-np.expm1(-rho)) * psi(v - rho),
            r0, r0 + U, q))
        parts.append(integrate(
            lambda rho: k3_reg_up(v, rho, p) * (-np.expm1(-rho)) * psi(v + rho),
            r0, r0 + U, q))
    else:
        if v <= m0:
            parts.append(integrate(
                lambda rho: k3_1_reg_down(v, rho, ev, p) * (-np.expm1(-rho)) * psi(v - rho),
                0.0, U, q))
            parts.append(integrate(
                lambda rho: k3_reg_up(v, rho, p) * (-np.expm1(-rho)) * psi(v + rho),
                0.0, U, q))
        else:
            parts.append(integrate(
                lambda rho: k3_1_reg_down(v, rho, ev, p) * psi(v - rho), v, v + U, q))
    if v < -m0:
        r0 = -v - b0
        parts.append(integrate(
            lambda rho: k3_2_reg_down(v, rho, ev, p) * psi(v - rho), r0, r0 + U, q))
    elif v <= m0:
        parts.append(integrate(
            lambda rho: k3_2_reg_down(v, rho, ev, p) * psi(v - rho),
            0.0, max(0.0, v) + U, q))
    else:
        parts.append(integrate(
            lambda rho: k3_2_reg_down(v, rho, ev, p) * psi(v - rho), v - a1, v + U, q))
    return _acc(parts)


# --------------------------------------------------------------------------
# regularized difference-form splitting: Ltilde = Vtilde*D - Ku*D + Ls*D + Kb[psi]
# --------------------------------------------------------------------------

def _v_tilde(v: float, r: float, q: QuadratureSpec, p: Params):
    U = q.halfwidth
    evr = float(eps_scale(v - r, p))
    ev = float(eps_scale(v, p))
    parts = []
    parts.append(_quad_plateau(
        lambda rho: k3_reg_down(v - r, rho, p), evr, _rho_down(v - r, U), q))
    parts.append(_quad_plateau(lambda rho: k3_reg_down(v, rho, p), ev, r, q))
    parts.append(_quad_plateau(lambda rho: k3_reg_up(v - r, rho, p), min(ev, evr), r, q))
    up = _rho_up(v, U)
    floor = float(eps_scale(v + up, p))
    parts.append(_quad_plateau(lambda rho: k3_reg_up(v, rho, p), floor, up, q))
    return _acc(parts)


def _ku_tilde(dpsi: DifferenceField, v: float, r: float, q: QuadratureSpec, p: Params):
    U = q.halfwidth
    a1, b0, m0, c0 = p.a1, p.b0, p.m0, p.c0
    evr = float(eps_scale(v - r, p))
    ev = float(eps_scale(v, p))
    rt = float(cutoff_functions(v, r, p)["rtilde"])
    parts = []
    # below v-r: difference of split-1 kernels against the long difference
    if v < a1:
        def left_diff(rho):
            return ((k3_1_reg_down(v - r, rho, evr, p) - k3_1_reg_down(v, r + rho, evr, p))
                    * dpsi(v, r + rho))
    else:
        def left_diff(rho):
            val = ((k3_1_reg_down(v - r, rho, evr, p) - k3_1_reg_down(v, r + rho, ev, p))
                   * dpsi(v, r + rho))
            return np.where(r + np.asarray(rho) > evr, val, 0.0)
    parts.append(_quad_plateau(left_diff, evr, U, q))
    # above v
    if v < -b0:
        eps_a = float(eps_scale(a1, p))
        parts.append(_quad_plateau(
            lambda rho: (k3_reg_up(v, rho, p) - k3_reg_up(v - r, r + rho, p))
            * dpsi(v + rho, rho + r), eps_a, a1 - v, q))
        parts.append(integrate(
            lambda rho: (k3bar_2_reg_up(v, rho, p) - k3bar_2_reg_up(v - r, r + rho, p))
            * dpsi(v + rho, rho + r), a1 - v, a1 - v + U, q))
    else:
        up = _rho_up(v, U)
        floor = float(eps_scale(v + up, p))
        parts.append(_quad_plateau(
            lambda rho: (k3bar_2_reg_up(v, rho, p) - k3bar_2_reg_up(v - r, r + rho, p))
            * dpsi(v + rho, rho + r), floor, up, q))
    # (v-r, v) seen from v-r
    if v - r < -b0:
        hi = -(v - r) if v > 0 else r
        parts.append(_quad_plateau(
            lambda rho: k3_reg_up(v - r, rho, p) * dpsi(v, r - rho),
            min(ev, evr), hi, q))
    else:
        parts.append(_quad_plateau(
            lambda rho: k3bar_2_reg_up(v - r, rho, p) * dpsi(v, r - rho),
            min(ev, evr), r, q))
    # (v-r, v) seen from v, split 1
    if v < -m0:
        hi = min(r, -v - b0)
        parts.append(_quad_plateau(
            lambda rho: k3_1_reg_down(v, rho, ev, p) * dpsi(v - rho, r - rho), ev, hi, q))
    else:
        parts.append(_quad_plateau(
            lambda rho: k3_1_reg_down(v, rho, ev, p) * dpsi(v - rho, r - rho),
            ev, r, q))
    # split-2 carve-outs below v-r
    def diff2_rad(rho):
        return ((k3_2_reg_down(v - r, rho, evr, p) - k3_2_reg_down(v, r + rho, evr, p))
                * dpsi(v, r + rho))
    if v - r <= -m0 and max(rt, evr) > evr:
        parts.append(_quad_sing(diff2_rad, evr, max(rt, evr), q))
    if v - r >= m0:
        if v <= 3 * r:
            parts.append(_quad_sing(diff2_rad, evr, v - r, q))
        else:
            parts.append(integrate(
                lambda w: (k3_2_reg_down(v - r, v - r - w, evr, p)
                           - k3_2_reg_down(v, v - w, evr, p)) * dpsi(v, v - w),
                -U, c0 * v, q))
    # split-2 terms at v
    tail2_rad = lambda rho: k3_2_reg_down(v, rho, ev, p) * dpsi(v - rho, r - rho)
    if v <= -m0:
        if v + r < -b0:
            parts.append(integrate(tail2_rad, 0.0, r, q))
        else:
            parts.append(integrate(tail2_rad, 0.0, -v - b0, q))
    if v >= m0:
        if 0 < v - r < c0 * v:
            parts.append(integrate(tail2_rad, v - (v - r) / c0, r, q))
        elif v - r >= c0 * v:
            parts.append(integrate(tail2_rad, 0.0, r, q))
    return _acc(parts)


def _ls_tilde(dpsi: DifferenceField, v: float, r: float, q: QuadratureSpec, p: Params):
    """The small perturbation block of the regularized difference splitting."""
    evr = float(eps_scale(v - r, p))
    ev = float(eps_scale(v, p))
    parts = []
    if v >= p.a1 and r < evr:
        parts.append(integrate(
            lambda s: (k3_1_reg_down(v - r, s, evr, p) - k3_1_reg_down(v, r + s, ev, p))
            * dpsi(v, r + s), 0.0, evr - r, q))
    parts.append(integrate(
        lambda rho: (k3_2_reg_down(v - r, rho, evr, p) - k3_2_reg_down(v, r + rho, ev, p))
        * dpsi(v, r + rho), 0.0, evr, q))
    val, err = _acc(parts)
    return -val, err


def _kb_tilde(psi: ScalarField, v: float, r: float, q: QuadratureSpec, p: Params):
    """The bounded block of the regularized difference splitting (acts on psi)."""
    U = q.halfwidth
    a1, b0, m0, c0 = p.a1, p.b0, p.m0, p.c0
    ev = float(eps_scale(v, p))
    evr = float(eps_scale(v - r, p))
    rt = float(cutoff_functions(v, r, p)["rtilde"])
    pvr = psi(v - r)
    pv = psi(v)
    parts = []

    def bar1_diff(rho):
        eps_w = eps_scale(v + rho, p)
        return ((k3bar_1_reg_up(v, rho, eps_w, p)
                 - k3bar_1_reg_up(v - r, r + rho, eps_w, p)) * (psi(v + rho) - pvr))

    if v < -b0:
        parts.append(integrate(bar1_diff, a1 - v, a1 - v + U, q))
    else:
        parts.append(integrate(bar1_diff, 0.0, _rho_up(v, U), q))
    if v - r < -b0 and v > 0:
        parts.append(integrate(
            lambda w: k3_reg_up(v - r, w - (v - r), p) * (pv - psi(w)), 0.0, v, q))
    if v - r >= -b0:
        parts.append(integrate(
            lambda rho: k3bar_1_reg_up(v - r, rho, eps_scale(v - r + rho, p), p)
            * (pv - psi(v - r + rho)), 0.0, r, q))
    if v < -m0:
        lo = min(r, -v - b0)
        if lo < r:
            parts.append(_quad_sing(
                lambda rho: k3_1_reg_down(v, rho, ev, p) * (psi(v - rho) - pvr),
                lo, r, q))

    def diff2_rad(rho):
        return ((k3_2_reg_down(v - r, rho, evr, p) - k3_2_reg_down(v, r + rho, evr, p))
                * (pv - psi(v - r - rho)))

    if v - r <= -m0:
        parts.append(_quad_sing(diff2_rad, max(rt, evr), max(rt, evr) + U, q))
    if -m0 < v - r < m0:
        parts.append(_quad_sing(diff2_rad, evr, _rho_down(v - r, U), q))
    if v - r >= m0:
        if v <= 3 * r:
            parts.append(integrate(
                lambda w: (k3_2_reg_down(v - r, v - r - w, evr, p)
                           - k3_2_reg_down(v, v - w, evr, p)) * (pv - psi(w)),
                -U, 0.0, q))
        elif v - r - c0 * v > evr:
            parts.append(_quad_sing(diff2_rad, evr, v - r - c0 * v, q))
    tail2 = lambda rho: k3_2_reg_down(v, rho, ev, p) * (psi(v - rho) - pvr)
    if v <= -m0 and v + r >= -b0:
        parts.append(integrate(tail2, -v - b0, r, q))
    if -m0 < v < m0:
        parts.append(integrate(tail2, 0.0, r, q))
    if v >= m0:
        if 0 < v - r < c0 * v:
            parts.append(integrate(tail2, 0.0, v - (v - r) / c0, q))
        if v - r <= 0:
            parts.append(integrate(tail2, 0.0, r, q))
    val, err = _acc(parts)
    return -val, err


def regularized_splittings(which: str, field, point, q: QuadratureSpec, p: Params) -> dict:
    """Block decomposition of the regularized operator.

    ``which="psi-form"``: ``field`` is a ScalarField, ``point`` a log variable
    v; returns the multiplication potential and the two kernel blocks of
    L3^eps = V - Ku - Kb together with the reconstructed operator value.

    ``which="diff-form"``: ``field`` is a pair (difference field, underlying
    scalar field), ``point`` is (v, r); returns the blocks of
    Ltilde = Vtilde*D - Ku*D + Ls*D + Kb[psi] with reconstruction.
    """
    if which == "psi-form":
        psi = field
        v = float(point)
        vv, vv_err = _v_eps(v, q, p)
        ku, ku_err = _ku_eps(psi, v, q, p)
        kb, kb_err = _kb_eps(psi, v, q, p)
        pv = psi(v)
        return {
            "V": vv,
            "V_psi": vv * pv,
            "Ku_psi": ku,
            "Kb_psi": kb,
            "L3eps_recon": vv * pv - ku - kb,
            "errors": {"V": vv_err, "Ku_psi": ku_err, "Kb_psi": kb_err},
        }
    if which == "diff-form":
        dpsi, psi = field
        v, r = float(point[0]), float(point[1])
        if r <= 0:
            raise ValueError("diff-form requires r > 0")
        vt, vt_err = _v_tilde(v, r, q, p)
        ku, ku_err = _ku_tilde(dpsi, v, r, q, p)
        ls, ls_err = _ls_tilde(dpsi, v, r, q, p)
        kb, kb_err = _kb_tilde(psi, v, r, q, p)
        dval = dpsi(v, r)
        return {
            "Vtilde": vt,
            "Vtilde_d": vt * dval,
            "Ku_d": ku,
            "Ls_d": ls,
            "Kb_d": kb,
            "Ltilde_recon": vt * dval - ku + ls + kb,
            "errors": {"Vtilde": vt_err, "Ku_d": ku_err, "Ls_d": ls_err, "Kb_d": kb_err},
        }
    raise ValueError(f"unknown splitting form: {which!r}")


def apply_Leps_diff(dpsi: DifferenceField, v: float, r: float,
                    q: QuadratureSpec, p: Params):
    """The regularized difference operator from its four defining integrals.

    Ltilde D(v, r) = ∫_{w<v} K^eps(v,w) D(v, v-w) - ∫_{w>v} K^eps(v,w) D(w, w-v)
                   - ∫_{w<v-r} K^eps(v-r,w) D(v-r, v-r-w)
                   + ∫_{w>v-r} K^eps(v-r,w) D(w, w-v+r).
    Used as the reconstruction oracle for the diff-form splitting.
    """
    v = float(v)
    r = float(r)
    U = q.halfwidth
    ev = float(eps_scale(v, p))
    evr = float(eps_scale(v - r, p))
    up_v = _rho_up(v, U)
    up_vr = _rho_up(v - r, U)
    floor = float(eps_scale(v + up_v, p))
    parts = []
    parts.append(_quad_plateau(
        lambda rho: k3_reg_down(v, rho, p) * dpsi(v, rho), ev, _rho_down(v, U), q))
    t2 = _quad_plateau(
        lambda rho: k3_reg_up(v, rho, p) * dpsi(v + rho, rho), floor, up_v, q)
    parts.append((-t2[0], t2[1]))
    t3 = _quad_plateau(
        lambda rho: k3_reg_down(v - r, rho, p) * dpsi(v - r, rho),
        evr, _rho_down(v - r, U), q)
    parts.append((-t3[0], t3[1]))
    parts.append(_quad_plateau(
        lambda rho: k3_reg_up(v - r, rho, p) * dpsi(v - r + rho, rho),
        min(ev, evr, floor), up_vr, q))
    return _acc(parts)


def sesquilinear_form(phi: ScalarField, psi: ScalarField, q: QuadratureSpec, p: Params,
                      support: tuple = (-20.0, 20.0)):
    """Q(phi, psi) = 1/2 ∬ nu(u) nu(v) Kbar3(u, v)(phi(u)-phi(v))(psi(u)-psi(v)).

    Evaluated as a single pass over ordered pairs w < u (the integrand is
    symmetric, which absorbs the 1/2), the singular pairing handled by the
    Hölder substitution. ``support`` bounds the region where phi and psi vary.
    """
    from .kernels import nu_density
    from .numerics import log1pexp

    lo, hi = support
    gamma = min(
        phi.certificate.exponent if phi.certificate else 1.0,
        psi.certificate.exponent if psi.certificate else 1.0,
    )
    layer = q.singular_layer_width

    def kbar_nu_rad(u, rho):
        # nu(u - rho) * Kbar3(u, u - rho) = K3(u, u - rho) / nu(u) * nu(u-rho) ...
        # use the identity K3(u, w) = Kbar3(u, w) nu(w) directly:
        return k3_down(u, rho, p)

    def outer(u_arr):
        u_arr = np.atleast_1d(np.asarray(u_arr, dtype=float))
        out = np.empty_like(u_arr)
        for i, u in enumerate(u_arr):
            pu, su = phi(u), psi(u)

            def inner_rad(rho):
                w = u - rho
                return kbar_nu_rad(u, rho) * (pu - phi(w)) * (su - psi(w))

            val, _ = integrate_power(inner_rad, layer, gamma, q)
            val2, _ = integrate(
                lambda w: kernel_log(u, w, p) * (pu - phi(w)) * (su - psi(w)),
                lo - q.halfwidth, u - layer, q)
            out[i] = val + val2
        return out

    val, err = integrate(lambda u: nu_density(u) * outer(u), lo, hi + q.halfwidth, q)
    return val, err
