"""Numerically stable scalar primitives shared by every module.

All kernel and weight formulas are built from a handful of expressions
(``ln(1+e^v)``, ``1-e^{-s}``, Bose-Einstein occupation numbers, exponential
integrator phi-functions) that lose precision or overflow when evaluated
naively.  They are centralized here and everything else imports them.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "log1pexp",
    "one_minus_exp_neg",
    "bose_einstein",
    "phi1",
    "phi2",
]

_LN2 = np.log(2.0)


def log1pexp(v):
    """ln(1 + e^v), accurate for large |v| (softplus).

    For v > 35 the result is v + e^{-v} to machine precision; for very
    negative v it decays like e^v without underflowing prematurely.
    """
    v = np.asarray(v, dtype=float)
    out = np.empty_like(v)
    hi = v > 35.0
    lo = v < -35.0
    mid = ~(hi | lo)
    out[hi] = v[hi] + np.exp(-v[hi])
    out[lo] = np.exp(v[lo])
    out[mid] = np.log1p(np.exp(v[mid]))
    if out.ndim == 0:
        return float(out)
    return out


def one_minus_exp_neg(s):
    """1 - e^{-s} via expm1; exact relative accuracy for tiny s."""
    return -np.expm1(-np.asarray(s, dtype=float))


def bose_einstein(x):
    """Occupation number 1/(e^x - 1) for x > 0.

    Evaluated as e^{-x}/(1 - e^{-x}) so that it neither overflows for
    small x (where it behaves like 1/x) nor underflows for large x.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0.0):
        raise ValueError("bose_einstein requires x > 0")
    val = np.exp(-x) / (-np.expm1(-x))
    if val.ndim == 0:
        return float(val)
    return val


def phi1(z):
    """phi_1(z) = (e^z - 1)/z, with the small-z series below |z| = 1e-5."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    small = np.abs(z) < 1e-5
    zs = z[small]
    out[small] = 1.0 + zs / 2.0 + zs * zs / 6.0
    zl = z[~small]
    out[~small] = np.expm1(zl) / zl
    if out.ndim == 0:
        return float(out)
    return out


def phi2(z):
    """phi_2(z) = (e^z - 1 - z)/z^2, with the small-z series below |z| = 1e-5."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    small = np.abs(z) < 1e-5
    zs = z[small]
    out[small] = 0.5 + zs / 6.0 + zs * zs / 24.0
    zl = z[~small]
    out[~small] = (np.expm1(zl) - zl) / (zl * zl)
    if out.ndim == 0:
        return float(out)
    return out
