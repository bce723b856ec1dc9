"""Energy-variable picture: the nonlinear condensate interaction operator,
its linearization, and the closed-form sinh kernel.

Works in the physical energy variable x > 0 (the log picture elsewhere uses
u = ln(e^x - 1)). Provides

* ``c3_collision``     — the nonlinear three-wave operator C3[f](x);
* ``l3_energy_apply``  — the linearized operator ∫ H(x,y)(psi(x)-psi(y)) dy,
  n_bar prefactor included;
* ``escobedo_kernel``  — the equivalent sinh-form kernel M(x,y);
* ``pullback`` helpers between the two pictures.

The C3 integrands carry 1/y-type blow-ups from the equilibrium factors that
cancel only inside the printed brackets, so the brackets are always
integrated whole on panels graded toward the endpoints.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .fields import ScalarField
from .kernels import hbar_sq, kernel_energy
from .numerics import bose_einstein, log1pexp
from .params import Params
from .quadrature import QuadratureSpec, integrate, integrate_log, integrate_power

__all__ = [
    "EnergyField",
    "X_MAX",
    "c3_collision",
    "l3_energy_apply",
    "escobedo_kernel",
    "log_from_energy",
    "energy_from_log",
]

# energy-picture truncation; neglected tails are O(e^{-X_MAX}) relative
X_MAX = 80.0

_Y_FLOOR = 1.0e-14


def log_from_energy(x):
    """u = ln(e^x - 1), the log variable of the flat-kernel picture."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        small = np.log(np.expm1(np.minimum(x, 30.0)))
    return np.where(x > 30.0, x, small)


def energy_from_log(u):
    """x = ln(1 + e^u), inverse of ``log_from_energy``."""
    return log1pexp(u)


@dataclass(frozen=True)
class EnergyField:
    """A particle-density profile f(x) on x > 0.

    ``fn`` must accept arrays. Profiles are assumed nonnegative with
    f_BE-type behavior: at worst O(1/x) at zero and integrable decay at
    infinity, which is what the collision integrals require.
    """

    fn: Callable

    def __call__(self, x):
        return np.asarray(self.fn(np.asarray(x, dtype=float)), dtype=float)

    @staticmethod
    def equilibrium() -> "EnergyField":
        return EnergyField(fn=bose_einstein)


def c3_collision(f: EnergyField, x: float, q: QuadratureSpec, p: Params):
    """The condensate interaction term C3[f](x).

    C3[f](x) = (2/sqrt(x)) ∫_0^x [ft(x)f(x-y)f(y) - f(x)ft(x-y)ft(y)] dy
             - (4/sqrt(x)) ∫_x^inf [ft(y)f(y-x)f(x) - f(y)ft(y-x)ft(x)] dy,

    ft = 1 + f. Vanishes identically at f = f_BE. The brackets are
    integrated whole; each endpoint singularity is approached on
    log-graded panels from both sides.
    """
    x = float(x)
    if x <= 0:
        raise ValueError("c3_collision requires x > 0")

    def gain(y):
        y = np.asarray(y, dtype=float)
        fx = f(x)
        return (1.0 + fx) * f(x - y) * f(y) - fx * (1.0 + f(x - y)) * (1.0 + f(y))

    def loss_shift(z):
        # y = x + z, z > 0
        z = np.asarray(z, dtype=float)
        fx = f(x)
        fy = f(x + z)
        fz = f(z)
        return (1.0 + fy) * fz * fx - fy * (1.0 + fz) * (1.0 + fx)

    h = 0.5 * x
    parts = []
    parts.append(integrate_log(gain, _Y_FLOOR, h, q))
    parts.append(integrate_log(lambda z: gain(x - z), _Y_FLOOR, h, q))
    val1 = parts[0][0] + parts[1][0]
    err1 = parts[0][1] + parts[1][1]
    v2a, e2a = integrate_log(loss_shift, _Y_FLOOR, 1.0, q)
    v2b, e2b = integrate(loss_shift, 1.0, max(1.0, X_MAX - x), q)
    val2 = v2a + v2b
    err2 = e2a + e2b + abs(loss_shift(X_MAX - x)) * np.exp(-1.0)
    c = 2.0 / np.sqrt(x)
    return c * val1 - 2.0 * c * val2, c * err1 + 2.0 * c * err2


def l3_energy_apply(psi: ScalarField, x: float, q: QuadratureSpec, p: Params):
    """The linearized operator in the energy picture.

    (L3 psi)(x) = ∫_0^inf H(x, y) (psi(x) - psi(y)) dy with the symmetric
    kernel H of ``kernels.kernel_energy`` (n_bar prefactor included). The
    1/|x-y| line singularity is paired against the field's Hölder
    certificate exactly as in the log picture.
    """
    if psi.certificate is None:
        raise ValueError("l3_energy_apply requires a Hölder certificate on psi")
    x = float(x)
    if x <= 0:
        raise ValueError("l3_energy_apply requires x > 0")
    gamma = psi.certificate.exponent
    layer = min(q.singular_layer_width, 0.5 * x)
    px = psi(x)

    def inner(rho):
        left = kernel_energy(x, x - rho, p) * (px - psi(x - rho))
        right = kernel_energy(x, x + rho, p) * (px - psi(x + rho))
        return left + right

    parts = [integrate_power(inner, layer, gamma, q)]
    if x - layer > _Y_FLOOR:
        parts.append(integrate_log(
            lambda y: kernel_energy(x, y, p) * (px - psi(y)), _Y_FLOOR, x - layer, q))
    parts.append(integrate(
        lambda y: kernel_energy(x, y, p) * (px - psi(y)), x + layer, X_MAX, q))
    val = sum(v for v, _ in parts)
    err = sum(e for _, e in parts)
    return val, err


def escobedo_kernel(x: float, y: float, p: Params):
    """The sinh-form collision kernel M(x, y), x != y.

    M = 2*sqrt(2) hbar(x)^2 x y f_BE(x) f_BE(y) e^{x+y} e^{-min}
        (f_BE(|x-y|) - e^{min} f_BE(x+y)),
    which coincides with sqrt(2)/(2 n_bar) times the flat kernel H of
    ``kernels.kernel_energy``.
    """
    x = float(x)
    y = float(y)
    if x <= 0 or y <= 0:
        raise ValueError("escobedo_kernel requires positive arguments")
    if x == y:
        raise ValueError("escobedo_kernel is singular on the diagonal")
    lo = min(x, y)
    # f_BE(s) e^s = 1/(1 - e^{-s}); group exponentials to avoid overflow
    fb_diff = bose_einstein(abs(x - y))
    fb_sum_scaled = np.exp(lo) * bose_einstein(x + y)
    pref = 2.0 * np.sqrt(2.0) * hbar_sq(x) * x * y
    ee = 1.0 / ((1.0 - np.exp(-x)) * (1.0 - np.exp(-y)))
    return pref * ee * np.exp(-lo) * (fb_diff - fb_sum_scaled)
