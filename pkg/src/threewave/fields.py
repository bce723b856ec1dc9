"""Function-space carriers: scalar fields with Hölder certificates and
difference fields with weighted sup-norm accessors.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .params import Params
from .weights import weight_profiles

__all__ = ["HolderCertificate", "ScalarField", "DifferenceField"]


@dataclass(frozen=True)
class HolderCertificate:
    """Declared modulus bound |psi(v) - psi(v-r)| <= constant * Gamma0(v, r)."""

    constant: float
    exponent: float

    def __post_init__(self):
        if self.constant <= 0 or not (0 < self.exponent <= 1):
            raise ValueError("certificate needs constant > 0 and exponent in (0, 1]")


class ScalarField:
    """A real function of one real variable with an optional Hölder certificate.

    Backed either by a closed-form vectorized evaluator or by grid samples
    with cubic interpolation (flat extrapolation outside the grid).
    """

    def __init__(
        self,
        fn: Optional[Callable] = None,
        grid: Optional[np.ndarray] = None,
        values: Optional[np.ndarray] = None,
        certificate: Optional[HolderCertificate] = None,
    ):
        if fn is None and (grid is None or values is None):
            raise ValueError("need either an evaluator or grid samples")
        if fn is not None:
            self._fn = fn
        else:
            from scipy.interpolate import CubicSpline

            grid = np.asarray(grid, dtype=float)
            values = np.asarray(values, dtype=float)
            if grid.ndim != 1 or np.any(np.diff(grid) <= 0):
                raise ValueError("grid must be strictly increasing")
            spline = CubicSpline(grid, values)
            lo, hi = grid[0], grid[-1]
            flo, fhi = values[0], values[-1]

            def _fn(v):
                v = np.asarray(v, dtype=float)
                out = spline(np.clip(v, lo, hi))
                out = np.where(v < lo, flo, out)
                out = np.where(v > hi, fhi, out)
                return out

            self._fn = _fn
        self.certificate = certificate

    def __call__(self, v):
        out = np.asarray(self._fn(np.asarray(v, dtype=float)), dtype=float)
        return float(out) if out.ndim == 0 else out

    def verify_certificate(self, p: Params, n: int = 1000, seed: int = 0,
                           slack: float = 1.0e-12) -> bool:
        """Spot-check the declared modulus bound on seeded (v, r) pairs."""
        if self.certificate is None:
            raise ValueError("no certificate to verify")
        rng = np.random.default_rng(seed)
        v = rng.uniform(-60.0, 60.0, size=n)
        r = np.exp(rng.uniform(np.log(1.0e-6), np.log(60.0), size=n))
        diff = np.abs(self(v) - self(v - r))
        bound = self.certificate.constant * weight_profiles(v, r, 0.0, p)["gamma0_w"]
        return bool(np.all(diff <= bound + slack))


class DifferenceField:
    """An evaluator (v, r) -> Delta(v, r) with a weighted sup-norm accessor."""

    def __init__(self, fn: Callable, is_difference: bool = False):
        self._fn = fn
        self.is_difference = is_difference

    @classmethod
    def from_scalar(cls, psi: ScalarField) -> "DifferenceField":
        """The genuine difference Delta(v, r) = psi(v) - psi(v - r)."""

        def _fn(v, r):
            v = np.asarray(v, dtype=float)
            r = np.asarray(r, dtype=float)
            return psi(v) - psi(v - r)

        return cls(_fn, is_difference=True)

    def __call__(self, v, r):
        out = np.asarray(self._fn(np.asarray(v, float), np.asarray(r, float)), dtype=float)
        return float(out) if out.ndim == 0 else out

    def norm_against(self, t: float, p: Params, n: int = 4000, seed: int = 1) -> float:
        """sup |Delta| / Gamma_t estimated over a seeded sample of (v, r)."""
        rng = np.random.default_rng(seed)
        v = rng.uniform(-60.0, 60.0, size=n)
        r = np.exp(rng.uniform(np.log(1.0e-6), np.log(60.0), size=n))
        gam = weight_profiles(v, r, t, p)["gamma_t_w"]
        return float(np.max(np.abs(self(v, r)) / gam))
