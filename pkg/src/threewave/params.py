"""Model parameters with their admissibility constraints.

Every weight, cut-off and kernel in the package is parametrized by the same
record.  Construction validates the full constraint set and raises with a
message naming the violated constraint, so that a bad configuration can never
reach the numerical code.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields

__all__ = ["Params", "ParamError"]


class ParamError(ValueError):
    """A parameter set violating an admissibility constraint."""


@dataclass(frozen=True)
class Params:
    """Physical and weight parameters.

    ``a1`` is derived (= a/c0) and cannot be set directly.
    """

    nbar: float = 1.0
    alpha: float = 0.125
    mu: float = 0.375
    mu_prime: float = 0.4
    c0: float = 0.52
    a: float = 9.0
    gamma0: float = 0.125
    kappa: float = 7.0
    beta_h: float = 1.0
    b0: float = 10.0
    m0: float = 2 * 9.0 / 0.52
    bigM: float = 1.0e4
    eps0: float = 1.0e-2
    a1: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "a1", self.a / self.c0)
        self._validate()

    def _validate(self):
        p = self
        checks = [
            (p.nbar > 0, "nbar must be positive"),
            (0 < p.alpha < 1 / 6, "alpha must satisfy 0 < alpha < 1/6"),
            (p.mu < 0.5 - 0.375 * p.alpha, "mu must satisfy mu < 1/2 - (3/8)*alpha"),
            (p.alpha < p.mu * p.c0 < 0.25, "mu*c0 must lie strictly between alpha and 1/4"),
            (p.a >= 9, "a must satisfy a >= 9"),
            (0 < p.gamma0 <= 0.125, "gamma0 must satisfy 0 < gamma0 <= 1/8"),
            (p.kappa >= 7, "kappa must satisfy kappa >= 7"),
            (1 <= p.beta_h <= p.kappa / 4, "beta_h must satisfy 1 <= beta_h <= kappa/4"),
            (p.mu_prime > p.mu, "mu_prime must exceed mu"),
            (p.b0 >= 10, "b0 must satisfy b0 >= 10"),
            (p.m0 >= max(2 * p.a1, p.b0 + 2), "m0 must satisfy m0 >= max(2*a1, b0+2)"),
            (p.bigM > 0, "bigM must be positive"),
            (p.eps0 > 0, "eps0 must be positive"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ParamError(msg)

    def replace(self, **kw) -> "Params":
        """A copy with some fields changed (re-validated)."""
        current = {f.name: getattr(self, f.name) for f in fields(self) if f.init}
        current.update(kw)
        return Params(**current)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self) if f.init}
