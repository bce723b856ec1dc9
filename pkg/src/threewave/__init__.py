"""Numerical toolkit for the linearized three-wave collision operator of a
condensed Bose gas: kernel evaluation, weighted-L2 spectral discretization,
Duhamel fixed-point evolution in Hölder-weighted spaces, and property
verification of the supporting inequalities.
"""

from .params import ParamError, Params

__all__ = ["Params", "ParamError"]
__version__ = "0.1.0"
