import numpy as np
import pytest

from threewave.fields import DifferenceField, HolderCertificate, ScalarField
from threewave.params import Params

P = Params()


def test_certificate_validation():
    with pytest.raises(ValueError):
        HolderCertificate(constant=0.0, exponent=0.5)
    with pytest.raises(ValueError):
        HolderCertificate(constant=1.0, exponent=1.5)


def test_scalar_field_closed_form():
    f = ScalarField(fn=lambda v: np.sin(v))
    assert f(0.5) == pytest.approx(np.sin(0.5))
    out = f(np.array([0.0, 1.0]))
    assert out.shape == (2,)


def test_scalar_field_grid_interpolation_and_flat_extrapolation():
    grid = np.linspace(-5, 5, 201)
    f = ScalarField(grid=grid, values=np.tanh(grid))
    assert f(0.37) == pytest.approx(np.tanh(0.37), abs=1e-6)
    # flat continuation outside the grid
    assert f(100.0) == f(5.0)
    assert f(-100.0) == f(-5.0)


def test_certificate_spot_check():
    f = ScalarField(fn=lambda v: np.tanh(v),
                    certificate=HolderCertificate(constant=50.0, exponent=1.0))
    assert f.verify_certificate(P)


def test_difference_field_from_scalar():
    psi = ScalarField(fn=lambda v: np.exp(-v * v))
    d = DifferenceField.from_scalar(psi)
    assert d.is_difference
    v, r = 0.7, 0.3
    assert d(v, r) == pytest.approx(psi(v) - psi(v - r))
    # a genuine difference telescopes
    assert d(v, 0.5) == pytest.approx(d(v, 0.2) + d(v - 0.2, 0.3))


def test_norm_against_is_seeded():
    d = DifferenceField.from_scalar(ScalarField(fn=lambda v: np.exp(-v * v)))
    a = d.norm_against(0.0, P, n=500, seed=3)
    b = d.norm_against(0.0, P, n=500, seed=3)
    assert a == b and np.isfinite(a) and a > 0
