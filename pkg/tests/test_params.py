import pytest

from threewave.params import ParamError, Params


def test_defaults_are_admissible():
    p = Params()
    assert p.a1 == pytest.approx(p.a / p.c0)
    assert p.m0 >= max(2 * p.a1, p.b0 + 2)


@pytest.mark.parametrize("kw,fragment", [
    ({"nbar": 0.0}, "nbar"),
    ({"alpha": 0.2}, "alpha"),
    ({"mu": 0.46}, "mu"),
    ({"mu": 0.2}, "between alpha"),
    ({"a": 8.0}, "a must"),
    ({"gamma0": 0.2}, "gamma0"),
    ({"kappa": 6.0}, "kappa"),
    ({"beta_h": 0.5}, "beta_h"),
    ({"mu_prime": 0.3}, "mu_prime"),
    ({"b0": 5.0}, "b0"),
    ({"m0": 20.0}, "m0"),
    ({"bigM": 0.0}, "bigM"),
    ({"eps0": 0.0}, "eps0"),
])
def test_each_constraint_raises_named_message(kw, fragment):
    with pytest.raises(ParamError, match=fragment):
        Params(**kw)


def test_replace_revalidates():
    p = Params()
    p2 = p.replace(eps0=1e-3)
    assert p2.eps0 == 1e-3 and p.eps0 == 1e-2
    with pytest.raises(ParamError):
        p.replace(alpha=0.5)


def test_a1_not_settable():
    with pytest.raises(TypeError):
        Params(a1=3.0)


def test_to_dict_round_trip():
    p = Params(alpha=0.1, eps0=3e-2)
    assert Params(**p.to_dict()) == p
    assert "a1" not in p.to_dict()
