import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nonlocal_eigs import (
    AccuracyError,
    ConfigurationError,
    KernelClass,
    c_constant,
    find_beta_root,
    profile,
    psi_beta,
)

PUCCI = KernelClass(1.0, 2.0, 0.75)

# c+(beta), c-(beta) for lambda = 1, Lambda = 2, s = 0.75, from a 25-digit
# tanh-sinh evaluation (see nonlocal_eigs.oracle.quadrature_oracle)
FROZEN = [
    (0.2, -1.72936729773632, -3.46571888404682),
    (0.5, -1.12706594882766, -2.87293405117234),
    (0.6, -0.512653933752655, -2.25432380699717),
    (0.9, 3.16608204321621, 0.984384567908532),
    (1.4, 44.8065137874566, 22.4032568937283),
    (1.47, 139.947533272945, 69.9737666364725),
]


@pytest.mark.parametrize("beta, c_plus, c_minus", FROZEN)
def test_frozen_values(beta, c_plus, c_minus):
    assert c_constant(beta, PUCCI, "plus") == pytest.approx(c_plus, rel=1e-11, abs=1e-11)
    assert c_constant(beta, PUCCI, "minus") == pytest.approx(c_minus, rel=1e-11, abs=1e-11)


def test_error_estimate_is_reported():
    value, err = c_constant(0.9, PUCCI, "plus", return_error=True)
    assert 0 < err < 1e-9
    assert abs(value - 3.16608204321621) < 1e-11


@pytest.mark.parametrize("s", [0.3, 0.55, 0.75, 0.9])
def test_vanishes_at_s_for_fractional_laplacian(s):
    assert abs(c_constant(s, KernelClass.fractional(s), "plus")) < 1e-9


def test_fractional_laplacian_value():
    # oracle value of the integral for beta = 1/2, s = 3/4
    assert c_constant(0.5, KernelClass.fractional(0.75), "plus") == pytest.approx(-4 / 3, abs=1e-10)


@given(st.floats(-5, 5), st.floats(0.05, 1.95))
def test_psi_is_even(t, beta):
    assert psi_beta(t, beta) == pytest.approx(psi_beta(-t, beta), abs=1e-15)


def test_psi_small_t_keeps_relative_accuracy():
    t = 1e-6
    beta = 0.7
    exact = beta * (beta - 1) * t**2  # leading term of the even expansion
    assert psi_beta(t, beta) == pytest.approx(exact, rel=1e-6)


def test_psi_sign_on_unit_interval():
    t = np.linspace(0.01, 0.99, 50)
    assert np.all(psi_beta(t, 0.6) < 0)
    assert np.all(psi_beta(t, 1.4) > 0)
    np.testing.assert_allclose(psi_beta(t, 1.0), 0.0, atol=1e-15)


def test_plus_dominates_minus():
    for beta in (0.3, 0.8, 1.2):
        assert c_constant(beta, PUCCI, "plus") > c_constant(beta, PUCCI, "minus")


def test_roots_of_pucci_class():
    b1 = find_beta_root(PUCCI, "plus")
    b2 = find_beta_root(PUCCI, "minus")
    assert b1 == pytest.approx(0.6622871, abs=2e-6)
    assert b2 == pytest.approx(0.8287128, abs=2e-6)
    assert b1 < 0.75 < b2


def test_profile_table():
    prof = profile(PUCCI, 8)
    assert prof.samples.shape[1] == 3
    assert np.all(np.diff(prof.samples[:, 0]) > 0)
    assert prof.beta1 in prof.samples[:, 0]
    below = prof.samples[prof.samples[:, 0] < prof.beta1 - 1e-9]
    above = prof.samples[prof.samples[:, 0] > prof.beta1 + 1e-9]
    assert np.all(below[:, 1] < 0) and np.all(above[:, 1] > 0)


@pytest.mark.parametrize("beta", [0.0, 1.5, -0.1])
def test_beta_range_checked(beta):
    with pytest.raises(ConfigurationError):
        c_constant(beta, PUCCI, "plus")


def test_unknown_sign():
    with pytest.raises(ConfigurationError):
        c_constant(0.5, PUCCI, "up")


def test_unreachable_tolerance_raises():
    with pytest.raises(AccuracyError) as info:
        c_constant(0.9, PUCCI, "plus", tol=1e-19)
    assert info.value.achieved > 1e-19


@settings(max_examples=15, deadline=None)
@given(st.floats(0.3, 1.45))
def test_increasing_above_its_minimum(beta):
    # c+ dips to a minimum near beta = 0.24 for this class and increases afterwards
    lo = c_constant(beta, PUCCI, "plus")
    hi = c_constant(min(beta + 0.04, 1.49), PUCCI, "plus")
    assert hi > lo
