import math
import warnings

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import brentq

from axiblow import specfun
from axiblow.errors import BracketError, ConvergenceError, DomainError, GammaPoleError
from axiblow.specfun import (find_z0, gamma, gamma_closed_forms, hyp2f1_series, lemma_f, legendre_p,
                             legendre_p_prime, legendre_p_prime_closed, legendre_ratio, rgamma)

# Frozen from mpmath.legenp(nu, 0, x, type=2) at 30 digits: (nu, x, P, P')
MPMATH_TABLE = [
    (1.5, 0.3, -0.089787280990479468033, 1.1997934867035146988),
    (1.5, -0.7, -0.44622520931793421882, -1.1101060021180020813),
    (0.5, -0.95, -0.74871672017946218664, 6.9459568852755193808),
    (2.5, 0.99, 0.95661857608608685303, 4.3013412942105078313),
    (-0.3, 0.1, 1.1292728877682945007, -0.20191184969693680348),
    (3.7, -0.5, -0.071958170631606187244, 2.0309680637652489477),
    (1.5, 0.0, -0.39344686633869874202, 0.809028901782569035),
]
Z0_ORACLE = -0.419443051042095054218233994076  # mpmath.findroot on d/dx legenp(3/2)


@pytest.mark.parametrize("nu,x,p,dp", MPMATH_TABLE)
def test_legendre_against_frozen_mpmath(nu, x, p, dp):
    assert legendre_p(nu, x) == pytest.approx(p, abs=1e-13)
    assert legendre_p_prime(nu, x) == pytest.approx(dp, rel=1e-12, abs=1e-12)


@given(nu=st.floats(-3.0, 5.0), x=st.floats(-0.99, 1.0))
def test_legendre_against_live_mpmath(nu, x):
    want = float(mpmath.legenp(nu, 0, x, type=2))
    assert legendre_p(nu, x) == pytest.approx(want, rel=1e-11, abs=1e-12)


def test_legendre_vectorized_shape():
    x = np.linspace(-0.9, 0.9, 12).reshape(3, 4)
    out = legendre_p(1.5, x)
    assert out.shape == (3, 4)
    assert out[1, 2] == pytest.approx(legendre_p(1.5, float(x[1, 2])), abs=0)


@pytest.mark.parametrize("n", range(7))
def test_integer_degree_is_polynomial(n):
    x = np.linspace(-0.999, 0.999, 41)
    want = np.polynomial.legendre.legval(x, [0] * n + [1])
    assert np.max(np.abs(legendre_p(n, x) - want)) < 2e-14
    dwant = np.polynomial.legendre.legval(x, np.polynomial.legendre.legder([0] * n + [1]))
    assert np.max(np.abs(legendre_p_prime(n, x) - dwant)) < 1e-13


@given(nu=st.floats(0.1, 4.0), x=st.floats(-0.95, 0.95))
def test_three_term_recurrence(nu, x):
    lhs = (nu + 1) * legendre_p(nu + 1, x)
    rhs = (2 * nu + 1) * x * legendre_p(nu, x) - nu * legendre_p(nu - 1, x)
    assert lhs == pytest.approx(rhs, abs=1e-11)


@given(nu=st.floats(-2.0, 4.0))
def test_degree_reflection(nu):
    # P_nu = P_{-nu-1}
    assert legendre_p(nu, 0.2) == pytest.approx(legendre_p(-nu - 1.0, 0.2), abs=1e-12)


def test_value_and_slope_at_one():
    assert legendre_p(1.5, 1.0) == 1.0
    assert legendre_p_prime_closed(1.5, 1.0) == pytest.approx(1.5 * 2.5 / 2)


def test_domain_errors():
    with pytest.raises(DomainError):
        legendre_p(1.5, -1.0)
    with pytest.raises(DomainError):
        legendre_p(1.5, 1.5)
    with pytest.raises(DomainError):
        legendre_p_prime(1.5, 1.0)
    with pytest.raises(DomainError):
        legendre_p(math.inf, 0.0)
    with pytest.raises(DomainError):
        legendre_p(1.5, math.nan)


def test_near_singularity_warns():
    with pytest.warns(RuntimeWarning):
        legendre_p(1.5, -1.0 + 1e-8)


def test_series_cap_raises(monkeypatch):
    monkeypatch.setattr(specfun, "MAX_TERMS", 3)
    with pytest.raises(ConvergenceError):
        hyp2f1_series(0.5, 0.5, 1.0, 0.9)


def test_hyp2f1_against_scipy():
    from scipy.special import hyp2f1
    z = np.linspace(-0.5, 0.5, 11)
    assert np.allclose(hyp2f1_series(-1.5, 2.5, 1.0, z), hyp2f1(-1.5, 2.5, 1.0, z), rtol=1e-14, atol=1e-15)


def test_gamma_poles():
    with pytest.raises(GammaPoleError):
        gamma(-2.0)
    assert rgamma(0.0) == 0.0
    assert gamma(0.5) == pytest.approx(math.sqrt(math.pi))


def test_find_z0_matches_oracles():
    root = find_z0(1e-12)
    assert root.z0 == pytest.approx(Z0_ORACLE, abs=1e-13)
    z_brent = brentq(lambda t: legendre_p_prime(1.5, t), -0.99, -0.01, xtol=1e-15)
    assert root.z0 == pytest.approx(z_brent, abs=1e-13)
    assert root.residual < 1e-12
    assert math.degrees(root.theta_star) == pytest.approx(65.20057003, abs=1e-7)
    assert math.degrees(root.opening) == pytest.approx(130.40114006, abs=1e-7)
    # the angle quoted for the bubble is arccos(z0) = pi - theta*
    assert math.degrees(root.water_angle) == pytest.approx(114.799, abs=0.001)


def test_find_z0_tight_tolerance():
    assert find_z0(1e-14).residual < 1e-14


def test_find_z0_bad_bracket():
    with pytest.raises(BracketError):
        find_z0(bracket=(0.1, 0.5))
    with pytest.raises(DomainError):
        find_z0(tol=0.0)


# P'_m(0), Q'_m(0) from mpmath (derivatives of legenp/legenq type 2 at 0)
CLOSED_FORM_ORACLE = {
    0.5: (0.59017029950804811, 0.92703733865068595922),
    1.5: (0.809028901782569035, -1.2708196271909686299),
    2.5: (-0.98361716584674685, -1.5450622310844765987),
}


@pytest.mark.parametrize("m", sorted(CLOSED_FORM_ORACLE))
def test_gamma_closed_forms(m):
    p_want, q_want = CLOSED_FORM_ORACLE[m]
    cf = gamma_closed_forms(m)
    assert cf.p_prime_0 == pytest.approx(p_want, abs=1e-12)
    assert cf.q_prime_0 == pytest.approx(q_want, abs=1e-12)
    assert legendre_p_prime(m, 0.0) == pytest.approx(cf.p_prime_0, abs=1e-10)
    assert cf.poles == ()


def test_closed_forms_at_poles():
    cf = gamma_closed_forms(2.0)
    assert cf.p_prime_0 == 0.0
    assert cf.q_prime_0 is None
    assert "Gamma(0)" in cf.poles
    assert gamma_closed_forms(1.0).q_prime_0 is None


def test_lemma_f_negative_and_symmetric():
    x = np.linspace(-1, 1, 1001)[1:-1]
    f = lemma_f(x)
    assert np.all(f < 0)
    assert np.allclose(f, f[::-1], atol=1e-12)
    assert float(lemma_f(0.0)) == pytest.approx(-2 / math.pi, abs=1e-13)


def test_printed_gamma_forms_of_f0():
    # only the second printed form equals 2 P(0) P'(0)
    f0 = float(lemma_f(0.0))
    first = 3 * math.sqrt(math.pi) / (gamma(-0.5) * gamma(1.75)) * legendre_p(0.5, 0.0)
    second = (3 * math.sqrt(math.pi) / (gamma(-0.25) * gamma(1.75))
              * math.sqrt(math.pi) / (gamma(0.25) * gamma(1.25)))
    assert second == pytest.approx(f0, abs=1e-12)
    assert abs(first - f0) > 0.2


def test_ratio_increasing_on_each_branch():
    pole = -find_z0().z0
    for lo, hi in ((-0.999, pole - 1e-4), (pole + 1e-4, 0.999)):
        g = legendre_ratio(np.linspace(lo, hi, 500))
        assert np.all(np.diff(g) > 0)


def test_warnings_not_emitted_away_from_singularity():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        legendre_p(1.5, np.linspace(-0.99, 1.0, 50))
