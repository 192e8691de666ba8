import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from conftest import AUG1, NY_ROW, SEP1, simpson
from degreeday import car_model as cm
from degreeday.car_model import CarModel
from degreeday.pricing import Scheme, approx_coeffs_day, approx_coeffs_period, fcdd_approx, fcdd_day, fcdd_period
from degreeday.seasonal import reference_profile
from degreeday.sensitivity import (
    SensitivityVector,
    dapprox,
    day_greeks,
    dfcdd_day,
    dfcdd_period,
    dfhdd_day,
    fd_gradient,
    relative_error_report,
)

X0 = np.zeros(3)
EPS = np.finfo(float).eps


def fd_noise(price, h):
    """Cancellation floor of a central difference on a value of size ``price``."""
    return 4 * EPS * abs(price) / h


def shifted_state(model, sf, t, s, gap):
    """State with only x1 set so that m_theta - c == gap."""
    x1 = (model.c + gap - float(cm.m_theta(model, sf, t, s, X0))) / cm.f_kernel(model, s - t, 1)
    return np.array([x1, 0.0, 0.0])


class TestDay:
    def test_deep_in_the_money(self, model, sf):
        t, s = 200.0, 210.0
        g = dfcdd_day(model, sf, t, s, shifted_state(model, sf, t, s, 200.0))
        np.testing.assert_allclose(g.d, cm.f_vector(model, 10.0), rtol=0, atol=1e-10)

    def test_deep_out_of_the_money(self, model, sf):
        t, s = 200.0, 210.0
        g = dfcdd_day(model, sf, t, s, shifted_state(model, sf, t, s, -200.0))
        assert np.abs(g.d).max() < 1e-12

    def test_degenerate_indicator(self, model, sf):
        s = AUG1
        above = dfcdd_day(model, sf, s, s, shifted_state(model, sf, s, s, 1.0))
        below = dfcdd_day(model, sf, s, s, shifted_state(model, sf, s, s, -1.0))
        at = dfcdd_day(model, sf, s, s, shifted_state(model, sf, s, s, 0.0))
        np.testing.assert_allclose(above.d, [1, 0, 0], atol=1e-15)
        np.testing.assert_allclose(below.d, 0.0, atol=1e-15)
        np.testing.assert_allclose(at.d, [0.5, 0, 0], atol=1e-12)

    @pytest.mark.parametrize("lag", range(1, 31))
    def test_matches_fd(self, model, sf, lag):
        t, s = AUG1 - lag, AUG1
        fd = fd_gradient(lambda x: fcdd_day(model, sf, t, s, x), X0, h=1e-5)
        floor = fd_noise(fcdd_day(model, sf, t, s, X0), 1e-5)
        np.testing.assert_allclose(dfcdd_day(model, sf, t, s, X0).d, fd.d, rtol=1e-6, atol=floor)

    def test_hdd_sign(self, model, sf):
        t, s = 150.0, 160.0
        x = np.array([2.0, -1.0, 0.3])
        cdd, hdd = dfcdd_day(model, sf, t, s, x).d, dfhdd_day(model, sf, t, s, x).d
        # parity: the difference of prices is affine with gradient f
        np.testing.assert_allclose(cdd - hdd, cm.f_vector(model, 10.0), atol=1e-13)

    def test_long_end_decay(self, model, sf):
        exact = dfcdd_day(model, sf, AUG1 - 100, AUG1, X0).d
        approx = dapprox(approx_coeffs_day(model, sf, AUG1 - 100, AUG1, Scheme.APPROX_X)).d
        assert np.abs(exact).max() < 1e-3 and np.abs(approx).max() < 1e-3


class TestPeriod:
    def test_matches_fd(self, model, sf):
        t = 190.0
        fd = fd_gradient(lambda x: fcdd_period(model, sf, t, AUG1, SEP1, x), X0, h=1e-5)
        np.testing.assert_allclose(dfcdd_period(model, sf, t, AUG1, SEP1, X0).d, fd.d, rtol=1e-5)

    def test_vanishing(self, model, sf):
        assert np.abs(dfcdd_period(model, sf, 190.0, AUG1, AUG1 + 1e-9, X0).d).max() < 1e-8

    def test_deep_itm_is_a_x(self, sf):
        cold = CarModel.from_last_row(NY_ROW, sigma=5.25, c=-500.0)
        a = approx_coeffs_period(cold, sf, 190.0, AUG1, SEP1, Scheme.APPROX_X).a_vec
        np.testing.assert_allclose(dfcdd_period(cold, sf, 190.0, AUG1, SEP1, X0).d, a, rtol=1e-8, atol=1e-12)

    def test_integral_of_day_greeks(self, model, sf):
        t = 195.0
        ref = np.array(
            [simpson(lambda s, i=i: day_greeks(model, sf, t, s, X0)[..., i], AUG1, SEP1, 31 * 16) for i in range(3)]
        )
        np.testing.assert_allclose(dfcdd_period(model, sf, t, AUG1, SEP1, X0).d, ref, rtol=1e-6)


class TestApprox:
    def test_at_maturity(self, model, sf):
        np.testing.assert_allclose(dapprox(approx_coeffs_day(model, sf, AUG1, AUG1, Scheme.APPROX_X)).d, [1, 0, 0], atol=1e-14)

    def test_taylor_half(self, model, sf):
        x = dapprox(approx_coeffs_day(model, sf, 200.0, AUG1, Scheme.APPROX_X)).d
        tay = dapprox(approx_coeffs_day(model, sf, 200.0, AUG1, Scheme.APPROX_TAYLOR)).d
        assert np.array_equal(tay, 0.5 * x)

    def test_constant_in_state(self, model, sf, rs):
        coeffs = approx_coeffs_day(model, sf, 200.0, AUG1, Scheme.APPROX_X)
        base = dapprox(coeffs).d
        for x in rs.normal(0, 10, (10, 3)):
            fd = fd_gradient(lambda y: fcdd_approx(coeffs, y), x, h=1e-3)
            np.testing.assert_allclose(fd.d, base, rtol=0, atol=1e-10)
            assert np.array_equal(dapprox(coeffs).d, base)

    def test_figure_ordering(self, model, sf):
        g = lambda lag: dapprox(approx_coeffs_day(model, sf, AUG1 - lag, AUG1, Scheme.APPROX_X)).d  # noqa: E731
        assert np.argmax(g(1)) == 0
        for lag in range(2, 51):
            v = g(lag)
            assert np.argmax(v) == 1 and v[1] > v[0]


class TestFdGradient:
    def test_quadratic(self):
        g = fd_gradient(lambda x: x[0] ** 2, np.array([3.0, 1.0]), h=1e-4)
        assert g[0] == pytest.approx(6.0, abs=1e-7)
        assert g[1] == 0.0

    def test_rejects_bad_step(self):
        with pytest.raises(ValueError):
            fd_gradient(lambda x: 0.0, np.zeros(2), h=0.0)

    def test_non_finite(self):
        with pytest.raises(ArithmeticError):
            fd_gradient(lambda x: np.inf, np.zeros(2))


class TestRelativeError:
    def test_identical(self):
        r = relative_error_report([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
        assert np.all(r.percent == 0.0)

    def test_phi_structure(self, model, sf):
        t, s = AUG1 - 10, AUG1
        x = shifted_state(model, sf, t, s, 1.5)
        exact = dfcdd_day(model, sf, t, s, x)
        approx = dapprox(approx_coeffs_day(model, sf, t, s, Scheme.APPROX_X))
        z = 1.5 / math.sqrt(float(cm.sigma_sq(model, t, s)))
        want = 100 * (1 - special.ndtr(z)) / special.ndtr(z)
        np.testing.assert_allclose(relative_error_report(exact, approx).percent, want, rtol=1e-10)

    def test_zero_flagged(self):
        r = relative_error_report([0.0, 1.0], [0.1, 1.1])
        assert r.undefined.tolist() == [True, False]
        assert np.isnan(r.percent[0]) and r.absolute[0] == pytest.approx(0.1)
        assert r.max_percent == pytest.approx(10.0)

    def test_length(self):
        with pytest.raises(ValueError):
            relative_error_report([1.0], [1.0, 2.0])


def test_sensitivity_vector_finite():
    with pytest.raises(ValueError):
        SensitivityVector(np.array([1.0, np.nan]))
    v = SensitivityVector(np.array([1.0, 2.0]))
    assert len(v) == 2 and v[1] == 2.0 and np.asarray(v).tolist() == [1.0, 2.0]


@settings(max_examples=80, deadline=None)
@given(
    st.lists(st.floats(-20, 20), min_size=3, max_size=3),
    st.floats(0.0, 80.0),
    st.floats(0.0, 365.0),
)
def test_dominance_property(x, lag, s):
    m = CarModel.from_last_row(NY_ROW, sigma=5.25)
    sf = reference_profile()
    exact = dfcdd_day(m, sf, s - lag, s, np.array(x)).d
    approx = dapprox(approx_coeffs_day(m, sf, s - lag, s, Scheme.APPROX_X)).d
    assert np.all(np.abs(exact) <= np.abs(approx) + 1e-15)
