import math

import numpy as np
import pytest
from scipy import special

from conftest import AUG1, AUG2, NY_ROW, SEP1, simpson
from degreeday import car_model as cm
from degreeday import options
from degreeday.car_model import CarModel
from degreeday.options import (
    OptionSpec,
    PathDependentGreekError,
    call_approx,
    call_approx_greeks,
    call_approx_terms,
    call_exact_mc,
    call_greek_density_mc,
    conditional_law,
)
from degreeday.pricing import ContractSpec, Day, Period, Scheme, Side, approx_coeffs, fcdd_approx, fcdd_day, psi
from degreeday.sensitivity import dfcdd_day, fd_gradient

X0 = np.zeros(3)
R = 1e-4


def day_option(s=AUG2, tau=AUG1, K=13.0, scheme=Scheme.EXACT, side=Side.CDD):
    return OptionSpec(K, tau, R, ContractSpec(Day(s), side, scheme))


def period_option(tau=205.0, K=224.0, scheme=Scheme.APPROX_X):
    return OptionSpec(K, tau, R, ContractSpec(Period(AUG1, SEP1), Side.CDD, scheme))


def g_kernel(model, u):
    return cm.f_kernel(model, u, model.p)


def crn_difference(model, sf, t, opt, x, i, h, n, seed):
    """Central difference of the MC call price on common draws, with its paired standard error."""
    bump = np.zeros(3)
    bump[i] = h
    up, _, _ = options._sample(model, sf, t, opt, x + bump, n, seed, Scheme.EXACT)
    dn, _, _ = options._sample(model, sf, t, opt, x - bump, n, seed, Scheme.EXACT)
    diff = opt.discount(t) * (up - dn) / (2 * h)
    return diff.mean(), diff.std(ddof=1) / math.sqrt(n)


class TestSpec:
    def test_rate_positive(self):
        with pytest.raises(ValueError):
            OptionSpec(13.0, AUG1, 0.0, ContractSpec(Day(AUG2)))

    def test_exercise_before_measurement(self):
        with pytest.raises(ValueError):
            OptionSpec(13.0, AUG2 + 1, R, ContractSpec(Day(AUG2)))


class TestConditionalLaw:
    def test_at_t(self, model):
        law = conditional_law(model, 10.0, 15.0, 10.0, [1.0, 2.0, 3.0])
        assert law.variance == 0.0
        assert law.mean == pytest.approx(float(cm.f_vector(model, 5.0) @ [1.0, 2.0, 3.0]), abs=1e-14)

    def test_at_s(self, model):
        law = conditional_law(model, 10.0, 15.0, 15.0, X0)
        assert law.variance == pytest.approx(float(cm.sigma_sq(model, 10.0, 15.0)), rel=1e-14)

    def test_simpson_oracle(self, model):
        ref = simpson(lambda u: 5.25**2 * g_kernel(model, 5.0 - u) ** 2, 0.0, 2.0, 10_000)
        assert conditional_law(model, 0.0, 5.0, 2.0, X0).variance == pytest.approx(ref, rel=1e-8)

    def test_ordering(self, model):
        with pytest.raises(ValueError):
            conditional_law(model, 0.0, 5.0, 6.0, X0)


class TestExactMC:
    def test_degenerate(self, model, sf):
        opt = day_option()
        est = call_exact_mc(model, sf, AUG1, opt, X0, 1000, seed=1)
        assert est.se == 0.0
        assert est.price == pytest.approx(max(fcdd_day(model, sf, AUG1, AUG2, X0) - 13.0, 0.0), abs=1e-14)

    def test_zero_strike_martingale(self, model, sf):
        t = AUG1 - 20
        opt = day_option(K=0.0)
        est = call_exact_mc(model, sf, t, opt, X0, 100_000, seed=3)
        assert abs(est.price - opt.discount(t) * fcdd_day(model, sf, t, AUG2, X0)) < 3 * est.se

    def test_gauss_hermite_oracle(self, model, sf):
        s = AUG2
        t, tau = s - 30, s - 1
        opt = day_option(s=s, tau=tau)
        law = conditional_law(model, t, s, tau, X0)
        sig = math.sqrt(float(cm.sigma_sq(model, tau, s)))
        z, w = np.polynomial.hermite_e.hermegauss(180)
        futures = sig * psi((sf(s) - model.c + law.mean + math.sqrt(law.variance) * z) / sig)
        ref = opt.discount(t) * (w @ np.maximum(futures - 13.0, 0.0)) / math.sqrt(2 * math.pi)
        est = call_exact_mc(model, sf, t, opt, X0, 100_000, seed=5)
        assert abs(est.price - ref) < 3 * est.se

    def test_monotone_in_strike(self, model, sf):
        t = AUG1 - 10
        prices = [call_exact_mc(model, sf, t, day_option(K=k), X0, 20_000, seed=9).price for k in (5, 9, 13, 17)]
        assert all(a >= b for a, b in zip(prices, prices[1:]))

    def test_deterministic(self, model, sf):
        a = call_exact_mc(model, sf, 190.0, day_option(), X0, 5000, seed=77)
        b = call_exact_mc(model, sf, 190.0, day_option(), X0, 5000, seed=77)
        assert a == b

    def test_bad_inputs(self, model, sf):
        with pytest.raises(ValueError):
            call_exact_mc(model, sf, 190.0, day_option(), X0, 1, seed=0)
        with pytest.raises(ValueError):
            call_exact_mc(model, sf, AUG1 + 0.5, day_option(), X0, 100, seed=0)
        with pytest.raises(PathDependentGreekError):
            call_exact_mc(model, sf, 190.0, period_option(scheme=Scheme.EXACT), X0, 100, seed=0)


class TestDensityGreek:
    def test_zero_strike_matches_futures_greek(self, model, sf):
        t = AUG1 - 15
        opt = day_option(K=0.0)
        g, se = call_greek_density_mc(model, sf, t, opt, X0, 200_000, seed=21)
        want = opt.discount(t) * dfcdd_day(model, sf, t, AUG2, X0).d
        assert np.all(np.abs(g.d - want) < 4 * se)

    def test_linear_payoff_matches_closed_form(self, model, sf):
        t = AUG1 - 12
        opt = day_option()
        g, se = call_greek_density_mc(model, sf, t, opt, X0, 200_000, seed=22, scheme=Scheme.APPROX_X)
        want = call_approx_greeks(model, sf, t, opt, X0, Scheme.APPROX_X).d
        assert np.all(np.abs(g.d - want) < 4 * se)

    @pytest.mark.parametrize("t,x", [(AUG1 - 5, X0), (AUG1 - 25, np.array([2.0, -1.0, 0.5]))])
    def test_crn_finite_difference(self, model, sf, t, x):
        opt, n, seed, h = day_option(), 200_000, 31, 0.05
        g, se = call_greek_density_mc(model, sf, t, opt, x, n, seed)
        for i in range(3):
            fd, fd_se = crn_difference(model, sf, t, opt, x, i, h, n, seed)
            assert abs(g.d[i] - fd) < 4 * math.hypot(se[i], fd_se)

    def test_refuses_degenerate_and_period(self, model, sf):
        with pytest.raises(ValueError):
            call_greek_density_mc(model, sf, AUG1, day_option(), X0, 100, seed=0)
        with pytest.raises(PathDependentGreekError, match="path-dependent"):
            call_greek_density_mc(model, sf, 190.0, period_option(scheme=Scheme.EXACT), X0, 100, seed=0)


class TestApproxCall:
    def test_degenerate(self, model, sf):
        opt = day_option(scheme=Scheme.APPROX_X)
        terms = call_approx_terms(model, sf, AUG1, opt, X0)
        assert terms.S == 0.0
        f = fcdd_approx(approx_coeffs(model, sf, opt.underlying, AUG1), X0)
        assert call_approx(model, sf, AUG1, opt, X0) == pytest.approx(max(f - 13.0, 0.0), abs=1e-14)
        assert terms.d == pytest.approx(f, abs=1e-12)

    def test_deep_strike(self, model, sf):
        t = AUG1 - 10
        base = day_option(scheme=Scheme.APPROX_X)
        terms = call_approx_terms(model, sf, t, base, X0)
        opt = day_option(K=terms.d - 10 * terms.S, scheme=Scheme.APPROX_X)
        price = call_approx(model, sf, t, opt, X0)
        assert price == pytest.approx(opt.discount(t) * (terms.d - opt.K), abs=terms.S * 1e-10)
        g = call_approx_greeks(model, sf, t, opt, X0).d
        np.testing.assert_allclose(g, opt.discount(t) * terms.a_vec, rtol=1e-12)
        far = day_option(K=terms.d + 40 * terms.S, scheme=Scheme.APPROX_X)
        assert np.abs(call_approx_greeks(model, sf, t, far, X0).d).max() < 1e-300

    @pytest.mark.parametrize("scheme", [Scheme.APPROX_X, Scheme.APPROX_TAYLOR])
    def test_matches_linear_payoff_mc(self, model, sf, scheme):
        t = AUG1 - 20
        opt = day_option(K=13.0 if scheme is Scheme.APPROX_X else 0.5)
        est = call_exact_mc(model, sf, t, opt, X0, 100_000, seed=41, scheme=scheme)
        assert abs(call_approx(model, sf, t, opt, X0, scheme) - est.price) < 3 * est.se

    def test_period_matches_state_mc(self, model, sf):
        t, tau, n = 170.0, 200.0, 100_000
        opt = period_option(tau=tau)
        coeffs = approx_coeffs(model, sf, opt.underlying, tau)
        states = cm.simulate_state(model, t, tau, X0, n, seed=51)
        payoff = np.maximum(coeffs.theta_term + states @ coeffs.a_vec - opt.K, 0.0) * opt.discount(t)
        se = payoff.std(ddof=1) / math.sqrt(n)
        assert abs(call_approx(model, sf, t, opt, X0) - payoff.mean()) < 3 * se

    def test_greeks_match_fd(self, model, sf, rs):
        for _ in range(100):
            s = rs.uniform(150, 250)
            tau = s - rs.uniform(0, 10)
            t = tau - rs.uniform(0.5, 40)
            x = rs.normal(0, 4, 3)
            scheme = Scheme.APPROX_X if rs.random() < 0.5 else Scheme.APPROX_TAYLOR
            K = rs.uniform(0, 20) if scheme is Scheme.APPROX_X else rs.uniform(0, 6)
            opt = day_option(s=s, tau=tau, K=K, scheme=scheme)
            fd = fd_gradient(lambda y: call_approx(model, sf, t, opt, y), x, h=1e-5)
            an = call_approx_greeks(model, sf, t, opt, x).d
            an = call_approx_greeks(model, sf, t, opt, x).d
            # rounding of the intermediate d (not the price) bounds the FD resolution
            terms = call_approx_terms(model, sf, t, opt, x)
            weight = special.ndtr((terms.d - K) / terms.S)
            floor = 4 * np.finfo(float).eps * abs(terms.d) * weight / 1e-5
            np.testing.assert_allclose(an, fd.d, rtol=1e-6, atol=max(floor, 1e-12))

    def test_period_greeks_match_fd(self, model, sf):
        opt = period_option()
        x = np.array([1.0, 0.5, -0.2])
        # d is ~224 here, so a 1e-5 bump sits at the rounding level of d; the price is smooth in x
        fd = fd_gradient(lambda y: call_approx(model, sf, 180.0, opt, y), x, h=1e-3)
        np.testing.assert_allclose(call_approx_greeks(model, sf, 180.0, opt, x).d, fd.d, rtol=1e-6)

    def test_discount_factor(self, model, sf):
        # r enters only through exp(-r (tau - t))
        t = AUG1 - 10
        base = day_option(scheme=Scheme.APPROX_X)
        for r in (1e-3, 0.05):
            other = OptionSpec(13.0, AUG1, r, base.underlying)
            ratio = call_approx(model, sf, t, other, X0) / call_approx(model, sf, t, base, X0)
            assert ratio == pytest.approx(math.exp(-(r - R) * (AUG1 - t)), rel=1e-13)

    def test_monotone_in_strike(self, model, sf):
        prices = [call_approx(model, sf, 190.0, day_option(K=k, scheme=Scheme.APPROX_X), X0) for k in range(0, 30)]
        assert all(a >= b for a, b in zip(prices, prices[1:]))

    def test_positive_greeks(self, model, sf):
        for lag in range(2, 51):
            opt = day_option(scheme=Scheme.APPROX_X)
            a = call_approx_terms(model, sf, AUG2 - lag, opt, X0).a_vec
            g = call_approx_greeks(model, sf, AUG2 - lag, opt, X0).d
            if np.all(a >= 0):
                assert np.all(g >= 0)

    def test_component_two_dominates(self, model, sf):
        opt = day_option(scheme=Scheme.APPROX_X)
        for lag in range(2, 51):
            g = call_approx_greeks(model, sf, AUG2 - lag, opt, X0).d
            assert g[1] > g[0] and g[1] > g[2]

    def test_exact_scheme_rejected(self, model, sf):
        with pytest.raises(ValueError):
            call_approx(model, sf, 190.0, day_option(), X0)

    def test_theta_drift_enters_d(self, sf):
        m = CarModel.from_last_row(NY_ROW, sigma=5.25, theta=0.3)
        t, n = AUG1 - 20, 100_000
        opt = day_option(scheme=Scheme.APPROX_X)
        est = call_exact_mc(m, sf, t, opt, X0, n, seed=61, scheme=Scheme.APPROX_X)
        assert abs(call_approx(m, sf, t, opt, X0) - est.price) < 3 * est.se
