"""Regime classification, fixed points, mean-field recursion."""

import math

import pytest

from pachoice import (
    Regime,
    classify_regime,
    critical_constant,
    drift,
    drift_slope,
    extrapolate_limit,
    mean_field_limit,
    mean_field_trajectory,
    new_params,
    regime_parameter,
    solve_fixed_point,
    type_drift,
)
from pachoice.errors import DomainError, NotCritical, NotSupercritical

SUPER = new_params(1, 2, 3, beta=0.0)          # rho = 7/6
CRIT = new_params(1, 1, 3, beta=0.0)           # rho = 1
SUB = new_params(1, 1, 2, beta=0.0)            # rho = 3/4

# closed form for SUPER, derived from the fixed-point equation itself:
# with u = x/6 the equation x/6 + 2(1 - (1 - x/6)^3) = x reduces to
# u (2u^2 - 6u + 1) = 0, whose positive root below 1 is u = (3 - sqrt 7)/2.
X_STAR_CLOSED = 6.0 * (3.0 - math.sqrt(7.0)) / 2.0

PARAMS_GRID = [
    SUPER,
    CRIT,
    SUB,
    new_params(2, 1, 4, T=2, beta=0.5, type_probs=[0.4, 0.6]),
    new_params(1, 3, 2, beta=-0.5),
    new_params(3, 1, 5, T=3, beta=2.0, type_probs=[0.2, 0.3, 0.5]),
]


class TestDrift:
    def test_zero_everywhere(self):
        for p in PARAMS_GRID:
            assert drift(0.0, p) == 0.0

    def test_full_weight_rate_point(self):
        # m=1,k=2,d=3,beta=0: drift(6) = 1 + 2(1 - 0) = 3
        assert drift(6.0, SUPER) == pytest.approx(3.0, abs=1e-15)

    def test_midpoint_value(self):
        # drift(3) = 0.5 + 2(1 - 0.125) = 2.25
        assert drift(3.0, SUPER) == pytest.approx(2.25, abs=1e-15)

    def test_domain_error(self):
        with pytest.raises(DomainError):
            drift(-0.1, SUPER)
        with pytest.raises(DomainError):
            drift(6.0 + 1e-9, SUPER)

    def test_concavity(self):
        for p in PARAMS_GRID:
            W = p.total_weight_rate
            xs = [W * i / 23 for i in range(24)]
            for a in xs:
                for b in xs:
                    if a < b:
                        mid = 0.5 * (a + b)
                        assert drift(mid, p) >= 0.5 * (drift(a, p) + drift(b, p)) - 1e-12

    def test_slope_at_zero_by_finite_differences(self):
        for p in PARAMS_GRID:
            h = 1e-6
            fd = (drift(h, p) - drift(0.0, p)) / h
            rho = (p.m + p.d * p.k) / p.total_weight_rate
            assert abs(fd - rho) < 1e-6
            assert drift_slope(0.0, p) == pytest.approx(rho, abs=1e-15)


class TestClassification:
    def test_subcritical_example(self):
        s = classify_regime(SUB)
        assert s.regime is Regime.SUBCRITICAL
        assert s.rho == pytest.approx(0.75)
        assert s.subcritical_exponent == pytest.approx(0.75)
        assert s.x_star is None
        assert s.critical_constant_by_type is None

    def test_critical_example(self):
        s = classify_regime(CRIT)
        assert s.regime is Regime.CRITICAL
        assert s.rho == pytest.approx(1.0)
        assert s.critical_constant_by_type is not None
        assert s.x_star is None
        assert s.subcritical_exponent is None

    def test_supercritical_example(self):
        s = classify_regime(SUPER)
        assert s.regime is Regime.SUPERCRITICAL
        assert s.rho == pytest.approx(7.0 / 6.0)
        assert s.x_star == pytest.approx(X_STAR_CLOSED, abs=1e-9)
        assert s.condensate_fraction_by_type == (s.x_star,)
        assert s.critical_constant_by_type is None

    def test_boundary_detection_is_exact(self):
        # rho = 1 exactly when beta equals d*k - m - 2*k
        assert classify_regime(new_params(1, 1, 4, beta=1.0)).regime is Regime.CRITICAL
        assert classify_regime(new_params(1, 1, 4, beta=1.0 + 1e-9)).regime is Regime.SUBCRITICAL
        assert classify_regime(new_params(1, 1, 4, beta=1.0 - 1e-9)).regime is Regime.SUPERCRITICAL

    def test_regime_parameter(self):
        assert regime_parameter(SUPER) == pytest.approx(7.0 / 6.0, abs=1e-15)


class TestFixedPoint:
    def test_closed_form(self):
        x = solve_fixed_point(SUPER)
        assert abs(x - X_STAR_CLOSED) < 1e-12

    def test_residual(self):
        for p in [SUPER, new_params(2, 3, 4, beta=0.0), new_params(1, 1, 5, beta=-0.5)]:
            x = solve_fixed_point(p)
            assert abs(drift(x, p) - x) < 1e-12
            assert 0.0 < x < p.total_weight_rate

    def test_curve_above_chord_below_root(self):
        x = solve_fixed_point(SUPER)
        assert drift(x / 2.0, SUPER) > x / 2.0

    def test_not_supercritical(self):
        with pytest.raises(NotSupercritical):
            solve_fixed_point(SUB)
        with pytest.raises(NotSupercritical):
            solve_fixed_point(CRIT)

    def test_bisect_newton_agreement(self):
        for p in [SUPER, new_params(2, 3, 4, beta=0.0), new_params(1, 2, 4, T=2, beta=0.5,
                                                                   type_probs=[0.3, 0.7])]:
            a = solve_fixed_point(p, method="bisect")
            b = solve_fixed_point(p, method="newton")
            assert abs(a - b) < 1e-10


class TestCriticalConstant:
    def test_single_type_value(self):
        # 2 * 1 * 16 / (1 * 3 * 2) = 16/3
        assert critical_constant(CRIT, 0) == pytest.approx(16.0 / 3.0, abs=1e-12)

    def test_scales_with_type_probability(self):
        p = new_params(1, 1, 3, T=2, beta=0.0, type_probs=[0.5, 0.5])
        assert critical_constant(p, 0) == pytest.approx(8.0 / 3.0, abs=1e-12)

    def test_not_critical(self):
        with pytest.raises(NotCritical):
            critical_constant(SUPER, 0)

    def test_matches_drift_curvature(self):
        # the constant equals 2 / (-g_i''(0)); check by finite differences
        p = new_params(1, 1, 3, T=2, beta=0.0, type_probs=[0.3, 0.7])
        h = 1e-5
        for i in range(2):
            second = (type_drift(2 * h, i, p) - 2 * type_drift(h, i, p)) / (h * h)
            assert 2.0 / (-second) == pytest.approx(critical_constant(p, i), rel=1e-4)


class TestTypeDrift:
    def test_zero(self):
        for p in PARAMS_GRID:
            for i in range(p.num_types):
                assert type_drift(0.0, i, p) == 0.0

    def test_reduces_to_drift_for_single_type(self):
        for x in [0.0, 0.5, 1.0, 3.0, 6.0]:
            assert type_drift(x, 0, SUPER) == pytest.approx(drift(x, SUPER), abs=1e-15)

    def test_scaling_identity(self):
        p = new_params(1, 2, 3, T=2, beta=0.5, type_probs=[0.3, 0.7])
        for i, pi in enumerate(p.type_probs):
            for frac in [0.1, 0.4, 0.9]:
                x = frac * pi * p.total_weight_rate
                assert type_drift(x, i, p) == pytest.approx(
                    pi * drift(x / pi, p), rel=1e-12
                )

    def test_slope_at_zero_is_rho(self):
        p = new_params(1, 2, 3, T=2, beta=0.0, type_probs=[0.3, 0.7])
        rho = regime_parameter(p)
        h = 1e-6
        for i in range(2):
            fd = (type_drift(h, i, p) - type_drift(0.0, i, p)) / h
            assert abs(fd - rho) < 1e-4

    def test_domain_error(self):
        p = new_params(1, 2, 3, T=2, beta=0.0, type_probs=[0.3, 0.7])
        with pytest.raises(DomainError):
            type_drift(0.3 * 6.0 + 1e-6, 0, p)


class TestMeanFieldRecursion:
    def test_zero_start_stays_zero(self):
        ns, ys = mean_field_trajectory(SUPER, 0, 1, 0.0, 500)
        assert ys[0] == 0.0 and ys[-1] == 0.0

    def test_supercritical_converges_toward_fixed_point(self):
        # frozen oracle values for y0=1, n0=1, n_max=1e6: the ratio is still
        # ~0.76% below x* (the transient decays like n^-(1 - slope at x*),
        # about n^-0.156 here); the extrapolated tail limit agrees to ~1e-4
        x_star = solve_fixed_point(SUPER)
        limit, z_final = mean_field_limit(SUPER, 0, 1, 1.0, 10**6)
        assert z_final == pytest.approx(1.0546661851740897, abs=1e-9)
        assert abs(z_final - x_star) < 0.01
        assert abs(limit - x_star) < 2e-4

    def test_fixed_point_is_invariant(self):
        x_star = solve_fixed_point(SUPER)
        ns, ys = mean_field_trajectory(SUPER, 0, 100, 100 * x_star, 2000)
        assert ys[-1] / ns[-1] == pytest.approx(x_star, rel=1e-12)

    def test_subcritical_ratio_vanishes(self):
        ns, ys = mean_field_trajectory(SUB, 0, 1, 1.0, 10**5,
                                       checkpoints=[10, 100, 1000, 10**4, 10**5])
        zs = [y / n for n, y in zip(ns, ys)]
        assert all(b < a for a, b in zip(zs, zs[1:]))   # monotone decay
        assert zs[-1] < 0.05
        # decade ratio approaches 10^(rho - 1) = 10^-0.25
        assert zs[-1] / zs[-2] == pytest.approx(10 ** -0.25, abs=0.02)

    def test_checkpoints_match_dense_run(self):
        ns_d, ys_d = mean_field_trajectory(SUPER, 0, 1, 1.0, 3000)
        ns_c, ys_c = mean_field_trajectory(SUPER, 0, 1, 1.0, 3000, checkpoints=[10, 300, 3000])
        for n, y in zip(ns_c, ys_c):
            assert y == ys_d[n - 1]

    def test_clamp_allows_large_starts(self):
        # a start far above the root is clamped into the drift's domain and
        # decays monotonically toward the root (slowly, like n^-0.156)
        ns, ys = mean_field_trajectory(SUPER, 0, 1, 50.0, 4000,
                                       checkpoints=[40, 400, 4000])
        zs = [y / n for n, y in zip(ns, ys)]
        x_star = solve_fixed_point(SUPER)
        assert zs[0] > zs[1] > zs[2] > x_star

    def test_validation(self):
        with pytest.raises(ValueError):
            mean_field_trajectory(SUPER, 0, 0, 1.0, 10)
        with pytest.raises(ValueError):
            mean_field_trajectory(SUPER, 0, 1, -1.0, 10)


class TestExtrapolation:
    def test_exact_on_geometric_tail(self):
        L, A, q = 1.37, 0.8, 0.35
        zs = [L - A * q**j for j in range(3)]
        assert extrapolate_limit(*zs) == pytest.approx(L, abs=1e-12)

    def test_degenerate_sequence(self):
        assert extrapolate_limit(1.0, 1.0, 1.0) == 1.0

    def test_cross_module_condensate_fraction(self):
        # two independent code paths: p_i * (root of drift(x) = x) versus the
        # limit of the mean-field recursion
        summary = classify_regime(SUPER)
        limit, _ = mean_field_limit(SUPER, 0, 1, 1.0, 10**6)
        assert abs(limit - summary.condensate_fraction_by_type[0]) < 1e-3
