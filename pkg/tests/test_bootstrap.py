import math

import numpy as np
import pytest

from hartree_decay.bootstrap import (
    analyze,
    beta_l1,
    beta_l1_quadrature,
    bisection_roots,
    bootstrap_function,
    cardano_roots,
    continuity_trap,
    default_epsilon,
    fold_epsilon,
    gronwall_alpha,
    gronwall_bound,
    measured_c1,
    smallness_budget,
    threshold,
    tilde_point,
)
from hartree_decay.diagnostics import ConstantsLedger


def _random_pairs(n=1000, seed=0):
    rng = np.random.default_rng(seed)
    return zip(rng.uniform(1e-3, 1.0, n), rng.uniform(0.1, 100.0, n))


class TestRoots:
    def test_reference_case(self):
        an = analyze(0.1, 7.0)
        assert an.two_intervals and an.gap > 0
        assert an.c0 == an.roots[0]
        for r in an.roots:
            assert abs(an.f(r)) < 1e-15
        assert an.bisection_agreement <= 1e-12

    def test_cardano_matches_bisection(self):
        for eps, c in _random_pairs(200, seed=4):
            a = [x for x in cardano_roots(eps, c) if x >= 0]
            b = bisection_roots(eps, c)
            assert len(a) == len(b)
            assert all(abs(x - y) <= 1e-12 for x, y in zip(a, b))

    def test_single_negative_root(self):
        roots = cardano_roots(10.0, 1.0)
        assert len(roots) == 1 and roots[0] < 0
        assert bootstrap_function(roots[0], 10.0, 1.0) == pytest.approx(0.0, abs=1e-12)
        assert not analyze(10.0, 1.0).two_intervals

    def test_fold_is_one_component(self):
        c = 3.0
        an = analyze(fold_epsilon(c), c)
        assert not an.two_intervals
        assert an.c0 == math.inf

    def test_invalid_parameters(self):
        for eps, c in [(0.0, 1.0), (0.1, -1.0), (math.nan, 1.0), (0.1, math.inf)]:
            with pytest.raises(ValueError):
                analyze(eps, c)

    def test_threshold_is_sufficient(self):
        for _, c in _random_pairs(200, seed=5):
            assert analyze(0.999 * threshold(c), c).two_intervals
            assert threshold(c) < fold_epsilon(c)
            assert default_epsilon(c) < threshold(c)


class TestTildePoint:
    def test_derivative_is_minus_half(self):
        for _, c in _random_pairs(100):
            x = tilde_point(c)
            assert 3 * c * x * x - 1 == pytest.approx(-0.5, abs=1e-14)

    def test_exact_value(self):
        # f(x̃) = ε + x̃/6 - x̃ = ε - 5/(6√(6C))
        for eps, c in _random_pairs():
            fx = bootstrap_function(tilde_point(c), eps, c)
            assert fx == pytest.approx(eps - 5 / (6 * math.sqrt(6 * c)), abs=1e-14)

    def test_inequality(self):
        for eps, c in _random_pairs():
            assert bootstrap_function(tilde_point(c), eps, c) <= eps - 1 / (2 * math.sqrt(6 * c))

    def test_stated_identity(self):
        # the literal identity f(x̃) = ε - 1/(2√(6C)) at 1e-14; it does not hold (see the decisions ledger)
        worst = max(abs(bootstrap_function(tilde_point(c), eps, c) - (eps - 1 / (2 * math.sqrt(6 * c))))
                    for eps, c in _random_pairs())
        assert worst <= 1e-14


class TestContinuityTrap:
    def test_pass(self):
        an = analyze(0.1, 7.0)
        v = continuity_trap([0.0, 0.5 * an.c0, 0.9 * an.c0], an)
        assert v.passed and v.margin == pytest.approx(0.1 * an.c0)

    def test_jumped(self):
        an = analyze(0.1, 7.0)
        v = continuity_trap([0.0, 0.5 * an.c0, 2 * an.c0], an)
        assert v.verdict == "JUMPED" and v.first_offending_index == 2

    def test_not_trapped(self):
        an = analyze(0.1, 7.0)
        assert continuity_trap([2 * an.c0], an).verdict == "NOT_TRAPPED"

    def test_requires_two_intervals(self):
        with pytest.raises(ValueError):
            continuity_trap([0.0], analyze(10.0, 1.0))
        with pytest.raises(ValueError):
            continuity_trap([], analyze(0.1, 7.0))


class TestSmallnessBudget:
    def test_unit_ledger(self):
        led = ConstantsLedger.unit(3)
        b = smallness_budget(led, 0.1)
        assert b.c_coeff == pytest.approx(0.3 * max(led.C_infE, led.C_kE))
        assert b.analysis.two_intervals
        assert b.epsilon0 == pytest.approx(min(b.analysis.epsilon, b.analysis.c0) / 3)

    def test_errors(self):
        with pytest.raises(ValueError):
            smallness_budget(None, 0.1)
        with pytest.raises(ValueError):
            smallness_budget(ConstantsLedger.unit(3), 0.0)


class TestGronwall:
    @pytest.mark.parametrize("d", [3, 4, 5])
    def test_beta_closed_form_matches_quadrature(self, d):
        assert beta_l1(2.0, 1.5, d) == pytest.approx(beta_l1_quadrature(2.0, 1.5, d), rel=1e-10)

    def test_beta_rejects_low_dimension(self):
        with pytest.raises(ValueError):
            beta_l1(1.0, 1.0, 2)
        with pytest.raises(ValueError):
            beta_l1_quadrature(1.0, 1.0, 2)

    def test_bound_and_alpha(self):
        led = ConstantsLedger.unit(3)
        alpha = gronwall_alpha(0.5, 1.0, led, 0.1)
        assert alpha == pytest.approx(2 * (1 + 2**1.5 * 2) * 0.5 + 0.2)
        assert gronwall_bound(alpha, 0.0) == alpha
        assert gronwall_bound(1.0, 1.0) == pytest.approx(math.e)
        with pytest.raises(ValueError):
            gronwall_bound(-1.0, 0.0)
        with pytest.raises(ValueError):
            gronwall_alpha(0.5, 1.0, ConstantsLedger.unit(2), 0.1)

    def test_measured_c1(self):
        led = ConstantsLedger.unit(3)
        assert measured_c1(led, 1.0, 2.0, 0.0) == pytest.approx(4.0)
        assert measured_c1(led, 1.0, 1.0, 1.0) == pytest.approx(4.0)
