import math
import random
from fractions import Fraction

import numpy as np
import pytest

from waringbox import (BoxSpec, PhasePoint, ValidationError, classify_alpha,
                       dirichlet_closed_form, dissect, eval_S, eval_v,
                       full_circle_integral, major_approx_V,
                       major_arc_integral, root_count_convolution,
                       singular_series, singular_series_tail_majorant,
                       singular_integral_beta, singular_integral_conv)
from waringbox.verify import loglog_slope


def totient_sum(Q):
    total = 0
    for q in range(1, Q + 1):
        total += sum(1 for a in range(1, q + 1) if math.gcd(a, q) == 1)
    return total


class TestDissect:
    def test_X64_k2(self):
        d = dissect(64, 2)
        assert [(a.q, a.a) for a in d.arcs] == [(2, 1), (1, 1)]
        assert math.isclose(d.half_width, 2.0**-11, rel_tol=1e-12)
        assert d.disjoint

    def test_tiny_X(self):
        d = dissect(2, 2)
        assert len(d.arcs) == 1 and d.arcs[0].q == 1

    def test_totient_count(self):
        d = dissect(4096, 3)
        assert len(d.arcs) == totient_sum(4)
        for X in (64, 729, 5000, 46656):
            k = 2
            d = dissect(X, k)
            assert len(d.arcs) == totient_sum(d.q_max)

    def test_disjointness_exact(self):
        # with k >= 2 the arcs are always disjoint: Farey neighbours with
        # q <= X^(1/6) are >= X^(-1/3) apart while widths are 2 X^(1/6-k)
        for X in (64, 100, 4096, 10**6):
            for k in (2, 3, 4):
                d = dissect(X, k)
                assert d.disjoint
                # spot check: minimal gap really beats twice the half-width
                assert float(d.min_gap) > 2 * d.half_width

    def test_measure(self):
        d = dissect(64, 2)
        assert abs(d.total_measure - 2 * 2 * 2.0**-11) < 1e-18

    def test_rejects(self):
        with pytest.raises(ValidationError):
            dissect(1, 2)


class TestClassify:
    def test_center_is_major(self):
        d = dissect(64, 2)
        c = classify_alpha(PhasePoint.from_fraction(Fraction(1, 2)), d)
        assert c.major and c.arc.q == 2 and c.arc.a == 1

    def test_sqrt2_point_is_minor(self):
        d = dissect(64, 2)
        fr = Fraction(math.sqrt(2) - 1).limit_denominator(10**15)
        c = classify_alpha(PhasePoint.from_fraction(fr), d)
        assert not c.major
        assert c.q_best > d.q_max
        # the Dirichlet denominator obeys q <= X^(k - 1/6)
        assert c.q_best ** 6 <= 64 ** (6 * 2 - 1)
        # and really achieves ||q alpha|| <= X^(1/6-k)
        dist = abs(fr * c.q_best - round(fr * c.q_best))
        assert float(dist) <= 64.0 ** (1 / 6 - 2) + 1e-18

    def test_edge_points(self):
        d = dissect(64, 2)
        w = Fraction(1, 2**11)  # exact half-width for X = 64
        inside = classify_alpha(PhasePoint.from_fraction(w * 99 / 100), d)
        assert inside.major and inside.arc.q == 1
        on_edge = classify_alpha(PhasePoint.from_fraction(w), d)
        assert on_edge.major
        outside = classify_alpha(PhasePoint.from_fraction(w * 101 / 100), d)
        assert not outside.major

    def test_total_and_exclusive(self):
        d = dissect(1024, 2)
        rng = random.Random(21)
        n_major = n_minor = 0
        for _ in range(300):
            fr = Fraction(rng.randrange(1, 2**40), 2**40)
            c = classify_alpha(PhasePoint.from_fraction(fr), d)
            if c.major:
                n_major += 1
                assert c.arc is not None and c.arc.contains(fr)
            else:
                n_minor += 1
                assert c.q_best > d.q_max
        assert n_minor > 0  # minor arcs carry almost all the measure


class TestFullCircle:
    def test_two_squares(self):
        v = full_circle_integral(BoxSpec.make(2, (5, 5), 25))
        assert abs(v - 2) < 1e-9

    def test_taxicab(self):
        v = full_circle_integral(BoxSpec.make(3, (12, 12), 1729))
        assert abs(v - 4) < 1e-6

    def test_single_variable_miss(self):
        v = full_circle_integral(BoxSpec.make(2, (7,), 13))
        assert abs(v) < 1e-9

    def test_matches_exact_count_randomly(self):
        rng = random.Random(31)
        for _ in range(25):
            k = rng.choice((2, 3))
            s = rng.randint(1, 5)
            sides = [rng.randint(1, 12) for _ in range(s)]
            power_sum = sum(p**k for p in sides)
            N = rng.randint(1, power_sum + 3)
            box = BoxSpec.make(k, sides, N)
            exact = root_count_convolution(box).count
            assert abs(full_circle_integral(box) - exact) < 1e-6


class TestMajorArc:
    def test_V_at_center_q1(self):
        d = dissect(256, 2)
        arc1 = [a for a in d.arcs if a.q == 1][0]
        assert abs(major_approx_V(37, arc1, 0.0, 2) - 37.0) < 1e-9

    def test_V_vanishes_with_S(self):
        # S(2,1) = 0 for k = 2, so the whole approximant vanishes
        d = dissect(4096, 2)
        arc2 = [a for a in d.arcs if a.q == 2][0]
        assert abs(major_approx_V(64, arc2, 1e-9, 2)) < 1e-12

    def test_single_variable_sanity(self):
        box = BoxSpec.make(2, (9,), 49)
        d = dissect(box.X, box.k)
        mai = major_arc_integral(box, d)
        full = full_circle_integral(box)
        exact = root_count_convolution(box).count
        assert exact == 1
        minor = full - mai.f_value.real
        assert abs((mai.f_value.real + minor) - exact) < 1e-6

    def test_major_plus_minor_equals_root(self):
        box = BoxSpec.make(2, (28, 30, 32), 900)
        d = dissect(box.X, box.k)
        mai = major_arc_integral(box, d)
        full = full_circle_integral(box)
        exact = root_count_convolution(box).count
        minor = full - mai.f_value.real
        assert abs(mai.f_value.real + minor - exact) < 1e-4
        assert abs(mai.f_value.imag) < 1e-6

    def test_difference_law_across_doublings(self):
        # |int_M f - int_M V| / (P X^(-2/3+lambda) measure(M)) stays bounded
        # with no upward trend as X doubles (balanced equal-side boxes)
        k, s = 2, 3
        lam = 1.0 / (12 * k)
        ratios, xs = [], []
        for X in (64, 128, 256, 512, 1024):
            box = BoxSpec.make(k, (X,) * s, int(0.6 * s * X**k))
            d = dissect(X, k)
            mai = major_arc_integral(box, d)
            scale = float(box.P) * X ** (-2 / 3 + lam) * d.total_measure
            ratios.append(mai.difference / scale)
            xs.append(float(X))
        assert all(math.isfinite(r) for r in ratios)
        assert loglog_slope(xs, ratios) <= 0.02


class TestSingularSeries:
    def test_Q1_is_one(self):
        assert singular_series(3, 9, 123, 1).value == 1.0

    def test_Q2_is_one_for_k2(self):
        r = singular_series(2, 5, 777, 2)
        assert r.value == 1.0

    def test_imag_tracked_below_1e10(self):
        rng = random.Random(41)
        for _ in range(10):
            r = singular_series(2, 5, rng.randint(1, 10**6), 30)
            assert r.imag_max <= 1e-10

    def test_below_regime_flagged_not_rejected(self):
        r = singular_series(2, 3, 10, 5)
        assert not r.in_convergence_regime
        assert r.tail_bound is None
        r2 = singular_series(2, 5, 10, 5)
        assert r2.in_convergence_regime
        assert r2.tail_bound > 0

    def test_tail_majorant_decay_exponent(self):
        qs = (4, 8, 16, 32, 64)
        vals = [singular_series_tail_majorant(2, 5, Q) for Q in qs]
        slope = loglog_slope(qs, vals)
        assert abs(slope - (2 - 5 / 2)) <= 0.3

    def test_truncation_differences_below_majorant(self):
        k, s, N = 2, 5, 720
        prev = singular_series(k, s, N, 4).value
        for Q in (8, 16, 32, 64):
            cur = singular_series(k, s, N, Q).value
            assert abs(cur - prev) <= singular_series_tail_majorant(k, s, Q // 2) + 1e-12
            prev = cur


class TestSingularIntegral:
    def test_quarter_pi_conv(self):
        box = BoxSpec.make(2, (6, 6), 30)
        r = singular_integral_conv(box)
        assert abs(r.value - math.pi / 4) < 1e-4

    def test_quarter_pi_beta(self):
        box = BoxSpec.make(2, (6, 6), 30)
        r = singular_integral_beta(box, B=300.0)
        assert abs(r.value - math.pi / 4) < 1e-4
        assert r.tail_bound == math.inf  # s = k is only conditionally convergent

    def test_dirichlet_closed_form_gate(self):
        box = BoxSpec.make(2, (9, 9, 9, 9), 60)
        cf = dirichlet_closed_form(box)
        expect = math.gamma(1.5) ** 4 / math.gamma(2) * 60.0
        assert abs(cf - expect) < 1e-12
        assert dirichlet_closed_form(BoxSpec.make(2, (5, 9, 9, 9), 60)) is None

    def test_triple_agreement_unclipped(self):
        box = BoxSpec.make(3, (7, 7, 7, 7), 250)
        cf = dirichlet_closed_form(box)
        cv = singular_integral_conv(box)
        bt = singular_integral_beta(box, B=60.0)
        assert abs(cv.value - cf) / cf < 1e-3
        assert abs(bt.value - cf) / cf < 1e-3

    def test_clipped_cross_agreement(self):
        rng = random.Random(51)
        for _ in range(5):
            k = rng.choice((2, 3))
            s = rng.randint(3, 4)
            sides = [rng.randint(4, 9) for _ in range(s)]
            power_sum = sum(p**k for p in sides)
            box = BoxSpec.make(k, sides, rng.randint(power_sum // 2, power_sum - 1))
            cv = singular_integral_conv(box)
            bt = singular_integral_beta(box, B=80.0)
            assert abs(cv.value - bt.value) <= 1e-3 * max(abs(cv.value), 1e-3)

    def test_empty_hyperplane(self):
        box = BoxSpec.make(2, (3, 3), 100)
        assert singular_integral_conv(box).value == 0.0
        assert abs(singular_integral_beta(box, B=60.0).value) < 1e-4

    def test_bound_by_P_over_Xk(self):
        # J << P X^-k: the ratio J X^k / P stays bounded across a sweep
        rng = random.Random(61)
        ratios = []
        for _ in range(12):
            k = rng.choice((2, 3))
            s = rng.randint(3, 5)
            sides = sorted(rng.randint(3, 10) for _ in range(s))
            power_sum = sum(p**k for p in sides)
            N = rng.randint(power_sum // 3, power_sum - 1)
            box = BoxSpec.make(k, sides, N)
            J = singular_integral_conv(box).value
            ratios.append(J * float(box.X) ** k / box.P)
        assert all(math.isfinite(r) for r in ratios)
        assert max(ratios) < 10.0

    def test_rejects_s_below_k(self):
        with pytest.raises(ValidationError):
            singular_integral_beta(BoxSpec.make(3, (4, 4), 20), B=10.0)
        with pytest.raises(ValidationError):
            singular_integral_conv(BoxSpec.make(2, (4,), 10))
