import itertools
import math
import random

import mpmath as mp
import pytest
from hypothesis import given, settings, strategies as st

from waringbox import (BoxSpec, GuardExceeded, Guards, Method,
                       hua_moment_count, root_count_bruteforce,
                       root_count_convolution, root_count_mitm,
                       solution_multisets, vinogradov_count,
                       weighted_tail_sum)

ALL_COUNTERS = (root_count_bruteforce, root_count_convolution, root_count_mitm)


def random_small_box(rng, k_choices=(2, 3), s_range=(2, 6), side_max=30,
                     tree_cap=20000):
    """A box whose brute-force tree stays small enough for the oracle."""
    while True:
        k = rng.choice(k_choices)
        s = rng.randint(*s_range)
        sides = sorted(rng.randint(1, side_max) for _ in range(s))
        if math.prod(sides[:-1]) > tree_cap:
            continue
        power_sum = sum(p**k for p in sides)
        N = rng.randint(s, power_sum + 5)
        return BoxSpec.make(k, sides, N)


class TestRootCounters:
    def test_two_squares_25(self):
        box = BoxSpec.make(2, (5, 5), 25)
        for counter in ALL_COUNTERS:
            r = counter(box)
            assert r.count == 2
            assert r.work > 0

    def test_taxicab(self):
        box = BoxSpec.make(3, (12, 12), 1729)
        for counter in ALL_COUNTERS:
            assert counter(box).count == 4

    def test_minimal_sum_all_ones(self):
        for k in (2, 3, 5):
            for s in (1, 3, 5):
                box = BoxSpec.make(k, (4,) * s, s)
                for counter in ALL_COUNTERS:
                    assert counter(box).count == 1

    def test_single_variable(self):
        assert root_count_convolution(BoxSpec.make(3, (10,), 27)).count == 1
        assert root_count_convolution(BoxSpec.make(3, (10,), 26)).count == 0
        assert root_count_convolution(BoxSpec.make(3, (2,), 27)).count == 0
        assert root_count_bruteforce(BoxSpec.make(2, (7,), 49)).count == 1

    def test_small_quadruple(self):
        box = BoxSpec.make(2, (1, 1, 1, 1), 4)
        assert root_count_mitm(box).count == 1

    def test_method_enum(self):
        box = BoxSpec.make(2, (3, 3), 5)
        assert root_count_bruteforce(box).method is Method.BRUTE_FORCE
        assert root_count_convolution(box).method is Method.CONVOLUTION
        assert root_count_mitm(box).method is Method.MEET_IN_MIDDLE

    def test_cross_method_agreement_per_pair(self):
        # >= 100 random instances for every (k, s) pair in the desk grid
        rng = random.Random(42)
        for k in (2, 3):
            for s in range(2, 7):
                for _ in range(100):
                    box = random_small_box(rng, (k,), (s, s), side_max=30,
                                           tree_cap=4000)
                    a = root_count_bruteforce(box).count
                    b = root_count_convolution(box).count
                    c = root_count_mitm(box).count
                    assert a == b == c, box.to_dict()

    def test_monotone_in_sides(self):
        rng = random.Random(3)
        for _ in range(60):
            box = random_small_box(rng, tree_cap=3000)
            j = rng.randrange(box.s)
            bigger = list(box.sides)
            bigger[j] += rng.randint(1, 5)
            box2 = BoxSpec.make(box.k, bigger, box.N)
            assert (root_count_convolution(box2).count
                    >= root_count_convolution(box).count)

    def test_permutation_invariance(self):
        rng = random.Random(4)
        sides = [3, 7, 12, 20]
        for _ in range(10):
            rng.shuffle(sides)
            box = BoxSpec.make(2, tuple(sides), 300)
            assert box.sides == (3, 7, 12, 20)
            assert root_count_convolution(box).count == \
                root_count_mitm(box).count

    def test_guards(self):
        tiny = Guards(brute_force_tuples=10, convolution_length=10, mitm_half=4)
        box = BoxSpec.make(2, (10, 10), 50)
        with pytest.raises(GuardExceeded):
            root_count_bruteforce(box, tiny)
        with pytest.raises(GuardExceeded):
            root_count_convolution(box, tiny)
        with pytest.raises(GuardExceeded):
            root_count_mitm(box, tiny)

    @given(st.integers(2, 3), st.lists(st.integers(1, 6), min_size=2, max_size=4),
           st.integers(1, 120))
    @settings(max_examples=120, deadline=None)
    def test_property_bruteforce_equals_convolution(self, k, sides, N):
        box = BoxSpec.make(k, sides, N)
        assert (root_count_bruteforce(box).count
                == root_count_convolution(box).count)


class TestHuaMoment:
    def test_diagonal_m1(self):
        assert hua_moment_count(2, 2, 1) == 2
        for k in (2, 3, 4):
            for X in (1, 5, 17):
                assert hua_moment_count(k, X, 1) == X

    def test_frozen_value(self):
        assert hua_moment_count(2, 3, 2) == 15

    def test_exhaustive_oracle(self):
        # brute force over all (x1, x2, y1, y2) in [1,4]^4, k=3
        count = sum(
            1 for x1, x2, y1, y2 in itertools.product(range(1, 5), repeat=4)
            if x1**3 + x2**3 == y1**3 + y2**3
        )
        assert hua_moment_count(3, 4, 2) == count

    def test_lower_bound_diagonal(self):
        for k, X, m in ((2, 7, 2), (3, 5, 3), (2, 12, 3)):
            assert hua_moment_count(k, X, m) >= X**m

    def test_guard(self):
        with pytest.raises(GuardExceeded):
            hua_moment_count(2, 10**5, 3, Guards(convolution_length=100))


class TestVinogradov:
    def test_trivial_cases(self):
        assert vinogradov_count(2, 1, 2) == 2
        assert vinogradov_count(3, 2, 1) == 1
        assert vinogradov_count(4, 3, 1) == 1

    def test_frozen_regression_value(self):
        # exhaustively verified: 45 quadruples for k = s = 2, X = 5
        assert vinogradov_count(2, 2, 5) == 45

    def test_exhaustive_oracle_small(self):
        count = 0
        for xs in itertools.product(range(1, 4), repeat=4):
            x1, x2, y1, y2 = xs
            if x1 + x2 == y1 + y2 and x1**2 + x2**2 == y1**2 + y2**2 \
               and x1**3 + x2**3 == y1**3 + y2**3:
                count += 1
        assert vinogradov_count(3, 2, 3) == count

    def test_diagonal_lower_bound(self):
        # x = y (as tuples) always solves the system
        assert vinogradov_count(2, 2, 4) >= 4**2

    def test_guard(self):
        with pytest.raises(GuardExceeded):
            vinogradov_count(2, 3, 1000, Guards(vinogradov_tuples=100))


class TestWeightedTail:
    def test_exact_values(self):
        assert float(weighted_tail_sum(2, 4, 4).value) == 1.0
        w7 = weighted_tail_sum(2, 4, 7)
        assert abs(float(w7.value) - 2 * math.sqrt(2)) < 1e-9
        assert float(weighted_tail_sum(2, 4, 3).value) == 0.0

    def test_zero_iff_no_solutions(self):
        for m in range(4, 40):
            w = weighted_tail_sum(2, 4, m)
            has = len(solution_multisets(2, 4, m)) > 0
            assert (float(w.value) > 0) == has

    def test_deterministic_bits(self):
        a = weighted_tail_sum(3, 5, 1000)
        b = weighted_tail_sum(3, 5, 1000)
        assert mp.nstr(a.value, 30) == mp.nstr(b.value, 30)

    def test_solution_multisets_lex_and_complete(self):
        sols = solution_multisets(2, 3, 50)
        assert sols == sorted(sols)
        assert all(sum(x**2 for x in t) == 50 for t in sols)
        assert all(t == tuple(sorted(t)) for t in sols)
        # independent brute force over ordered tuples
        ordered = [
            t for t in itertools.product(range(1, 8), repeat=3)
            if sum(x**2 for x in t) == 50
        ]
        assert sorted(set(tuple(sorted(t)) for t in ordered)) == sols

    def test_dyadic_cell_partition_identity(self):
        # regroup ordered solutions by the vector of dyadic cells
        # floor(log2 x_i); the cell-wise sums must re-add to the total
        k, s, m = 2, 4, 1000
        total = weighted_tail_sum(k, s, m).value
        cells = {}
        for tup in solution_multisets(k, s, m):
            for perm in set(itertools.permutations(tup)):
                key = tuple(x.bit_length() - 1 for x in perm)
                w = math.prod(perm) ** (k / s - 1.0)
                cells[key] = cells.get(key, 0.0) + w
        assert abs(sum(cells.values()) - float(total)) < 1e-9
        assert len(cells) > 1

    def test_json_dict(self):
        d = weighted_tail_sum(2, 4, 7).to_dict()
        assert d["m"] == 7 and d["s"] == 4 and d["k"] == 2
        assert abs(d["value"] - 2 * math.sqrt(2)) < 1e-12
        assert isinstance(d["value_str"], str)

    def test_guard(self):
        with pytest.raises(GuardExceeded):
            weighted_tail_sum(2, 4, 10**7, Guards(weighted_tail_m=10**6))
