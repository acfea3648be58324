"""Exact counters for diagonal equations in boxes.

Three independent algorithms count the same quantity

    Root(P_1,...,P_s;N) = #{ x : x_1^k + ... + x_s^k = N, 1 <= x_j <= P_j }

so each can serve as an oracle for the others: nested enumeration with
pruning, coefficient extraction from the generating polynomial, and a
meet-in-the-middle hash join.  All three return exact big integers; no
float ever enters a count.  On top of these sit the even-moment counter
(the mean value of |f_X|^(2m) over the circle by orthogonality), the
Vinogradov-system counter, and the weighted solution sum used by the
unbalanced-box argument.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import List, Tuple

import mpmath as mp
import numpy as np

from .limits import DEFAULT_GUARDS, Guards, GuardExceeded, ValidationError
from .model import BoxSpec, iroot

__all__ = [
    "Method",
    "CountResult",
    "WeightedSum",
    "root_count_bruteforce",
    "root_count_convolution",
    "root_count_mitm",
    "root_count",
    "hua_moment_count",
    "vinogradov_count",
    "weighted_tail_sum",
    "solution_multisets",
]

_INT64_SAFE = 2**62


class Method(enum.Enum):
    BRUTE_FORCE = "BruteForce"
    CONVOLUTION = "Convolution"
    MEET_IN_MIDDLE = "MeetInMiddle"


@dataclass(frozen=True)
class CountResult:
    count: int
    method: Method
    work: int

    def to_dict(self) -> dict:
        return {"count": self.count, "method": self.method.value, "work": self.work}


@dataclass(frozen=True)
class WeightedSum:
    m: int
    s: int
    k: int
    value: mp.mpf

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "s": self.s,
            "k": self.k,
            "value": float(self.value),
            "value_str": mp.nstr(self.value, 25),
        }


def root_count_bruteforce(box: BoxSpec, guards: Guards = DEFAULT_GUARDS) -> CountResult:
    """Count by nested enumeration over the first s-1 variables.

    Branches are cut as soon as the partial sum plus one unit per remaining
    variable exceeds N (sides ascend, so a `break` prunes the whole suffix).
    The last variable is resolved by an exact integer k-th root.
    """
    if box.P > guards.brute_force_tuples:
        raise GuardExceeded(
            f"brute force refused: {box.P} tuples > guard {guards.brute_force_tuples}"
        )
    k, N = box.k, box.N
    sides = box.sides
    s = box.s
    work = 0
    last = sides[-1]
    pow_cache = [x**k for x in range(sides[-2] + 1 if s >= 2 else 1)]

    if s == 1:
        r = iroot(N, k)
        hit = 1 if r**k == N and r <= sides[0] else 0
        return CountResult(count=hit, method=Method.BRUTE_FORCE, work=1)

    count = 0

    def rec(j: int, partial: int) -> None:
        nonlocal count, work
        remaining = s - 1 - j  # variables after x_j, excluding the solved one
        bound = sides[j]
        if j == s - 2:
            for x in range(1, bound + 1):
                work += 1
                rem = N - partial - pow_cache[x]
                if rem < 1:
                    break
                r = iroot(rem, k)
                if r <= last and r**k == rem:
                    count += 1
            return
        for x in range(1, bound + 1):
            work += 1
            nxt = partial + pow_cache[x]
            # every remaining variable contributes at least 1^k = 1
            if nxt + remaining > N:
                break
            rec(j + 1, nxt)

    rec(0, 0)
    return CountResult(count=count, method=Method.BRUTE_FORCE, work=work)


def _conv_sides(box: BoxSpec) -> List[int]:
    # terms z^(x^k) with x^k > N cannot reach degree N; clip for free
    r = iroot(box.N, box.k)
    return [min(p, r) for p in box.sides]


def root_count_convolution(box: BoxSpec, guards: Guards = DEFAULT_GUARDS) -> CountResult:
    """Coefficient of z^N in prod_j sum_{x<=P_j} z^(x^k), by sparse convolution."""
    N = box.N
    if N > guards.convolution_length:
        raise GuardExceeded(
            f"convolution refused: N={N} > guard {guards.convolution_length}"
        )
    k = box.k
    sides = _conv_sides(box)
    work = 0
    if box.P < _INT64_SAFE:
        coeff = np.zeros(N + 1, dtype=np.int64)
        coeff[0] = 1
        for P in sides:
            new = np.zeros(N + 1, dtype=np.int64)
            for x in range(1, P + 1):
                xk = x**k
                if xk > N:
                    break
                new[xk:] += coeff[: N + 1 - xk]
                work += N + 1 - xk
            coeff = new
        count = int(coeff[N])
    else:
        # big-integer fallback: same recurrence on Python lists
        coeff = [0] * (N + 1)
        coeff[0] = 1
        for P in sides:
            new = [0] * (N + 1)
            for x in range(1, P + 1):
                xk = x**k
                if xk > N:
                    break
                for v in range(xk, N + 1):
                    if coeff[v - xk]:
                        new[v] += coeff[v - xk]
                work += N + 1 - xk
            coeff = new
        count = coeff[N]
    return CountResult(count=count, method=Method.CONVOLUTION, work=work)


def _split_halves(sides: Tuple[int, ...]) -> Tuple[List[int], List[int]]:
    # greedy partition balancing the products (minimise the larger half)
    a: List[int] = []
    b: List[int] = []
    pa = pb = 1
    for p in sorted(sides, reverse=True):
        if pa <= pb:
            a.append(p)
            pa *= p
        else:
            b.append(p)
            pb *= p
    return a, b


def _enumerate_sums(sides: List[int], k: int, N: int, cap: int) -> np.ndarray:
    """All values of sum x_j^k (x_j <= side_j) that stay <= N, with repetition."""
    sums = np.zeros(1, dtype=np.int64)
    for P in sides:
        pows = np.arange(1, P + 1, dtype=np.int64) ** k
        pows = pows[pows <= N]
        if len(pows) == 0:
            return np.empty(0, dtype=np.int64)
        if len(sums) * len(pows) > cap:
            raise GuardExceeded(
                f"meet-in-the-middle half enumeration exceeds guard {cap}"
            )
        sums = (sums[:, None] + pows[None, :]).ravel()
        sums = sums[sums <= N]
    return sums


def root_count_mitm(box: BoxSpec, guards: Guards = DEFAULT_GUARDS) -> CountResult:
    """Meet-in-the-middle: join partial-sum multisets of two halves of the box."""
    k, N = box.k, box.N
    half_a, half_b = _split_halves(box.sides)
    if box.P >= _INT64_SAFE:
        raise GuardExceeded("meet-in-the-middle int64 fast path refused: box too large")
    sums_a = _enumerate_sums(half_a, k, N - len(half_b), guards.mitm_half)
    sums_b = _enumerate_sums(half_b, k, N - len(half_a), guards.mitm_half)
    work = len(sums_a) + len(sums_b)
    if len(sums_a) == 0 or len(sums_b) == 0:
        # no admissible partial sums in one half: nothing can join
        return CountResult(count=0, method=Method.MEET_IN_MIDDLE, work=work)
    ua, ca = np.unique(sums_a, return_counts=True)
    target = N - sums_b
    pos = np.searchsorted(ua, target)
    ok = (pos < len(ua)) & (ua[np.minimum(pos, len(ua) - 1)] == target)
    count = int(ca[pos[ok]].sum())
    work += len(sums_b)
    return CountResult(count=count, method=Method.MEET_IN_MIDDLE, work=work)


_DISPATCH = {
    Method.BRUTE_FORCE: root_count_bruteforce,
    Method.CONVOLUTION: root_count_convolution,
    Method.MEET_IN_MIDDLE: root_count_mitm,
}


def root_count(box: BoxSpec, method: Method = Method.CONVOLUTION,
               guards: Guards = DEFAULT_GUARDS) -> CountResult:
    return _DISPATCH[method](box, guards)


def hua_moment_count(k: int, X: int, m: int, guards: Guards = DEFAULT_GUARDS) -> int:
    """Solutions of x_1^k+...+x_m^k = y_1^k+...+y_m^k with all in [1, X].

    By orthogonality this equals the integral of |f_X|^(2m) over the circle.
    Computed as sum_v r_m(v)^2 where r_m is the m-fold convolution counter.
    """
    if k < 2 or X < 1 or m < 1:
        raise ValidationError("hua_moment_count needs k >= 2, X >= 1, m >= 1")
    top = m * X**k
    if 2 * top > guards.convolution_length:
        raise GuardExceeded(
            f"moment convolution length {2*top} exceeds guard {guards.convolution_length}"
        )
    r = np.zeros(top + 1, dtype=np.int64)
    r[0] = 1
    for _ in range(m):
        new = np.zeros(top + 1, dtype=np.int64)
        for x in range(1, X + 1):
            xk = x**k
            new[xk:] += r[: top + 1 - xk]
        r = new
    # r entries are at most X^m; square-sum in exact Python ints
    return sum(int(c) * int(c) for c in r[r > 0])


def vinogradov_count(k: int, s: int, X: int, guards: Guards = DEFAULT_GUARDS) -> int:
    """Solutions of the system sum x_i^j = sum y_i^j (j = 1..k), 2s variables in [1, X].

    Hash join on the k-dimensional power-sum vector: J = sum_v r(v)^2 over
    the distribution r of s-tuple power-sum vectors.
    """
    if k < 1 or s < 1 or X < 1:
        raise ValidationError("vinogradov_count needs k, s, X >= 1")
    if X**s > guards.vinogradov_tuples:
        raise GuardExceeded(
            f"vinogradov enumeration {X}^{s} exceeds guard {guards.vinogradov_tuples}"
        )
    table = {(0,) * k: 1}
    for _ in range(s):
        new: dict = {}
        for vec, c in table.items():
            for x in range(1, X + 1):
                key = tuple(v + x**j for j, v in zip(range(1, k + 1), vec))
                new[key] = new.get(key, 0) + c
        table = new
    return sum(c * c for c in table.values())


def _pair_solutions(k: int, lo: int, r: int) -> np.ndarray:
    """Rows (u, v) with lo <= u <= v and u^k + v^k = r, vectorised."""
    if r < 2:
        return np.empty((0, 2), dtype=np.int64)
    hi = iroot(r // 2, k)
    if hi < lo:
        return np.empty((0, 2), dtype=np.int64)
    us = np.arange(lo, hi + 1, dtype=np.int64)
    rem = r - us**k
    vs = np.floor(np.power(rem.astype(np.float64), 1.0 / k)).astype(np.int64)
    # float root can be off by one near perfect powers
    for _ in range(2):
        vs[(vs + 1) ** k <= rem] += 1
    vs[vs**k > rem] -= 1
    ok = (vs**k == rem) & (vs >= us) & (vs >= 1)
    return np.stack([us[ok], vs[ok]], axis=1)


def solution_multisets(k: int, s: int, m: int,
                       guards: Guards = DEFAULT_GUARDS) -> List[Tuple[int, ...]]:
    """Nondecreasing tuples x_1 <= ... <= x_s with sum x_j^k = m, in lex order.

    The last two variables are solved vectorised; the rest by recursion.
    """
    if s < 2:
        raise ValidationError("solution_multisets needs s >= 2")
    if m > guards.weighted_tail_m:
        raise GuardExceeded(f"m={m} exceeds weighted-tail guard {guards.weighted_tail_m}")
    out: List[Tuple[int, ...]] = []

    def rec(prefix: Tuple[int, ...], lo: int, rem: int, vars_left: int) -> None:
        if vars_left == 2:
            for u, v in _pair_solutions(k, lo, rem):
                out.append(prefix + (int(u), int(v)))
            return
        # x^k * vars_left <= rem  bounds the next (smallest) variable
        hi = iroot(rem // vars_left, k)
        for x in range(lo, hi + 1):
            rec(prefix + (x,), x, rem - x**k, vars_left - 1)

    rec((), 1, m, s)
    return out


def _multiset_permutations(tup: Tuple[int, ...]) -> int:
    n = len(tup)
    total = math.factorial(n)
    run = 1
    for i in range(1, n):
        if tup[i] == tup[i - 1]:
            run += 1
        else:
            total //= math.factorial(run)
            run = 1
    total //= math.factorial(run)
    return total


def weighted_tail_sum(k: int, s: int, m: int,
                      guards: Guards = DEFAULT_GUARDS) -> WeightedSum:
    """Sum of (x_1...x_s)^(-1 + k/s) over all solutions of sum x_j^k = m.

    Accumulated at 120-bit precision in lexicographic solution order, so the
    result is reproducible bit for bit.  The box is unbounded (equivalently
    every side is floor(m^(1/k))).
    """
    if s < 2:
        raise ValidationError("weighted_tail_sum needs s >= 2")
    sols = solution_multisets(k, s, m, guards)
    with mp.workprec(120):
        expo = mp.mpf(k) / s - 1
        total = mp.mpf(0)
        for tup in sols:
            prod = math.prod(tup)
            total += _multiset_permutations(tup) * mp.power(prod, expo)
        value = +total
    return WeightedSum(m=m, s=s, k=k, value=value)
