"""Problem instances and the explicit constants of the counting bound.

A *box* is the set of integer tuples 1 <= x_j <= P_j, and the object of
study is the number of solutions of x_1^k + ... + x_s^k = N inside it.
This module holds the instance type, the truncation and balanced/unbalanced
classification applied before any counting, and the full table of exponents
(H_k, K, lambda, tau and the various deltas) that control the power saving
in the upper bound

    Root(P_1,...,P_s;N)  <<  N^{-1} P  +  P^{1 - k/s - delta}.

Everything here is exact: thresholds are Fractions, and every comparison of
the form  P_1 <= P^(num/den)  is decided by cross-multiplying integer
powers, never through floating point.  Misclassifying a box near the
dichotomy boundary would silently poison every downstream measurement.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .limits import ValidationError

__all__ = [
    "BoxSpec",
    "Thresholds",
    "BoxClass",
    "iroot",
    "power_cmp",
    "hua_branch",
    "mean_value_branch",
    "theta_split",
    "compute_thresholds",
    "truncate_box",
    "classify_box",
    "no_solutions_possible",
    "fraction_to_json",
    "fraction_from_json",
]


def iroot(n: int, k: int) -> int:
    """Exact floor(n**(1/k)) for nonnegative big integers, by binary search."""
    if n < 0:
        raise ValidationError("iroot: negative radicand")
    if k < 1:
        raise ValidationError("iroot: order must be >= 1")
    if n < 2 or k == 1:
        return n
    if k == 2:
        return math.isqrt(n)
    hi = 1 << (n.bit_length() // k + 1)
    lo = 0
    while lo < hi - 1:
        mid = (lo + hi) // 2
        if mid**k <= n:
            lo = mid
        else:
            hi = mid
    return lo


def power_cmp(a: int, p: int, b: int, q: int) -> int:
    """Sign of a**p - b**q for nonnegative integer bases and exponents."""
    lhs, rhs = a**p, b**q
    return (lhs > rhs) - (lhs < rhs)


def fraction_to_json(f: Optional[Fraction]) -> Optional[dict]:
    if f is None:
        return None
    return {"num": f.numerator, "den": f.denominator}


def fraction_from_json(d: Optional[dict]) -> Optional[Fraction]:
    if d is None:
        return None
    return Fraction(d["num"], d["den"])


@dataclass(frozen=True)
class BoxSpec:
    """One counting instance: exponent k, s sides (kept sorted), target N."""

    k: int
    s: int
    sides: tuple
    N: int

    def __post_init__(self):
        if self.k < 2:
            raise ValidationError(f"k must be >= 2, got {self.k}")
        if self.s < 1:
            raise ValidationError(f"s must be >= 1, got {self.s}")
        sides = tuple(int(p) for p in self.sides)
        if len(sides) != self.s:
            raise ValidationError(f"expected {self.s} sides, got {len(sides)}")
        if any(p < 1 for p in sides):
            raise ValidationError("all sides must be >= 1")
        if self.N < 1:
            raise ValidationError(f"N must be >= 1, got {self.N}")
        object.__setattr__(self, "sides", tuple(sorted(sides)))

    @classmethod
    def make(cls, k: int, sides: Sequence[int], N: int) -> "BoxSpec":
        return cls(k=k, s=len(sides), sides=tuple(sides), N=N)

    @property
    def P(self) -> int:
        """Product of the sides."""
        return math.prod(self.sides)

    @property
    def X(self) -> int:
        """Largest side."""
        return self.sides[-1]

    @property
    def T(self) -> int:
        """Product of all sides except the smallest."""
        return self.P // self.sides[0]

    @property
    def power_sum(self) -> int:
        return sum(p**self.k for p in self.sides)

    def to_dict(self) -> dict:
        return {"k": self.k, "s": self.s, "sides": list(self.sides), "N": self.N}

    @classmethod
    def from_dict(cls, d: dict) -> "BoxSpec":
        return cls(k=d["k"], s=d["s"], sides=tuple(d["sides"]), N=d["N"])


def no_solutions_possible(box: BoxSpec) -> bool:
    """True when X < (N/s)^(1/k), i.e. s*X^k < N, so the count is zero.

    Exposed as a flag rather than an error: the counters still accept such
    boxes and return 0, but callers can skip work.
    """
    return box.s * box.X**box.k < box.N


def theta_split(k: int) -> int:
    """The {1,2}-valued correction in the quadratic mean-value threshold."""
    r = math.isqrt(2 * k + 2)
    return 1 if 2 * k + 2 <= r * r + r else 2


def hua_branch(k: int) -> int:
    """Classical even-moment threshold 2^k."""
    return 2**k


def mean_value_branch(k: int) -> int:
    """Quadratic-in-k threshold k^2 - k + 2*floor(sqrt(2k+2)) - theta(k)."""
    r = math.isqrt(2 * k + 2)
    return k * k - k + 2 * r - theta_split(k)


@dataclass(frozen=True)
class Thresholds:
    """All explicit constants for one (k, s) pair.

    ``hypothesis`` records whether s >= H_k + 1, the condition under which
    every delta below is a positive rational.  Thresholds are still computed
    below that line (some deltas may then be <= 0) so the harness can probe
    below-threshold behaviour; ``delta_1`` is None when s = 1, where the
    unbalanced exponent is undefined.
    """

    k: int
    s: int
    H_k: int
    theta: int
    K: int
    lam: Fraction
    tau: Fraction
    delta_a: Fraction
    delta_b: Fraction
    delta_c: Fraction
    delta_prime: Fraction
    delta_0: Fraction
    delta_1: Optional[Fraction]
    delta: Fraction
    hypothesis: bool

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "s": self.s,
            "H_k": self.H_k,
            "theta": self.theta,
            "K": self.K,
            "lambda": fraction_to_json(self.lam),
            "tau": fraction_to_json(self.tau),
            "delta_a": fraction_to_json(self.delta_a),
            "delta_b": fraction_to_json(self.delta_b),
            "delta_c": fraction_to_json(self.delta_c),
            "delta_prime": fraction_to_json(self.delta_prime),
            "delta_0": fraction_to_json(self.delta_0),
            "delta_1": fraction_to_json(self.delta_1),
            "delta": fraction_to_json(self.delta),
            "hypothesis": self.hypothesis,
        }


def compute_thresholds(k: int, s: int) -> Thresholds:
    """Evaluate every exponent of the bound exactly for the pair (k, s).

    H_k is the smaller workable even-moment threshold: the classical 2^k
    for k <= 4 and the quadratic branch for k >= 5 (the two coincide at
    k = 3, and the quadratic branch is strictly smaller for all k >= 5).
    """
    if not isinstance(k, int) or k < 2:
        raise ValidationError(f"k must be an integer >= 2, got {k!r}")
    if not isinstance(s, int) or s < 1:
        raise ValidationError(f"s must be an integer >= 1, got {s!r}")

    H_k = hua_branch(k) if k <= 4 else mean_value_branch(k)
    K = 2 ** (k - 1)
    lam = Fraction(1, 12 * k)
    tau = Fraction(1, 12 * k * s * s)
    assert tau == lam / (s * s)
    assert k * lam < Fraction(1, 6) and lam + Fraction(1, 3) < 1

    delta_a = (Fraction(1, 6) - lam) / s
    delta_b = Fraction(s - k, 12 * k * s)
    delta_c = Fraction(s - 2 * k, 6 * k * s)
    delta_prime = min(delta_a, delta_b, delta_c)
    delta_0 = min(Fraction(1, 24 * K * s * s), delta_prime)
    delta_1 = Fraction(1, 24 * s * s * (s - 1)) if s >= 2 else None
    delta = min(delta_0, delta_1) if delta_1 is not None else delta_0

    return Thresholds(
        k=k,
        s=s,
        H_k=H_k,
        theta=theta_split(k),
        K=K,
        lam=lam,
        tau=tau,
        delta_a=delta_a,
        delta_b=delta_b,
        delta_c=delta_c,
        delta_prime=delta_prime,
        delta_0=delta_0,
        delta_1=delta_1,
        delta=delta,
        hypothesis=s >= H_k + 1,
    )


def truncate_box(box: BoxSpec) -> BoxSpec:
    """Clip every side at floor(N^(1/k)); the solution set is unchanged.

    Any x_j > N^(1/k) contributes x_j^k > N on its own, so such values can
    never occur in a solution.
    """
    r = iroot(box.N, box.k)
    new_sides = tuple(min(p, r) for p in box.sides)
    if new_sides == box.sides:
        return box
    return BoxSpec(k=box.k, s=box.s, sides=new_sides, N=box.N)


class BoxClass(enum.Enum):
    BALANCED = "Balanced"
    UNBALANCED = "Unbalanced"


def classify_box(box: BoxSpec, t: Thresholds) -> BoxClass:
    """Unbalanced iff P_1 <= P^(1/s - tau), decided in exact integer arithmetic.

    In the balanced case the derived inequality P_1 >= X^(1 - lambda) is
    asserted (it follows from the dichotomy by exact exponent algebra); a
    failure would indicate an arithmetic bug, not an unlucky instance.
    """
    if (t.k, t.s) != (box.k, box.s):
        raise ValidationError("thresholds were computed for a different (k, s)")
    e = Fraction(1, box.s) - t.tau
    assert e > 0
    p1 = box.sides[0]
    # P_1 <= P^(num/den)  <=>  P_1^den <= P^num
    if power_cmp(p1, e.denominator, box.P, e.numerator) <= 0:
        return BoxClass.UNBALANCED
    # P_1 >= X^(1 - lam)  <=>  P_1^(12k) >= X^(12k - 1)
    d = t.lam.denominator
    n = t.lam.numerator
    if power_cmp(p1, d, box.X, d - n) < 0:
        raise AssertionError(
            f"balanced box violates P_1 >= X^(1-lambda): {box.to_dict()}"
        )
    return BoxClass.BALANCED
