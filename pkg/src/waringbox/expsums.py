"""Exponential sums and oscillatory integrals, evaluated to full precision.

The three analytic objects of the arc analysis are

    f_Y(alpha) = sum_{x <= Y} e(alpha x^k)        (Weyl sum)
    S(q, a)    = sum_{r=1}^{q} e(a r^k / q)       (complete rational sum)
    v_Y(beta)  = int_0^Y e(beta g^k) dg           (oscillatory integral)

with e(t) = exp(2 pi i t).  The enemy at desk scale is phase error: x^k
overflows a double's mantissa long before x reaches interesting sizes, so
frequencies are reduced mod 1 either in exact modular arithmetic (rational
alpha) or in 256-bit fixed point (everything else); only the reduced phase
in [0, 1) is ever handed to cos/sin.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Tuple

import mpmath as mp
import numpy as np

from .limits import QuadratureError, ValidationError

__all__ = [
    "FRAC_BITS",
    "PhasePoint",
    "phase_frac",
    "eval_f",
    "eval_S",
    "eval_v",
    "weyl_rhs",
    "v_kernel",
]

FRAC_BITS = 256
_SCALE = 1 << FRAC_BITS
_MASK = _SCALE - 1

# limits of the vectorised rational path of eval_f: int64 products a*r and
# r*x must stay below 2^63, and beta*x^k must keep enough mantissa headroom
_Q_VECTOR_MAX = 2**31
_BETA_PHASE_MAX = 2.0**16


@dataclass(frozen=True)
class PhasePoint:
    """A frequency alpha in [0,1), held as a 256-bit fixed-point fraction.

    When alpha was constructed as a/q + beta the exact rational part is kept
    alongside; evaluation then splits the phase into an exact mod-q part and
    a small real part, which is both faster and more accurate.
    """

    numerator: int                       # alpha ~ numerator / 2^FRAC_BITS
    rational: Optional[Tuple[int, int]] = None   # (a, q), coprime, 0 <= a <= q
    beta: float = 0.0

    def __post_init__(self):
        if not 0 <= self.numerator < _SCALE:
            raise ValidationError("fixed-point numerator out of [0, 2^256)")
        if self.rational is not None:
            a, q = self.rational
            if q < 1 or not 0 <= a <= q or math.gcd(a, q) != 1:
                raise ValidationError(f"invalid rational part a/q = {a}/{q}")

    @classmethod
    def from_fraction(cls, fr: Fraction, beta: float = 0.0) -> "PhasePoint":
        val = (fr + Fraction(beta)) % 1
        num = (val.numerator * _SCALE) // val.denominator
        red = fr % 1
        return cls(numerator=num, rational=(red.numerator, red.denominator), beta=beta)

    @classmethod
    def from_rational(cls, a: int, q: int, beta: float = 0.0) -> "PhasePoint":
        if q < 1:
            raise ValidationError("q must be >= 1")
        g = math.gcd(a, q)
        a, q = a // g, q // g
        a %= q
        if a == 0 and q == 1:
            a = 1  # represent the integer point as 1/1, matching arc centres
        val = (Fraction(a, q) + Fraction(beta)) % 1
        num = (val.numerator * _SCALE) // val.denominator
        return cls(numerator=num, rational=(a, q), beta=beta)

    @classmethod
    def from_float(cls, alpha: float) -> "PhasePoint":
        fr = Fraction(alpha) % 1
        num = (fr.numerator * _SCALE) // fr.denominator
        return cls(numerator=num)

    @property
    def as_fraction(self) -> Fraction:
        """Exact value of the represented point."""
        if self.rational is not None and self.beta == 0.0:
            a, q = self.rational
            return Fraction(a, q) % 1
        return Fraction(self.numerator, _SCALE)

    @property
    def as_float(self) -> float:
        return self.numerator / _SCALE


def phase_frac(alpha: PhasePoint, x: int, k: int) -> Fraction:
    """frac(alpha * x^k) by k fixed-point multiply-then-reduce steps.

    Each step multiplies the 256-bit fraction by the integer x and drops the
    integer part, which is exact for the represented dyadic alpha; the only
    error against an intended real alpha is its representation error,
    amplified by at most x^k (still far below 2^-120 at desk scale).
    """
    if x < 1 or k < 1:
        raise ValidationError("phase_frac needs x >= 1, k >= 1")
    t = alpha.numerator
    for _ in range(k):
        t = (t * x) & _MASK
    return Fraction(t, _SCALE)


@functools.lru_cache(maxsize=256)
def _unit_roots(q: int) -> np.ndarray:
    """Shared table of e(j/q), j = 0..q-1."""
    return np.exp(2j * np.pi * np.arange(q) / q)


def _rational_weyl_sum(Y: int, a: int, q: int, k: int, beta: float) -> complex:
    """sum_{x<=Y} e((a/q + beta) x^k) with exact mod-q phase arithmetic."""
    x = np.arange(1, Y + 1, dtype=np.int64)
    r = x % q
    for _ in range(k - 1):
        r = (r * x) % q
    num = (a % q) * r % q
    if q <= 4096:
        terms = _unit_roots(q)[num]
    else:
        terms = np.exp((2j * np.pi / q) * num)
    if beta != 0.0:
        xk = x.astype(np.float64) ** k
        terms = terms * np.exp((2j * np.pi) * (beta * xk))
    return complex(terms.sum())


def eval_f(Y: int, alpha: PhasePoint, k: int) -> complex:
    """Weyl sum f_Y(alpha) = sum_{x <= Y} e(alpha x^k); always |f| <= Y."""
    if Y < 1:
        raise ValidationError("eval_f needs Y >= 1")
    if alpha.rational is not None:
        a, q = alpha.rational
        if (
            q <= _Q_VECTOR_MAX
            and Y <= _Q_VECTOR_MAX
            and abs(alpha.beta) * float(Y) ** k <= _BETA_PHASE_MAX
        ):
            return _rational_weyl_sum(Y, a, q, k, alpha.beta)
    # general fixed-point path
    t = alpha.numerator
    acc = []
    for x in range(1, Y + 1):
        u = t
        for _ in range(k):
            u = (u * x) & _MASK
        acc.append(u / _SCALE)
    phases = np.array(acc, dtype=np.float64)
    return complex(np.exp(2j * np.pi * phases).sum())


def eval_S(q: int, a: int, k: int) -> complex:
    """Complete sum S(q,a) = sum_{r=1}^q e(a r^k / q), phases exact mod q."""
    if q < 1:
        raise ValidationError("eval_S needs q >= 1")
    if not 1 <= a <= q:
        raise ValidationError("eval_S needs 1 <= a <= q")
    if math.gcd(a, q) != 1:
        raise ValidationError(f"eval_S needs gcd(a, q) = 1, got ({a}, {q})")
    return _rational_weyl_sum(q, a, q, k, 0.0)


# ---------------------------------------------------------------------------
# oscillatory integral v_Y(beta)
# ---------------------------------------------------------------------------

_SERIES_Z_MAX = 8.0       # switch point between Taylor series and CF tail
_CF_ITMAX = 400
_QUAD_CYCLE_LIMIT = 2.0e4  # beyond this many oscillations, quadrature is futile


def _phi_series(z: np.ndarray, k: int) -> np.ndarray:
    """Phi(z) = int_0^1 exp(i z t^k) dt by Taylor series, for |z| <= ~10."""
    out = np.full(z.shape, 1.0 + 0j)
    term = np.ones(z.shape, dtype=complex)
    iz = 1j * z
    for n in range(1, 48):
        term = term * iz / n
        out = out + term / (n * k + 1)
    return out


def _phi_cf(z: np.ndarray, k: int) -> np.ndarray:
    """Phi(z) via the incomplete-gamma continued fraction, for |z| >= ~5.

    Phi(z) = (1/k) w^(-1/k) [Gamma(1/k) - Gamma(1/k, w)],  w = -iz, and the
    upper incomplete gamma comes from the modified Lentz iteration of its
    classical continued fraction, which converges in tens of steps on the
    imaginary axis at these magnitudes.
    """
    a = 1.0 / k
    w = -1j * z
    tiny = 1e-300
    b = w + 1.0 - a
    b = np.where(np.abs(b) < tiny, tiny, b)
    C = b.copy()
    D = np.zeros_like(b)
    f = b.copy()
    done = np.zeros(z.shape, dtype=bool)
    for i in range(1, _CF_ITMAX):
        an = -i * (i - a)
        bn = w + 2.0 * i + 1.0 - a
        D = bn + an * D
        D = np.where(np.abs(D) < tiny, tiny, D)
        C = bn + an / C
        C = np.where(np.abs(C) < tiny, tiny, C)
        D = 1.0 / D
        delta = C * D
        f = np.where(done, f, f * delta)
        done |= np.abs(delta - 1.0) < 1e-15
        if done.all():
            break
    gamma_upper = np.exp(-w) * w**a / f
    if not done.all():
        # rescue stragglers at high precision (rare: |z| barely above cutoff)
        for j in np.nonzero(~done.ravel())[0]:
            with mp.workprec(120):
                val = mp.gammainc(mp.mpf(a), mp.mpc(w.flat[j]), mp.inf)
            gamma_upper.flat[j] = complex(val)
    gamma_total = math.gamma(a)
    return (1.0 / k) * w ** (-a) * (gamma_total - gamma_upper)


def v_kernel(Y: float, betas: np.ndarray, k: int) -> np.ndarray:
    """Vectorised v_Y(beta) for an array of betas, accurate to ~1e-13 * Y."""
    betas = np.asarray(betas, dtype=np.float64)
    z = 2.0 * np.pi * betas * float(Y) ** k
    out = np.empty(z.shape, dtype=complex)
    small = np.abs(z) <= _SERIES_Z_MAX
    if small.any():
        out[small] = _phi_series(z[small], k)
    big = ~small
    if big.any():
        out[big] = _phi_cf(z[big], k)
    return Y * out


@functools.lru_cache(maxsize=16)
def _gl_nodes(n: int) -> Tuple[np.ndarray, np.ndarray]:
    nodes, weights = np.polynomial.legendre.leggauss(n)
    return nodes, weights


def _panel_quad(f, lo: np.ndarray, hi: np.ndarray, n: int) -> np.ndarray:
    """Gauss-Legendre of order n on each [lo_i, hi_i]; f maps array -> array."""
    nodes, weights = _gl_nodes(n)
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    pts = mid[:, None] + half[:, None] * nodes[None, :]
    vals = f(pts.ravel()).reshape(pts.shape)
    return (vals * weights[None, :]).sum(axis=1) * half


def eval_v(Y: float, beta: float, k: int, target: float = 1e-9,
           depth_cap: int = 40) -> complex:
    """Oscillatory integral v_Y(beta) = int_0^Y e(beta g^k) dg.

    Adaptive bisection with a two-order Richardson error estimate; the
    initial panels are laid out in equal phase increments, so the panel
    density already tracks the local frequency k|beta|g^(k-1).  Beyond
    ~2e4 oscillations pointwise quadrature is hopeless and the analytic
    continuation of the same integral (series + continued fraction of the
    incomplete gamma) takes over; the two agree to ~1e-12 on the overlap.
    """
    if Y <= 0:
        raise ValidationError("eval_v needs Y > 0")
    if k < 2:
        raise ValidationError("eval_v needs k >= 2")
    cycles = abs(beta) * float(Y) ** k
    if cycles > _QUAD_CYCLE_LIMIT:
        return complex(v_kernel(Y, np.array([beta]), k)[0])

    def integrand(g: np.ndarray) -> np.ndarray:
        return np.exp(2j * np.pi * beta * g**k)

    n0 = max(8, min(int(4 * cycles) + 8, 65536))
    # equal-phase breakpoints: phase(g) = |beta| g^k proportional to i/n0
    frac = np.arange(n0 + 1, dtype=np.float64) / n0
    edges = Y * frac ** (1.0 / k)
    lo = edges[:-1].copy()
    hi = edges[1:].copy()
    total = 0j
    err_budget = target
    for depth in range(depth_cap + 1):
        coarse = _panel_quad(integrand, lo, hi, 7)
        fine = _panel_quad(integrand, lo, hi, 15)
        err = np.abs(fine - coarse)
        ok = err <= err_budget * (hi - lo) / Y
        total += fine[ok].sum()
        if ok.all():
            return complex(total)
        lo_bad, hi_bad = lo[~ok], hi[~ok]
        mid = 0.5 * (lo_bad + hi_bad)
        lo = np.concatenate([lo_bad, mid])
        hi = np.concatenate([mid, hi_bad])
    raise QuadratureError(
        f"v_Y quadrature did not converge within depth {depth_cap} "
        f"(Y={Y}, beta={beta}, k={k})"
    )


def weyl_rhs(X: int, q: int, k: int, eps: Optional[float] = None) -> float:
    """Right-hand side of Weyl's inequality:

        X^(1+eps) * (1/q + 1/X + q/X^k)^(1/K),   K = 2^(k-1).

    eps defaults to 1/(12K), the choice that turns the minor-arc bound into
    the X^(1 - 1/(12K)) sup estimate.
    """
    if X < 1 or q < 1:
        raise ValidationError("weyl_rhs needs X, q >= 1")
    K = 2 ** (k - 1)
    if eps is None:
        eps = 1.0 / (12 * K)
    base = 1.0 / q + 1.0 / X + q / float(X) ** k
    return float(X) ** (1.0 + eps) * base ** (1.0 / K)
