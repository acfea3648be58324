"""Empirical verification harness.

The asymptotic statements under test all have the shape "quantity <<
scale", with an implied constant nobody knows.  The harness turns each
one into two measurables: the per-dyadic-bucket maximum of quantity/scale
(the measured constant) and the log-log regression slope of those maxima
across buckets (a growth-rate violation detector; a true << bound must
not trend upward).  Instance streams are fully determined by a 64-bit
seed, so every report is byte-reproducible.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .limits import DEFAULT_GUARDS, Guards, GuardExceeded, ValidationError
from .model import (BoxSpec, BoxClass, Thresholds, classify_box,
                    compute_thresholds, no_solutions_possible, truncate_box)
from .counting import root_count_convolution
from .expsums import PhasePoint, eval_S, eval_f, v_kernel, weyl_rhs
from .circle import classify_alpha, dissect, full_circle_integral

__all__ = [
    "SweepConfig",
    "ReportRecord",
    "loglog_slope",
    "generate_instances",
    "sweep_bound",
    "check_major_approx",
    "check_minor_sup",
    "check_unbalanced",
    "emit_report",
]

_MINOR_SAMPLE_DEN = 2**31 - 1  # prime denominator for sampled frequencies


@dataclass(frozen=True)
class SweepConfig:
    """Everything that determines an instance stream and its evaluation."""

    k: int = 2
    s: int = 5
    side_min: int = 1
    side_max: int = 20
    n_instances: int = 1000
    seed: int = 1
    samples: int = 200                    # per-X samples for the arc checks
    X_grid: Tuple[int, ...] = (64, 128, 256, 512, 1024, 2048, 4096)
    eps: float = 0.05                     # exponent for N^eps style checks
    slope_tol: float = 0.02
    threads: int = 1
    circle_check_limit: int = 200_000     # max power_sum+N for the circle identity
    out_prefix: Optional[str] = None

    def __post_init__(self):
        if self.s < 2:
            raise ValidationError("SweepConfig needs s >= 2")
        if not 1 <= self.side_min <= self.side_max:
            raise ValidationError("need 1 <= side_min <= side_max")

    def to_dict(self) -> dict:
        return {
            "k": self.k, "s": self.s,
            "side_min": self.side_min, "side_max": self.side_max,
            "n_instances": self.n_instances, "seed": self.seed,
            "samples": self.samples, "X_grid": list(self.X_grid),
            "eps": self.eps, "slope_tol": self.slope_tol,
            "threads": self.threads,
            "circle_check_limit": self.circle_check_limit,
        }


@dataclass(frozen=True)
class ReportRecord:
    idx: int
    k: int
    s: int
    sides: Tuple[int, ...]
    N: int
    P: int
    X: int
    classification: str
    hypothesis: bool
    root: Optional[int]
    main_term: float
    secondary_term: float
    ratio: Optional[float]
    circle_delta: Optional[float]
    skipped: bool
    skip_reason: str

    _FIELDS = ("idx", "k", "s", "sides", "N", "P", "X", "classification",
               "hypothesis", "root", "main_term", "secondary_term", "ratio",
               "circle_delta", "skipped", "skip_reason")

    def to_dict(self) -> dict:
        d = {}
        for name in self._FIELDS:
            v = getattr(self, name)
            if name == "sides":
                v = list(v)
            d[name] = v
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ReportRecord":
        d = dict(d)
        d["sides"] = tuple(d["sides"])
        return cls(**d)


def loglog_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Least-squares slope of log(y) against log(x); needs >= 2 positive pairs."""
    pts = [(math.log(x), math.log(y)) for x, y in zip(xs, ys) if x > 0 and y > 0]
    if len(pts) < 2:
        return 0.0
    lx = np.array([p[0] for p in pts])
    ly = np.array([p[1] for p in pts])
    lx = lx - lx.mean()
    denom = float(np.dot(lx, lx))
    if denom == 0.0:
        return 0.0
    return float(np.dot(lx, ly - ly.mean()) / denom)


def generate_instances(cfg: SweepConfig, forced_p1: Optional[int] = None
                       ) -> List[BoxSpec]:
    """Seeded stream of boxes: log-uniform sides, N uniform on [s, sum P_j^k]."""
    rng = random.Random(cfg.seed)
    lo, hi = math.log(cfg.side_min), math.log(cfg.side_max)
    out = []
    for _ in range(cfg.n_instances):
        sides = []
        for j in range(cfg.s):
            u = rng.uniform(lo, hi)
            sides.append(min(cfg.side_max, max(cfg.side_min, round(math.exp(u)))))
        if forced_p1 is not None:
            sides[0] = forced_p1
        sides.sort()
        power_sum = sum(p**cfg.k for p in sides)
        N = rng.randint(cfg.s, max(cfg.s, power_sum))
        out.append(BoxSpec(k=cfg.k, s=cfg.s, sides=tuple(sides), N=N))
    return out


def _bucket_maxima(pairs: List[Tuple[int, float]]) -> Dict[int, float]:
    """Max value per dyadic bucket of the integer key."""
    buckets: Dict[int, float] = {}
    for key, val in pairs:
        b = key.bit_length() - 1
        if b not in buckets or val > buckets[b]:
            buckets[b] = val
    return buckets


def _bucket_slope(buckets: Dict[int, float]) -> float:
    xs = [2.0 ** (b + 0.5) for b in sorted(buckets)]
    ys = [buckets[b] for b in sorted(buckets)]
    return loglog_slope(xs, ys)


def _evaluate_instance(box: BoxSpec, t: Thresholds, cfg: SweepConfig,
                       idx: int, guards: Guards) -> ReportRecord:
    delta = float(t.delta)
    tbox = truncate_box(box)
    cls = classify_box(tbox, t)
    P = float(tbox.P)
    main = P / box.N
    secondary = P ** (1.0 - box.k / box.s - delta)
    base = dict(idx=idx, k=box.k, s=box.s, sides=tbox.sides, N=box.N,
                P=tbox.P, X=tbox.X, classification=cls.value,
                hypothesis=t.hypothesis, main_term=main,
                secondary_term=secondary)
    if no_solutions_possible(tbox):
        return ReportRecord(root=0, ratio=0.0, circle_delta=None,
                            skipped=False, skip_reason="", **base)
    try:
        root = root_count_convolution(tbox, guards).count
    except GuardExceeded as exc:
        return ReportRecord(root=None, ratio=None, circle_delta=None,
                            skipped=True, skip_reason=str(exc), **base)
    ratio = root / (main + secondary)
    circle_delta = None
    if tbox.power_sum + box.N <= cfg.circle_check_limit:
        approx = full_circle_integral(tbox, guards)
        circle_delta = abs(approx - root)
    return ReportRecord(root=root, ratio=ratio, circle_delta=circle_delta,
                        skipped=False, skip_reason="", **base)


def sweep_bound(cfg: SweepConfig, t: Optional[Thresholds] = None,
                guards: Guards = DEFAULT_GUARDS
                ) -> Tuple[List[ReportRecord], dict]:
    """Measure Root / (N^{-1} P + P^{1-k/s-delta}) over a seeded sweep.

    Returns the per-instance records and a summary with the per-bucket
    maxima of the ratio and their trend slope.  Guard violations are
    recorded as skipped rows, never dropped.
    """
    if t is None:
        t = compute_thresholds(cfg.k, cfg.s)
    boxes = generate_instances(cfg)
    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as ex:
            records = list(ex.map(
                lambda ib: _evaluate_instance(ib[1], t, cfg, ib[0], guards),
                enumerate(boxes)))
    else:
        records = [_evaluate_instance(b, t, cfg, i, guards)
                   for i, b in enumerate(boxes)]
    pairs = [(r.P, r.ratio) for r in records if r.ratio is not None and r.ratio > 0]
    buckets = _bucket_maxima(pairs)
    circle_deltas = [r.circle_delta for r in records if r.circle_delta is not None]
    summary = {
        "config": cfg.to_dict(),
        "thresholds": t.to_dict(),
        "n_records": len(records),
        "n_skipped": sum(1 for r in records if r.skipped),
        "max_ratio": max((r.ratio for r in records if r.ratio is not None),
                         default=0.0),
        "bucket_max_ratio": {str(b): buckets[b] for b in sorted(buckets)},
        "bucket_slope": _bucket_slope(buckets),
        "n_circle_checked": len(circle_deltas),
        "max_circle_delta": max(circle_deltas, default=0.0),
    }
    return records, summary


def check_major_approx(cfg: SweepConfig) -> dict:
    """Measure C_maj(X) = max |f_Y - V| / X^(1/3) over sampled arc points.

    Samples (q, a, beta, Y <= X) per grid value of X; the lemma predicts a
    bounded constant, so the bucket trend slope must stay below tolerance.
    """
    k = cfg.k
    rng = random.Random(cfg.seed)
    by_X: Dict[int, float] = {}
    for X in cfg.X_grid:
        d = dissect(X, k)
        w = d.half_width
        worst = 0.0
        for i in range(cfg.samples):
            arc = d.arcs[rng.randrange(len(d.arcs))]
            beta = rng.uniform(-w, w)
            choice = i % 3
            if choice == 0:
                Y = X
            elif choice == 1:
                Y = max(1, X // 2)
            else:
                Y = rng.randint(1, X)
            f = eval_f(Y, PhasePoint.from_rational(arc.a, arc.q, beta), k)
            V = eval_S(arc.q, arc.a, k) / arc.q * complex(
                v_kernel(float(Y), np.array([beta]), k)[0])
            err = abs(f - V)
            worst = max(worst, err / float(X) ** (1.0 / 3.0))
        by_X[X] = worst
    xs = sorted(by_X)
    slope = loglog_slope([float(x) for x in xs], [by_X[x] for x in xs])
    return {
        "check": "major_approx",
        "k": k,
        "C_by_X": {str(x): by_X[x] for x in xs},
        "slope": slope,
        "slope_tol": cfg.slope_tol,
        "passed": bool(slope <= cfg.slope_tol),
    }


def sample_minor_points(X: int, k: int, n: int, seed: int
                        ) -> List[Tuple[PhasePoint, int]]:
    """Rejection-sample n minor-arc frequencies t/D, D = 2^31 - 1, exactly
    classified; returns (point, q_best) pairs."""
    d = dissect(X, k)
    rng = random.Random(seed)
    out = []
    D = _MINOR_SAMPLE_DEN
    while len(out) < n:
        t = rng.randrange(1, D)
        pt = PhasePoint.from_fraction(Fraction(t, D))
        c = classify_alpha(pt, d)
        if not c.major:
            out.append((pt, c.q_best))
    return out


def check_minor_sup(cfg: SweepConfig) -> dict:
    """Measure C_min(X) = max |f_X(alpha)| / X^(1 - 1/(12K)) over minor samples."""
    k = cfg.k
    K = 2 ** (k - 1)
    expo = 1.0 - 1.0 / (12 * K)
    by_X: Dict[int, float] = {}
    weyl_by_X: Dict[int, float] = {}
    for X in cfg.X_grid:
        pts = sample_minor_points(X, k, cfg.samples, cfg.seed + X)
        worst = 0.0
        worst_weyl = 0.0
        for pt, q_best in pts:
            mod = abs(eval_f(X, pt, k))
            if mod >= X:
                raise AssertionError("minor-arc point attains the trivial bound")
            worst = max(worst, mod / float(X) ** expo)
            worst_weyl = max(worst_weyl, mod / weyl_rhs(X, q_best, k, 0.1))
        by_X[X] = worst
        weyl_by_X[X] = worst_weyl
    xs = sorted(by_X)
    slope = loglog_slope([float(x) for x in xs], [by_X[x] for x in xs])
    weyl_slope = loglog_slope([float(x) for x in xs], [weyl_by_X[x] for x in xs])
    return {
        "check": "minor_sup",
        "k": k,
        "C_by_X": {str(x): by_X[x] for x in xs},
        "slope": slope,
        "C_weyl_by_X": {str(x): weyl_by_X[x] for x in xs},
        "weyl_slope": weyl_slope,
        "slope_tol": cfg.slope_tol,
        "passed": bool(slope <= cfg.slope_tol),
    }


def _box_solutions(k: int, sides: Sequence[int], N: int):
    """All tuples (x_1..x_s), 1 <= x_j <= side_j, sum x_j^k = N (small only)."""
    s = len(sides)

    def rec(j: int, rem: int, prefix: Tuple[int, ...]):
        if j == s - 1:
            x = round(rem ** (1.0 / k))
            for c in (x - 1, x, x + 1):
                if 1 <= c <= sides[j] and c**k == rem:
                    yield prefix + (c,)
            return
        for x in range(1, sides[j] + 1):
            xk = x**k
            if xk + (s - 1 - j) > rem:
                break
            yield from rec(j + 1, rem - xk, prefix + (x,))

    yield from rec(0, N, ())


def check_unbalanced(cfg: SweepConfig, t: Optional[Thresholds] = None,
                     guards: Guards = DEFAULT_GUARDS) -> dict:
    """Test Root <= C P^(1-k/s-delta_1) on unbalanced boxes, and the inner step.

    The instance stream forces a tiny smallest side, then filters to the
    Unbalanced class.  For each instance the fixed-x_1 counts are checked
    against C' T^(1-k/(s-1)) N^eps, and on small instances each solution's
    weight (x_2...x_s)^(-1+k/(s-1)) is compared against its lower bound
    T^(-1+k/(s-1)).
    """
    if t is None:
        t = compute_thresholds(cfg.k, cfg.s)
    if t.delta_1 is None:
        raise ValidationError("delta_1 undefined for s = 1")
    d1 = float(t.delta_1)
    k, s = cfg.k, cfg.s
    boxes = generate_instances(cfg, forced_p1=1)
    rng = random.Random(cfg.seed + 99991)
    pairs = []
    inner_max = 0.0
    weight_checked = 0
    weight_ok = True
    n_unbalanced = 0
    for box in boxes:
        # vary the forced smallest side a little, deterministically
        p1 = rng.randint(1, max(1, min(3, box.sides[1])))
        box = BoxSpec(k=k, s=s, sides=(p1,) + box.sides[1:], N=box.N)
        tbox = truncate_box(box)
        if classify_box(tbox, t) is not BoxClass.UNBALANCED:
            continue
        n_unbalanced += 1
        root = root_count_convolution(tbox, guards).count
        bound = float(tbox.P) ** (1.0 - k / s - d1)
        pairs.append((tbox.P, root / bound))
        # inner step: for each fixed x_1, the (s-1)-variable count
        T = float(tbox.T)
        inner_scale = T ** (1.0 - k / (s - 1)) * float(box.N) ** cfg.eps
        for x1 in range(1, tbox.sides[0] + 1):
            m = box.N - x1**k
            if m < s - 1:
                continue
            sub = BoxSpec(k=k, s=s - 1, sides=tbox.sides[1:], N=m)
            sub_count = root_count_convolution(sub, guards).count
            inner_max = max(inner_max, sub_count / inner_scale)
            if sub.P <= 2000 and weight_checked < 500:
                w_lower = T ** (-1.0 + k / (s - 1))
                for sol in _box_solutions(k, sub.sides, m):
                    wgt = math.prod(sol) ** (-1.0 + k / (s - 1))
                    weight_checked += 1
                    if wgt < w_lower * (1 - 1e-12):
                        weight_ok = False
    buckets = _bucket_maxima(pairs)
    return {
        "check": "unbalanced",
        "k": k,
        "s": s,
        "n_unbalanced": n_unbalanced,
        "bucket_max_C": {str(b): buckets[b] for b in sorted(buckets)},
        "bucket_slope": _bucket_slope(buckets),
        "inner_max_C": inner_max,
        "eps": cfg.eps,
        "weight_checked": weight_checked,
        "weight_lower_bound_ok": weight_ok,
        "slope_tol": cfg.slope_tol,
        "passed": bool(_bucket_slope(buckets) <= cfg.slope_tol and weight_ok),
    }


# ---------------------------------------------------------------------------
# report emission
# ---------------------------------------------------------------------------

_CSV_COLUMNS = list(ReportRecord._FIELDS)


def _record_to_row(r: ReportRecord) -> List[str]:
    row = []
    for name in _CSV_COLUMNS:
        v = getattr(r, name)
        if name == "sides":
            v = " ".join(str(p) for p in v)
        elif v is None:
            v = ""
        row.append(str(v))
    return row


def emit_report(records: Sequence[ReportRecord], summary: dict,
                prefix: str) -> dict:
    """Write <prefix>.csv, <prefix>.jsonl and <prefix>.summary.json.

    Output is byte-deterministic for a fixed record stream: fixed column
    order, repr-stable floats, sorted summary keys.
    """
    paths = {
        "csv": prefix + ".csv",
        "jsonl": prefix + ".jsonl",
        "summary": prefix + ".summary.json",
    }
    try:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(_CSV_COLUMNS)
        for r in records:
            writer.writerow(_record_to_row(r))
        with open(paths["csv"], "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())
        with open(paths["jsonl"], "w", encoding="utf-8") as fh:
            for r in records:
                fh.write(json.dumps(r.to_dict(), sort_keys=True) + "\n")
        with open(paths["summary"], "w", encoding="utf-8") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise RuntimeError(f"failed writing report near {exc.filename!r}: {exc}") from exc
    return paths


def read_jsonl(path: str) -> List[ReportRecord]:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                out.append(ReportRecord.from_dict(json.loads(line)))
    return out


def file_sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        h.update(fh.read())
    return h.hexdigest()
