import json
import math
import os

import pytest

from waringbox import (BoxSpec, Guards, SweepConfig, ValidationError,
                       check_major_approx, check_minor_sup, check_unbalanced,
                       compute_thresholds, emit_report, generate_instances,
                       loglog_slope, sweep_bound)
from waringbox.verify import (ReportRecord, file_sha256, read_jsonl,
                              sample_minor_points, _evaluate_instance)


class TestGenerator:
    def test_deterministic(self):
        cfg = SweepConfig(k=2, s=5, n_instances=50, seed=123)
        assert generate_instances(cfg) == generate_instances(cfg)

    def test_ranges(self):
        cfg = SweepConfig(k=2, s=4, side_min=2, side_max=9, n_instances=200,
                          seed=3)
        for box in generate_instances(cfg):
            assert all(2 <= p <= 9 for p in box.sides)
            assert box.s == 4
            assert cfg.s <= box.N <= box.power_sum

    def test_seed_changes_stream(self):
        a = generate_instances(SweepConfig(n_instances=20, seed=1))
        b = generate_instances(SweepConfig(n_instances=20, seed=2))
        assert a != b


class TestSweepBound:
    def test_summary_and_finiteness(self):
        cfg = SweepConfig(k=2, s=5, side_max=12, n_instances=120, seed=9,
                          circle_check_limit=40000)
        records, summary = sweep_bound(cfg)
        assert summary["n_records"] == 120
        assert summary["n_skipped"] == 0
        for r in records:
            assert r.ratio is not None and math.isfinite(r.ratio)
            assert r.classification in ("Balanced", "Unbalanced")
        assert summary["max_circle_delta"] < 1e-4
        assert summary["n_circle_checked"] > 0

    def test_single_instance_closed_form(self):
        # all-ones box: Root = 1, both terms computable by hand
        t = compute_thresholds(2, 5)
        cfg = SweepConfig(k=2, s=5)
        box = BoxSpec.make(2, (1, 1, 1, 1, 1), 5)
        rec = _evaluate_instance(box, t, cfg, 0, Guards())
        assert rec.root == 1
        main = 1.0 / 5.0
        secondary = 1.0
        assert abs(rec.ratio - 1.0 / (main + secondary)) < 1e-12

    def test_below_threshold_probe(self):
        cfg = SweepConfig(k=2, s=3, side_max=8, n_instances=30, seed=4)
        records, summary = sweep_bound(cfg)
        assert all(not r.hypothesis for r in records)
        assert summary["n_records"] == 30

    def test_guard_skips_recorded(self):
        cfg = SweepConfig(k=2, s=5, side_max=20, n_instances=25, seed=10,
                          circle_check_limit=0)
        tiny = Guards(convolution_length=5)
        records, summary = sweep_bound(cfg, guards=tiny)
        skipped = [r for r in records if r.skipped]
        assert summary["n_skipped"] == len(skipped) > 0
        assert all(r.skip_reason for r in skipped)


class TestChecks:
    def test_major_approx_smoke(self):
        cfg = SweepConfig(k=2, s=5, samples=40, seed=2, X_grid=(64, 128, 256))
        out = check_major_approx(cfg)
        assert out["passed"]
        assert set(out["C_by_X"]) == {"64", "128", "256"}
        assert all(v > 0 for v in out["C_by_X"].values())

    def test_minor_sup_smoke(self):
        cfg = SweepConfig(k=3, s=9, samples=60, seed=2, X_grid=(64, 128, 256))
        out = check_minor_sup(cfg)
        assert out["passed"]
        assert out["weyl_slope"] <= cfg.slope_tol

    def test_minor_sampling_is_minor(self):
        pts = sample_minor_points(256, 2, 20, seed=5)
        assert len(pts) == 20
        for pt, q_best in pts:
            assert q_best > 2  # q_max for X = 256 is floor(256^(1/6)) = 2

    def test_unbalanced_check(self):
        cfg = SweepConfig(k=2, s=5, side_max=14, n_instances=60, seed=8)
        out = check_unbalanced(cfg)
        assert out["n_unbalanced"] > 0
        assert out["weight_lower_bound_ok"]
        assert out["weight_checked"] > 0
        assert math.isfinite(out["inner_max_C"])
        assert out["passed"]


class TestEmitReport:
    def test_round_trip_and_determinism(self, tmp_path):
        cfg = SweepConfig(k=2, s=5, side_max=10, n_instances=40, seed=77,
                          circle_check_limit=20000)
        records, summary = sweep_bound(cfg)
        p1 = emit_report(records, summary, str(tmp_path / "a"))
        p2 = emit_report(records, summary, str(tmp_path / "b"))
        assert file_sha256(p1["csv"]) == file_sha256(p2["csv"])
        assert file_sha256(p1["jsonl"]) == file_sha256(p2["jsonl"])
        back = read_jsonl(p1["jsonl"])
        assert back == list(records)

    def test_threads_do_not_change_bytes(self, tmp_path):
        base = SweepConfig(k=2, s=5, side_max=10, n_instances=60, seed=5,
                           circle_check_limit=20000)
        threaded = SweepConfig(k=2, s=5, side_max=10, n_instances=60, seed=5,
                               circle_check_limit=20000, threads=4)
        r1, s1 = sweep_bound(base)
        r2, s2 = sweep_bound(threaded)
        p1 = emit_report(r1, s1, str(tmp_path / "t1"))
        p2 = emit_report(r2, s2, str(tmp_path / "t2"))
        assert file_sha256(p1["csv"]) == file_sha256(p2["csv"])
        assert file_sha256(p1["jsonl"]) == file_sha256(p2["jsonl"])

    def test_empty_records(self, tmp_path):
        paths = emit_report([], {"n_records": 0}, str(tmp_path / "empty"))
        with open(paths["csv"]) as fh:
            lines = fh.read().splitlines()
        assert len(lines) == 1 and lines[0].startswith("idx,")

    def test_io_error_has_path_context(self, tmp_path):
        with pytest.raises(RuntimeError, match="report"):
            emit_report([], {}, str(tmp_path / "no_such_dir" / "x"))

    def test_record_round_trip(self):
        r = ReportRecord(idx=0, k=2, s=3, sides=(1, 2, 3), N=9, P=6, X=3,
                         classification="Balanced", hypothesis=False, root=1,
                         main_term=0.5, secondary_term=1.5, ratio=0.5,
                         circle_delta=None, skipped=False, skip_reason="")
        assert ReportRecord.from_dict(json.loads(json.dumps(r.to_dict()))) == r


def test_loglog_slope():
    xs = [1.0, 2.0, 4.0, 8.0]
    ys = [x**0.7 for x in xs]
    assert abs(loglog_slope(xs, ys) - 0.7) < 1e-12
    assert loglog_slope([1.0], [2.0]) == 0.0


def test_config_validation():
    with pytest.raises(ValidationError):
        SweepConfig(s=1)
    with pytest.raises(ValidationError):
        SweepConfig(side_min=5, side_max=2)
