from __future__ import annotations

import numpy as np
import pytest

from compound_mac.optimize import (WORKERS_ENV, OptimizerConfig, PolicyCodec, _multistart,
                                   full_region_thresholds, min_conf_sum, optimize_region,
                                   sum_capacity_full_coop, support_at, worker_count)
from compound_mac.regions import BoundEvaluator, RatePolytope, uniform_policy

from conftest import random_channel

FAST = OptimizerConfig(directions=8, restarts=3)


def test_worker_count(monkeypatch):
    monkeypatch.delenv(WORKERS_ENV, raising=False)
    assert worker_count() == 1
    monkeypatch.setenv(WORKERS_ENV, "3")
    assert worker_count() == 3
    monkeypatch.setenv(WORKERS_ENV, "many")
    assert worker_count() == 1


def test_codec_sizes_and_zero_logits(paper):
    codec = PolicyCodec(paper, "pi2", 5)
    # 4 free time-sharing logits plus one per (cell, u) row of each binary kernel
    assert codec.size == 4 + 5 + 5
    p = codec.decode(np.zeros(codec.size))
    u = uniform_policy("pi2", paper, 5)
    assert np.allclose(p.p0, u.p0) and np.allclose(p.kernels1, u.kernels1)
    big = codec.decode(np.full(codec.size, 800.0))
    assert np.all(np.isfinite(big.p0))


def test_multistart_deterministic():
    f = lambda x: float(np.sum((x - 1.0) ** 2))
    cfg = OptimizerConfig(restarts=4, seed=5)
    v1, x1, s1 = _multistart(f, 3, cfg, "sumcap", 2)
    v2, x2, s2 = _multistart(f, 3, cfg, "sumcap", 2)
    assert v1 == v2 and np.array_equal(x1, x2) and s1 == s2
    assert v1 < 1e-8 and s1["runs"] == 4


def test_parallel_channel_region(parallel):
    r = optimize_region(parallel, "conf", 0, 0, FAST)
    assert r.values[0] == pytest.approx(1.0, abs=1e-6)
    # direction (1,1)/sqrt2 is not in an 8-point grid; the corner (1,1) is
    assert np.all(r.values >= r.directions.sum(axis=1) - 1e-5)
    assert r.inner_violation() <= 1e-12


def test_region_pooling_and_workers(paper):
    r1 = optimize_region(paper, "conf", 0.1, 0.2, FAST, workers=1)
    r2 = optimize_region(paper, "conf", 0.1, 0.2, FAST, workers=2)
    assert np.array_equal(r1.values, r2.values) and np.array_equal(r1.points, r2.points)
    assert r1.metadata["policy_class"] == "pi2"
    ev = BoundEvaluator(paper)
    for k, w in enumerate(r1.directions):
        poly = RatePolytope("conf", tuple(ev.min_bounds(r1.policies[r1.policy_index[k]])), 0.1, 0.2)
        assert poly.maximizer(w)[0] == pytest.approx(r1.values[k], abs=1e-12)
        # every retained policy is dominated in this direction
        for pol in r1.policies:
            other = RatePolytope("conf", tuple(ev.min_bounds(pol)), 0.1, 0.2).maximizer(w)[0]
            assert other <= r1.values[k] + 1e-12


def test_cm_region_shape(paper):
    r = optimize_region(paper, "cm", config=OptimizerConfig(directions=6, restarts=2))
    assert r.directions.shape == (6, 3) and r.kind == "cm"
    assert r.inner_violation() <= 1e-12


def test_scalar_problems_on_parallel_channel(parallel):
    cfg = OptimizerConfig(restarts=3)
    assert sum_capacity_full_coop(parallel, cfg).value == pytest.approx(2.0, abs=1e-6)
    m = min_conf_sum(parallel, cfg)
    assert m.value == pytest.approx(0.0, abs=1e-5)
    assert m.c_inf - m.common == pytest.approx(m.value, abs=1e-9)
    t = full_region_thresholds(parallel, cfg)
    assert t.max_a == pytest.approx(1.0, abs=1e-6) and t.t1 == pytest.approx(1.0, abs=1e-5)


def test_support_at(paper):
    w = np.ones(2) / np.sqrt(2)
    res, point = support_at(paper, 0.29, 0.29, w, OptimizerConfig(restarts=3))
    assert point @ w == pytest.approx(res.value, abs=1e-9)
    assert np.all(point >= 0)


def test_single_state_small_random_channel_is_consistent():
    ch = random_channel(np.random.default_rng(4))
    r = optimize_region(ch, "conf", 0, 0, OptimizerConfig(directions=5, restarts=2))
    assert np.all(np.diff(r.directions[:, 0]) < 0)
    assert r.corner_points()["max_sum"] <= sum_capacity_full_coop(ch, OptimizerConfig(restarts=2)).value + 1e-6
