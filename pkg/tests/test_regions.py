from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from compound_mac._kernels import support
from compound_mac.errors import ConfigurationError, DomainError
from compound_mac.optimize import _Problem
from compound_mac.probability import build_joint, mutual_information
from compound_mac.regions import (BoundEvaluator, InputPolicy, RatePolytope, RateRegion, default_u_size,
                                  hausdorff, lift_policy, octant_directions, pentagon_vertices,
                                  policy_class_for, polytope_cm, polytope_conf, quarter_circle,
                                  state_bounds, uniform_policy)

from conftest import random_channel

LABELS = (("a", "a", "b"), ("p", "q", "q"))


def random_policy(rng, channel, cls, u=3):
    base = uniform_policy(cls, channel, u)
    return InputPolicy(cls, rng.dirichlet(np.ones(u)),
                       rng.dirichlet(np.ones(base.kernels1.shape[2]), size=base.kernels1.shape[:2]),
                       rng.dirichlet(np.ones(base.kernels2.shape[2]), size=base.kernels2.shape[:2]))


def test_policy_class_mapping():
    assert policy_class_for("cm") == "pi1"
    assert policy_class_for("conf", 0, 0) == "pi1"
    assert policy_class_for("conf", 0.1, 0.2) == "pi2"
    assert policy_class_for("conf", 0.1, 0) == "pi3"
    assert policy_class_for("conf", 0, 0.1) == "pi4"
    with pytest.raises(DomainError):
        policy_class_for("conf", -1, 0)
    with pytest.raises(ConfigurationError):
        policy_class_for("other")


def test_default_u_size(paper, parallel):
    assert default_u_size(paper) == 5
    assert default_u_size(parallel) == 6


@pytest.mark.parametrize("cls", ["pi1", "pi2", "pi3", "pi4"])
def test_bounds_three_routes(cls):
    """Vectorized evaluator, compiled kernel and textbook mutual information agree."""
    rng = np.random.default_rng(7)
    ch = random_channel(rng, sizes=(2, 3, 3), states=3, labels=LABELS)
    prob = _Problem(ch, cls, 3)
    for _ in range(5):
        theta = rng.normal(0, 2, prob.codec.size)
        policy = prob.codec.decode(theta)
        per_state = state_bounds(policy, ch)
        k1s, k2s = policy.per_state(ch)
        for s, state in enumerate(ch.states):
            j = build_joint(policy.p0, k1s[s], k2s[s], state.matrix)
            ref = [mutual_information(j, "Z", "X", "YU"), mutual_information(j, "Z", "Y", "XU"),
                   mutual_information(j, "Z", "XY", "U"), mutual_information(j, "Z", "XY")]
            assert np.allclose(per_state[s], ref, atol=1e-10)
        assert np.allclose(prob.bounds(theta), per_state.min(axis=0), atol=1e-10)


def test_policy_shapes_and_lift():
    rng = np.random.default_rng(3)
    ch = random_channel(rng, states=3, labels=LABELS)
    p1 = random_policy(rng, ch, "pi1")
    assert p1.kernels1.shape == (2, 3, 2) and p1.kernels2.shape == (2, 3, 2)
    ev = BoundEvaluator(ch)
    for cls in ("pi2", "pi3", "pi4"):
        lifted = lift_policy(p1, cls, ch)
        assert np.allclose(ev.state_bounds(lifted), ev.state_bounds(p1))
    with pytest.raises(ConfigurationError):
        lift_policy(random_policy(rng, ch, "pi2"), "pi1", ch)
    with pytest.raises(ConfigurationError):
        random_policy(rng, ch, "pi2").check(random_channel(rng, states=3))
    again = InputPolicy.from_dict(p1.to_dict())
    assert np.array_equal(again.kernels1, p1.kernels1)


def test_polytope_class_checks(paper):
    p2 = uniform_policy("pi2", paper, 2)
    with pytest.raises(ConfigurationError):
        polytope_cm(p2, paper)
    with pytest.raises(ConfigurationError):
        polytope_conf(p2, paper, 0.1, 0.0)
    assert polytope_conf(uniform_policy("pi1", paper), paper, 0.1, 0.1).kind == "conf"


def brute_force_vertices(A, h):
    """All feasible intersections of ``dim`` tight constraints."""
    dim = A.shape[1]
    pts = []
    for rows in itertools.combinations(range(len(h)), dim):
        M = A[list(rows)]
        if abs(np.linalg.det(M)) < 1e-12:
            continue
        x = np.linalg.solve(M, h[list(rows)])
        if np.all(A @ x <= h + 1e-9):
            pts.append(x)
    return np.array(pts)


# millibit grid keeps the linear-programming oracle away from its own tolerances
raw_bounds = st.tuples(*[st.integers(0, 2000) for _ in range(4)])


@settings(max_examples=150, deadline=None)
@given(raw_bounds, st.floats(0, 1), st.floats(0, 1), st.integers(0, 2**31 - 1))
def test_vertices_and_support_against_oracles(raw, c1, c2, seed):
    a, b, c, d = (v / 1000 for v in raw)
    # worst-state bounds keep max(a, b) <= c <= min(a + b, d)
    c = min(max(c, a, b), a + b)
    raw = (a, b, c, max(c, d))
    rng = np.random.default_rng(seed)
    for poly in (RatePolytope("cm", raw), RatePolytope("conf", raw, c1, c2)):
        A, h = poly.halfspaces()
        brute = brute_force_vertices(A, h)
        ours = poly.vertices()
        assert all(poly.contains(v) for v in ours)
        for _ in range(4):
            w = np.abs(rng.normal(size=poly.dimension))
            val, point = poly.maximizer(w)
            assert poly.contains(point, tol=1e-9)
            assert val == pytest.approx(point @ w, abs=1e-12)
            assert val == pytest.approx((brute @ w).max(), abs=1e-9)
            assert val == pytest.approx((ours @ w).max(), abs=1e-9)
            lp = linprog(-w, A_ub=A, b_ub=h, bounds=[(None, None)] * poly.dimension, method="highs")
            assert lp.status == 0
            assert val == pytest.approx(-lp.fun, abs=1e-7)
            assert support(np.array(raw, dtype=float), poly.kind == "cm", c1, c2, w) == \
                pytest.approx(val, abs=1e-12)


def test_pentagon_vertices():
    v = pentagon_vertices(0.5, 0.4, 0.7)
    assert np.allclose(v, [[0, 0], [0.5, 0], [0.5, 0.2], [0.3, 0.4], [0, 0.4]])
    # inactive sum constraint gives a rectangle
    assert pentagon_vertices(0.5, 0.4, 2.0)[2].tolist() == [0.5, 0.4]


def test_maximizer_rejects_bad_directions():
    poly = RatePolytope("conf", (0.2, 0.2, 0.3, 0.5))
    with pytest.raises(DomainError):
        poly.maximizer([-1, 1])
    with pytest.raises(ConfigurationError):
        poly.maximizer([1, 1, 1])


def test_direction_sets():
    q = quarter_circle(128)
    assert q.shape == (128, 2)
    assert np.allclose(np.linalg.norm(q, axis=1), 1) and np.all(q >= 0)
    assert q[0].tolist() == [1.0, 0.0] and q[-1].tolist() == [0.0, 1.0]
    o = octant_directions(256)
    assert o.shape == (256, 3)
    assert np.allclose(np.linalg.norm(o, axis=1), 1) and np.all(o >= 0)
    assert len(np.unique(o.round(12), axis=0)) == 256
    # area preservation: the height coordinate is uniform on [0, 1]
    assert abs(o[:, 0].mean() - 0.5) < 0.01


def test_region_helpers():
    dirs = quarter_circle(5)
    pts = np.array([[0.5, 0.0], [0.5, 0.2], [0.3, 0.4]])
    poly = RatePolytope("conf", (0.5, 0.4, 0.7, 1.0))
    vals = np.array([poly.maximizer(w)[0] for w in dirs])
    r = RateRegion("conf", 0, 0, dirs, vals, np.array([poly.maximizer(w)[1] for w in dirs]), [], np.zeros(5, int))
    assert r.inner_violation() <= 1e-12
    assert r.corner_points() == pytest.approx({"max_R1": 0.5, "max_R2": 0.4, "max_sum": 0.7})
    assert hausdorff(r, r) == 0.0
    shifted = RateRegion("conf", 0, 0, dirs, vals + 0.1, pts, [], np.zeros(5, int))
    assert hausdorff(r, shifted) == pytest.approx(0.1)
    with pytest.raises(ConfigurationError):
        hausdorff(r, RateRegion("conf", 0, 0, quarter_circle(6), np.zeros(6), pts, [], np.zeros(6, int)))
