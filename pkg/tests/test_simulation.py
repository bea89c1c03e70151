from __future__ import annotations

import numpy as np
import pytest

from compound_mac.conferencing import build_plan
from compound_mac.errors import InfeasiblePlan
from compound_mac.regions import BoundEvaluator, InputPolicy
from compound_mac.simulation import (RATE_MARGIN, candidate_policies, cm_rates, error_bound, run_simulation,
                                     select_simulation_policy)


def diagonal_policy(q):
    k = np.array([[[1.0, 0.0], [0.0, 1.0]]])
    return InputPolicy("pi2", np.array([q, 1 - q]), k, k)


def test_cm_rates():
    p = build_plan(20, 0.1, 0.1, 0.29, 0.29)
    assert cm_rates(p) == pytest.approx((np.log2(16) / 20, 0.0, 0.0))


def test_error_bound_terms(paper):
    pol = diagonal_policy(0.12)
    lone = error_bound(pol, paper, 40, 0.05, (1, 1, 1))
    crowd = error_bound(pol, paper, 40, 0.05, (357, 1, 1))
    # with one codeword only atypicality remains; more codewords add collisions
    assert 0 < lone < crowd <= 1
    assert error_bound(pol, paper, 80, 0.05, (1, 1, 1)) < lone


def test_selection_respects_rates(paper):
    rates = cm_rates(build_plan(80, 0.106, 0.106, 0.29, 0.29))
    pol, score = select_simulation_policy(paper, rates, "pi2", 80, 0.05, (127487, 1, 1))
    a, b, c, d = BoundEvaluator(paper).min_bounds(pol)
    assert sum(rates) <= RATE_MARGIN * d
    assert 0 <= score < 0.25
    with pytest.raises(InfeasiblePlan):
        select_simulation_policy(paper, (0.9, 0.0, 0.0), "pi2", 80, 0.05, (2 ** 72, 1, 1))


def test_candidates_are_valid(paper):
    cands = list(candidate_policies(paper, "pi2"))
    assert len(cands) == 1 + 6 * 49
    for pol in cands[:10]:
        pol.check(paper)


def test_run_simulation_small_and_deterministic(paper):
    a = run_simulation(paper, 0.1, 0.1, 0.29, 0.29, [24, 16], 20, seed=2)
    b = run_simulation(paper, 0.1, 0.1, 0.29, 0.29, [16, 24], 20, seed=2)
    assert [r.to_dict() for r in a.reports] == [r.to_dict() for r in b.reports]
    assert [(r.n, r.state) for r in a.reports] == [(16, "W1"), (16, "W2"), (24, "W1"), (24, "W2")]
