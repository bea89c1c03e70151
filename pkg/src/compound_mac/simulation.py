"""End-to-end simulation of the conferencing scheme at desk-scale blocklengths.

Target rates are split by a conference plan into a common-message code,
a policy whose rate polytope contains the split rates is chosen, and a
random codebook drawn from that policy is decoded by joint typicality.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .channel import CompoundChannel
from .codes import DEFAULT_DELTA, DecoderConfig, ErrorReport, TypicalityDecoder, derive_conf_code, \
    sample_codebook, simulate_error
from .conferencing import ConferencePlan, build_plan
from .errors import InfeasiblePlan
from .typicality import multinomial_box_probability, typical_box
from .regions import BoundEvaluator, InputPolicy, uniform_policy

# rates must stay below this fraction of the policy's bounds
RATE_MARGIN = 0.9


def _laws(policy: InputPolicy, channel: CompoundChannel) -> list[np.ndarray]:
    k1s, k2s = policy.per_state(channel)
    return [policy.p0[:, None, None, None] * k1s[s][:, :, None, None]
            * k2s[s][:, None, :, None] * st.matrix[None]
            for s, st in enumerate(channel.states)]


def error_bound(policy: InputPolicy, channel: CompoundChannel, n: int, delta: float,
                sizes: tuple[int, int, int]) -> float:
    """Random-coding union bound on the decoding error, worst state.

    Adds the probability that the sent quadruple is atypical to, for each
    kind of wrong triple (new cloud centre, new private word of either or
    both senders), the number of such triples times the exact probability
    that one of them looks typical for some state.
    """
    m0, m1, m2 = sizes
    laws = _laws(policy, channel)
    boxes = [typical_box(l.ravel(), n, delta) for l in laws]
    worst = 0.0
    for p in laws:
        pu = p.sum(axis=(1, 2, 3))
        safe_u = np.where(pu > 0, pu, 1.0)
        pxu = p.sum(axis=(2, 3)) / safe_u[:, None]
        pyu = p.sum(axis=(1, 3)) / safe_u[:, None]
        pz_u = p.sum(axis=(1, 2)) / safe_u[:, None]
        events = [
            ((m0 - 1) * m1 * m2, p.sum(axis=3)[..., None] * p.sum(axis=(0, 1, 2))[None, None, None]),
            ((m1 - 1) * m2, p.sum(axis=1)[:, None] * pxu[:, :, None, None]),
            (m1 * (m2 - 1), p.sum(axis=2)[:, :, None] * pyu[:, None, :, None]),
            ((m1 - 1) * (m2 - 1), pu[:, None, None, None] * pxu[:, :, None, None]
             * pyu[:, None, :, None] * pz_u[:, None, None, :]),
        ]
        total = 1.0 - multinomial_box_probability(p.ravel(), *typical_box(p.ravel(), n, delta), n)
        for count, q in events:
            if count <= 0:
                continue
            hit = sum(multinomial_box_probability(q.ravel(), lo, hi, n) for lo, hi in boxes)
            total += count * hit
        worst = max(worst, min(total, 1.0))
    return worst


def candidate_policies(channel: CompoundChannel, cls: str):
    """Uniform inputs plus two-point time sharing between deterministic input pairs."""
    xs, ys, _ = channel.sizes
    yield uniform_policy(cls, channel, 1)
    base = uniform_policy(cls, channel, 2)
    pairs = list(itertools.product(range(xs), range(ys)))
    for (x0, y0), (x1, y1) in itertools.combinations(pairs, 2):
        k1 = np.zeros_like(base.kernels1)
        k2 = np.zeros_like(base.kernels2)
        k1[:, 0, x0] = k1[:, 1, x1] = 1.0
        k2[:, 0, y0] = k2[:, 1, y1] = 1.0
        for q in np.arange(1, 50) / 50:
            yield InputPolicy(cls, np.array([q, 1 - q]), k1, k2)


def cm_rates(plan: ConferencePlan) -> tuple[float, float, float]:
    n = plan.n
    return tuple(float(np.log2(m) / n) for m in (plan.M0_cm, plan.M1_cm, plan.M2_cm))


def select_simulation_policy(channel: CompoundChannel, rates, cls: str, n: int,
                             delta: float = DEFAULT_DELTA, sizes=None) -> tuple[InputPolicy, float]:
    """Candidate policy with the smallest error bound whose CM polytope holds ``rates``.

    ``rates = (R0, R1, R2)`` must satisfy every bound with a factor
    ``RATE_MARGIN`` to spare.
    """
    r0, r1, r2 = rates
    ev = BoundEvaluator(channel)
    best, best_score = None, np.inf
    for pol in candidate_policies(channel, cls):
        a, b, c, d = ev.min_bounds(pol) * RATE_MARGIN
        if r1 <= a and r2 <= b and r1 + r2 <= c and r0 + r1 + r2 <= d:
            score = error_bound(pol, channel, n, delta, sizes)
            if score < best_score:
                best, best_score = pol, score
    if best is None:
        raise InfeasiblePlan(f"no candidate policy supports common-message rates {tuple(round(r, 4) for r in rates)}")
    return best, best_score


@dataclass
class SimulationResult:
    reports: list[ErrorReport]
    plans: dict[int, ConferencePlan]
    policy: InputPolicy
    score: float
    rates: tuple[float, float]
    meta: dict = field(default_factory=dict)


def run_simulation(channel: CompoundChannel, r1: float, r2: float, c1: float, c2: float, ns,
                   trials: int, seed: int, delta: float = DEFAULT_DELTA) -> SimulationResult:
    """Error reports for every state and blocklength, ordered by ``(n, state)``.

    The CM code behind the conference is built for shared CSIT (each
    encoder knows the joint cell) when both capacities are positive.
    """
    ns = sorted(int(n) for n in ns)
    t1, t2 = len(channel.T1), len(channel.T2)
    plans = {n: build_plan(n, r1, r2, c1, c2, t1, t2) for n in ns}
    cls = "pi2" if c1 > 0 and c2 > 0 else ("pi3" if c1 > 0 else ("pi4" if c2 > 0 else "pi1"))
    # the policy is fixed once, for the rates and code sizes at the largest n
    rates = max((cm_rates(p) for p in plans.values()), key=lambda r: r[0] + r[1] + r[2])
    top = plans[ns[-1]]
    policy, score = select_simulation_policy(channel, rates, cls, ns[-1], delta,
                                             (top.M0_cm, top.M1_cm, top.M2_cm))
    cfg = DecoderConfig(delta)
    reports = []
    for n in ns:
        plan = plans[n]
        cb = sample_codebook(policy, n, plan.M0_cm, plan.M1_cm, plan.M2_cm, seed)
        code = derive_conf_code(cb, plan)
        dec = TypicalityDecoder(cb, channel, cfg)
        for s in range(len(channel.states)):
            reports.append(simulate_error(code, channel, s, trials, seed, cfg, dec))
    return SimulationResult(reports, plans, policy, score, (r1, r2))
