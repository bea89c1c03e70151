"""Max-min search over input policies.

Policies are parameterized by unconstrained logits mapped onto each simplex
with a softmax whose last logit is pinned to zero.  Every search is a
multi-start Nelder-Mead run; restart 0 starts from the uniform policy and
the others from seeded random logits.  Random streams are derived from
``SeedSequence([seed, purpose, task, restart])`` so a task's result never
depends on which worker executed it.
"""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import minimize

from ._kernels import support, theta_bounds
from .channel import CompoundChannel
from .regions import (BoundEvaluator, InputPolicy, RatePolytope, RateRegion, _INDEXING,
                      _index_count, _state_index, default_u_size, octant_directions,
                      policy_class_for, quarter_circle)

WORKERS_ENV = "COMPOUND_MAC_WORKERS"

# purpose codes mixed into the seed sequence
_PURPOSE = {"region-cm": 1, "region-conf": 2, "sumcap": 3, "common": 4, "thr-a": 5, "thr-b": 6, "support": 7}


@dataclass(frozen=True)
class OptimizerConfig:
    directions: int | None = None       # None: 128 (conf) or 256 (cm)
    restarts: int = 64
    u_size: int | None = None           # None: cardinality bound
    seed: int = 0
    maxiter: int = 2000
    fatol: float = 1e-7
    init_scale: float = 2.0
    membership_tol: float = 1e-4        # slack for the sum-capacity maximizer set
    penalty_stages: int = 5


def worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


class PolicyCodec:
    """Bijection between logit vectors and policies of one class and shape."""

    def __init__(self, channel: CompoundChannel, cls: str, u_size: int):
        self.channel, self.cls, self.u = channel, cls, u_size
        x, y, _ = channel.sizes
        i1, i2 = _INDEXING[cls]
        self.shape1 = (_index_count(channel, i1), u_size, x)
        self.shape2 = (_index_count(channel, i2), u_size, y)
        self.idx1 = _state_index(channel, i1)
        self.idx2 = _state_index(channel, i2)
        self.n0 = u_size - 1
        self.n1 = self.shape1[0] * u_size * (x - 1)
        self.n2 = self.shape2[0] * u_size * (y - 1)
        self.size = self.n0 + self.n1 + self.n2

    @staticmethod
    def _softmax(logits: np.ndarray, shape) -> np.ndarray:
        full = np.concatenate([logits.reshape(*shape[:-1], shape[-1] - 1),
                               np.zeros((*shape[:-1], 1))], axis=-1)
        full = full - full.max(axis=-1, keepdims=True)
        e = np.exp(full)
        return e / e.sum(axis=-1, keepdims=True)

    def arrays(self, theta: np.ndarray):
        p0 = self._softmax(theta[:self.n0], (self.u,))
        k1 = self._softmax(theta[self.n0:self.n0 + self.n1], self.shape1)
        k2 = self._softmax(theta[self.n0 + self.n1:], self.shape2)
        return p0, k1, k2

    def decode(self, theta: np.ndarray) -> InputPolicy:
        p0, k1, k2 = self.arrays(theta)
        return InputPolicy(self.cls, p0, k1, k2)


class _Problem:
    """Bound evaluation for one channel/class, shared by all objectives."""

    def __init__(self, channel: CompoundChannel, cls: str, u_size: int):
        self.codec = cd = PolicyCodec(channel, cls, u_size)
        ev = BoundEvaluator(channel)
        self._args = (u_size, cd.shape1[0], cd.shape2[0],
                      np.ascontiguousarray(cd.idx1, dtype=np.int64),
                      np.ascontiguousarray(cd.idx2, dtype=np.int64),
                      np.ascontiguousarray(ev.w), np.ascontiguousarray(ev.row_entropy))

    def bounds(self, theta: np.ndarray) -> np.ndarray:
        return theta_bounds(np.asarray(theta, dtype=float), *self._args)


def _multistart(objective, dim: int, cfg: OptimizerConfig, purpose: str, task: int,
                starts=()) -> tuple[float, np.ndarray, dict]:
    """Minimize ``objective`` from the uniform point, given starts and random starts."""
    best_val, best_x, finals, iters = np.inf, np.zeros(dim), [], 0
    seeds = []
    for r in range(cfg.restarts):
        if r == 0:
            seeds.append(np.zeros(dim))
        else:
            rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, _PURPOSE[purpose], task, r]))
            seeds.append(rng.normal(0.0, cfg.init_scale, dim))
    for x0 in list(starts) + seeds:
        if dim == 0:
            val, x = float(objective(x0)), x0
        else:
            res = minimize(objective, x0, method="Nelder-Mead",
                           options={"maxiter": cfg.maxiter, "fatol": cfg.fatol, "xatol": 1e-6,
                                    "adaptive": dim > 8})
            val, x = float(res.fun), res.x
            iters += int(res.nit)
        finals.append(val)
        if val < best_val:
            best_val, best_x = val, x
    finals = np.array(finals)
    stats = {"runs": int(finals.size), "iterations": iters,
             "best": float(-best_val), "median": float(-np.median(finals)),
             "within_1e-4": int(np.sum(finals <= best_val + 1e-4))}
    return best_val, best_x, stats


# --- regions -------------------------------------------------------------------

def _direction_task(args):
    channel, kind, c1, c2, cls, u_size, w, cfg, task = args
    prob = _Problem(channel, cls, u_size)
    cm = kind == "cm"
    obj = lambda th: -support(prob.bounds(th), cm, c1, c2, w)
    val, x, stats = _multistart(obj, prob.codec.size, cfg, f"region-{kind}", task)
    return x, stats


def _map(fn, tasks, workers: int):
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


def optimize_region(channel: CompoundChannel, mode: str, c1: float = 0.0, c2: float = 0.0,
                    config: OptimizerConfig | None = None, extra_policies=(),
                    workers: int | None = None) -> RateRegion:
    """Sample the support function of the capacity region.

    Each direction gets an independent multi-start search.  Afterwards the
    best policies of all directions (plus ``extra_policies`` of a compatible
    class) are pooled and every direction keeps the best pooled value, so
    the reported samples are consistent with every achieved point.
    """
    cfg = config or OptimizerConfig()
    kind = "cm" if mode == "cm" else "conf"
    cls = policy_class_for(mode, c1, c2)
    u_size = cfg.u_size or default_u_size(channel)
    if kind == "cm":
        dirs = octant_directions(cfg.directions or 256)
    else:
        dirs = quarter_circle(cfg.directions or 128)
    tasks = [(channel, kind, float(c1), float(c2), cls, u_size, w, cfg, k) for k, w in enumerate(dirs)]
    results = _map(_direction_task, tasks, workers or worker_count())

    codec = PolicyCodec(channel, cls, u_size)
    policies = [codec.decode(x) for x, _ in results]
    for p in extra_policies:
        if p.cls == cls and p.u_size == u_size:
            policies.append(p)
    ev = BoundEvaluator(channel)
    raws = [ev.min_bounds(p) for p in policies]
    polys = [RatePolytope(kind, tuple(float(v) for v in r), float(c1), float(c2)) for r in raws]

    values = np.empty(len(dirs))
    points = np.empty((len(dirs), dirs.shape[1]))
    index = np.empty(len(dirs), dtype=int)
    improved = 0
    for k, w in enumerate(dirs):
        cand = [poly.maximizer(w) for poly in polys]
        vals = np.array([v for v, _ in cand])
        j = int(np.argmax(vals))               # first maximizer wins ties
        if j != k:
            improved += 1
        values[k], points[k], index[k] = vals[j], cand[j][1], j
    used = sorted(set(index.tolist()))
    remap = {j: i for i, j in enumerate(used)}
    meta = {
        "channel": channel.fingerprint(), "mode": mode, "policy_class": cls,
        "config": asdict(cfg) | {"u_size": u_size, "directions": len(dirs)},
        "pooled_improvements": improved,
        "restart_stats": [s for _, s in results],
    }
    return RateRegion(kind, float(c1), float(c2), dirs, values, points,
                      [policies[j] for j in used], np.array([remap[j] for j in index]), meta)


# --- scalar problems ----------------------------------------------------------

@dataclass
class ScalarResult:
    value: float
    policy: InputPolicy
    stats: dict


def _maximize(channel, cls, cfg, purpose, score, starts=()) -> ScalarResult:
    u_size = cfg.u_size or default_u_size(channel)
    prob = _Problem(channel, cls, u_size)
    val, x, stats = _multistart(lambda th: -score(prob.bounds(th)), prob.codec.size, cfg, purpose, 0, starts)
    return ScalarResult(-val, prob.codec.decode(x), stats | {"theta": x.tolist()})


def sum_capacity_full_coop(channel: CompoundChannel, config: OptimizerConfig | None = None) -> ScalarResult:
    """Largest worst-state ``I(Z;XY)`` over policies with shared CSIT."""
    cfg = config or OptimizerConfig()
    return _maximize(channel, "pi2", cfg, "sumcap", lambda b: b[3])


def support_at(channel: CompoundChannel, c1: float, c2: float, direction,
               config: OptimizerConfig | None = None) -> tuple[ScalarResult, np.ndarray]:
    """Support value of the conferencing region in one direction, with a maximizing point."""
    cfg = config or OptimizerConfig()
    w = np.asarray(direction, dtype=float)
    cls = policy_class_for("conf", c1, c2)
    res = _maximize(channel, cls, cfg, "support",
                    lambda b: support(b, False, float(c1), float(c2), w))
    raw = tuple(float(v) for v in BoundEvaluator(channel).min_bounds(res.policy))
    _, point = RatePolytope("conf", raw, float(c1), float(c2)).maximizer(w)
    return res, point


@dataclass
class MinConfResult:
    value: float            # C_inf - common
    c_inf: float
    common: float           # best worst-state I(Z;XY|U) among (near) maximizers
    policy: InputPolicy
    slack: float            # C_inf minus the achieved worst-state I(Z;XY)
    stats: dict


def min_conf_sum(channel: CompoundChannel, config: OptimizerConfig | None = None) -> MinConfResult:
    """Smallest ``C1 + C2`` that reaches the full-cooperation sum capacity.

    Maximizes the worst-state ``I(Z;XY|U)`` over policies whose worst-state
    ``I(Z;XY)`` stays within ``membership_tol`` of ``C_inf``.  The
    constraint enters as a penalty whose weight grows tenfold per stage;
    each stage restarts from the best points of the previous one.
    """
    cfg = config or OptimizerConfig()
    full = sum_capacity_full_coop(channel, cfg)
    c_inf = full.value
    target = c_inf - cfg.membership_tol
    u_size = cfg.u_size or default_u_size(channel)
    prob = _Problem(channel, "pi2", u_size)

    best_theta = np.array(full.stats["theta"])
    best_common = float(prob.bounds(best_theta)[2])
    starts = [best_theta]
    stage_stats = []
    for stage in range(cfg.penalty_stages):
        weight = 10.0 ** stage

        def obj(th, weight=weight):
            b = prob.bounds(th)
            return -(b[2] - weight * max(0.0, target - b[3]))

        _, x, st = _multistart(obj, prob.codec.size, cfg, "common", stage, starts)
        b = prob.bounds(x)
        if b[3] >= target and b[2] > best_common:
            best_common, best_theta = float(b[2]), x
        stage_stats.append(st)
        starts = [x, best_theta]
    policy = prob.codec.decode(best_theta)
    achieved = float(prob.bounds(best_theta)[3])
    return MinConfResult(max(c_inf - best_common, 0.0), c_inf, best_common, policy,
                         c_inf - achieved, {"sumcap": full.stats, "stages": stage_stats})


@dataclass
class ThresholdResult:
    t1: float
    t2: float
    c_inf: float
    max_a: float
    max_b: float
    policies: tuple[InputPolicy, InputPolicy]


def full_region_thresholds(channel: CompoundChannel, config: OptimizerConfig | None = None) -> ThresholdResult:
    """Sufficient conferencing capacities for the full-cooperation region."""
    cfg = config or OptimizerConfig()
    c_inf = sum_capacity_full_coop(channel, cfg).value
    ra = _maximize(channel, "pi2", cfg, "thr-a", lambda b: b[0])
    rb = _maximize(channel, "pi2", cfg, "thr-b", lambda b: b[1])
    return ThresholdResult(max(c_inf - ra.value, 0.0), max(c_inf - rb.value, 0.0),
                           c_inf, ra.value, rb.value, (ra.policy, rb.policy))
