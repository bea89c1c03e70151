"""Rate polytopes of input policies and their support functions.

For a policy ``p`` the common-message (CM) polytope is

    R1 <= a,  R2 <= b,  R1 + R2 <= c,  R0 + R1 + R2 <= d

and the conferencing (CONF) polytope is

    R1 <= a + C1,  R2 <= b + C2,  R1 + R2 <= min(c + C1 + C2, d)

where ``a = I(Z;X|Y,U)``, ``b = I(Z;Y|X,U)``, ``c = I(Z;XY|U)`` and
``d = I(Z;XY)``, each minimized over every state of the compound channel
(evaluated with the kernels selected by the state's CSIT cell).  All
constraint normals are shared across states, so intersecting the
per-state polytopes amounts to taking entrywise minima of the bounds.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import CompoundChannel
from .errors import ConfigurationError, DomainError
from .probability import ZERO_MASS, as_distribution, as_kernel

CLASSES = ("pi1", "pi2", "pi3", "pi4")

# which index set each class uses for the kernels of transmitter 1 / 2:
# "t1" = first CSIT label only, "t2" = second only, "cell" = joint cell
_INDEXING = {
    "pi1": ("t1", "t2"),
    "pi2": ("cell", "cell"),
    "pi3": ("t1", "cell"),
    "pi4": ("cell", "t2"),
}


def default_u_size(channel: CompoundChannel) -> int:
    """Cardinality bound ``min(|X||Y| + 2, |Z| + 3)`` for the time-sharing variable."""
    x, y, z = channel.sizes
    return min(x * y + 2, z + 3)


def policy_class_for(mode: str, c1: float = 0.0, c2: float = 0.0) -> str:
    """Policy class matching a mode and pair of conferencing capacities.

    Both capacities zero gives ``pi1`` (the intersection of ``pi3`` and
    ``pi4``): without conferencing each transmitter only sees its own CSIT.
    """
    if mode == "cm":
        return "pi1"
    if mode != "conf":
        raise ConfigurationError(f"unknown mode {mode!r}")
    if c1 < 0 or c2 < 0:
        raise DomainError("conferencing capacities must be nonnegative")
    if c1 > 0 and c2 > 0:
        return "pi2"
    if c1 > 0:
        return "pi3"
    if c2 > 0:
        return "pi4"
    return "pi1"


# classes contained in each class
_SUBCLASSES = {
    "pi1": ("pi1",),
    "pi2": ("pi1", "pi2", "pi3", "pi4"),
    "pi3": ("pi1", "pi3"),
    "pi4": ("pi1", "pi4"),
}


def _index_count(channel: CompoundChannel, kind: str) -> int:
    return {"t1": len(channel.T1), "t2": len(channel.T2),
            "cell": len(channel.T1) * len(channel.T2)}[kind]


def _state_index(channel: CompoundChannel, kind: str) -> np.ndarray:
    return {"t1": channel.t1_index, "t2": channel.t2_index, "cell": channel.cell_index}[kind]()


@dataclass(frozen=True)
class InputPolicy:
    """Time-sharing law ``p0`` plus CSIT-indexed input kernels.

    ``kernels1`` has shape ``(K1, U, X)`` and ``kernels2`` shape
    ``(K2, U, Y)``; the leading index runs over first-transmitter labels,
    second-transmitter labels or joint cells depending on ``cls``.
    """

    cls: str
    p0: np.ndarray
    kernels1: np.ndarray
    kernels2: np.ndarray

    def __post_init__(self):
        if self.cls not in CLASSES:
            raise ConfigurationError(f"unknown policy class {self.cls!r}")
        p0 = as_distribution(self.p0, tol=1e-9)
        k1 = np.asarray(self.kernels1, dtype=float)
        k2 = np.asarray(self.kernels2, dtype=float)
        if k1.ndim != 3 or k2.ndim != 3 or k1.shape[1] != p0.size or k2.shape[1] != p0.size:
            raise ConfigurationError("kernel arrays must have shape (cells, |U|, alphabet)")
        for k in (k1, k2):
            as_kernel(k.reshape(-1, k.shape[2]), tol=1e-9)
        object.__setattr__(self, "p0", p0)
        object.__setattr__(self, "kernels1", k1)
        object.__setattr__(self, "kernels2", k2)

    @property
    def u_size(self) -> int:
        return self.p0.size

    def check(self, channel: CompoundChannel) -> None:
        i1, i2 = _INDEXING[self.cls]
        x, y, _ = channel.sizes
        want1 = (_index_count(channel, i1), self.u_size, x)
        want2 = (_index_count(channel, i2), self.u_size, y)
        if self.kernels1.shape != want1 or self.kernels2.shape != want2:
            raise ConfigurationError(
                f"{self.cls} policy shapes {self.kernels1.shape}/{self.kernels2.shape} "
                f"do not fit channel (expected {want1}/{want2})")

    def per_state(self, channel: CompoundChannel) -> tuple[np.ndarray, np.ndarray]:
        """Kernels in force for each state, shapes ``(S, U, X)`` and ``(S, U, Y)``."""
        self.check(channel)
        i1, i2 = _INDEXING[self.cls]
        return self.kernels1[_state_index(channel, i1)], self.kernels2[_state_index(channel, i2)]

    def to_dict(self) -> dict:
        return {"class": self.cls, "p0": self.p0.tolist(),
                "kernels1": self.kernels1.tolist(), "kernels2": self.kernels2.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "InputPolicy":
        return cls(d["class"], np.array(d["p0"]), np.array(d["kernels1"]), np.array(d["kernels2"]))


def uniform_policy(cls: str, channel: CompoundChannel, u_size: int = 1) -> InputPolicy:
    x, y, _ = channel.sizes
    i1, i2 = _INDEXING[cls]
    return InputPolicy(cls, np.full(u_size, 1 / u_size),
                       np.full((_index_count(channel, i1), u_size, x), 1 / x),
                       np.full((_index_count(channel, i2), u_size, y), 1 / y))


def lift_policy(policy: InputPolicy, cls: str, channel: CompoundChannel) -> InputPolicy:
    """Re-express a policy in a larger class (e.g. ``pi1`` inside ``pi2``)."""
    src1, src2 = _INDEXING[policy.cls]
    dst1, dst2 = _INDEXING[cls]
    policy.check(channel)

    def convert(k, src, dst):
        if src == dst:
            return k
        if dst != "cell":
            raise ConfigurationError(f"cannot lift a {policy.cls} policy into {cls}")
        n2 = len(channel.T2)
        cells = np.arange(len(channel.T1) * n2)
        return k[cells // n2] if src == "t1" else k[cells % n2]

    return InputPolicy(cls, policy.p0, convert(policy.kernels1, src1, dst1),
                       convert(policy.kernels2, src2, dst2))


# --- information bounds --------------------------------------------------------

def _plogp(p: np.ndarray) -> np.ndarray:
    safe = np.where(p > ZERO_MASS, p, 1.0)
    return np.where(p > ZERO_MASS, -p * np.log2(safe), 0.0)


class BoundEvaluator:
    """Vectorized ``(a, b, c, d)`` for every state of a fixed channel."""

    def __init__(self, channel: CompoundChannel):
        self.channel = channel
        self.w = channel.stack                                    # (S, X, Y, Z)
        self.row_entropy = _plogp(self.w).sum(axis=3)             # (S, X, Y)

    def state_bounds_arrays(self, p0, k1, k2) -> np.ndarray:
        """Bounds per state for kernels already expanded to shape ``(S, U, .)``."""
        w = self.w
        pxy = p0[None, :, None, None] * k1[:, :, :, None] * k2[:, :, None, :]     # (S,U,X,Y)
        h_xyu = np.einsum("suxy,sxy->s", pxy, self.row_entropy)
        z_xu = np.einsum("suy,sxyz->suxz", k2, w)
        z_yu = np.einsum("sux,sxyz->suyz", k1, w)
        z_u = np.einsum("sux,suxz->suz", k1, z_xu)
        z = np.einsum("u,suz->sz", p0, z_u)
        h_xu = np.einsum("u,sux,sux->s", p0, k1, _plogp(z_xu).sum(axis=3))
        h_yu = np.einsum("u,suy,suy->s", p0, k2, _plogp(z_yu).sum(axis=3))
        h_u = np.einsum("u,su->s", p0, _plogp(z_u).sum(axis=2))
        h_z = _plogp(z).sum(axis=1)
        out = np.stack([h_yu - h_xyu, h_xu - h_xyu, h_u - h_xyu, h_z - h_xyu], axis=1)
        return np.maximum(out, 0.0)

    def state_bounds(self, policy: InputPolicy) -> np.ndarray:
        k1, k2 = policy.per_state(self.channel)
        return self.state_bounds_arrays(policy.p0, k1, k2)

    def min_bounds(self, policy: InputPolicy) -> np.ndarray:
        return self.state_bounds(policy).min(axis=0)


def state_bounds(policy: InputPolicy, channel: CompoundChannel) -> np.ndarray:
    """``(S, 4)`` array of ``(a, b, c, d)`` for every state."""
    return BoundEvaluator(channel).state_bounds(policy)


# --- polytopes -----------------------------------------------------------------

def pentagon_vertices(a: float, b: float, s: float) -> np.ndarray:
    """Vertices of ``{R >= 0 : R1 <= a, R2 <= b, R1 + R2 <= s}``."""
    a, b = min(a, s), min(b, s)
    return np.array([[0.0, 0.0], [a, 0.0], [a, min(b, s - a)], [min(a, s - b), b], [0.0, b]])


@dataclass(frozen=True)
class RatePolytope:
    """Half-space description of one policy's achievable rates.

    ``kind`` is ``"cm"`` (coordinates ``R0, R1, R2``) or ``"conf"``
    (coordinates ``R1, R2``).  ``raw`` keeps the four information bounds;
    ``bounds`` holds the right-hand sides actually in force.
    """

    kind: str
    raw: tuple[float, float, float, float]
    c1: float = 0.0
    c2: float = 0.0

    @property
    def dimension(self) -> int:
        return 3 if self.kind == "cm" else 2

    @property
    def bounds(self) -> dict[str, float]:
        a, b, c, d = self.raw
        if self.kind == "cm":
            return {"a": a, "b": b, "c": c, "d": d}
        return {"r1": a + self.c1, "r2": b + self.c2, "sum": min(c + self.c1 + self.c2, d)}

    def halfspaces(self) -> tuple[np.ndarray, np.ndarray]:
        """``(A, h)`` with the polytope equal to ``{R : A R <= h}``."""
        bd = self.bounds
        if self.kind == "cm":
            A = np.array([[0, 1, 0], [0, 0, 1], [0, 1, 1], [1, 1, 1],
                          [-1, 0, 0], [0, -1, 0], [0, 0, -1]], dtype=float)
            h = np.array([bd["a"], bd["b"], bd["c"], bd["d"], 0, 0, 0], dtype=float)
        else:
            A = np.array([[1, 0], [0, 1], [1, 1], [-1, 0], [0, -1]], dtype=float)
            h = np.array([bd["r1"], bd["r2"], bd["sum"], 0, 0], dtype=float)
        return A, h

    def vertices(self) -> np.ndarray:
        a, b, c, d = self.raw
        if self.kind == "conf":
            bd = self.bounds
            return pentagon_vertices(bd["r1"], bd["r2"], bd["sum"])
        pent = pentagon_vertices(a, b, min(c, d))
        base = np.column_stack([np.zeros(len(pent)), pent])
        top = np.column_stack([d - pent.sum(axis=1), pent])
        return np.unique(np.vstack([base, top]), axis=0)

    def contains(self, point, tol: float = 1e-9) -> bool:
        A, h = self.halfspaces()
        return bool(np.all(A @ np.asarray(point, dtype=float) <= h + tol))

    def maximizer(self, direction) -> tuple[float, np.ndarray]:
        """Support value and a maximizing vertex in a nonnegative direction."""
        w = np.asarray(direction, dtype=float)
        if w.shape != (self.dimension,):
            raise ConfigurationError(f"direction must have {self.dimension} entries")
        if np.any(w < 0) or not np.any(w > 0):
            raise DomainError("direction must be nonnegative and nonzero")
        a, b, c, d = self.raw
        if self.kind == "conf":
            v = self.vertices()
            k = int(np.argmax(v @ w))
            return float(v[k] @ w), v[k]
        # every unit of R0 costs a unit of the R1 + R2 budget below d
        pent = pentagon_vertices(a, b, min(c, d))
        rel = np.maximum(w[1:] - w[0], 0.0)
        k = int(np.argmax(pent @ rel))
        r1, r2 = pent[k] * (rel > 0)
        r0 = d - r1 - r2 if w[0] > 0 else 0.0
        point = np.array([r0, r1, r2])
        return float(point @ w), point


def _bounds_from(policy_or_raw, channel) -> tuple[float, ...]:
    if isinstance(policy_or_raw, InputPolicy):
        if channel is None:
            raise ConfigurationError("a channel is needed to evaluate a policy")
        return tuple(float(v) for v in BoundEvaluator(channel).min_bounds(policy_or_raw))
    return tuple(float(v) for v in policy_or_raw)


def polytope_cm(policy: InputPolicy, channel: CompoundChannel) -> RatePolytope:
    if policy.cls != "pi1":
        raise ConfigurationError("common-message polytopes are defined for pi1 policies")
    return RatePolytope("cm", _bounds_from(policy, channel))


def polytope_conf(policy: InputPolicy, channel: CompoundChannel, c1: float, c2: float) -> RatePolytope:
    want = policy_class_for("conf", c1, c2)
    if policy.cls not in _SUBCLASSES[want]:
        raise ConfigurationError(
            f"capacities ({c1}, {c2}) call for a {want} policy, got {policy.cls}")
    return RatePolytope("conf", _bounds_from(policy, channel), float(c1), float(c2))


def support_value(poly: RatePolytope, direction) -> float:
    return poly.maximizer(direction)[0]


# --- direction sets --------------------------------------------------------------

def quarter_circle(count: int = 128) -> np.ndarray:
    """Evenly spaced unit directions from (1, 0) to (0, 1) inclusive."""
    if count < 2:
        raise DomainError("need at least two directions")
    t = np.arange(count) * (np.pi / 2) / (count - 1)
    d = np.column_stack([np.cos(t), np.sin(t)])
    d[np.abs(d) < 1e-15] = 0.0
    return d


def octant_directions(count: int = 256) -> np.ndarray:
    """Low-discrepancy unit directions on the nonnegative octant of the sphere.

    A Halton sequence is mapped by the area-preserving cylinder projection,
    so the directions are evenly spread over the octant surface.
    """
    from scipy.stats import qmc

    h = qmc.Halton(d=2, scramble=False).random(count)
    z, phi = h[:, 0], h[:, 1] * np.pi / 2
    r = np.sqrt(1 - z * z)
    d = np.column_stack([z, r * np.cos(phi), r * np.sin(phi)])
    d[np.abs(d) < 1e-15] = 0.0
    return d / np.linalg.norm(d, axis=1, keepdims=True)


# --- regions ------------------------------------------------------------------------

@dataclass
class RateRegion:
    """Sampled support function plus the inner points that certify it."""

    kind: str
    c1: float
    c2: float
    directions: np.ndarray
    values: np.ndarray
    points: np.ndarray
    policies: list[InputPolicy]
    policy_index: np.ndarray
    metadata: dict = field(default_factory=dict)

    @property
    def dimension(self) -> int:
        return self.directions.shape[1]

    def inner_violation(self) -> float:
        """Largest excess of an achieved point over any sampled support half-space."""
        proj = self.points @ self.directions.T          # (points, directions)
        return float(np.max(proj - self.values[None, :]))

    def corner_points(self) -> dict[str, float]:
        """Axis intercepts and the best sum rate, read off the samples."""
        out = {}
        for i in range(self.dimension):
            e = np.zeros(self.dimension)
            e[i] = 1.0
            hit = np.flatnonzero(np.all(np.isclose(self.directions, e), axis=1))
            name = (("R0", "R1", "R2") if self.kind == "cm" else ("R1", "R2"))[i]
            out[f"max_{name}"] = float(self.values[hit[0]]) if hit.size else float(self.points[:, i].max())
        out["max_sum"] = float(self.points[:, -2:].sum(axis=1).max())
        return out


def hausdorff(r1: RateRegion, r2: RateRegion) -> float:
    """Hausdorff distance estimated from support samples on a shared direction set.

    For convex bodies this is ``max |h1(u) - h2(u)|`` over unit directions ``u``.
    """
    if r1.directions.shape != r2.directions.shape or not np.allclose(r1.directions, r2.directions):
        raise ConfigurationError("regions were sampled on different direction sets")
    return float(np.max(np.abs(r1.values - r2.values)))
