"""One-shot Willems conferencing built on top of a common-message code.

Messages are 1-based throughout, as are coarse indices ``i``.  A message
``l`` in ``[1, M]`` is written as ``l = (i - 1) * xi + l'`` with a coarse
part ``i`` in ``[1, mu]`` that is sent over the conference link together
with the sender's CSIT label, and a fine part ``l'`` that stays private.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BlocklengthTooSmall, ConfigurationError, DomainError, InfeasiblePlan
from .probability import entropy

# relative slack when comparing log-sizes against capacities
_LOG_TOL = 1e-12


def split_message(l: int, mu: int, xi: int, M: int | None = None) -> tuple[int, int]:
    """Unique ``(i, l')`` with ``l = (i - 1) * xi + l'``.

    For ``mu == 1`` the coarse part is always 1 and ``l' = l`` (``xi`` is 0
    in that case and ignored).
    """
    if l < 1 or (M is not None and l > M):
        raise DomainError(f"message {l} outside [1, {M if M is not None else 'M'}]")
    if mu < 1:
        raise DomainError("mu must be positive")
    if mu == 1:
        return 1, l
    if xi < 1:
        raise DomainError("xi must be positive when mu >= 2")
    i = min(-(-l // xi), mu)
    return i, l - (i - 1) * xi


def merge_message(i: int, lp: int, xi: int) -> int:
    return (i - 1) * xi + lp


def coarse_size(V: int, T: int, M: int) -> int:
    """``mu = min(floor(V / |T|), M)``."""
    return min(V // T, M)


def fine_size(M: int, mu: int) -> int:
    """``xi = floor((M - 1) / (mu - 1))`` for ``mu >= 2``, else 0."""
    return (M - 1) // (mu - 1) if mu >= 2 else 0


@dataclass(frozen=True)
class ConferencePlan:
    """Parameters of a one-shot conference plus the underlying CM code sizes."""

    n: int
    M1: int
    M2: int
    V1: int
    V2: int
    mu1: int
    mu2: int
    xi1: int
    xi2: int
    M0_cm: int
    M1_cm: int
    M2_cm: int
    case: str
    T1: int = 1
    T2: int = 1
    C1: float = 0.0
    C2: float = 0.0

    # -- conferencing functions --------------------------------------------------

    def _side(self, nu: int):
        if nu == 1:
            return self.M1, self.mu1, self.xi1, self.T1
        if nu == 2:
            return self.M2, self.mu2, self.xi2, self.T2
        raise ConfigurationError("transmitter index must be 1 or 2")

    def split(self, nu: int, l: int) -> tuple[int, int]:
        M, mu, xi, _ = self._side(nu)
        return split_message(l, mu, xi, M)

    def conference_value(self, nu: int, l: int, tau: int) -> tuple[int, int]:
        """Conference output ``g_nu(l, tau) = (i, tau)``; ``tau`` is a 0-based label index.

        A transmitter without conferencing capacity sends nothing, which is
        represented by the constant output ``(1, -1)``.
        """
        M, mu, xi, T = self._side(nu)
        if not 0 <= tau < T:
            raise DomainError(f"CSIT index {tau} outside [0, {T})")
        i, _ = split_message(l, mu, xi, M)
        if (self.C1 if nu == 1 else self.C2) == 0:
            return 1, -1
        return i, tau

    def cm_index(self, j: int, k: int) -> tuple[int, int, int]:
        """Message triple ``(i, j', k')`` of the common-message code carrying ``(j, k)``.

        The coarse pair ``(i1, i2)`` is flattened to ``i = (i1 - 1) * mu2 + i2``.
        """
        i1, jp = self.split(1, j)
        i2, kp = self.split(2, k)
        return (i1 - 1) * self.mu2 + i2, jp, kp

    def output_alphabet(self, nu: int) -> int:
        _, mu, _, T = self._side(nu)
        return 1 if (self.C1 if nu == 1 else self.C2) == 0 else mu * T

    # -- audits ------------------------------------------------------------------

    def checks(self) -> dict[str, bool]:
        """Every defining relation of the plan, evaluated exactly."""
        n = self.n
        out = {}
        for nu, (V, T, C, mu, M, xi, Mcm) in enumerate(
                [(self.V1, self.T1, self.C1, self.mu1, self.M1, self.xi1, self.M1_cm),
                 (self.V2, self.T2, self.C2, self.mu2, self.M2, self.xi2, self.M2_cm)], start=1):
            if C > 0:
                out[f"conf_size_{nu}"] = T <= V and math.log2(V) <= n * C + _LOG_TOL
                out[f"conf_card_{nu}"] = math.log2(mu * T) <= n * C + _LOG_TOL
                out[f"mu_{nu}"] = mu == coarse_size(V, T, M)
            else:
                out[f"conf_size_{nu}"] = V == 1
                out[f"conf_card_{nu}"] = True
                out[f"mu_{nu}"] = mu == 1
            out[f"xi_{nu}"] = xi == fine_size(M, mu)
            # the fine part must fit the common-message code
            fine = M if mu == 1 else xi
            out[f"fine_{nu}"] = fine == Mcm and M - (mu - 1) * xi <= Mcm
        p = self.mu1 * self.mu2
        out["coarse_fits"] = 2 * self.T1 * self.T2 * p >= self.M0_cm and p <= self.M0_cm
        out["rate_accounting"] = (
            math.log2(self.M1 * self.M2)
            >= math.log2(self.M0_cm * self.M1_cm * self.M2_cm) - math.log2(2 * self.T1 * self.T2) - _LOG_TOL)
        return out

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _case(R1, R2, C1, C2) -> str:
    if R1 <= C1 and R2 <= C2:
        return "1"
    if R1 > C1 and R2 > C2:
        return "2"
    return "3a" if R1 > C1 else "3b"


def _message_count(V: int, T: int, C: float, Mcm: int, full: bool) -> tuple[int, int, int]:
    """``(M, mu, xi)`` for one transmitter.

    ``full`` means the whole message fits the conference (``R <= C``):
    ``M = V / |T|`` and every message is announced.  Otherwise the coarse
    part has ``V / |T|`` values and ``M`` is the largest message count with
    ``floor((M - 1) / (mu - 1)) = Mcm`` whose last block still fits in ``Mcm``.
    """
    if C == 0:
        return Mcm, 1, 0
    mu = V // T
    if full:
        return mu, mu, fine_size(mu, mu)
    if mu == 1:
        return Mcm, 1, 0
    M = (mu - 1) * Mcm + min(Mcm, mu - 1)
    return M, coarse_size(V, T, M), fine_size(M, mu)


def _pow2_floor(e: float) -> int:
    """``floor(2^e)`` with a small slack; beyond float range a power-of-two lower bound."""
    if e < 1000:
        return int(math.floor(2.0 ** e + 1e-9))
    return 1 << int(e)


def _plan_at(n, R1, R2, C1, C2, T1, T2, sizes):
    rt1, rt2 = min(R1, C1), min(R2, C2)
    if sizes is None:
        M0 = _pow2_floor(n * (rt1 + rt2))
        M1c = _pow2_floor(n * (R1 - rt1))
        M2c = _pow2_floor(n * (R2 - rt2))
    else:
        M0, M1c, M2c = sizes
    V1 = T1 * (_pow2_floor(n * rt1) // T1) if C1 > 0 else 1
    V2 = T2 * (_pow2_floor(math.log2(M0) - n * rt1) // T2) if C2 > 0 else 1
    return M0, M1c, M2c, V1, V2


def build_plan(n: int, R1: float, R2: float, C1: float, C2: float, T1: int = 1, T2: int = 1,
               cm_sizes: tuple[int, int, int] | None = None) -> ConferencePlan:
    """Conference parameters for target rates at blocklength ``n``.

    The conference carries ``min(R_nu, C_nu)`` of each rate as a common
    message of the underlying CM code (``M0``), the rest travels as private
    messages (``M1_cm``, ``M2_cm``).  Unless ``cm_sizes`` is given these
    sizes are ``floor(2^{n R})`` of the corresponding rates.

    Raises
    ------
    BlocklengthTooSmall
        If no admissible conference alphabet exists at ``n``; the error
        carries the smallest ``n`` (up to 4096) at which one does.
    InfeasiblePlan
        If the finished plan violates one of its defining relations.
    """
    if n < 1:
        raise DomainError("blocklength must be positive")
    if min(R1, R2, C1, C2) < 0:
        raise DomainError("rates and capacities must be nonnegative")
    if T1 < 1 or T2 < 1:
        raise DomainError("CSIT partitions need at least one cell")

    def admissible(m):
        _, _, _, V1, V2 = _plan_at(m, R1, R2, C1, C2, T1, T2, cm_sizes)
        return (C1 == 0 or V1 >= T1) and (C2 == 0 or V2 >= T2)

    if not admissible(n):
        minimal = next((m for m in range(n + 1, 4097) if admissible(m)), None)
        raise BlocklengthTooSmall(
            f"no conference alphabet with |T_nu| <= V_nu <= 2^(n C_nu) exists at n={n}"
            + (f"; smallest feasible n is {minimal}" if minimal else ""), minimal_n=minimal)

    M0, M1c, M2c, V1, V2 = _plan_at(n, R1, R2, C1, C2, T1, T2, cm_sizes)
    case = _case(R1, R2, C1, C2)
    M1, mu1, xi1 = _message_count(V1, T1, C1, M1c, full=R1 <= C1)
    M2, mu2, xi2 = _message_count(V2, T2, C2, M2c, full=R2 <= C2)
    plan = ConferencePlan(n, M1, M2, V1, V2, mu1, mu2, xi1, xi2, M0, M1c, M2c, case,
                          T1, T2, float(C1), float(C2))
    failed = [k for k, ok in plan.checks().items() if not ok]
    if failed:
        raise InfeasiblePlan(f"plan at n={n} violates: {', '.join(failed)}")
    return plan


# --- conferencing MACs --------------------------------------------------------

@dataclass(frozen=True)
class ConferencingMac:
    """Noiseless MAC ``g(j, k, tau1, tau2)`` stored as a table of symbol ids.

    ``table[j-1, k-1, tau1, tau2]`` is the output symbol for message pair
    ``(j, k)`` and CSIT indices ``(tau1, tau2)``.
    """

    table: np.ndarray
    n: int = 1

    def slice_sizes(self) -> tuple[int, int]:
        """Largest number of outputs seen with ``(j, tau1)`` fixed, resp. ``(k, tau2)`` fixed."""
        t = self.table
        by_1 = max(len(np.unique(t[j, :, a, :])) for j in range(t.shape[0]) for a in range(t.shape[2]))
        by_2 = max(len(np.unique(t[:, k, :, b])) for k in range(t.shape[1]) for b in range(t.shape[3]))
        return by_1, by_2

    def admissible(self, C1: float, C2: float) -> bool:
        s1, s2 = self.slice_sizes()
        return (math.log2(s1) <= self.n * C2 + _LOG_TOL) and (math.log2(s2) <= self.n * C1 + _LOG_TOL)

    def output_entropy(self, pj=None, pk=None) -> float:
        """``H(g(J, K))`` for independent ``J`` on ``[1,M1] x T1`` and ``K`` on ``[1,M2] x T2``.

        Both default to uniform.
        """
        m1, m2, t1, t2 = self.table.shape
        pj = np.full((m1, t1), 1 / (m1 * t1)) if pj is None else np.asarray(pj, dtype=float)
        pk = np.full((m2, t2), 1 / (m2 * t2)) if pk is None else np.asarray(pk, dtype=float)
        joint = pj[:, None, :, None] * pk[None, :, None, :]
        mass = np.bincount(self.table.ravel(), weights=joint.ravel())
        return entropy(mass)


def conferencing_mac(plan: ConferencePlan) -> ConferencingMac:
    """Table of the pair ``(g1(j, tau1), g2(k, tau2))`` for every input."""
    g1 = np.array([[_symbol(plan.conference_value(1, j, a), plan.T1) for a in range(plan.T1)]
                   for j in range(1, plan.M1 + 1)])
    g2 = np.array([[_symbol(plan.conference_value(2, k, b), plan.T2) for b in range(plan.T2)]
                   for k in range(1, plan.M2 + 1)])
    width = int(g2.max()) + 1
    table = g1[:, None, :, None] * width + g2[None, :, None, :]
    return ConferencingMac(table, plan.n)


def _symbol(value: tuple[int, int], T: int) -> int:
    i, tau = value
    return (i - 1) * (T + 1) + tau + 1


def willems_iterate(h1, h2, l1: int, l2: int, tau1: int, tau2: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Run an ``I``-round Willems conference.

    ``h1[i]`` is an integer array indexed ``(l1, tau1, v2_1, ..., v2_i)``
    (all 0-based): round ``i`` of transmitter 1 sees its own message and
    CSIT plus transmitter 2's outputs from rounds ``1..i``-1.  ``h2`` is the
    mirror image.  Returns both output sequences ``(g1, g2)``.
    """
    if len(h1) != len(h2) or not h1:
        raise ConfigurationError("both transmitters need the same positive number of rounds")
    rounds = len(h1)
    h1 = [np.asarray(h, dtype=np.int64) for h in h1]
    h2 = [np.asarray(h, dtype=np.int64) for h in h2]
    for i in range(rounds):
        if h1[i].ndim != 2 + i or h2[i].ndim != 2 + i:
            raise ConfigurationError(f"round {i + 1} tables must have {2 + i} axes")
        if i >= 1:
            # the axes fed by the other side must match that side's alphabets
            for r in range(i):
                if h1[i].shape[2 + r] <= h2[r].max() or h2[i].shape[2 + r] <= h1[r].max():
                    raise ConfigurationError(f"round {i + 1} table too small for round {r + 1} outputs")
    g1, g2 = [], []
    for i in range(rounds):
        v1 = int(h1[i][(l1, tau1, *g2)])
        v2 = int(h2[i][(l2, tau2, *g1)])
        g1.append(v1)
        g2.append(v2)
    return tuple(g1), tuple(g2)


def willems_mac(h1, h2, n: int = 1) -> ConferencingMac:
    """Conferencing MAC induced by a pair of Willems conferencing functions."""
    m1, t1 = np.shape(h1[0])
    m2, t2 = np.shape(h2[0])
    outs: dict[tuple, int] = {}
    table = np.empty((m1, m2, t1, t2), dtype=np.int64)
    for j in range(m1):
        for k in range(m2):
            for a in range(t1):
                for b in range(t2):
                    key = willems_iterate(h1, h2, j, k, a, b)
                    table[j, k, a, b] = outs.setdefault(key, len(outs))
    return ConferencingMac(table, n)
