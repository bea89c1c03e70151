"""Random half-lattice codebooks, the joint-typicality decoder and Monte Carlo error estimates.

Indices are 0-based inside arrays; the message-level API (``cm_index``,
conference plans) is 1-based.  Symbol words are ``uint8`` arrays.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import CompoundChannel
from .conferencing import ConferencePlan
from .errors import ConfigurationError, DomainError
from .regions import _INDEXING, InputPolicy, _index_count

DEFAULT_DELTA = 0.05

# seed-sequence tags
_TAG_U, _TAG_X, _TAG_Y, _TAG_TRIAL = 11, 12, 13, 14


def _draw(rng: np.random.Generator, kernel: np.ndarray, cond: np.ndarray, shape) -> np.ndarray:
    """Inverse-CDF sampling of symbols with law ``kernel[cond]`` (broadcast to ``shape``)."""
    cdf = np.cumsum(kernel, axis=-1)
    r = rng.random(shape)
    out = np.zeros(shape, dtype=np.uint8)
    for a in range(kernel.shape[-1] - 1):
        out += r >= cdf[cond, a]
    return out


@dataclass(frozen=True)
class Codebook:
    """Codewords ``u[i]``, ``x[g1, i, j]`` and ``y[g2, i, k]`` of a half-lattice code.

    ``g1`` (``g2``) indexes the kernel group of transmitter 1 (2) selected
    by the CSIT cell, as fixed by the generating policy's class.
    """

    policy: InputPolicy
    n: int
    u: np.ndarray      # (M0, n)
    x: np.ndarray      # (K1, M0, M1, n)
    y: np.ndarray      # (K2, M0, M2, n)
    seed: int

    @property
    def sizes(self) -> tuple[int, int, int]:
        return self.u.shape[0], self.x.shape[2], self.y.shape[2]

    def groups(self, channel: CompoundChannel, t1: int, t2: int) -> tuple[int, int]:
        """Kernel groups used in the joint cell ``(t1, t2)`` (0-based label indices)."""
        i1, i2 = _INDEXING[self.policy.cls]
        n2 = len(channel.T2)
        pick = {"t1": t1, "t2": t2, "cell": t1 * n2 + t2}
        return pick[i1], pick[i2]


def sample_codebook(policy: InputPolicy, n: int, M0: int, M1: int, M2: int, seed: int) -> Codebook:
    """Draw ``U_i ~ p0^n`` and, given ``U_i``, ``X_ij ~ p1^n`` and ``Y_ik ~ p2^n`` independently.

    Each array comes from its own seed-derived stream, so the codebook is a
    deterministic function of ``(policy, sizes, seed)``.
    """
    if min(n, M0, M1, M2) < 1:
        raise DomainError("codebook sizes and blocklength must be positive")
    ss = lambda *tag: np.random.default_rng(np.random.SeedSequence([seed, *tag]))
    u = _draw(ss(_TAG_U), policy.p0[None], np.zeros((M0, n), dtype=np.int64), (M0, n))
    cond = u.astype(np.int64)[:, None, :]
    k1, k2 = policy.kernels1, policy.kernels2
    x = np.stack([_draw(ss(_TAG_X, g), k1[g], cond, (M0, M1, n)) for g in range(k1.shape[0])])
    y = np.stack([_draw(ss(_TAG_Y, g), k2[g], cond, (M0, M2, n)) for g in range(k2.shape[0])])
    return Codebook(policy, n, u, x, y, seed)


@dataclass(frozen=True)
class DecoderConfig:
    delta: float = DEFAULT_DELTA


class TypicalityDecoder:
    """Brute-force joint-typicality decoder without receiver CSI.

    A triple ``(i, j, k)`` is a candidate when, for some joint CSIT cell and
    some state in that cell, ``(u_i, x_ij, y_ik, z)`` is ``delta``-typical for
    the state's joint law ``p0 p1 p2 W``.  The decoder answers iff exactly
    one candidate exists.
    """

    def __init__(self, codebook: Codebook, channel: CompoundChannel, cfg: DecoderConfig | None = None):
        self.cb = codebook
        self.channel = channel
        self.delta = (cfg or DecoderConfig()).delta
        pol = codebook.policy
        pol.check(channel)
        us, xs, ys, zs = pol.u_size, *channel.sizes
        self.zs = zs
        self.A = us * xs * ys * zs
        m0, m1, m2 = codebook.sizes
        # one entry per (cell, state in cell): index words without z and joint law
        self.tests = []
        k1s, k2s = pol.per_state(channel)
        for s in range(len(channel.states)):
            t1 = channel.T1.index(channel.t1_labels[s])
            t2 = channel.T2.index(channel.t2_labels[s])
            g1, g2 = codebook.groups(channel, t1, t2)
            law = (pol.p0[:, None, None, None] * k1s[s][:, :, None, None] * k2s[s][:, None, :, None]
                   * channel.states[s].matrix[None]).ravel()
            self.tests.append(((g1, g2), law))
        self._base = {}
        dtype = np.int32 if m0 * m1 * m2 * self.A < 2 ** 31 else np.int64
        for key, _ in self.tests:
            if key not in self._base:
                g1, g2 = key
                u = codebook.u.astype(dtype)[:, None, None, :]
                x = codebook.x[g1].astype(dtype)[:, :, None, :]
                y = codebook.y[g2].astype(dtype)[:, None, :, :]
                base = (((u * xs + x) * ys + y) * zs).reshape(m0 * m1 * m2, codebook.n)
                # offset each triple into its own block of A bins
                base += (np.arange(base.shape[0], dtype=dtype) * self.A)[:, None]
                self._base[key] = base

    def candidates(self, z) -> np.ndarray:
        """Boolean mask over flattened triples ``(i, j, k)`` that pass the typicality test."""
        z = np.asarray(z, dtype=np.int32)
        if z.shape != (self.cb.n,):
            raise ConfigurationError(f"output word must have length {self.cb.n}")
        n, A = self.cb.n, self.A
        hit = None
        counts_by_key = {}
        for key, law in self.tests:
            if key not in counts_by_key:
                idx = self._base[key] + z[None, :]
                counts_by_key[key] = np.bincount(idx.ravel(), minlength=idx.shape[0] * A).reshape(-1, A)
            c = counts_by_key[key]
            ok = np.all((np.abs(c - n * law) <= n * self.delta + 1e-9) & ((law > 0) | (c == 0)), axis=1)
            hit = ok if hit is None else hit | ok
        return hit

    def decode(self, z) -> tuple[int, int, int] | None:
        """1-based ``(i, j, k)`` if exactly one triple is typical, else ``None``."""
        hit = np.flatnonzero(self.candidates(z))
        if hit.size != 1:
            return None
        m0, m1, m2 = self.cb.sizes
        i, rest = divmod(int(hit[0]), m1 * m2)
        j, k = divmod(rest, m2)
        return i + 1, j + 1, k + 1


def typicality_decode(codebook: Codebook, z, cfg: DecoderConfig, channel: CompoundChannel):
    return TypicalityDecoder(codebook, channel, cfg).decode(z)


# --- conference-derived codes ---------------------------------------------------

@dataclass(frozen=True)
class ConfCode:
    """Code for message pairs ``(j, k)`` obtained from a CM codebook through a plan."""

    codebook: Codebook
    plan: ConferencePlan

    def __post_init__(self):
        m0, m1, m2 = self.codebook.sizes
        p = self.plan
        if p.mu1 * p.mu2 > m0:
            raise ConfigurationError(f"coarse pairs ({p.mu1 * p.mu2}) exceed common messages ({m0})")
        f1 = p.M1 if p.mu1 == 1 else p.xi1
        f2 = p.M2 if p.mu2 == 1 else p.xi2
        if f1 != m1 or f2 != m2:
            raise ConfigurationError(f"fine message sizes ({f1}, {f2}) do not match codebook ({m1}, {m2})")

    def x_word(self, channel, j: int, k: int, t1: int, t2: int) -> np.ndarray:
        i, jp, _ = self.plan.cm_index(j, k)
        g1, _ = self.codebook.groups(channel, t1, t2)
        return self.codebook.x[g1, i - 1, jp - 1]

    def y_word(self, channel, j: int, k: int, t1: int, t2: int) -> np.ndarray:
        i, _, kp = self.plan.cm_index(j, k)
        _, g2 = self.codebook.groups(channel, t1, t2)
        return self.codebook.y[g2, i - 1, kp - 1]

    def x_key(self, channel, j, k, t1, t2) -> tuple[int, int, int]:
        """Identity of the CM codeword behind ``x_word`` (group, i, j')."""
        i, jp, _ = self.plan.cm_index(j, k)
        return self.codebook.groups(channel, t1, t2)[0], i, jp

    def y_key(self, channel, j, k, t1, t2) -> tuple[int, int, int]:
        i, _, kp = self.plan.cm_index(j, k)
        return self.codebook.groups(channel, t1, t2)[1], i, kp

    def message_of(self, triple) -> tuple[int, int] | None:
        """Invert ``cm_index``; ``None`` for CM messages that carry no pair ``(j, k)``."""
        if triple is None:
            return None
        i, jp, kp = triple
        p = self.plan
        if i > p.mu1 * p.mu2:
            return None
        i1, i2 = divmod(i - 1, p.mu2)
        j = jp if p.mu1 == 1 else i1 * p.xi1 + jp
        k = kp if p.mu2 == 1 else i2 * p.xi2 + kp
        if j > p.M1 or k > p.M2 or p.cm_index(j, k) != (i, jp, kp):
            return None
        return j, k


def derive_conf_code(codebook: Codebook, plan: ConferencePlan) -> ConfCode:
    return ConfCode(codebook, plan)


def consistency_violations(code: ConfCode, channel: CompoundChannel) -> int:
    """Count pairs of inputs with equal conference output but different codewords.

    Groups all ``(j, k, tau1, tau2)`` by what transmitter 1 knows, namely
    ``(j, tau1, g(j, k, tau1, tau2))``, and requires a single codeword per
    group; likewise for transmitter 2.
    """
    p = code.plan
    seen1: dict[tuple, tuple] = {}
    seen2: dict[tuple, tuple] = {}
    bad = 0
    for t1 in range(p.T1):
        for t2 in range(p.T2):
            for j in range(1, p.M1 + 1):
                g1 = p.conference_value(1, j, t1)
                for k in range(1, p.M2 + 1):
                    g = (g1, p.conference_value(2, k, t2))
                    kx = code.x_key(channel, j, k, t1, t2)
                    ky = code.y_key(channel, j, k, t1, t2)
                    bad += seen1.setdefault((j, t1, g), kx) != kx
                    bad += seen2.setdefault((k, t2, g), ky) != ky
    return bad


# --- Monte Carlo ------------------------------------------------------------------

def wilson_halfwidth(errors: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    """Wilson score interval centre and half-width."""
    if trials < 1:
        raise DomainError("need at least one trial")
    ph = errors / trials
    den = 1 + z * z / trials
    centre = (ph + z * z / (2 * trials)) / den
    half = z * math.sqrt(ph * (1 - ph) / trials + z * z / (4 * trials * trials)) / den
    return centre, half


@dataclass(frozen=True)
class ErrorReport:
    state: str
    n: int
    trials: int
    error: float
    ci95: float
    delta: float
    seed: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def simulate_error(code: ConfCode, channel: CompoundChannel, state: int, trials: int, seed: int,
                   cfg: DecoderConfig | None = None, decoder: TypicalityDecoder | None = None) -> ErrorReport:
    """Average error over uniform message pairs in a fixed state.

    Trial ``t`` uses its own stream ``SeedSequence([seed, tag, state, t])``
    for the message pair and the channel noise.  Decoding failures and
    wrong pairs both count as errors.
    """
    if trials < 1:
        raise DomainError("need at least one trial")
    cfg = cfg or DecoderConfig()
    dec = decoder or TypicalityDecoder(code.codebook, channel, cfg)
    t1 = channel.T1.index(channel.t1_labels[state])
    t2 = channel.T2.index(channel.t2_labels[state])
    w = channel.states[state].matrix
    cdf = np.cumsum(w, axis=2)
    p = code.plan
    errors = 0
    for t in range(trials):
        rng = np.random.default_rng(np.random.SeedSequence([seed, _TAG_TRIAL, state, t]))
        j = int(rng.integers(1, p.M1 + 1))
        k = int(rng.integers(1, p.M2 + 1))
        x = code.x_word(channel, j, k, t1, t2)
        y = code.y_word(channel, j, k, t1, t2)
        r = rng.random(code.codebook.n)
        z = np.minimum((r[:, None] >= cdf[x, y]).sum(axis=1), w.shape[2] - 1)
        if code.message_of(dec.decode(z)) != (j, k):
            errors += 1
    _, half = wilson_halfwidth(errors, trials)
    return ErrorReport(channel.states[state].name, code.codebook.n, trials, errors / trials,
                       half, dec.delta, seed)
