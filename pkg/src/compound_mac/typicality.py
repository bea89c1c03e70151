"""Types, typical sets and exact small-instance computations.

A word ``x`` of length ``n`` is ``delta``-typical for ``p`` when its type
(empirical distribution) differs from ``p`` by at most ``delta`` in every
entry and puts no mass where ``p`` has none.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError, InstanceTooLarge
from .probability import as_distribution, as_kernel, entropy

# absolute slack on counts when comparing |count - n p| against n delta
COUNT_TOL = 1e-9

MAX_EXACT_ALPHABET = 5
MAX_EXACT_N = 60
MAX_ENUM_ALPHABET = 3
MAX_ENUM_N = 12


@dataclass(frozen=True)
class TypeVector:
    counts: tuple[int, ...]

    @property
    def n(self) -> int:
        return sum(self.counts)

    def distribution(self) -> np.ndarray:
        return np.array(self.counts, dtype=float) / self.n


@dataclass(frozen=True)
class TypicalSpec:
    p: np.ndarray
    delta: float
    n: int

    def __post_init__(self):
        object.__setattr__(self, "p", as_distribution(self.p))
        if self.delta <= 0:
            raise DomainError("delta must be positive")
        if self.n < 1:
            raise DomainError("n must be positive")


def empirical_type(word, alphabet_size: int | None = None) -> TypeVector:
    w = np.asarray(word, dtype=np.int64).ravel()
    size = alphabet_size if alphabet_size is not None else (int(w.max()) + 1 if w.size else 0)
    if w.size and (w.min() < 0 or w.max() >= size):
        raise DomainError(f"symbol outside alphabet [0, {size})")
    return TypeVector(tuple(int(c) for c in np.bincount(w, minlength=size)))


def counts_typical(counts, p, delta: float) -> np.ndarray | bool:
    """Typicality test on count vectors (last axis runs over the alphabet)."""
    c = np.asarray(counts, dtype=float)
    n = c.sum(axis=-1, keepdims=True)
    p = np.asarray(p, dtype=float)
    close = np.abs(c - n * p) <= n * delta + COUNT_TOL
    support = (p > 0) | (c == 0)
    return np.all(close & support, axis=-1)


def is_typical(word, p, delta: float) -> bool:
    p = as_distribution(p)
    t = empirical_type(word, p.size)
    return bool(counts_typical(t.counts, p, delta))


def _check_exact(p: np.ndarray, n: int):
    if p.size > MAX_EXACT_ALPHABET or n > MAX_EXACT_N:
        raise InstanceTooLarge(
            f"exact summation supports |alphabet| <= {MAX_EXACT_ALPHABET} and n <= {MAX_EXACT_N}")


def atypical_mass_exact(spec: TypicalSpec) -> float:
    """``p^n`` of the complement of the typical set, summed over type classes.

    Dynamic programme over symbols: ``ok[m]`` (``bad[m]``) collects
    ``prod p^c / c!`` over partial count vectors with total ``m`` whose
    entries so far all pass (some entry fails) the typicality test.
    """
    p, n, delta = spec.p, spec.n, spec.delta
    _check_exact(p, n)
    lf = np.array([math.lgamma(c + 1) for c in range(n + 1)])
    ok = np.zeros(n + 1)
    bad = np.zeros(n + 1)
    ok[0] = 1.0
    for px in p:
        c = np.arange(n + 1)
        if px > 0:
            w = np.exp(c * math.log(px) - lf)
        else:
            w = (c == 0).astype(float)
        good = (np.abs(c - n * px) <= n * delta + COUNT_TOL) & ((px > 0) | (c == 0))
        new_ok = np.zeros(n + 1)
        new_bad = np.zeros(n + 1)
        for m in range(n + 1):
            if ok[m] == 0 and bad[m] == 0:
                continue
            top = n - m
            wc = w[:top + 1]
            g = good[:top + 1]
            new_ok[m:] += ok[m] * np.where(g, wc, 0.0)
            new_bad[m:] += ok[m] * np.where(g, 0.0, wc) + bad[m] * wc
        ok, bad = new_ok, new_bad
    return float(min(max(bad[n] * math.exp(lf[n]), 0.0), 1.0))


def multinomial_box_probability(q, lo, hi, n: int) -> float:
    """``P(lo <= C <= hi)`` entrywise for ``C ~ Multinomial(n, q)``.

    Convolution over categories of ``q^c / c!`` restricted to each box;
    cost is ``O(len(q) n^2)``.
    """
    q = np.asarray(q, dtype=float)
    lf = np.array([math.lgamma(c + 1) for c in range(n + 1)])
    acc = np.zeros(n + 1)
    acc[0] = 1.0
    c = np.arange(n + 1)
    for qa, la, ha in zip(q, lo, hi):
        inside = (c >= la) & (c <= ha)
        if qa > 0:
            w = np.where(inside, np.exp(c * math.log(qa) - lf), 0.0)
        else:
            w = ((c == 0) & inside).astype(float)
        acc = np.convolve(acc, w)[:n + 1]
    return float(min(max(acc[n] * math.exp(lf[n]), 0.0), 1.0))


def typical_box(p, n: int, delta: float) -> tuple[np.ndarray, np.ndarray]:
    """Integer count bounds of the typical set of ``p`` at length ``n``."""
    p = np.asarray(p, dtype=float)
    lo = np.maximum(np.ceil(n * (p - delta) - COUNT_TOL), 0)
    hi = np.where(p > 0, np.floor(n * (p + delta) + COUNT_TOL), 0)
    return lo, hi


def atypical_mass_mc(spec: TypicalSpec, samples: int = 100_000, seed: int = 0) -> tuple[float, float]:
    """Monte Carlo estimate of the atypical mass with a 95% normal half-width."""
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(spec.n, spec.p, size=samples)
    miss = ~counts_typical(counts, spec.p, spec.delta)
    est = float(miss.mean())
    return est, float(1.96 * math.sqrt(max(est * (1 - est), 1e-300) / samples))


def type_classes(n: int, k: int):
    """All count vectors of length ``k`` summing to ``n``, in lexicographic order."""
    if k == 1:
        yield (n,)
        return
    for first in range(n + 1):
        for rest in type_classes(n - first, k - 1):
            yield (first, *rest)


# --- Lemma-shape checks --------------------------------------------------------

def entropy_continuity_bound(theta: float, size: int) -> float:
    """``-theta log2(theta / |X|)``: entropy gap for distributions ``theta`` apart in L1 (theta <= 1/2)."""
    if theta <= 0:
        return 0.0
    return -theta * math.log2(theta / size)


def required_phi1(p, anchor, delta: float, n: int) -> float:
    """Smallest ``phi`` with ``p^n(x) <= 2^{-n(H(anchor) - phi)}`` on the typical set of ``anchor``.

    Enumerates the type classes of length ``n``; returns ``-inf`` if the
    typical set is empty.
    """
    p, anchor = as_distribution(p), as_distribution(anchor)
    _check_exact(p, n)
    h = entropy(anchor)
    worst = -np.inf
    for c in type_classes(n, p.size):
        if not counts_typical(c, anchor, delta):
            continue
        if any(ci > 0 and pi == 0 for ci, pi in zip(c, p)):
            continue
        log_prob = sum(ci * math.log2(pi) for ci, pi in zip(c, p) if ci > 0)
        worst = max(worst, h + log_prob / n)
    return worst


def _all_words(size: int, n: int) -> np.ndarray:
    if size > MAX_ENUM_ALPHABET or n > MAX_ENUM_N:
        raise InstanceTooLarge(f"enumeration supports |alphabet| <= {MAX_ENUM_ALPHABET} and n <= {MAX_ENUM_N}")
    return np.array(list(itertools.product(range(size), repeat=n)), dtype=np.int64).reshape(-1, n)


def _pair_counts(x: np.ndarray, ys: np.ndarray, x_size: int, y_size: int) -> np.ndarray:
    idx = x[None, :] * y_size + ys
    out = np.zeros((ys.shape[0], x_size * y_size), dtype=np.int64)
    for a in range(x_size * y_size):
        out[:, a] = (idx == a).sum(axis=1)
    return out


def enumerate_conditionally_typical(x_word, kernels, delta: float, p=None) -> int:
    """Number of ``y`` with ``(x, y)`` jointly typical for ``W(y|x) p(x)`` for some kernel.

    ``kernels`` is one stochastic matrix or a list of them (rows indexed by
    ``x``); ``p`` defaults to the type of ``x``.
    """
    x = np.asarray(x_word, dtype=np.int64).ravel()
    ks = [as_kernel(kernels)] if np.ndim(kernels) == 2 else [as_kernel(k) for k in kernels]
    xs, ys_size = ks[0].shape
    p = empirical_type(x, xs).distribution() if p is None else as_distribution(p)
    ys = _all_words(ys_size, x.size)
    counts = _pair_counts(x, ys, xs, ys_size)
    hit = np.zeros(ys.shape[0], dtype=bool)
    for k in ks:
        q = (p[:, None] * k).ravel()
        hit |= counts_typical(counts, q, delta)
    return int(hit.sum())


def w_generated_count(x_word, kernel, delta: float) -> int:
    """Number of ``y`` that are ``W``-generated by ``x`` with constant ``delta``.

    ``|N(a, b) - W(b|a) N(a)| <= n delta`` for all ``(a, b)``, and
    ``N(a, b) = 0`` whenever ``W(b|a) = 0``.
    """
    x = np.asarray(x_word, dtype=np.int64).ravel()
    k = as_kernel(kernel)
    xs, ys_size = k.shape
    ys = _all_words(ys_size, x.size)
    counts = _pair_counts(x, ys, xs, ys_size).reshape(-1, xs, ys_size).astype(float)
    nx = np.bincount(x, minlength=xs).astype(float)
    close = np.abs(counts - k[None] * nx[None, :, None]) <= x.size * delta + COUNT_TOL
    support = (k[None] > 0) | (counts == 0)
    return int(np.all(close & support, axis=(1, 2)).sum())


def conditional_entropy(kernel, p) -> float:
    """``H(W|p) = sum_x p(x) H(W(.|x))``."""
    k = as_kernel(kernel)
    return float(sum(px * entropy(row) for px, row in zip(as_distribution(p), k)))


def fit_decay_constant(ns, masses, alphabet_size: int, delta: float) -> float:
    """Least-squares ``c`` in ``mass ~ (n+1)^{|X|} 2^{-n c delta^2}``.

    Fits ``|X| log2(n+1) - log2(mass) = c n delta^2`` through the origin.
    """
    ns = np.asarray(ns, dtype=float)
    m = np.asarray(masses, dtype=float)
    if np.any(m <= 0):
        raise ConfigurationError("masses must be positive to fit an exponent")
    y = alphabet_size * np.log2(ns + 1) - np.log2(m)
    x = ns * delta ** 2
    return float((x @ y) / (x @ x))
