"""Finite-alphabet distributions, kernels and information measures.

All logarithms are base 2, so every quantity is in bits.  Distributions and
kernels are plain numpy arrays; the helpers here validate them and build the
four-variable joint law of (U, X, Y, Z) that every rate bound is built from.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import ConfigurationError

#: masses below this are treated as exact zeros before taking logarithms
ZERO_MASS = 1e-15

DIST_TOL = 1e-12
JOINT_TOL = 1e-10

VARIABLES = ("U", "X", "Y", "Z")


def as_distribution(masses, tol: float = DIST_TOL) -> np.ndarray:
    """Validate ``masses`` as a probability vector and return it as floats."""
    p = np.asarray(masses, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ConfigurationError(f"distribution must be a non-empty vector, got shape {p.shape}")
    if np.any(p < 0) or not np.all(np.isfinite(p)):
        raise ConfigurationError("distribution has negative or non-finite masses")
    if abs(p.sum() - 1.0) > tol:
        raise ConfigurationError(f"distribution sums to {p.sum():.15g}, not 1")
    return p


def as_kernel(rows, tol: float = DIST_TOL) -> np.ndarray:
    """Validate a stochastic matrix (rows indexed by input symbols)."""
    k = np.asarray(rows, dtype=float)
    if k.ndim != 2 or k.size == 0:
        raise ConfigurationError(f"kernel must be a non-empty matrix, got shape {k.shape}")
    if np.any(k < 0) or not np.all(np.isfinite(k)):
        raise ConfigurationError("kernel has negative or non-finite entries")
    bad = np.flatnonzero(np.abs(k.sum(axis=1) - 1.0) > tol)
    if bad.size:
        raise ConfigurationError(f"kernel row {int(bad[0])} sums to {k[bad[0]].sum():.15g}, not 1")
    return k


@dataclass(frozen=True)
class JointUXYZ:
    """Joint law ``p0(u) p1(x|u) p2(y|u) W(z|x,y)`` stored as a 4-D array."""

    mass: np.ndarray

    def __post_init__(self):
        m = self.mass
        if m.ndim != 4:
            raise ConfigurationError(f"joint must be 4-dimensional, got {m.ndim}")
        if np.any(m < 0) or abs(m.sum() - 1.0) > JOINT_TOL:
            raise ConfigurationError("joint is not a probability array")

    @property
    def sizes(self) -> tuple[int, int, int, int]:
        return tuple(self.mass.shape)

    def marginal(self, variables: Iterable[str]) -> np.ndarray:
        keep = {_axis(v) for v in variables}
        drop = tuple(ax for ax in range(4) if ax not in keep)
        return self.mass.sum(axis=drop) if drop else self.mass


def build_joint(p0, p1, p2, w) -> JointUXYZ:
    """Product-form joint of the time-sharing variable, both inputs and the output.

    Parameters
    ----------
    p0 : array (U,)
        Time-sharing distribution.
    p1, p2 : arrays (U, X) and (U, Y)
        Conditional input kernels of the two transmitters.
    w : array (X, Y, Z)
        Channel transition probabilities ``w[x, y, z] = W(z|x,y)``.
    """
    p0 = as_distribution(p0)
    p1 = as_kernel(p1)
    p2 = as_kernel(p2)
    w = np.asarray(w, dtype=float)
    if w.ndim != 3:
        raise ConfigurationError(f"channel must be indexed (x, y, z), got shape {w.shape}")
    if p1.shape[0] != p0.size or p2.shape[0] != p0.size:
        raise ConfigurationError(
            f"kernel rows {p1.shape[0]}/{p2.shape[0]} do not match |U|={p0.size}")
    if w.shape[:2] != (p1.shape[1], p2.shape[1]):
        raise ConfigurationError(
            f"channel inputs {w.shape[:2]} do not match kernel outputs {(p1.shape[1], p2.shape[1])}")
    as_kernel(w.reshape(-1, w.shape[2]))
    mass = (p0[:, None, None, None] * p1[:, :, None, None]
            * p2[:, None, :, None] * w[None, :, :, :])
    return JointUXYZ(mass)


def entropy(p) -> float:
    """Shannon entropy in bits, with ``0 log 0 = 0``."""
    q = np.asarray(p, dtype=float).ravel()
    q = q[q > ZERO_MASS]
    return float(-(q * np.log2(q)).sum())


def _axis(name: str) -> int:
    try:
        return VARIABLES.index(name.upper())
    except (ValueError, AttributeError):
        raise ConfigurationError(f"unknown variable {name!r}; expected one of {VARIABLES}") from None


def _varset(spec) -> frozenset[str]:
    if isinstance(spec, str):
        spec = [c for c in spec.replace(",", "") if not c.isspace()]
    out = frozenset(v.upper() for v in spec)
    for v in out:
        _axis(v)
    return out


def mutual_information(joint: JointUXYZ, targets, predictors, conditioning=()) -> float:
    """Conditional mutual information ``I(targets; predictors | conditioning)``.

    Variable sets are given as strings (``"XY"``) or iterables of the names
    ``U, X, Y, Z``.  Computed as ``H(TC) + H(PC) - H(TPC) - H(C)`` from marginal
    tables; tiny negative round-off is clamped to zero.
    """
    t, p, c = _varset(targets), _varset(predictors), _varset(conditioning)
    if not t or not p:
        raise ConfigurationError("targets and predictors must be non-empty")
    if t & p or t & c or p & c:
        raise ConfigurationError(f"variable sets overlap: {sorted(t)}, {sorted(p)}, {sorted(c)}")
    h = lambda vs: entropy(joint.marginal(vs)) if vs else 0.0
    value = h(t | c) + h(p | c) - h(t | p | c) - h(c)
    return max(value, 0.0)
