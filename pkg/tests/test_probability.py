from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from compound_mac.errors import ConfigurationError
from compound_mac.probability import (as_distribution, as_kernel, build_joint, entropy,
                                      mutual_information)


def random_joint(rng, u=2, x=2, y=2, z=3):
    return build_joint(rng.dirichlet(np.ones(u)), rng.dirichlet(np.ones(x), size=u),
                       rng.dirichlet(np.ones(y), size=u), rng.dirichlet(np.ones(z), size=(x, y)))


def kl_mutual_information(mass, a_axes, b_axes, c_axes):
    """I(A;B|C) as the expected log ratio p(abc)p(c) / (p(ac)p(bc)), summed cell by cell."""
    axes = set(range(4))
    keep = sorted(set(a_axes) | set(b_axes) | set(c_axes))
    m = mass.sum(axis=tuple(axes - set(keep)), keepdims=True)

    def marg(ax):
        return m.sum(axis=tuple(set(keep) - set(ax)), keepdims=True)

    pc = marg(c_axes) if c_axes else np.ones_like(marg(()))
    pac, pbc = marg(set(a_axes) | set(c_axes)), marg(set(b_axes) | set(c_axes))
    total = 0.0
    for idx in np.ndindex(m.shape):
        p = m[idx]
        if p <= 0:
            continue
        get = lambda arr: arr[tuple(i if arr.shape[k] > 1 else 0 for k, i in enumerate(idx))]
        total += p * np.log2(p * get(pc) / (get(pac) * get(pbc)))
    return total


def test_entropy_known_values():
    assert entropy([0.5, 0.5]) == pytest.approx(1.0)
    assert entropy([1.0, 0.0]) == 0.0
    assert entropy(np.full(8, 1 / 8)) == pytest.approx(3.0)
    assert entropy([0.9, 0.1]) == pytest.approx(0.4689955935892812, abs=1e-12)


def test_validation_errors():
    with pytest.raises(ConfigurationError):
        as_distribution([0.5, 0.6])
    with pytest.raises(ConfigurationError):
        as_distribution([-0.1, 1.1])
    with pytest.raises(ConfigurationError, match="row 1"):
        as_kernel([[1, 0], [0.5, 0.4]])
    with pytest.raises(ConfigurationError):
        build_joint([1.0], [[0.5, 0.5]], [[0.5, 0.5]], np.full((3, 2, 2), 0.5))


def test_overlapping_sets_rejected():
    j = random_joint(np.random.default_rng(0))
    with pytest.raises(ConfigurationError, match="overlap"):
        mutual_information(j, "Z", "XY", "Y")
    with pytest.raises(ConfigurationError):
        mutual_information(j, "Z", "Q")


@pytest.mark.parametrize("seed", range(5))
def test_matches_direct_log_ratio(seed):
    j = random_joint(np.random.default_rng(seed))
    axes = {"U": 0, "X": 1, "Y": 2, "Z": 3}
    for t, p, c in (("Z", "X", "YU"), ("Z", "Y", "XU"), ("Z", "XY", "U"), ("Z", "XY", "")):
        direct = kl_mutual_information(j.mass, [axes[v] for v in t], [axes[v] for v in p], [axes[v] for v in c])
        assert mutual_information(j, t, p, c) == pytest.approx(direct, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_chain_rule_and_ranges(seed):
    j = random_joint(np.random.default_rng(seed), u=3)
    a = mutual_information(j, "Z", "X", "YU")
    b = mutual_information(j, "Z", "Y", "XU")
    c = mutual_information(j, "Z", "XY", "U")
    d = mutual_information(j, "Z", "XY")
    assert c == pytest.approx(mutual_information(j, "Z", "X", "U") + b, abs=1e-10)
    assert a <= c + 1e-12 and b <= c + 1e-12
    # U -> XY -> Z is a Markov chain, so conditioning on U cannot raise I(Z;XY)
    assert c <= d + 1e-12
    assert d <= entropy(j.marginal("Z")) + 1e-12
    assert min(a, b, c, d) >= 0.0


def test_independent_inputs_of_noiseless_adder():
    # Z = X xor Y with uniform inputs: I(Z;X) = 0 but I(Z;X|Y) = 1
    w = np.zeros((2, 2, 2))
    for x in range(2):
        for y in range(2):
            w[x, y, x ^ y] = 1
    j = build_joint([1.0], [[0.5, 0.5]], [[0.5, 0.5]], w)
    assert mutual_information(j, "Z", "X") == pytest.approx(0.0, abs=1e-12)
    assert mutual_information(j, "Z", "X", "Y") == pytest.approx(1.0)
