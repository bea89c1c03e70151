from __future__ import annotations

import itertools

import numpy as np
import pytest
from scipy.stats import chi2_contingency, chisquare

from compound_mac.channel import Channel, CompoundChannel
from compound_mac.codes import (ConfCode, DecoderConfig, TypicalityDecoder, derive_conf_code, sample_codebook,
                                simulate_error, typicality_decode, wilson_halfwidth)
from compound_mac.conferencing import build_plan
from compound_mac.errors import ConfigurationError, DomainError
from compound_mac.regions import InputPolicy, uniform_policy
from compound_mac.typicality import is_typical, multinomial_box_probability, typical_box

from conftest import cell_channel, random_channel

# 3-sigma two-sided acceptance for the independence tests
P_ACCEPT = 0.0027


def noisy_policy(cls="pi1", groups=1):
    k1 = np.array([[[0.7, 0.3], [0.2, 0.8]]] * groups)
    k2 = np.array([[[0.4, 0.6], [0.9, 0.1]]] * groups)
    return InputPolicy(cls, np.array([0.35, 0.65]), k1, k2)


def test_codebook_shapes_and_determinism():
    pol = noisy_policy()
    a = sample_codebook(pol, 7, 3, 2, 4, seed=9)
    b = sample_codebook(pol, 7, 3, 2, 4, seed=9)
    c = sample_codebook(pol, 7, 3, 2, 4, seed=10)
    assert a.u.shape == (3, 7) and a.x.shape == (1, 3, 2, 7) and a.y.shape == (1, 3, 4, 7)
    assert np.array_equal(a.x, b.x) and np.array_equal(a.y, b.y)
    assert not np.array_equal(a.u, c.u)
    with pytest.raises(DomainError):
        sample_codebook(pol, 0, 1, 1, 1, seed=0)


def test_half_lattice_law():
    """x_ij and y_ik are independent given u_i and follow the policy kernels."""
    pol = noisy_policy()
    triples = []
    for seed in range(600):
        cb = sample_codebook(pol, 4, 2, 2, 2, seed)
        for i in range(2):
            for t in range(4):
                triples.append((cb.u[i, t], cb.x[0, i, 0, t], cb.y[0, i, 1, t]))
    tr = np.array(triples)
    assert chisquare(np.bincount(tr[:, 0], minlength=2), pol.p0 * len(tr)).pvalue > P_ACCEPT
    for u in range(2):
        sel = tr[tr[:, 0] == u]
        table = np.zeros((2, 2))
        for _, x, y in sel:
            table[x, y] += 1
        assert chi2_contingency(table).pvalue > P_ACCEPT
        assert chisquare(table.sum(axis=1), pol.kernels1[0, u] * len(sel)).pvalue > P_ACCEPT
        assert chisquare(table.sum(axis=0), pol.kernels2[0, u] * len(sel)).pvalue > P_ACCEPT


def brute_decode(cb, channel, z, delta):
    """Direct transcription of the decoding rule: unique triple typical for some state."""
    pol = cb.policy
    k1s, k2s = pol.per_state(channel)
    us, xs, ys, zs = pol.u_size, *channel.sizes
    found = []
    m0, m1, m2 = cb.sizes
    for i, j, k in itertools.product(range(m0), range(m1), range(m2)):
        for s, st in enumerate(channel.states):
            t1 = channel.T1.index(channel.t1_labels[s])
            t2 = channel.T2.index(channel.t2_labels[s])
            g1, g2 = cb.groups(channel, t1, t2)
            law = (pol.p0[:, None, None, None] * k1s[s][:, :, None, None]
                   * k2s[s][:, None, :, None] * st.matrix[None]).ravel()
            word = ((cb.u[i] * xs + cb.x[g1, i, j]) * ys + cb.y[g2, i, k]) * zs + z
            if is_typical(word, law, delta):
                found.append((i + 1, j + 1, k + 1))
                break
    return found[0] if len(found) == 1 else None


@pytest.mark.parametrize("sizes,n,seed", [((2, 2, 2), 6, 0), ((1, 2, 3), 5, 1), ((4, 1, 2), 6, 2),
                                          ((8, 1, 1), 4, 3), ((2, 1, 1), 6, 4)])
@pytest.mark.parametrize("delta", [0.1, 0.25])
def test_decoder_matches_brute_force(sizes, n, seed, delta):
    rng = np.random.default_rng(seed)
    ch = CompoundChannel((Channel(rng.dirichlet(np.ones(2), size=(2, 2)), "A"),
                          Channel(rng.dirichlet(np.ones(2), size=(2, 2)), "B")), ("p", "q"), ("*", "*"))
    pol = InputPolicy("pi2", rng.dirichlet(np.ones(2)), rng.dirichlet(np.ones(2), size=(2, 2)),
                      rng.dirichlet(np.ones(2), size=(2, 2)))
    cb = sample_codebook(pol, n, *sizes, seed=seed)
    dec = TypicalityDecoder(cb, ch, DecoderConfig(delta))
    for z in itertools.product(range(2), repeat=n):
        z = np.array(z)
        got = dec.decode(z)
        assert got == brute_decode(cb, ch, z, delta)
        assert int(dec.candidates(z).sum()) >= (got is not None)
    assert typicality_decode(cb, np.zeros(n, int), DecoderConfig(delta), ch) == dec.decode(np.zeros(n, int))
    with pytest.raises(ConfigurationError):
        dec.decode(np.zeros(n + 1, int))


def test_conf_code_message_map():
    plan = build_plan(12, 0.3, 0.25, 0.2, 0.2, 1, 1)
    ch = cell_channel(1, 1)
    cb = sample_codebook(uniform_policy("pi2", ch, 2), 3, plan.M0_cm, plan.M1_cm, plan.M2_cm, seed=0)
    code = derive_conf_code(cb, plan)
    for j in range(1, plan.M1 + 1):
        for k in range(1, plan.M2 + 1):
            assert code.message_of(plan.cm_index(j, k)) == (j, k)
    assert code.message_of(None) is None
    with pytest.raises(ConfigurationError):
        ConfCode(sample_codebook(uniform_policy("pi2", ch, 2), 3, plan.M0_cm, plan.M1_cm + 1, plan.M2_cm, 0), plan)


def test_wilson_interval():
    centre, half = wilson_halfwidth(10, 100)
    # (p + z^2/2N) / (1 + z^2/N) and z sqrt(p(1-p)/N + z^2/4N^2) / (1 + z^2/N) by hand
    assert centre == pytest.approx(0.1148, abs=1e-4) and half == pytest.approx(0.0596, abs=1e-4)
    assert wilson_halfwidth(0, 50)[1] > 0
    with pytest.raises(DomainError):
        wilson_halfwidth(0, 0)


def test_single_codeword_error_is_atypicality():
    """With one codeword the error is the atypical mass of the joint law (averaged over codebooks)."""
    ch = random_channel(np.random.default_rng(8))
    pol = noisy_policy()
    n, delta, runs = 16, 0.12, 600
    plan = build_plan(n, 0.0, 0.0, 0.0, 0.0)
    errors = 0
    for seed in range(runs):
        cb = sample_codebook(pol, n, 1, 1, 1, seed)
        errors += simulate_error(derive_conf_code(cb, plan), ch, 0, 1, seed, DecoderConfig(delta)).error
    law = (pol.p0[:, None, None, None] * pol.kernels1[0][:, :, None, None]
           * pol.kernels2[0][:, None, :, None] * ch.states[0].matrix[None]).ravel()
    expected = 1 - multinomial_box_probability(law, *typical_box(law, n, delta), n)
    sigma = np.sqrt(expected * (1 - expected) / runs)
    assert abs(errors / runs - expected) <= 3 * sigma


def test_simulate_error_deterministic(paper):
    plan = build_plan(16, 0.1, 0.1, 0.29, 0.29)
    cb = sample_codebook(uniform_policy("pi2", paper, 2), 16, plan.M0_cm, plan.M1_cm, plan.M2_cm, seed=3)
    code = derive_conf_code(cb, plan)
    a = simulate_error(code, paper, 1, 30, seed=4)
    b = simulate_error(code, paper, 1, 30, seed=4)
    assert a == b and a.state == "W2" and 0 <= a.error <= 1
