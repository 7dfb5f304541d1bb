"""Deletion/substitution channel behavior and determinism."""
import random

import numpy as np
import pytest

from markerdec.channel import ChannelParams, as_bits, transmit, transmit_detailed, transmit_rng


def test_params_validate():
    with pytest.raises(ValueError):
        ChannelParams(-0.1, 0.0)
    with pytest.raises(ValueError):
        ChannelParams(0.5, 1.5)
    ChannelParams(0.0, 0.0)
    ChannelParams(1.0, 1.0)


def test_as_bits_rejects_non_binary():
    with pytest.raises(ValueError):
        as_bits([0, 1, 2])
    assert as_bits([1, 0, 1]).dtype == np.uint8


def test_identity_channel():
    x = np.array([0, 1, 1, 0, 1], dtype=np.uint8)
    y = transmit(x, ChannelParams(0.0, 0.0), seed=42)
    assert np.array_equal(y, x)


def test_pure_flip_channel():
    x = np.zeros(50, dtype=np.uint8)
    y = transmit(x, ChannelParams(0.0, 1.0), seed=0)
    assert np.array_equal(y, np.ones(50, dtype=np.uint8))


def test_pure_deletion_channel():
    x = np.ones(50, dtype=np.uint8)
    y = transmit(x, ChannelParams(1.0, 0.0), seed=0)
    assert y.size == 0


def test_deterministic_per_seed():
    x = np.random.default_rng(1).integers(0, 2, 500).astype(np.uint8)
    p = ChannelParams(0.1, 0.05)
    a = transmit(x, p, seed=123)
    b = transmit(x, p, seed=123)
    c = transmit(x, p, seed=124)
    assert np.array_equal(a, b)
    assert a.size != c.size or not np.array_equal(a, c)


def test_draw_order_matches_stdlib():
    # one uniform for the deletion decision, a second (survivors only) for
    # the flip; replaying the same stream by hand must reproduce the output
    x = np.random.default_rng(2).integers(0, 2, 200).astype(np.uint8)
    p = ChannelParams(0.15, 0.1)
    y = transmit(x, p, seed=77)
    rng = random.Random(77)
    out = []
    for b in x:
        if rng.random() < p.pd:
            continue
        out.append(int(b) ^ 1 if rng.random() < p.ps else int(b))
    assert np.array_equal(y, np.array(out, dtype=np.uint8))


def test_detailed_masks_consistent():
    x = np.random.default_rng(3).integers(0, 2, 300).astype(np.uint8)
    p = ChannelParams(0.2, 0.1)
    y, deleted, flipped = transmit_detailed(x, p, seed=5)
    assert np.array_equal(y, transmit(x, p, seed=5))
    assert not np.any(flipped & deleted)
    assert y.size == x.size - deleted.sum()
    # reconstruct y from the masks
    rebuilt = (x ^ flipped.astype(np.uint8))[~deleted]
    assert np.array_equal(rebuilt, y)


def test_subsequence_when_no_flips():
    x = np.random.default_rng(4).integers(0, 2, 100).astype(np.uint8)
    y = transmit(x, ChannelParams(0.3, 0.0), seed=9)
    # y must embed into x in order
    it = iter(x.tolist())
    assert all(any(b == v for v in it) for b in y.tolist())


def test_transmit_rng_shares_stream():
    x = np.random.default_rng(5).integers(0, 2, 100).astype(np.uint8)
    p = ChannelParams(0.1, 0.2)
    assert np.array_equal(transmit_rng(x, p, random.Random(11)), transmit(x, p, 11))


def test_empirical_rates_within_binomial_bounds():
    # same check as the acceptance gate but at a single parameter pair
    n = 100000
    x = np.random.default_rng(6).integers(0, 2, n).astype(np.uint8)
    pd, ps = 0.07, 0.04
    y, deleted, flipped = transmit_detailed(x, ChannelParams(pd, ps), seed=21)
    kept = n - deleted.sum()
    for count, total, prob in ((deleted.sum(), n, pd), (flipped.sum(), kept, ps)):
        sigma = np.sqrt(total * prob * (1 - prob))
        assert abs(count - total * prob) < 4 * sigma
