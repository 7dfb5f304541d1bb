"""Marker insertion, interleaving, and rate bookkeeping."""
from fractions import Fraction

import numpy as np
import pytest

from markerdec.marker import (Interleaver, MarkerConfig, deinterleave_llrs, insert_markers,
                              interleave, load_interleaver, make_interleaver, marker_fill,
                              marker_mask, overall_rate, save_interleaver, strip_marker_llrs)

M01 = MarkerConfig(np.array([0, 1], dtype=np.uint8), 5)


def test_insert_markers_hand_example():
    c = np.arange(12) % 2
    x = insert_markers(c.astype(np.uint8), M01)
    # groups of 5 coded bits followed by the marker; the tail group of 2
    # coded bits gets no marker after it
    assert x.size == 12 + 2 * 2
    expect = list(c[:5]) + [0, 1] + list(c[5:10]) + [0, 1] + list(c[10:])
    assert np.array_equal(x, np.array(expect, dtype=np.uint8))


def test_marker_after_exact_multiple():
    # n a multiple of nc: trailing marker included, matching mask/fill
    c = np.zeros(10, dtype=np.uint8)
    x = insert_markers(c, M01)
    mask = marker_mask(M01, 10)
    assert x.size == mask.size
    assert np.array_equal(x[mask], np.array([0, 1, 0, 1], dtype=np.uint8))


def test_mask_fill_agree_with_insert():
    rng = np.random.default_rng(0)
    for n in (3, 5, 7, 20, 204):
        for nc, pat in ((5, [0, 1]), (10, [0, 1]), (3, [1]), (4, [1, 1, 0])):
            cfg = MarkerConfig(np.array(pat, dtype=np.uint8), nc)
            c = rng.integers(0, 2, n).astype(np.uint8)
            x = insert_markers(c, cfg)
            mask, values = marker_fill(cfg, n)
            assert mask.size == x.size
            assert np.array_equal(x[mask], values[mask])
            assert np.array_equal(x[~mask], c)


def test_strip_inverts_insert_positions():
    rng = np.random.default_rng(1)
    c = rng.integers(0, 2, 23).astype(np.uint8)
    x = insert_markers(c, M01)
    llrs = rng.normal(size=x.size)
    stripped = strip_marker_llrs(llrs, M01, 23)
    assert stripped.size == 23
    assert np.array_equal(stripped, llrs[~marker_mask(M01, 23)])


def test_empty_marker_is_identity():
    cfg = MarkerConfig(np.array([], dtype=np.uint8), 5)
    c = np.array([1, 0, 1], dtype=np.uint8)
    assert np.array_equal(insert_markers(c, cfg), c)


def test_marker_config_validates():
    with pytest.raises(ValueError):
        MarkerConfig(np.array([0, 2], dtype=np.uint8), 5)
    with pytest.raises(ValueError):
        MarkerConfig(np.array([0, 1], dtype=np.uint8), 0)


def test_interleaver_seed_zero_is_identity():
    il = make_interleaver(16, 0)
    c = np.arange(16).astype(np.uint8) % 2
    assert np.array_equal(interleave(c, il), c)


def test_interleaver_bijective_and_inverse():
    rng = np.random.default_rng(2)
    for seed in (1, 2, 17):
        il = make_interleaver(50, seed)
        assert np.array_equal(np.sort(il.perm), np.arange(50))
        llrs = rng.normal(size=50)
        c = rng.integers(0, 2, 50).astype(np.uint8)
        pi_c = interleave(c, il)
        # deinterleaving per-position values undoes the permutation
        assert np.allclose(deinterleave_llrs(interleave(llrs, il), il), llrs)
        assert np.array_equal(deinterleave_llrs(pi_c, il), c)


def test_interleaver_roundtrip_file(tmp_path):
    il = make_interleaver(30, 7)
    path = tmp_path / "perm.txt"
    save_interleaver(il, path)
    il2 = load_interleaver(path)
    assert np.array_equal(il.perm, il2.perm)


def test_load_interleaver_rejects_non_permutation(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("1\n1\n2\n")
    with pytest.raises(ValueError):
        load_interleaver(path)


def test_interleaver_length_mismatch():
    il = make_interleaver(10, 1)
    with pytest.raises(ValueError):
        interleave(np.zeros(9, dtype=np.uint8), il)


def test_overall_rate():
    # nominal rate: (k/n) * nc / (nc + marker length), as an exact fraction
    assert overall_rate(M01, 102, 204) == Fraction(5, 14)
    cfg10 = MarkerConfig(np.array([0, 1], dtype=np.uint8), 10)
    assert overall_rate(cfg10, 102, 204) == Fraction(5, 12)
    assert overall_rate(cfg10, 105, 210) == Fraction(5, 12)
