"""(5,7)_octal rate-1/2 convolutional encoding and Viterbi decoding."""
import itertools

import numpy as np
import pytest

from markerdec.convcode import ConvCode, conv_encode, llr_to_hard, viterbi_hdd, viterbi_sdd


def encode_reference(msg):
    """Bit-at-a-time encoder with explicit shift register."""
    s1 = s2 = 0  # m_{t-1}, m_{t-2}
    out = []
    for b in np.asarray(msg, dtype=np.uint8):
        out.append(int(b) ^ s2)            # generator 5 = 101
        out.append(int(b) ^ s1 ^ s2)       # generator 7 = 111
        s1, s2 = int(b), s1
    return np.array(out, dtype=np.uint8)


def test_encode_matches_reference():
    rng = np.random.default_rng(0)
    for k in (1, 2, 3, 8, 50):
        msg = rng.integers(0, 2, k).astype(np.uint8)
        assert np.array_equal(conv_encode(msg), encode_reference(msg))


def test_encode_impulse_responses():
    # single 1 in an all-zero stream shows the generator taps
    msg = np.array([1, 0, 0, 0], dtype=np.uint8)
    out = conv_encode(msg)
    assert np.array_equal(out.reshape(-1, 2), [[1, 1], [0, 1], [1, 1], [0, 0]])


def test_conv_code_wrapper():
    code = ConvCode(16)
    assert code.k == 16 and code.n == 32
    msg = np.random.default_rng(1).integers(0, 2, 16).astype(np.uint8)
    assert np.array_equal(code.encode(msg), conv_encode(msg))
    with pytest.raises(ValueError):
        code.encode(np.zeros(15, dtype=np.uint8))


def test_llr_to_hard():
    llrs = np.array([3.2, -0.1, 0.0, -7.0, 1e-9])
    # positive favors bit 0, ties go to 0
    assert np.array_equal(llr_to_hard(llrs), [0, 1, 0, 1, 0])


def test_viterbi_sdd_clean():
    rng = np.random.default_rng(2)
    for k in (1, 2, 5, 40, 105):
        msg = rng.integers(0, 2, k).astype(np.uint8)
        llrs = 5.0 * (1.0 - 2.0 * conv_encode(msg))
        assert np.array_equal(viterbi_sdd(llrs), msg)


def test_viterbi_sdd_is_max_correlation():
    # exhaustive check of the decoded metric against all 2^k messages
    rng = np.random.default_rng(3)
    for k in (4, 6, 8):
        for _ in range(20):
            llrs = rng.normal(size=2 * k)
            got = viterbi_sdd(llrs)
            sign = lambda m: 1.0 - 2.0 * conv_encode(np.array(m, dtype=np.uint8))
            best = max((float(sign(m) @ llrs) for m in itertools.product((0, 1), repeat=k)))
            assert abs(float(sign(got) @ llrs) - best) < 1e-9


def test_viterbi_hdd_matches_sdd_on_hard_input():
    rng = np.random.default_rng(4)
    for _ in range(20):
        msg = rng.integers(0, 2, 30).astype(np.uint8)
        coded = conv_encode(msg)
        noisy = coded ^ (rng.random(coded.size) < 0.03).astype(np.uint8)
        assert np.array_equal(viterbi_hdd(noisy), viterbi_sdd(1.0 - 2.0 * noisy))


def test_viterbi_hdd_corrects_single_error():
    msg = np.array([1, 0, 1, 1, 0, 0, 1, 0], dtype=np.uint8)
    coded = conv_encode(msg)
    for pos in range(coded.size):
        bad = coded.copy()
        bad[pos] ^= 1
        assert np.array_equal(viterbi_hdd(bad), msg), f"flip at {pos}"


def test_viterbi_input_validation():
    with pytest.raises(ValueError):
        viterbi_sdd(np.zeros(7))
