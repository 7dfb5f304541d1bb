"""Alist parsing, GF(2) encoding, and sum-product decoding."""
import importlib.resources

import numpy as np
import pytest

from markerdec.ldpc import LdpcCode, load_alist, parse_alist, write_alist

# small (2,3)-ish H for hand checks: 3 checks, 6 variables
H_TOY = np.array([
    [1, 1, 0, 1, 0, 0],
    [0, 1, 1, 0, 1, 0],
    [1, 0, 1, 0, 0, 1],
], dtype=np.uint8)


def alist_text(H):
    """Format H in padded MacKay alist (column-major lists first)."""
    m, n = H.shape
    col_deg = H.sum(axis=0)
    row_deg = H.sum(axis=1)
    lines = [f"{n} {m}", f"{col_deg.max()} {row_deg.max()}"]
    lines.append(" ".join(str(d) for d in col_deg))
    lines.append(" ".join(str(d) for d in row_deg))
    for j in range(n):
        idx = list(np.flatnonzero(H[:, j]) + 1) + [0] * (col_deg.max() - col_deg[j])
        lines.append(" ".join(str(i) for i in idx))
    for i in range(m):
        idx = list(np.flatnonzero(H[i]) + 1) + [0] * (row_deg.max() - row_deg[i])
        lines.append(" ".join(str(j) for j in idx))
    return "\n".join(lines) + "\n"


def test_parse_alist_roundtrip():
    assert np.array_equal(parse_alist(alist_text(H_TOY)), H_TOY)


def test_write_alist_roundtrip(tmp_path):
    path = tmp_path / "toy.alist"
    write_alist(H_TOY, path)
    assert np.array_equal(parse_alist(path.read_text()), H_TOY)


@pytest.mark.parametrize("mangle,msg", [
    (lambda t: "6 3", "truncated"),
    (lambda t: t.replace("6 3", "six 3", 1), "integer"),
    (lambda t: t.replace("6 3", "6 0", 1), "dimension"),
    (lambda t: t + "7\n", "token"),
    (lambda t: t.replace("2 2 2 1 1 1", "2 2 2 5 1 1", 1), "degree"),
    (lambda t: t.replace("1 3", "1 7", 1), "range"),
])
def test_parse_alist_errors(mangle, msg):
    text = alist_text(H_TOY)
    with pytest.raises(ValueError, match=msg):
        parse_alist(mangle(text))


def test_parse_alist_adjacency_cross_check():
    # make the row lists disagree with the column lists
    text = alist_text(H_TOY)
    lines = text.strip().split("\n")
    lines[-1] = "2 3 6"  # was "1 3 6"
    with pytest.raises(ValueError):
        parse_alist("\n".join(lines) + "\n")


def test_encode_satisfies_checks():
    code = LdpcCode(H_TOY)
    assert code.n == 6 and code.k == 3
    rng = np.random.default_rng(0)
    for _ in range(20):
        msg = rng.integers(0, 2, code.k).astype(np.uint8)
        cw = code.encode(msg)
        assert not code.syndrome(cw).any()
        assert np.array_equal(code.extract_message(cw), msg)


def test_encode_linear():
    code = LdpcCode(H_TOY)
    rng = np.random.default_rng(1)
    a = rng.integers(0, 2, code.k).astype(np.uint8)
    b = rng.integers(0, 2, code.k).astype(np.uint8)
    assert np.array_equal(code.encode(a ^ b), code.encode(a) ^ code.encode(b))


def test_rank_deficient_h():
    H = np.array([[1, 1, 0, 0], [0, 0, 1, 1], [1, 1, 1, 1]], dtype=np.uint8)
    code = LdpcCode(H)  # third row is the sum of the first two
    assert code.rank == 2
    assert code.k == 2
    msg = np.array([1, 0], dtype=np.uint8)
    assert not code.syndrome(code.encode(msg)).any()


def test_spa_decodes_clean_frame():
    code = LdpcCode(H_TOY)
    msg = np.array([1, 0, 1], dtype=np.uint8)
    cw = code.encode(msg)
    llrs = 8.0 * (1.0 - 2.0 * cw)
    res = code.decode(llrs)
    assert res.converged
    assert res.iterations == 0  # syndrome already satisfied before iterating
    assert np.array_equal(res.codeword, cw)
    assert np.array_equal(res.message, msg)


def test_spa_corrects_weak_flip():
    code = LdpcCode(H_TOY)
    msg = np.array([0, 1, 1], dtype=np.uint8)
    cw = code.encode(msg)
    llrs = 6.0 * (1.0 - 2.0 * cw)
    llrs[2] = -llrs[2] * 0.2  # one mildly wrong position
    res = code.decode(llrs, max_iter=50)
    assert res.converged
    assert np.array_equal(res.codeword, cw)
    assert res.iterations >= 1


def test_spa_zero_llrs_converge_immediately():
    # hard decision of all-zero LLRs is the all-zero codeword, so the
    # pre-iteration syndrome check already passes
    code = LdpcCode(H_TOY)
    res = code.decode(np.zeros(6), max_iter=3)
    assert res.converged and res.iterations == 0
    assert np.array_equal(res.codeword, np.zeros(6, dtype=np.uint8))


def test_spa_reports_nonconvergence():
    code = LdpcCode(H_TOY)
    # this input needs two iterations to settle; stopping after one must be
    # reported as a failure
    llrs = np.full(6, 6.0)
    llrs[0] = -50.0
    full = code.decode(llrs, max_iter=10)
    assert full.converged and full.iterations == 2
    res = code.decode(llrs, max_iter=1)
    assert res.iterations == 1
    assert not res.converged
    assert res.posterior.shape == (6,)


def test_builtin_code_properties():
    path = importlib.resources.files("markerdec").joinpath("data/ldpc_204_102.alist")
    code = load_alist(str(path))
    H = code.H
    assert H.shape == (102, 204)
    assert code.rank == 102 and code.k == 102
    assert np.array_equal(np.unique(H.sum(axis=0)), [3])
    assert np.array_equal(np.unique(H.sum(axis=1)), [6])
    # girth > 4: no two rows share more than one variable
    overlap = (H @ H.T).astype(int)
    np.fill_diagonal(overlap, 0)
    assert overlap.max() <= 1


def test_builtin_code_decodes_noisy_frame():
    path = importlib.resources.files("markerdec").joinpath("data/ldpc_204_102.alist")
    code = load_alist(str(path))
    rng = np.random.default_rng(2)
    msg = rng.integers(0, 2, code.k).astype(np.uint8)
    cw = code.encode(msg)
    llrs = 4.0 * (1.0 - 2.0 * cw) + rng.normal(0, 1.5, code.n)
    res = code.decode(llrs, max_iter=100)
    assert res.converged
    assert np.array_equal(res.message, msg)
