"""MAP detection of marker-coded bits over the deletion/substitution channel.

The hidden state is the drift (number of deletions so far); forward/backward
recursions run on the (time, drift) lattice with per-row normalization and
accumulated log scale factors, so everything stays in linear domain at
machine precision. A brute-force survivor-set enumeration provides an exact
oracle for small instances.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import kernels
from .channel import as_bits
from .marker import MarkerConfig, marker_fill


@dataclass(frozen=True)
class TemplateSpec:
    """Per-position transmit template: marker bits are known, coded are free.

    ``mask[t]`` is True at marker positions, where ``values[t]`` holds the
    pinned bit; coded positions carry a uniform prior.
    """

    mask: np.ndarray
    values: np.ndarray

    @property
    def length(self) -> int:
        return int(self.mask.size)


def make_template(cfg: MarkerConfig, n: int) -> TemplateSpec:
    mask, values = marker_fill(cfg, n)
    return TemplateSpec(mask=mask, values=values)


@dataclass(frozen=True)
class DetectorParams:
    """Channel parameters assumed by the detector (may differ from truth).

    ``pd`` may equal 1 so that the length-based estimate remains usable when
    nothing was received. ``clip`` toggles LLR clipping; unclipped LLRs can
    be infinite when ``ps == 0``.
    """

    pd: float
    ps: float = 0.0
    llr_clip: float = 10.0
    clip: bool = True

    def __post_init__(self):
        if not 0.0 <= self.pd <= 1.0:
            raise ValueError(f"pd={self.pd} outside [0, 1]")
        if not 0.0 <= self.ps < 1.0:
            raise ValueError(f"ps={self.ps} outside [0, 1)")
        if self.llr_clip <= 0.0:
            raise ValueError("llr_clip must be positive")


@dataclass
class DriftLattice:
    """Normalized forward/backward tables plus per-row log scale factors."""

    alpha: np.ndarray
    beta: np.ndarray
    log_scale_a: np.ndarray
    log_scale_b: np.ndarray

    @property
    def log_py(self) -> float:
        """log P(y): total forward mass with scales reapplied."""
        return float(self.log_scale_a[-1])


def estimate_pd(T: int, R: int) -> float:
    """Length-based deletion probability estimate (T - R) / T."""
    if T <= 0:
        raise ValueError("template length must be positive")
    if not 0 <= R <= T:
        raise ValueError(f"received length {R} outside [0, {T}]")
    return (T - R) / T


def emission_table(tmpl: TemplateSpec, ps: float) -> np.ndarray:
    """Per-position probability of observing bit 0/1 given survival."""
    T = tmpl.length
    emit = np.full((T, 2), 0.5)
    mk = tmpl.mask
    v = tmpl.values[mk]
    emit[mk, v] = 1.0 - ps
    emit[mk, 1 - v] = ps
    return emit


def forward_backward(y, tmpl: TemplateSpec, params: DetectorParams) -> DriftLattice:
    y = as_bits(y)
    if y.size > tmpl.length:
        raise ValueError(f"received length {y.size} exceeds template length {tmpl.length}")
    emit = emission_table(tmpl, params.ps)
    alpha, beta, ls_a, ls_b = kernels.drift_forward_backward(y, emit, params.pd)
    return DriftLattice(np.asarray(alpha), np.asarray(beta), np.asarray(ls_a), np.asarray(ls_b))


def posterior_log_joints(lattice: DriftLattice, y, tmpl: TemplateSpec, params: DetectorParams):
    """log P(x_t = b, y) for b in {0, 1}; marker positions use their prior 1.

    Mass conservation holds per position: logaddexp over b gives log P(y).
    """
    y = as_bits(y)
    emit = emission_table(tmpl, params.ps)
    num0, num1 = kernels.drift_posteriors(y, emit, params.pd, params.ps, lattice.alpha, lattice.beta)
    scale = lattice.log_scale_a[:-1] + lattice.log_scale_b[1:]
    with np.errstate(divide="ignore"):
        log0 = np.log(np.asarray(num0)) + scale
        log1 = np.log(np.asarray(num1)) + scale
    # Coded-position numerators include the 1/2 prior; markers pin the bit,
    # so the marginalized emission already carries the full mass.
    mk = tmpl.mask
    v = tmpl.values
    log_joint = np.where(mk & (v == 0), log0 + np.log(2.0), log0)
    log0 = np.where(mk & (v == 1), -np.inf, log_joint)
    log_joint = np.where(mk & (v == 1), log1 + np.log(2.0), log1)
    log1 = np.where(mk & (v == 0), -np.inf, log_joint)
    return log0, log1


def posterior_llrs(lattice: DriftLattice, y, tmpl: TemplateSpec, params: DetectorParams) -> np.ndarray:
    """Per-position LLR log(P(x_t=0|y)/P(x_t=1|y)); markers emit ±llr_clip."""
    y = as_bits(y)
    emit = emission_table(tmpl, params.ps)
    num0, num1 = kernels.drift_posteriors(y, emit, params.pd, params.ps, lattice.alpha, lattice.beta)
    num0 = np.asarray(num0)
    num1 = np.asarray(num1)
    bad = (num0 == 0.0) & (num1 == 0.0)
    if bad.any():
        raise kernels.ZeroMassError(
            f"zero posterior mass at position {int(np.nonzero(bad)[0][0])}"
        )
    with np.errstate(divide="ignore"):
        llrs = np.log(num0) - np.log(num1)
    if params.clip:
        llrs = np.clip(llrs, -params.llr_clip, params.llr_clip)
    mk = tmpl.mask
    llrs[mk] = np.where(tmpl.values[mk] == 0, params.llr_clip, -params.llr_clip)
    return llrs


def map_detect(y, cfg: MarkerConfig, n: int, params: DetectorParams | None = None,
               *, ps_assumed: float = 0.0, llr_clip: float = 10.0) -> np.ndarray:
    """Detect one frame: template from (cfg, n), lattice, posterior LLRs.

    When ``params`` is None the deletion probability is estimated from the
    length mismatch and ``ps_assumed`` is taken on faith (mismatched mode).
    """
    y = as_bits(y)
    tmpl = make_template(cfg, n)
    if params is None:
        params = DetectorParams(pd=estimate_pd(tmpl.length, y.size), ps=ps_assumed,
                                llr_clip=llr_clip)
    lattice = forward_backward(y, tmpl, params)
    return posterior_llrs(lattice, y, tmpl, params)


def oracle_scan(trials: int, seed: int = 0, *, t_max: int = 12,
                pd_grid=(0.0, 0.05, 0.2), ps_grid=(0.0, 0.05, 0.2)):
    """Compare lattice posteriors against enumeration on random instances.

    Instances mix bare coded templates and marker templates; received words
    are drawn by transmitting random bits at the same (pd, ps) the detector
    assumes. Returns (instances checked, max absolute LLR deviation).
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for trial in range(trials):
        pd = float(pd_grid[rng.integers(len(pd_grid))])
        ps = float(ps_grid[rng.integers(len(ps_grid))])
        if rng.random() < 0.5:
            T = int(rng.integers(1, t_max + 1))
            tmpl = TemplateSpec(mask=np.zeros(T, bool), values=np.zeros(T, np.uint8))
        else:
            nc = int(rng.integers(1, 5))
            nm = int(rng.integers(1, 3))
            cfg = MarkerConfig(marker=rng.integers(0, 2, nm), nc=nc)
            n_max = max(1, t_max * nc // (nc + nm))
            tmpl = make_template(cfg, int(rng.integers(1, n_max + 1)))
        x = rng.integers(0, 2, tmpl.length).astype(np.uint8)
        x[tmpl.mask] = tmpl.values[tmpl.mask]
        keep = rng.random(tmpl.length) >= pd
        y = x[keep]
        flip = rng.random(y.size) < ps
        y = y ^ flip.astype(np.uint8)
        params = DetectorParams(pd=pd, ps=ps)
        lattice = forward_backward(y, tmpl, params)
        got = posterior_llrs(lattice, y, tmpl, params)
        want = brute_force_llrs(y, tmpl, params)
        worst = max(worst, float(np.abs(got - want).max()))
    return trials, worst


def brute_force_llrs(y, tmpl: TemplateSpec, params: DetectorParams) -> np.ndarray:
    """Exact LLRs by enumerating every size-R survivor subset (small T only).

    Each subset S maps received bit j to transmitted position S[j]; the
    subset weight is pd^(T-R) (1-pd)^R times the product of per-position
    emissions. Coded-bit posteriors pin x_t and reweight the one slot
    (or apply the bare 1/2 prior when t was deleted).
    """
    y = as_bits(y)
    T = tmpl.length
    R = y.size
    if T > 14:
        raise ValueError(f"T={T} too large for enumeration oracle")
    if R > T:
        raise ValueError(f"received length {R} exceeds template length {T}")
    pd, ps = params.pd, params.ps
    emit = emission_table(tmpl, ps)

    # C(T,0) yields a single empty subset -> shape (1, 0)
    subs = np.array(list(itertools.combinations(range(T), R)), dtype=np.int64)
    if R > 0:
        w = pd ** (T - R) * (1.0 - pd) ** R * emit[subs, y].prod(axis=1)
    else:
        w = np.full(1, pd**T)
    total = w.sum()
    if total <= 0.0:
        raise kernels.ZeroMassError(
            "zero probability mass; assumed parameters inconsistent with received length"
        )

    llrs = np.empty(T)
    p_obs_given_0 = np.where(y == 0, 1.0 - ps, ps)
    for t in range(T):
        if tmpl.mask[t]:
            continue
        hit = subs == t
        in_rows = hit.any(axis=1)
        out_mass = w[~in_rows].sum()
        if in_rows.any():
            j = np.argmax(hit[in_rows], axis=1)
            wi = w[in_rows]
            num0 = float(wi @ p_obs_given_0[j]) + 0.5 * out_mass
            num1 = float(wi @ (1.0 - p_obs_given_0[j])) + 0.5 * out_mass
        else:
            num0 = num1 = 0.5 * out_mass
        with np.errstate(divide="ignore"):
            llrs[t] = np.log(num0) - np.log(num1)
    if params.clip:
        llrs = np.clip(llrs, -params.llr_clip, params.llr_clip)
    mk = tmpl.mask
    llrs[mk] = np.where(tmpl.values[mk] == 0, params.llr_clip, -params.llr_clip)
    return llrs
