"""End-to-end frame simulation and Monte Carlo BER/FER sweeps.

Transmit: message -> outer encode -> interleave -> insert markers -> channel.
Receive: detect per-position LLRs (MAP lattice or BI-GRU estimator) -> strip
marker positions -> deinterleave -> outer decode (SPA / Viterbi / BI-GRU).

Every frame is seeded from (master seed, global frame index), so outcomes
are independent of worker count and batch size; stopping decisions happen
only at batch boundaries, making the set of simulated frames reproducible.
"""
from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from importlib import resources

import numpy as np

from . import bcjr, convcode, ldpc, oneshot
from .channel import ChannelParams, transmit
from .estimator import Estimator, estimate_llrs, load_estimator
from .kernels import ZeroMassError
from .marker import (MarkerConfig, deinterleave_llrs, insert_markers, interleave,
                     make_interleaver, strip_marker_llrs)

DETECTORS = ("bcjr", "bigru")
DECODERS = ("spa", "viterbi_sdd", "viterbi_hdd", "bigru")


def resolve_path(path: str) -> str:
    """Paths starting with ``builtin:`` name files shipped under markerdec/data."""
    if path.startswith("builtin:"):
        res = resources.files("markerdec").joinpath(f"data/{path[8:]}")
        if not res.is_file():
            raise FileNotFoundError(f"no builtin data file named {path[8:]!r}")
        return str(res)
    return path


@dataclass
class ExperimentConfig:
    outer: str = "ldpc"                  # "ldpc" | "conv"
    alist: str = "builtin:ldpc_204_102.alist"
    k: int = 105                         # conv outer only
    marker: tuple = (0, 1)
    nc: int = 5
    interleaver_seed: int = 1
    detector: str = "bcjr"
    estimator_ckpt: str | None = None
    decoder: str = "spa"
    decoder_ckpt: str | None = None
    spa_iters: int = 100
    pd_grid: tuple = (0.05,)
    ps_grid: tuple = (0.0,)
    assumed_ps: tuple = ()               # empty -> assume the true ps
    estimate_pd: bool = True
    llr_clip: float = 10.0
    clip_llrs: bool = True
    max_frames: int = 1000000
    min_frame_errors: int = 100
    batch: int = 128
    seed: int = 0
    timing: bool = False
    workers: int = 1

    def __post_init__(self):
        if self.detector not in DETECTORS:
            raise ValueError(f"unknown detector {self.detector!r}")
        if self.decoder not in DECODERS:
            raise ValueError(f"unknown decoder {self.decoder!r}")
        if self.outer == "ldpc" and self.decoder != "spa":
            raise ValueError(f"ldpc outer code needs the spa decoder, not {self.decoder!r}")
        if self.outer == "conv" and self.decoder == "spa":
            raise ValueError("spa decoder needs the ldpc outer code")
        if self.outer not in ("ldpc", "conv"):
            raise ValueError(f"unknown outer code {self.outer!r}")
        if self.detector == "bigru" and not self.estimator_ckpt:
            raise ValueError("bigru detector needs estimator_ckpt")
        if self.decoder == "bigru" and not self.decoder_ckpt:
            raise ValueError("bigru decoder needs decoder_ckpt")
        if not self.pd_grid or not self.ps_grid:
            raise ValueError("channel grids must be nonempty")


class FrameSetup:
    """Live objects for one experiment: codes, interleaver, loaded models."""

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        if cfg.outer == "ldpc":
            self.code = ldpc.load_alist(resolve_path(cfg.alist))
        else:
            self.code = convcode.ConvCode(cfg.k)
        self.mcfg = MarkerConfig(marker=cfg.marker, nc=cfg.nc)
        self.il = make_interleaver(self.code.n, cfg.interleaver_seed)
        self.tmpl = bcjr.make_template(self.mcfg, self.code.n)
        self.T = self.tmpl.length
        self.estimator: Estimator | None = None
        if cfg.detector == "bigru":
            self.estimator = load_estimator(resolve_path(cfg.estimator_ckpt))
        self.decoder_model = None
        if cfg.decoder == "bigru":
            self.decoder_model = oneshot.load_decoder(resolve_path(cfg.decoder_ckpt))

    # -- receive-side pieces ------------------------------------------------
    def detect(self, y, pd: float, assumed_ps: float) -> np.ndarray:
        cfg = self.cfg
        if cfg.detector == "bigru":
            return estimate_llrs(y, self.estimator, self.T)
        pd_assumed = bcjr.estimate_pd(self.T, y.size) if cfg.estimate_pd else pd
        params = bcjr.DetectorParams(pd=pd_assumed, ps=assumed_ps,
                                     llr_clip=cfg.llr_clip, clip=cfg.clip_llrs)
        lattice = bcjr.forward_backward(y, self.tmpl, params)
        return bcjr.posterior_llrs(lattice, y, self.tmpl, params)

    def outer_decode(self, lstar) -> np.ndarray:
        cfg = self.cfg
        if cfg.decoder == "spa":
            return self.code.decode(lstar, max_iter=cfg.spa_iters).message
        if cfg.decoder == "viterbi_sdd":
            return convcode.viterbi_sdd(lstar)
        if cfg.decoder == "viterbi_hdd":
            return convcode.viterbi_hdd(convcode.llr_to_hard(lstar))
        return oneshot.decode_messages(lstar, self.decoder_model)


def frame_rng(master_seed: int, frame_index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([master_seed, frame_index]))


def run_frame(setup: FrameSetup, pd: float, ps: float, assumed_ps: float,
              frame_index: int) -> tuple[int, bool]:
    """Simulate one frame; returns (message bit errors, frame error flag)."""
    rng = frame_rng(setup.cfg.seed, frame_index)
    m = rng.integers(0, 2, setup.code.k).astype(np.uint8)
    x = insert_markers(interleave(setup.code.encode(m), setup.il), setup.mcfg)
    y = transmit(x, ChannelParams(pd, ps), seed=int(rng.integers(2**63)))
    try:
        llrs = setup.detect(y, pd, assumed_ps)
    except ZeroMassError:
        # A mismatched detector (e.g. assumed ps=0 against a flipping channel)
        # can find the received word impossible under its model.  Treat that as
        # a detection failure: no information, zero LLRs into the outer decoder.
        llrs = np.zeros(setup.T)
    lstar = deinterleave_llrs(strip_marker_llrs(llrs, setup.mcfg, setup.code.n), setup.il)
    mhat = setup.outer_decode(lstar)
    errs = int(np.count_nonzero(mhat != m))
    return errs, errs > 0


def _simulate_range(setup, pd, ps, assumed_ps, start, count):
    bit_errors = 0
    frame_errors = 0
    for idx in range(start, start + count):
        errs, bad = run_frame(setup, pd, ps, assumed_ps, idx)
        bit_errors += errs
        frame_errors += bad
    return bit_errors, frame_errors


_POOL_SETUP: FrameSetup | None = None


def _pool_init(cfg):
    global _POOL_SETUP
    _POOL_SETUP = FrameSetup(cfg)


def _pool_task(args):
    return _simulate_range(_POOL_SETUP, *args)


@dataclass
class CurvePoint:
    pd: float
    ps: float
    assumed_ps: float
    frames: int
    bit_errors: int
    frame_errors: int
    ber: float
    fer: float
    wall_time: float

    CSV_HEADER = "pd,ps,assumed_ps,frames,bit_errors,frame_errors,ber,fer,wall_time"

    def csv_row(self) -> str:
        return ",".join([
            f"{self.pd:.6g}", f"{self.ps:.6g}", f"{self.assumed_ps:.6g}",
            str(self.frames), str(self.bit_errors), str(self.frame_errors),
            f"{self.ber:.6g}", f"{self.fer:.6g}", f"{self.wall_time:.6g}",
        ])


def _plan_batches(cfg: ExperimentConfig):
    """Frame index ranges between stopping checks."""
    if cfg.min_frame_errors == 0:
        yield 0, 1
        return
    start = 0
    while start < cfg.max_frames:
        count = min(cfg.batch, cfg.max_frames - start)
        yield start, count
        start += count


def run_point(cfg: ExperimentConfig, pd: float, ps: float,
              assumed_ps: float | None = None, setup: FrameSetup | None = None,
              pool: ProcessPoolExecutor | None = None) -> CurvePoint:
    """Simulate frames until min_frame_errors or max_frames (>= 1 frame)."""
    if assumed_ps is None:
        assumed_ps = ps
    if setup is None and pool is None:
        setup = FrameSetup(cfg)
    t0 = time.perf_counter()
    frames = bit_errors = frame_errors = 0
    batches = _plan_batches(cfg)
    if pool is None:
        for start, count in batches:
            be, fe = _simulate_range(setup, pd, ps, assumed_ps, start, count)
            frames += count
            bit_errors += be
            frame_errors += fe
            if frame_errors >= cfg.min_frame_errors:
                break
    else:
        # Keep a bounded window of batches in flight; consume strictly in
        # submission order so stopping matches the serial schedule.
        from collections import deque

        window = max(2 * cfg.workers, 2)
        pending = deque()
        exhausted = False
        while True:
            while not exhausted and len(pending) < window:
                nxt = next(batches, None)
                if nxt is None:
                    exhausted = True
                    break
                pending.append((nxt[1], pool.submit(_pool_task, (pd, ps, assumed_ps, *nxt))))
            if not pending:
                break
            count, fut = pending.popleft()
            be, fe = fut.result()
            frames += count
            bit_errors += be
            frame_errors += fe
            if frame_errors >= cfg.min_frame_errors:
                for _, f in pending:
                    f.cancel()
                break
    wall = time.perf_counter() - t0 if cfg.timing else 0.0
    k = cfg.k if cfg.outer == "conv" else None
    if setup is not None:
        k = setup.code.k
    elif k is None:
        k = ldpc.load_alist(resolve_path(cfg.alist)).k
    return CurvePoint(pd, ps, assumed_ps, frames, bit_errors, frame_errors,
                      bit_errors / (k * frames), frame_errors / frames, wall)


def sweep_points(cfg: ExperimentConfig):
    """Sorted cartesian product of the channel grids and the assumed-ps list."""
    pts = []
    for pd in sorted(cfg.pd_grid):
        for ps in sorted(cfg.ps_grid):
            for aps in sorted(cfg.assumed_ps) if cfg.assumed_ps else [ps]:
                pts.append((pd, ps, aps))
    return pts


def run_sweep(cfg: ExperimentConfig) -> list[CurvePoint]:
    points = sweep_points(cfg)
    out = []
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers, initializer=_pool_init,
                                 initargs=(cfg,)) as pool:
            for pd, ps, aps in points:
                out.append(run_point(cfg, pd, ps, aps, pool=pool))
    else:
        setup = FrameSetup(cfg)
        for pd, ps, aps in points:
            out.append(run_point(cfg, pd, ps, aps, setup=setup))
    return out


def write_csv(points, path) -> None:
    with open(path, "w") as f:
        f.write(CurvePoint.CSV_HEADER + "\n")
        for p in points:
            f.write(p.csv_row() + "\n")


def decoder_training_frame_fn(k: int, mcfg: MarkerConfig, interleaver_seed: int,
                              pd_grid, ps_grid, llr_source: str = "bcjr", *,
                              assumed_ps: float = 0.0, estimate_pd: bool = True,
                              llr_clip: float = 10.0):
    """Build the frame generator feeding one-shot decoder training.

    ``llr_source`` is either "bcjr" (MAP detection, deletion probability
    estimated from lengths when ``estimate_pd``) or the path of a frozen
    estimator checkpoint. The returned callable maps an rng to
    (message, stripped deinterleaved LLRs).
    """
    code = convcode.ConvCode(k)
    il = make_interleaver(code.n, interleaver_seed)
    tmpl = bcjr.make_template(mcfg, code.n)
    T = tmpl.length
    est = None if llr_source == "bcjr" else load_estimator(resolve_path(llr_source))
    pd_grid = tuple(pd_grid)
    ps_grid = tuple(ps_grid)

    def frame_fn(rng):
        m = rng.integers(0, 2, k).astype(np.uint8)
        x = insert_markers(interleave(code.encode(m), il), mcfg)
        pd = float(pd_grid[rng.integers(len(pd_grid))])
        ps = float(ps_grid[rng.integers(len(ps_grid))])
        y = transmit(x, ChannelParams(pd, ps), seed=int(rng.integers(2**63)))
        if est is not None:
            llrs = estimate_llrs(y, est, T)
        else:
            pd_assumed = bcjr.estimate_pd(T, y.size) if estimate_pd else pd
            params = bcjr.DetectorParams(pd=pd_assumed, ps=assumed_ps, llr_clip=llr_clip)
            lattice = bcjr.forward_backward(y, tmpl, params)
            llrs = bcjr.posterior_llrs(lattice, y, tmpl, params)
        lstar = deinterleave_llrs(strip_marker_llrs(llrs, mcfg, code.n), il)
        return m, lstar

    return frame_fn
