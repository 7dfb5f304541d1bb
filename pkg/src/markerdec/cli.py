"""Command-line front end: training, evaluation, sweeps, self-checks."""
from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from . import __version__, bcjr, config, oneshot, pipeline
from .estimator import save_estimator, train_estimator
from .nn import load_checkpoint, sha256_file
from .nn.gradcheck import desk_gradcheck


def _progress(total):
    every = max(1, total // 20)
    window = []

    def on_step(step, loss):
        window.append(loss)
        if (step + 1) % every == 0 or step + 1 == total:
            print(f"step {step + 1}/{total}  loss {np.mean(window):.5f}", flush=True)
            window.clear()

    return on_step


def cmd_train_estimator(args):
    cfg, outer = config.load_estimator_training(args.config)
    t0 = time.perf_counter()
    est, losses = train_estimator(cfg, outer, args.seed, on_step=_progress(cfg.steps))
    out = args.out or "estimator.ckpt"
    save_estimator(out, est, {"train_seed": str(args.seed), "steps": str(cfg.steps)})
    dt = time.perf_counter() - t0
    final = losses[-1] if losses else float("nan")
    print(f"trained {cfg.steps} steps in {dt:.1f}s, final loss {final:.5f} -> {out}")
    return 0


def cmd_train_decoder(args):
    spec = config.load_decoder_training(args.config)
    frame_fn = pipeline.decoder_training_frame_fn(
        spec.k, spec.marker, spec.interleaver_seed, spec.pd_grid, spec.ps_grid,
        spec.llr_source, assumed_ps=spec.assumed_ps, estimate_pd=spec.estimate_pd,
        llr_clip=spec.llr_clip)
    t0 = time.perf_counter()
    model, losses = oneshot.train_decoder(spec.cfg, frame_fn, args.seed,
                                          on_step=_progress(spec.cfg.steps))
    out = args.out or "decoder.ckpt"
    oneshot.save_decoder(out, model, {"train_seed": str(args.seed),
                                      "k": str(spec.k), "steps": str(spec.cfg.steps)})
    dt = time.perf_counter() - t0
    final = losses[-1] if losses else float("nan")
    print(f"trained {spec.cfg.steps} steps in {dt:.1f}s, final loss {final:.5f} -> {out}")
    return 0


def _emit_csv(points, out):
    lines = [pipeline.CurvePoint.CSV_HEADER] + [p.csv_row() for p in points]
    text = "\n".join(lines) + "\n"
    if out:
        with open(out, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def cmd_eval(args):
    cfg = config.load_experiment(args.config, seed=args.seed, workers=args.workers)
    pd, ps, aps = pipeline.sweep_points(cfg)[0]
    point = pipeline.run_point(cfg, pd, ps, aps)
    _emit_csv([point], args.out)
    return 0


def cmd_sweep(args):
    cfg = config.load_experiment(args.config, seed=args.seed, workers=args.workers)
    points = pipeline.run_sweep(cfg)
    _emit_csv(points, args.out)
    return 0


def cmd_oracle_check(args):
    trials, worst = bcjr.oracle_scan(args.trials, args.seed or 0)
    ok = worst < 1e-9
    print(f"{trials} instances, max |LLR deviation| {worst:.3e}: "
          f"{'PASS' if ok else 'FAIL'}")
    return 0 if ok else 1


def cmd_gradcheck(args):
    results = desk_gradcheck(args.seed or 0)
    ok = True
    for label, (worst, _) in results.items():
        good = worst < 1e-4
        ok &= good
        print(f"{label:24s} max rel err {worst:.3e}  {'PASS' if good else 'FAIL'}")
    return 0 if ok else 1


def cmd_info(args):
    meta, arrays = load_checkpoint(args.checkpoint)
    print(f"checkpoint {args.checkpoint}")
    print(f"sha256 {sha256_file(args.checkpoint)}")
    for key, value in meta.items():
        print(f"meta {key} = {value}")
    total = 0
    for name, arr in arrays.items():
        print(f"array {name} {arr.shape}")
        total += arr.size
    print(f"total values {total}")
    return 0


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="markerdec",
                                 description="marker-coded deletion-channel toolkit")
    ap.add_argument("--version", action="version", version=f"markerdec {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, with_config=True):
        p = sub.add_parser(name)
        if with_config:
            p.add_argument("config")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None)
        p.add_argument("--workers", type=int, default=None)
        p.set_defaults(fn=fn)
        return p

    p = add("train-estimator", cmd_train_estimator)
    p = add("train-decoder", cmd_train_decoder)
    add("eval", cmd_eval)
    add("sweep", cmd_sweep)
    p = add("oracle-check", cmd_oracle_check, with_config=False)
    p.add_argument("--trials", type=int, default=500)
    add("gradcheck", cmd_gradcheck, with_config=False)
    p = sub.add_parser("info")
    p.add_argument("checkpoint")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(fn=cmd_info)

    args = ap.parse_args(argv)
    if getattr(args, "seed", None) is None and args.command in (
            "train-estimator", "train-decoder"):
        args.seed = 0
    try:
        return args.fn(args)
    except (config.ConfigError, ValueError, OSError, KeyError, FloatingPointError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
