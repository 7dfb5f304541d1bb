"""Sectioned key=value experiment/training configuration files.

Flat INI syntax (configparser). Unknown values raise ConfigError naming the
offending ``[section] key``. See the configs/ directory for annotated
examples of every section.
"""
from __future__ import annotations

import configparser
from dataclasses import dataclass

from .estimator import EstimatorConfig
from .marker import MarkerConfig
from .oneshot import DecoderConfig
from .pipeline import ExperimentConfig


class ConfigError(ValueError):
    pass


def _read(path) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        with open(path) as f:
            cp.read_file(f)
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from None
    except configparser.Error as e:
        raise ConfigError(f"malformed config {path}: {e}") from None
    return cp


def _get(cp, section, key, cast, default):
    if not cp.has_option(section, key):
        if default is _REQUIRED:
            raise ConfigError(f"[{section}] {key}: missing required key")
        return default
    raw = cp.get(section, key)
    try:
        return cast(raw)
    except (ValueError, TypeError):
        raise ConfigError(f"[{section}] {key}: cannot parse {raw!r}") from None


_REQUIRED = object()


def _bool(raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(raw)


def _float_list(raw: str) -> tuple:
    items = [t for t in raw.replace(",", " ").split() if t]
    return tuple(float(t) for t in items)


def _int_list(raw: str) -> tuple:
    items = [t for t in raw.replace(",", " ").split() if t]
    return tuple(int(t) for t in items)


def _pattern(raw: str) -> tuple:
    """Marker pattern, either '01' or '0,1'."""
    raw = raw.strip()
    if "," in raw or " " in raw:
        bits = _int_list(raw)
    else:
        bits = tuple(int(ch) for ch in raw)
    if any(b not in (0, 1) for b in bits):
        raise ValueError(raw)
    return bits


def marker_from(cp) -> MarkerConfig:
    pattern = _get(cp, "marker", "pattern", _pattern, (0, 1))
    nc = _get(cp, "marker", "nc", int, 5)
    try:
        return MarkerConfig(marker=pattern, nc=nc)
    except ValueError as e:
        raise ConfigError(f"[marker]: {e}") from None


def load_experiment(path, *, seed=None, workers=None) -> ExperimentConfig:
    cp = _read(path)
    mcfg = marker_from(cp)
    kwargs = dict(
        outer=_get(cp, "outer", "kind", str, "ldpc"),
        alist=_get(cp, "outer", "alist", str, "builtin:ldpc_204_102.alist"),
        k=_get(cp, "outer", "k", int, 105),
        marker=mcfg.marker_tuple(),
        nc=mcfg.nc,
        interleaver_seed=_get(cp, "interleaver", "seed", int, 1),
        detector=_get(cp, "detector", "kind", str, "bcjr"),
        estimator_ckpt=_get(cp, "detector", "checkpoint", str, None),
        decoder=_get(cp, "decoder", "kind", str, "spa"),
        decoder_ckpt=_get(cp, "decoder", "checkpoint", str, None),
        spa_iters=_get(cp, "decoder", "max_iter", int, 100),
        pd_grid=_get(cp, "channel", "pd", _float_list, _REQUIRED),
        ps_grid=_get(cp, "channel", "ps", _float_list, (0.0,)),
        assumed_ps=_get(cp, "detector", "assumed_ps", _float_list, ()),
        estimate_pd=_get(cp, "detector", "estimate_pd", _bool, True),
        llr_clip=_get(cp, "detector", "llr_clip", float, 10.0),
        clip_llrs=_get(cp, "detector", "clip", _bool, True),
        max_frames=_get(cp, "run", "max_frames", int, 1000000),
        min_frame_errors=_get(cp, "run", "min_frame_errors", int, 100),
        batch=_get(cp, "run", "batch", int, 128),
        seed=_get(cp, "run", "seed", int, 0),
        timing=_get(cp, "run", "timing", _bool, False),
        workers=_get(cp, "run", "workers", int, 1),
    )
    if seed is not None:
        kwargs["seed"] = seed
    if workers is not None:
        kwargs["workers"] = workers
    try:
        return ExperimentConfig(**kwargs)
    except ValueError as e:
        raise ConfigError(str(e)) from None


def outer_code_from(cp):
    """Build the outer code object named by the [outer] section."""
    from . import convcode, ldpc
    from .pipeline import resolve_path

    kind = _get(cp, "outer", "kind", str, "ldpc")
    if kind == "ldpc":
        alist = _get(cp, "outer", "alist", str, "builtin:ldpc_204_102.alist")
        return ldpc.load_alist(resolve_path(alist))
    if kind == "conv":
        return convcode.ConvCode(_get(cp, "outer", "k", int, _REQUIRED))
    raise ConfigError(f"[outer] kind: unknown outer code {kind!r}")


def load_estimator_training(path):
    """Returns (EstimatorConfig, outer code) for `train-estimator`."""
    cp = _read(path)
    outer = outer_code_from(cp)
    mcfg = marker_from(cp)
    sec = "estimator"
    if not cp.has_section(sec):
        raise ConfigError(f"[{sec}]: missing section")
    kwargs = dict(
        nc=mcfg.nc,
        marker=mcfg.marker_tuple(),
        feature_mode=_get(cp, sec, "feature_mode", str, "pair-window"),
        num_layers=_get(cp, sec, "layers", int, 2),
        hidden=_get(cp, sec, "hidden", int, 64),
        mlp_dims=_get(cp, sec, "mlp", _int_list, (32, 1)),
        loss=_get(cp, sec, "loss", str, "bce"),
        llr_clip=_get(cp, sec, "llr_clip", float, 10.0),
        bias=_get(cp, sec, "bias", _bool, False),
        steps=_get(cp, sec, "steps", int, _REQUIRED),
        batch=_get(cp, sec, "batch", int, 16),
        base_lr=_get(cp, sec, "base_lr", float, _REQUIRED),
        decay=_get(cp, sec, "decay", float, 0.95),
        decay_every=_get(cp, sec, "decay_every", int, 1000),
        grad_clip=_get(cp, sec, "grad_clip", float, 0.1),
        pd_grid=_get(cp, sec, "train_pd", _float_list, _REQUIRED),
        ps_grid=_get(cp, sec, "train_ps", _float_list, (0.0,)),
        interleaver_seed=_get(cp, "interleaver", "seed", int, 1),
    )
    try:
        return EstimatorConfig(**kwargs), outer
    except ValueError as e:
        raise ConfigError(f"[{sec}]: {e}") from None


@dataclass
class DecoderTrainSpec:
    cfg: DecoderConfig
    k: int
    marker: MarkerConfig
    interleaver_seed: int
    pd_grid: tuple
    ps_grid: tuple
    llr_source: str          # "bcjr" or an estimator checkpoint path
    assumed_ps: float
    estimate_pd: bool
    llr_clip: float


def load_decoder_training(path) -> DecoderTrainSpec:
    cp = _read(path)
    mcfg = marker_from(cp)
    kind = _get(cp, "outer", "kind", str, "conv")
    if kind != "conv":
        raise ConfigError("[outer] kind: one-shot decoder training needs the conv outer code")
    sec = "decoder-train"
    if not cp.has_section(sec):
        raise ConfigError(f"[{sec}]: missing section")
    cfg = DecoderConfig(
        num_layers=_get(cp, sec, "layers", int, 2),
        hidden=_get(cp, sec, "hidden", int, 400),
        mlp_dims=_get(cp, sec, "mlp", _int_list, (32, 1)),
        bias=_get(cp, sec, "bias", _bool, False),
        steps=_get(cp, sec, "steps", int, _REQUIRED),
        batch=_get(cp, sec, "batch", int, 16),
        base_lr=_get(cp, sec, "base_lr", float, 3e-4),
        decay=_get(cp, sec, "decay", float, 1.0),
        decay_every=_get(cp, sec, "decay_every", int, 1000),
        grad_clip=_get(cp, sec, "grad_clip", float, 0.1),
    )
    return DecoderTrainSpec(
        cfg=cfg,
        k=_get(cp, "outer", "k", int, 105),
        marker=mcfg,
        interleaver_seed=_get(cp, "interleaver", "seed", int, 1),
        pd_grid=_get(cp, sec, "train_pd", _float_list, (0.0,)),
        ps_grid=_get(cp, sec, "train_ps", _float_list, (0.0,)),
        llr_source=_get(cp, sec, "llr_source", str, "bcjr"),
        assumed_ps=_get(cp, sec, "assumed_ps", float, 0.0),
        estimate_pd=_get(cp, sec, "estimate_pd", _bool, True),
        llr_clip=_get(cp, sec, "llr_clip", float, 10.0),
    )
