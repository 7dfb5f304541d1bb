"""Model checkpoint container.

Layout: a UTF-8 text header terminated by an ``end`` line, followed by the
raw parameter payload — every array as little-endian float32, row-major, in
header order. Round-trips are bit-exact for float32 models.

    MARKERDEC-CKPT 1
    meta <key> <value>
    ...
    array <name> <d0>x<d1>...
    ...
    end
    <raw float32 bytes>
"""
from __future__ import annotations

import hashlib
from collections import OrderedDict

import numpy as np

MAGIC = "MARKERDEC-CKPT 1"
_END = b"\nend\n"


def save_checkpoint(path, meta: dict, arrays) -> None:
    lines = [MAGIC]
    for key, value in meta.items():
        key, value = str(key), str(value)
        if " " in key or "\n" in key or "\n" in value:
            raise ValueError(f"malformed meta entry {key!r}")
        lines.append(f"meta {key} {value}")
    blobs = []
    for name, arr in arrays:
        arr = np.asarray(arr)
        shape = "x".join(str(d) for d in arr.shape) if arr.ndim else "scalar"
        lines.append(f"array {name} {shape}")
        blobs.append(np.ascontiguousarray(arr, dtype="<f4").tobytes())
    header = "\n".join(lines).encode() + _END
    with open(path, "wb") as f:
        f.write(header)
        for blob in blobs:
            f.write(blob)


def load_checkpoint(path):
    with open(path, "rb") as f:
        raw = f.read()
    cut = raw.find(_END)
    if cut < 0:
        raise ValueError(f"{path}: missing end-of-header marker")
    header = raw[:cut].decode()
    payload = raw[cut + len(_END):]
    lines = header.splitlines()
    if not lines or lines[0] != MAGIC:
        raise ValueError(f"{path}: not a checkpoint file")
    meta = OrderedDict()
    arrays = OrderedDict()
    offset = 0
    for line in lines[1:]:
        kind, rest = line.split(" ", 1)
        if kind == "meta":
            key, value = rest.split(" ", 1)
            meta[key] = value
        elif kind == "array":
            name, shape_s = rest.rsplit(" ", 1)
            shape = () if shape_s == "scalar" else tuple(int(d) for d in shape_s.split("x"))
            count = int(np.prod(shape, dtype=np.int64)) if shape else 1
            end = offset + 4 * count
            if end > len(payload):
                raise ValueError(f"{path}: payload truncated at array {name}")
            arrays[name] = np.frombuffer(payload[offset:end], dtype="<f4").reshape(shape).copy()
            offset = end
        else:
            raise ValueError(f"{path}: unknown header line {line!r}")
    if offset != len(payload):
        raise ValueError(f"{path}: {len(payload) - offset} trailing payload bytes")
    return meta, arrays


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()
