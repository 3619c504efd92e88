"""Versioned binary checkpoint container.

Layout: 8-byte magic, little-endian u32 format version, u32 header length,
a UTF-8 JSON header, then the raw little-endian float64 payload. The header
lists every stored array as (name, offset, shape) in payload items.
"""

from __future__ import annotations

import json
import os
import struct
from pathlib import Path

import numpy as np

MAGIC = b"GAPINNCK"
VERSION = 1


class CheckpointError(ValueError):
    pass


def save_checkpoint(path, meta: dict, arrays: dict[str, np.ndarray]) -> None:
    entries, chunks, off = [], [], 0
    for name, arr in arrays.items():
        a = np.asarray(arr, dtype="<f8")
        entries.append({"name": name, "offset": off, "shape": list(a.shape)})
        chunks.append(a.tobytes())
        off += a.size
    header = json.dumps({"meta": meta, "arrays": entries}, sort_keys=True).encode()
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with tmp.open("wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", VERSION, len(header)))
        fh.write(header)
        for c in chunks:
            fh.write(c)
    os.replace(tmp, path)


def load_checkpoint(path) -> tuple[dict, dict[str, np.ndarray]]:
    raw = Path(path).read_bytes()
    if raw[:8] != MAGIC:
        raise CheckpointError(f"{path}: not a checkpoint file")
    version, hlen = struct.unpack("<II", raw[8:16])
    if version != VERSION:
        raise CheckpointError(f"{path}: unsupported checkpoint version {version}")
    header = json.loads(raw[16:16 + hlen])
    payload = np.frombuffer(raw[16 + hlen:], dtype="<f8")
    arrays = {}
    for e in header["arrays"]:
        n = int(np.prod(e["shape"])) if e["shape"] else 1
        arrays[e["name"]] = payload[e["offset"]:e["offset"] + n].astype(float).reshape(e["shape"])
    return header["meta"], arrays
