"""Binary checkpoint format (little-endian).

Layout::

    b"LDFW"            magic
    u32                format version
    u8                 model kind tag
    u32                number of tensors
    per tensor:
        u16 + bytes    UTF-8 name
        u8             rank
        u32 * rank     dims
        f32 * prod     row-major payload
"""

from __future__ import annotations

import enum
import os
import struct

import numpy as np

from .core import ConditionedRegressor

MAGIC = b"LDFW"
VERSION = 1
_META = "meta.spec"
_SPEC_KEYS = ("input_dim", "output_dim", "cond_dim", "width", "depth", "use_time")


class Kind(enum.IntEnum):
    ENC = 1
    DEC = 2
    FM = 3
    LAT = 4


class CheckpointError(ValueError):
    pass


class KindMismatchError(CheckpointError):
    def __init__(self, expected, found, path=None):
        self.expected = expected
        self.found = found
        where = f" in {path}" if path else ""
        super().__init__(f"expected a {expected.name} checkpoint, found {found.name}{where}")


def write_tensors(path, kind: Kind, tensors: dict[str, np.ndarray]) -> None:
    chunks = [MAGIC, struct.pack("<IBI", VERSION, int(kind), len(tensors))]
    for name, arr in tensors.items():
        raw = name.encode("utf-8")
        arr = np.asarray(arr, dtype="<f4")
        chunks.append(struct.pack("<H", len(raw)))
        chunks.append(raw)
        chunks.append(struct.pack("<B", arr.ndim))
        chunks.append(struct.pack(f"<{arr.ndim}I", *arr.shape))
        chunks.append(arr.tobytes())
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(b"".join(chunks))
    os.replace(tmp, path)


def read_tensors(path) -> tuple[Kind, dict[str, np.ndarray]]:
    with open(path, "rb") as fh:
        buf = fh.read()
    if buf[:4] != MAGIC:
        raise CheckpointError(f"{path}: bad magic {buf[:4]!r}")
    try:
        version, kind, count = struct.unpack_from("<IBI", buf, 4)
        if version != VERSION:
            raise CheckpointError(f"{path}: unsupported format version {version}")
        pos = 13
        tensors = {}
        for _ in range(count):
            (nlen,) = struct.unpack_from("<H", buf, pos)
            pos += 2
            name = buf[pos:pos + nlen].decode("utf-8")
            pos += nlen
            (rank,) = struct.unpack_from("<B", buf, pos)
            pos += 1
            dims = struct.unpack_from(f"<{rank}I", buf, pos)
            pos += 4 * rank
            size = int(np.prod(dims, dtype=np.int64))
            if pos + 4 * size > len(buf):
                raise CheckpointError(f"{path}: truncated payload for {name!r}")
            tensors[name] = np.frombuffer(buf, dtype="<f4", count=size, offset=pos).reshape(dims).copy()
            pos += 4 * size
    except struct.error as exc:
        raise CheckpointError(f"{path}: truncated file") from exc
    try:
        kind = Kind(kind)
    except ValueError:
        raise CheckpointError(f"{path}: unknown model kind tag {kind}") from None
    return kind, tensors


def save_model(path, model: ConditionedRegressor, kind: Kind, extra=None) -> None:
    spec = model.spec()
    tensors = {_META: np.array([float(spec[k]) for k in _SPEC_KEYS])}
    for name, arr in (extra or {}).items():
        tensors[f"meta.{name}"] = np.atleast_1d(np.asarray(arr, dtype=np.float64))
    tensors.update(model.params)
    write_tensors(path, kind, tensors)


def load_model(path, expected: Kind | None = None):
    """Load a model; returns ``(model, extra_meta)``."""
    kind, tensors = read_tensors(path)
    if expected is not None and kind != expected:
        raise KindMismatchError(expected, kind, path)
    if _META not in tensors:
        raise CheckpointError(f"{path}: missing {_META}")
    spec = dict(zip(_SPEC_KEYS, (int(v) for v in tensors.pop(_META))))
    extra = {k[5:]: v for k, v in tensors.items() if k.startswith("meta.")}
    model = ConditionedRegressor(**spec)
    for name in model.params:
        if name not in tensors:
            raise CheckpointError(f"{path}: missing tensor {name!r}")
        if tensors[name].shape != model.params[name].shape:
            raise CheckpointError(f"{path}: tensor {name!r} has wrong shape")
        model.params[name] = np.ascontiguousarray(tensors[name], dtype=model.dtype)
    return model, extra
