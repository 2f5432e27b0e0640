"""Versioned tensor container shared by checkpoints and sub-band dumps.

Layout: a UTF-8 text header terminated by an ``end_header`` line, then the
tensors as little-endian float32 in header order::

    fdlp-dereverb-tensors
    format_version = 1
    kind = checkpoint
    meta hidden_size = 64
    tensor time.l0.fw.Wx 128 256
    end_header
    <payload>

Meta values are JSON.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .exceptions import InvalidArgumentError

MAGIC = "fdlp-dereverb-tensors"
FORMAT_VERSION = 1
_DTYPE = np.dtype("<f4")


class ContainerFormatError(InvalidArgumentError):
    """Malformed or inconsistent container file."""


def write_container(path, tensors: dict, meta: dict | None = None, kind: str = "dump") -> Path:
    """Write named arrays (cast to float32) and JSON-serialisable metadata."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [MAGIC, f"format_version = {FORMAT_VERSION}", f"kind = {kind}"]
    for key, value in (meta or {}).items():
        if not key or any(ch.isspace() for ch in key):
            raise InvalidArgumentError(f"bad meta key {key!r}")
        lines.append(f"meta {key} = {json.dumps(value)}")
    arrays = []
    for name, value in tensors.items():
        if not name or any(ch.isspace() for ch in name):
            raise InvalidArgumentError(f"bad tensor name {name!r}")
        arr = np.ascontiguousarray(value, dtype=_DTYPE)
        lines.append("tensor " + " ".join([name] + [str(d) for d in arr.shape]))
        arrays.append(arr)
    lines.append("end_header")
    with open(path, "wb") as fh:
        fh.write(("\n".join(lines) + "\n").encode("utf-8"))
        for arr in arrays:
            fh.write(arr.tobytes(order="C"))
    return path


def read_container(path):
    """Return ``(tensors, meta, kind)``; tensors keep float32 precision."""
    path = Path(path)
    raw = path.read_bytes()
    marker = b"\nend_header\n"
    end = raw.find(marker)
    if not raw.startswith(MAGIC.encode()) or end < 0:
        raise ContainerFormatError(f"{path}: not a tensor container")
    header = raw[:end].decode("utf-8").split("\n")
    payload = memoryview(raw)[end + len(marker):]

    version = kind = None
    meta, shapes = {}, []
    for lineno, line in enumerate(header[1:], start=2):
        if line.startswith("format_version = "):
            version = int(line.split("=", 1)[1])
        elif line.startswith("kind = "):
            kind = line.split("=", 1)[1].strip()
        elif line.startswith("meta "):
            key, _, value = line[5:].partition(" = ")
            try:
                meta[key] = json.loads(value)
            except json.JSONDecodeError as exc:
                raise ContainerFormatError(f"{path}:{lineno}: bad meta value") from exc
        elif line.startswith("tensor "):
            parts = line.split()
            try:
                shapes.append((parts[1], tuple(int(d) for d in parts[2:])))
            except (IndexError, ValueError) as exc:
                raise ContainerFormatError(f"{path}:{lineno}: bad tensor line") from exc
        else:
            raise ContainerFormatError(f"{path}:{lineno}: unrecognised header line {line!r}")
    if version is None:
        raise ContainerFormatError(f"{path}: missing format_version")
    if version != FORMAT_VERSION:
        raise ContainerFormatError(f"{path}: unsupported format_version {version}")

    expected = sum(int(np.prod(s)) for _, s in shapes) * _DTYPE.itemsize
    if expected != len(payload):
        raise ContainerFormatError(
            f"{path}: payload is {len(payload)} bytes, header declares {expected}")
    tensors, offset = {}, 0
    for name, shape in shapes:
        count = int(np.prod(shape))
        tensors[name] = np.frombuffer(payload, _DTYPE, count, offset).reshape(shape).copy()
        offset += count * _DTYPE.itemsize
    return tensors, meta, kind
