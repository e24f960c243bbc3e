"""binary checkpoint format"""
from __future__ import annotations

import io
import os
import struct
from typing import Any, Mapping

import numpy as np
import torch
import yaml

from pyseld.exceptions import CheckpointFormatError

MAGIC = b"PSCK"
VERSION = 1

_DTYPES = {0: np.dtype("<f4"), 1: np.dtype("<f8"), 2: np.dtype("<i8")}
_CODES = {dtype.name: code for code, dtype in _DTYPES.items()}

Sections = Mapping[str, Mapping[str, torch.Tensor]]


def _write_string(stream: io.BufferedIOBase, value: str) -> None:
    data = value.encode("utf-8")
    stream.write(struct.pack("<H", len(data)))
    stream.write(data)


def _read(stream: io.BufferedIOBase, fmt: str) -> tuple:

    size = struct.calcsize(fmt)
    data = stream.read(size)

    if len(data) != size:
        raise CheckpointFormatError("checkpoint is truncated")

    return struct.unpack(fmt, data)


def _read_string(stream: io.BufferedIOBase) -> str:

    (length,) = _read(stream, "<H")
    data = stream.read(length)

    if len(data) != length:
        raise CheckpointFormatError("checkpoint is truncated")

    return data.decode("utf-8")


def write_checkpoint(path: str | os.PathLike, sections: Sections, metadata: Mapping[str, Any] | None = None) -> None:
    """Write named sections of named tensors.

    Layout: magic, version, YAML metadata block, then per section its
    name and records of (name, dtype code, rank, dims, little-endian
    values) in insertion order."""

    meta = yaml.safe_dump(dict(metadata or {}), sort_keys=False).encode("utf-8")

    with open(path, mode="wb") as stream:
        stream.write(struct.pack("<4sII", MAGIC, VERSION, len(meta)))
        stream.write(meta)
        stream.write(struct.pack("<I", len(sections)))

        for section, tensors in sections.items():
            _write_string(stream, section)
            stream.write(struct.pack("<I", len(tensors)))

            for name, tensor in tensors.items():
                values = tensor.detach().cpu().numpy()

                if values.dtype.name not in _CODES:
                    raise CheckpointFormatError(f"unsupported dtype {values.dtype} for '{name}'")

                _write_string(stream, name)
                stream.write(struct.pack(f"<BB{values.ndim}Q", _CODES[values.dtype.name], values.ndim, *values.shape))
                stream.write(np.ascontiguousarray(values, dtype=_DTYPES[_CODES[values.dtype.name]]).tobytes())


def read_checkpoint(path: str | os.PathLike) -> tuple[dict[str, dict[str, torch.Tensor]], dict[str, Any]]:
    """Read sections and metadata written by write_checkpoint"""

    with open(path, mode="rb") as stream:

        magic, version, meta_size = _read(stream, "<4sII")
        if magic != MAGIC or version != VERSION:
            raise CheckpointFormatError(f"'{path}' is not a version {VERSION} checkpoint")

        metadata = yaml.safe_load(stream.read(meta_size).decode("utf-8")) or {}
        (n_sections,) = _read(stream, "<I")

        sections = {}
        for _ in range(n_sections):
            section = _read_string(stream)
            (n_records,) = _read(stream, "<I")

            tensors = {}
            for _ in range(n_records):
                name = _read_string(stream)
                code, rank = _read(stream, "<BB")

                if code not in _DTYPES:
                    raise CheckpointFormatError(f"unknown dtype code {code} for '{name}'")

                dims = _read(stream, f"<{rank}Q")
                dtype = _DTYPES[code]

                count = int(np.prod(dims, dtype=np.int64))
                data = stream.read(count * dtype.itemsize)
                if len(data) != count * dtype.itemsize:
                    raise CheckpointFormatError(f"record '{name}' is truncated")

                tensors[name] = torch.from_numpy(np.frombuffer(data, dtype=dtype).reshape(dims).copy())

            sections[section] = tensors

        if stream.read(1):
            raise CheckpointFormatError(f"trailing bytes after the last section of '{path}'")

    return sections, metadata
