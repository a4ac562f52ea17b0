# -*- coding: utf-8 -*-
"""
ca2n.checkpoint
~~~~~~~~~~~~~~~

Versioned binary serialization of named parameter tensors.

Layout, all integers unsigned 32-bit little-endian::

    b"CA2N" | version | count
    count x ( name length | UTF-8 name | rank | dims... | float32 data )
    CRC32 of everything before it

:copyright: (c) 2024 by the ca2n Team.
:license: BSD, see LICENSE for more details.
"""

import logging
import os
import struct
import zlib
from collections import OrderedDict

import numpy as np

from .core.exceptions import CheckpointError, ValidationError

logger = logging.getLogger(__name__)

MAGIC = b"CA2N"
VERSION = 1
ELEMENT = np.dtype("<f4")
_U32 = struct.Struct("<I")


def _modules_of(models):
    if hasattr(models, "modules"):
        return models.modules()
    return models


def collect_tensors(models):
    """Flattens ``{prefix: module}`` (or an object with ``modules()``) into
    an ordered ``{"prefix.name": array}`` mapping."""
    tensors = OrderedDict()
    for prefix, module in _modules_of(models).items():
        for name, param in module.named_parameters(prefix + "."):
            tensors[name] = param.numpy()
    return tensors


def encode_checkpoint(tensors):
    """Serializes ``{name: array}`` to bytes."""
    chunks = [MAGIC, _U32.pack(VERSION), _U32.pack(len(tensors))]
    for name, array in tensors.items():
        array = np.asarray(array)
        if not np.all(np.isfinite(array)):
            raise CheckpointError("tensor {} holds non-finite values".format(name))
        raw_name = name.encode("utf-8")
        chunks.append(_U32.pack(len(raw_name)))
        chunks.append(raw_name)
        chunks.append(_U32.pack(array.ndim))
        chunks.extend(_U32.pack(dim) for dim in array.shape)
        chunks.append(np.ascontiguousarray(array, dtype=ELEMENT).tobytes())
    payload = b"".join(chunks)
    return payload + _U32.pack(zlib.crc32(payload) & 0xFFFFFFFF)


def save_checkpoint(models, path):
    """Writes the parameters of ``models`` to ``path``.

    :param models: ``{name: array}``, ``{prefix: module}`` or an object
        with a ``modules()`` method.
    """
    items = _modules_of(models)
    if all(isinstance(value, np.ndarray) for value in items.values()):
        tensors = items
    else:
        tensors = collect_tensors(items)
    data = encode_checkpoint(tensors)

    directory = os.path.dirname(os.path.abspath(path))
    partial = path + ".partial"
    try:
        os.makedirs(directory, exist_ok=True)
        with open(partial, "wb") as fh:
            fh.write(data)
        os.replace(partial, path)
    except OSError as exc:
        raise CheckpointError("cannot write {}: {}".format(path, exc))
    logger.info(
        "Saved {} tensors ({} bytes) to {}".format(len(tensors), len(data), path)
    )


class _Reader(object):
    def __init__(self, data, path):
        self.data = data
        self.path = path
        self.offset = 0

    def take(self, size, what):
        end = self.offset + size
        if end > len(self.data):
            raise CheckpointError(
                "{}: truncated while reading {} at byte {}".format(
                    self.path, what, self.offset
                )
            )
        chunk = self.data[self.offset:end]
        self.offset = end
        return chunk

    def u32(self, what):
        return _U32.unpack(self.take(_U32.size, what))[0]


def decode_checkpoint(data, path="<bytes>"):
    """Parses checkpoint bytes into an ordered ``{name: array}`` mapping."""
    if len(data) < len(MAGIC) + 3 * _U32.size:
        raise CheckpointError("{}: truncated, only {} bytes".format(path, len(data)))
    if data[:4] != MAGIC:
        raise CheckpointError("{}: not a ca2n checkpoint".format(path))

    payload, trailer = data[:-_U32.size], data[-_U32.size:]
    expected = _U32.unpack(trailer)[0]
    actual = zlib.crc32(payload) & 0xFFFFFFFF
    if actual != expected:
        raise CheckpointError(
            "{}: CRC mismatch (stored {:08x}, computed {:08x})".format(
                path, expected, actual
            )
        )

    reader = _Reader(payload, path)
    reader.take(len(MAGIC), "magic")
    version = reader.u32("version")
    if version != VERSION:
        raise CheckpointError(
            "{}: unknown format version {} (supported: {})".format(
                path, version, VERSION
            )
        )
    count = reader.u32("tensor count")

    tensors = OrderedDict()
    for index in range(count):
        length = reader.u32("name length of tensor {}".format(index))
        try:
            name = reader.take(length, "tensor name").decode("utf-8")
        except UnicodeDecodeError:
            raise CheckpointError(
                "{}: tensor {} has an invalid name".format(path, index)
            )
        if name in tensors:
            raise CheckpointError("{}: duplicate tensor {}".format(path, name))
        rank = reader.u32("rank of {}".format(name))
        shape = tuple(reader.u32("shape of {}".format(name)) for _ in range(rank))
        size = int(np.prod(shape, dtype=np.int64)) * ELEMENT.itemsize
        raw = reader.take(size, "data of {}".format(name))
        tensors[name] = np.frombuffer(raw, dtype=ELEMENT).reshape(shape).copy()
    if reader.offset != len(payload):
        raise CheckpointError(
            "{}: {} unexpected trailing bytes".format(
                path, len(payload) - reader.offset
            )
        )
    return tensors


def load_checkpoint(path):
    """Reads a checkpoint written by :func:`save_checkpoint`.

    :raises CheckpointError: for missing, corrupted, truncated or
        unknown-version files.
    """
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise CheckpointError("cannot read {}: {}".format(path, exc))
    return decode_checkpoint(data, path)


def apply_tensors(models, tensors):
    """Loads ``tensors`` into ``models`` (``{prefix: module}`` or an object
    with ``modules()``).

    :raises CheckpointError: listing the missing and unexpected tensor
        names when the sets differ, or naming a shape mismatch.
    """
    modules = _modules_of(models)
    expected = set(collect_tensors(modules))
    missing = sorted(expected - set(tensors))
    extra = sorted(set(tensors) - expected)
    if missing or extra:
        raise CheckpointError(
            "checkpoint does not match the configured models; "
            "missing: {}; unexpected: {}".format(
                ", ".join(missing) or "-", ", ".join(extra) or "-"
            )
        )
    for prefix, module in modules.items():
        head = prefix + "."
        state = {
            name[len(head):]: array
            for name, array in tensors.items()
            if name.startswith(head)
        }
        try:
            module.load_state(state)
        except ValidationError as exc:
            raise CheckpointError("{}{}".format(head, exc))
    return models
