"""
Versioned binary checkpoints shared by the taggers and the role labeler.

Layout (all integers unsigned 32-bit little-endian):

    magic       8 bytes  b"STAGSRL\\x00"
    version     u32
    header      u32 length + UTF-8 canonical JSON {"kind", "config", "metadata"}
    vocabs      u32 count, then per vocab (sorted by name):
                    u32 length + UTF-8 name, u32 symbol count,
                    per symbol u32 length + UTF-8 bytes
    params      u32 count, then per param (sorted by name):
                    u32 length + UTF-8 name, u32 ndim, ndim x u32 extents,
                    raw little-endian float32 data (row-major)

Nothing time- or host-dependent is written, so equal training runs give
equal bytes.
"""
import json
import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping

import numpy as np

from ..autodiff.graph import Node
from ..errors import CheckpointFormatError, CheckpointVersionError, InputFileError

logger = logging.getLogger(__name__)

MAGIC = b"STAGSRL\x00"
FORMAT_VERSION = 1
_U32 = struct.Struct("<I")


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


@dataclass
class Checkpoint:
    kind: str
    config: Dict[str, Any]
    vocabs: Dict[str, List[str]] = field(default_factory=dict)
    params: Dict[str, np.ndarray] = field(default_factory=dict)
    metadata: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_nodes(cls, kind: str, config: Dict[str, Any], vocabs, params: Mapping[str, Node], metadata=None):
        return cls(
            kind=kind,
            config=config,
            vocabs={name: list(symbols) for name, symbols in vocabs.items()},
            params={name: node.value.astype("<f4") for name, node in params.items()},
            metadata=dict(metadata or {}),
        )

    def restore_into(self, params: Mapping[str, Node]) -> None:
        """Copy stored values into freshly built parameter nodes of the same architecture."""
        missing = sorted(set(params) - set(self.params))
        extra = sorted(set(self.params) - set(params))
        if missing or extra:
            raise CheckpointFormatError(f"parameter set mismatch: missing={missing} unexpected={extra}")
        for name, node in params.items():
            stored = self.params[name]
            if stored.shape != node.shape:
                raise CheckpointFormatError(f"parameter {name}: stored shape {stored.shape} != {node.shape}")
            node.value = stored.astype(node.value.dtype)

    def to_bytes(self) -> bytes:
        out = bytearray(MAGIC)
        out += _U32.pack(FORMAT_VERSION)
        header = {"kind": self.kind, "config": self.config, "metadata": self.metadata}
        _put_str(out, canonical_json(header))
        out += _U32.pack(len(self.vocabs))
        for name in sorted(self.vocabs):
            _put_str(out, name)
            symbols = self.vocabs[name]
            out += _U32.pack(len(symbols))
            for symbol in symbols:
                _put_str(out, symbol)
        out += _U32.pack(len(self.params))
        for name in sorted(self.params):
            value = np.ascontiguousarray(self.params[name], dtype="<f4")
            _put_str(out, name)
            out += _U32.pack(value.ndim)
            for extent in value.shape:
                out += _U32.pack(extent)
            out += value.tobytes()
        return bytes(out)

    @classmethod
    def from_bytes(cls, data: bytes) -> "Checkpoint":
        reader = _Reader(data)
        if reader.take(len(MAGIC)) != MAGIC:
            raise CheckpointFormatError("not a checkpoint file (bad magic bytes)")
        version = reader.u32()
        if version != FORMAT_VERSION:
            raise CheckpointVersionError(f"checkpoint format version {version}, expected {FORMAT_VERSION}")
        try:
            header = json.loads(reader.string())
        except json.JSONDecodeError as exc:
            raise CheckpointFormatError(f"corrupt config block: {exc}") from None
        vocabs = {}
        for _ in range(reader.u32()):
            name = reader.string()
            vocabs[name] = [reader.string() for _ in range(reader.u32())]
        params = {}
        for _ in range(reader.u32()):
            name = reader.string()
            shape = tuple(reader.u32() for _ in range(reader.u32()))
            count = int(np.prod(shape)) if shape else 1
            raw = reader.take(4 * count)
            params[name] = np.frombuffer(raw, dtype="<f4").reshape(shape).copy()
        if not reader.at_end():
            raise CheckpointFormatError("trailing bytes after parameter records")
        return cls(
            kind=header.get("kind", ""),
            config=header.get("config", {}),
            vocabs=vocabs,
            params=params,
            metadata=header.get("metadata", {}),
        )


def _put_str(out: bytearray, text: str) -> None:
    raw = text.encode("utf-8")
    out += _U32.pack(len(raw))
    out += raw


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, size: int) -> bytes:
        if self.pos + size > len(self.data):
            raise CheckpointFormatError("truncated checkpoint")
        chunk = self.data[self.pos:self.pos + size]
        self.pos += size
        return chunk

    def u32(self) -> int:
        return _U32.unpack(self.take(4))[0]

    def string(self) -> str:
        try:
            return self.take(self.u32()).decode("utf-8")
        except UnicodeDecodeError:
            raise CheckpointFormatError("invalid UTF-8 in checkpoint") from None

    def at_end(self) -> bool:
        return self.pos == len(self.data)


def is_checkpoint(path: Path) -> bool:
    """Sniff the magic bytes."""
    path = Path(path)
    if not path.is_file():
        return False
    with path.open("rb") as handle:
        return handle.read(len(MAGIC)) == MAGIC


def save_checkpoint(path: Path, checkpoint: Checkpoint) -> None:
    Path(path).write_bytes(checkpoint.to_bytes())
    logger.info("Saved %s checkpoint (%d tensors) to %s", checkpoint.kind, len(checkpoint.params), path)


def load_checkpoint(path: Path, kind: str = None) -> Checkpoint:
    """
    Raises:
        InputFileError: no such file
        CheckpointFormatError: bad magic, truncation, or a checkpoint of another kind
        CheckpointVersionError: unsupported format version
    """
    path = Path(path)
    if not path.is_file():
        raise InputFileError(f"no such checkpoint: {path}")
    checkpoint = Checkpoint.from_bytes(path.read_bytes())
    if kind is not None and checkpoint.kind != kind:
        raise CheckpointFormatError(f"{path} holds a {checkpoint.kind!r} checkpoint, expected {kind!r}")
    logger.info("Loaded %s checkpoint from %s", checkpoint.kind, path)
    return checkpoint
