"""Binary embedding file: decouples expensive extraction from training.

Layout (little-endian throughout):

    magic   4 bytes  "AVDE"
    version u16      = 1
    provider_id      u16 length + UTF-8 bytes
    dim     u32
    count   u32
    records count times:
        chunk_id     u16 length + UTF-8 bytes
        values       dim * float32
    crc32   u32      of every preceding byte

Write-once, read-many; values round-trip losslessly at float32 precision.
"""

from __future__ import annotations

import struct
import zlib
from collections.abc import Iterable

import numpy as np

from .errors import CorruptFile, DimMismatch, DuplicateChunkId
from .providers import FeatureVector

MAGIC = b"AVDE"
FORMAT_VERSION = 1


def _pack_str(s: str) -> bytes:
    raw = s.encode("utf-8")
    if len(raw) > 0xFFFF:
        raise ValueError("string too long for u16 length prefix")
    return struct.pack("<H", len(raw)) + raw


def write_embedding_file(records: Iterable[FeatureVector], path: str) -> int:
    """Write records (all same provider and dim) to path; returns the count."""
    records = list(records)
    if records:
        provider_id = records[0].provider_id
        dim = records[0].dim
        for r in records:
            if r.provider_id != provider_id:
                raise ValueError(f"mixed providers: {r.provider_id!r} vs {provider_id!r}")
            if r.dim != dim:
                raise DimMismatch(f"record {r.chunk_id!r} has dim {r.dim}, expected {dim}")
    else:
        provider_id, dim = "", 1

    out = bytearray()
    out += MAGIC
    out += struct.pack("<H", FORMAT_VERSION)
    out += _pack_str(provider_id)
    out += struct.pack("<II", dim, len(records))
    for r in records:
        out += _pack_str(r.chunk_id)
        out += np.asarray(r.values, dtype="<f4").tobytes()
    out += struct.pack("<I", zlib.crc32(bytes(out)))
    with open(path, "wb") as fh:
        fh.write(bytes(out))
    return len(records)


def read_embedding_file(path: str) -> dict[str, FeatureVector]:
    """Read an embedding file into a chunk_id -> FeatureVector map."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < len(MAGIC) + 2 + 2 + 8 + 4:
        raise CorruptFile(f"{path}: truncated header")
    if blob[:4] != MAGIC:
        raise CorruptFile(f"{path}: bad magic {blob[:4]!r}")
    (crc_stored,) = struct.unpack_from("<I", blob, len(blob) - 4)
    if zlib.crc32(blob[:-4]) != crc_stored:
        raise CorruptFile(f"{path}: checksum mismatch")

    pos = 4
    (version,) = struct.unpack_from("<H", blob, pos)
    pos += 2
    if version != FORMAT_VERSION:
        raise CorruptFile(f"{path}: unsupported format version {version}")
    provider_id, pos = _read_str(blob, pos, path)
    dim, count = struct.unpack_from("<II", blob, pos)
    pos += 8

    table: dict[str, FeatureVector] = {}
    value_bytes = 4 * dim
    for _ in range(count):
        chunk_id, pos = _read_str(blob, pos, path)
        if pos + value_bytes > len(blob) - 4:
            raise CorruptFile(f"{path}: truncated record {chunk_id!r}")
        values = np.frombuffer(blob, dtype="<f4", count=dim, offset=pos).astype(np.float64)
        pos += value_bytes
        if chunk_id in table:
            raise DuplicateChunkId(f"{path}: duplicate chunk id {chunk_id!r}")
        table[chunk_id] = FeatureVector(
            values=values, dim=dim, provider_id=provider_id, chunk_id=chunk_id
        )
    if pos != len(blob) - 4:
        raise CorruptFile(f"{path}: {len(blob) - 4 - pos} trailing bytes after records")
    return table


def _read_str(blob: bytes, pos: int, path: str) -> tuple[str, int]:
    if pos + 2 > len(blob) - 4:
        raise CorruptFile(f"{path}: truncated string length")
    (n,) = struct.unpack_from("<H", blob, pos)
    pos += 2
    if pos + n > len(blob) - 4:
        raise CorruptFile(f"{path}: truncated string body")
    try:
        s = blob[pos:pos + n].decode("utf-8")
    except UnicodeDecodeError as exc:
        raise CorruptFile(f"{path}: invalid UTF-8 in string") from exc
    return s, pos + n
