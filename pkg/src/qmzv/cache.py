"""On-disk cache of bi-bracket expansions.

One file per (index, ring, N).  Prime-field records are

    b"QBBK" | version u16 | prime u64 | N u32 | N+1 residues as u64

all little-endian.  Rational records use prime 0 and store each
coefficient as a length-prefixed (u32) signed numerator followed by a
length-prefixed unsigned denominator.  Files are written to a temporary
name and renamed into place, so an interrupted run never leaves a
partial record behind.
"""

from __future__ import annotations

import hashlib
import os
import struct
import tempfile
from fractions import Fraction
from pathlib import Path
from typing import Iterable

import numpy as np

from .bibracket import BiBracketIndex, bibracket_batch
from .qseries import RingSpec, TruncatedQSeries

MAGIC = b"QBBK"
VERSION = 1
CACHE_ENV = "QMZV_CACHE_DIR"
_HEADER = struct.Struct("<4sHQI")
_LEN = struct.Struct("<I")


def default_cache_dir() -> Path | None:
    value = os.environ.get(CACHE_ENV)
    return Path(value) if value else None


def _int_bytes(n: int, signed: bool) -> bytes:
    length = (n.bit_length() + 8) // 8 if signed else max(1, (n.bit_length() + 7) // 8)
    return n.to_bytes(length, "little", signed=signed)


def encode(series: TruncatedQSeries) -> bytes:
    ring = series.ring
    head = _HEADER.pack(MAGIC, VERSION, ring.prime or 0, series.N)
    if ring.is_prime:
        return head + series.coeffs.astype("<u8").tobytes()
    parts = [head]
    for c in series.tolist():
        c = Fraction(c)
        for blob in (_int_bytes(c.numerator, True), _int_bytes(c.denominator, False)):
            parts.append(_LEN.pack(len(blob)))
            parts.append(blob)
    return b"".join(parts)


def decode(data: bytes) -> TruncatedQSeries:
    magic, version, prime, N = _HEADER.unpack_from(data)
    if magic != MAGIC or version != VERSION:
        raise ValueError("not a QBBK record of a supported version")
    body = memoryview(data)[_HEADER.size :]
    if prime:
        values = np.frombuffer(body, dtype="<u8", count=N + 1).astype(np.int64)
        return TruncatedQSeries._wrap(RingSpec.prime_field(prime), values)
    coeffs, pos = [], 0
    for _ in range(N + 1):
        (n,) = _LEN.unpack_from(body, pos)
        num = int.from_bytes(body[pos + 4 : pos + 4 + n], "little", signed=True)
        pos += 4 + n
        (n,) = _LEN.unpack_from(body, pos)
        den = int.from_bytes(body[pos + 4 : pos + 4 + n], "little", signed=False)
        pos += 4 + n
        coeffs.append(Fraction(num, den))
    return TruncatedQSeries(RingSpec.rational(), coeffs)


class SeriesCache:
    """Directory of QBBK records keyed by a hash of index, ring and N."""

    def __init__(self, directory: str | os.PathLike):
        self.directory = Path(directory)
        self.hits = 0
        self.misses = 0

    def path(self, idx: BiBracketIndex, ring: RingSpec, N: int) -> Path:
        key = f"{idx.s}|{idx.r}|{ring.kind}|{ring.prime or 0}|{N}|v{VERSION}"
        return self.directory / (hashlib.sha256(key.encode()).hexdigest()[:32] + ".qbbk")

    def get(self, idx: BiBracketIndex, ring: RingSpec, N: int) -> TruncatedQSeries | None:
        try:
            data = self.path(idx, ring, N).read_bytes()
        except FileNotFoundError:
            return None
        try:
            series = decode(data)
        except (ValueError, struct.error):
            return None
        if series.ring != ring or series.N != N:
            return None
        return series

    def put(self, idx: BiBracketIndex, series: TruncatedQSeries) -> None:
        self.directory.mkdir(parents=True, exist_ok=True)
        target = self.path(idx, series.ring, series.N)
        fd, tmp = tempfile.mkstemp(dir=self.directory, suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(encode(series))
            os.replace(tmp, target)
        except BaseException:
            Path(tmp).unlink(missing_ok=True)
            raise

    def batch(self, indices: Iterable[BiBracketIndex], N: int, ring: RingSpec, workers: int = 1) -> dict:
        """Like ``bibracket_batch``, serving hits from disk and storing misses."""
        indices = list(indices)
        out, missing = {}, []
        for idx in indices:
            found = self.get(idx, ring, N)
            if found is None:
                missing.append(idx)
            else:
                out[idx] = found
        self.hits += len(indices) - len(missing)
        self.misses += len(missing)
        if missing:
            fresh = bibracket_batch(missing, N, ring, workers=workers)
            for idx in missing:
                self.put(idx, fresh[idx])
                out[idx] = fresh[idx]
        return out
