import struct
from fractions import Fraction

import pytest

from qmzv.bibracket import BiBracketIndex, bibracket_batch, enumerate_indices
from qmzv.cache import MAGIC, VERSION, SeriesCache, decode, encode
from qmzv.linalg import fil_table
from qmzv.qseries import DEFAULT_PRIME, SECOND_PRIME, RingSpec, TruncatedQSeries

FP = RingSpec.prime_field(DEFAULT_PRIME)
QQ = RingSpec.rational()


def test_prime_record_layout():
    s = TruncatedQSeries.from_values(FP, [1, 2, DEFAULT_PRIME - 1], 2)
    data = encode(s)
    magic, version, prime, N = struct.unpack_from("<4sHQI", data)
    assert (magic, version, prime, N) == (MAGIC, VERSION, DEFAULT_PRIME, 2)
    assert len(data) == 18 + 3 * 8
    assert struct.unpack_from("<3Q", data, 18) == (1, 2, DEFAULT_PRIME - 1)


def test_round_trips():
    a = TruncatedQSeries.from_values(FP, [5, 0, 7, 9], 3)
    b = TruncatedQSeries.from_values(QQ, [Fraction(-1, 24), 0, Fraction(10**30, 7), -3], 3)
    assert decode(encode(a)) == a
    assert decode(encode(b)) == b


def test_rejects_foreign_bytes():
    with pytest.raises(ValueError):
        decode(b"XXXX" + bytes(20))


def test_hits_are_bit_identical(tmp_path):
    idx = enumerate_indices(4, 4)
    cold = bibracket_batch(idx, 60, FP)
    cache = SeriesCache(tmp_path)
    first = cache.batch(idx, 60, FP)
    assert cache.misses == len(idx) and cache.hits == 0
    second = SeriesCache(tmp_path).batch(idx, 60, FP)
    for i in idx:
        assert first[i].coeffs.tobytes() == cold[i].coeffs.tobytes() == second[i].coeffs.tobytes()


def test_keys_separate_ring_and_truncation(tmp_path):
    cache = SeriesCache(tmp_path)
    i = BiBracketIndex.bracket(2)
    paths = {cache.path(i, FP, 10), cache.path(i, FP, 11), cache.path(i, RingSpec.prime_field(SECOND_PRIME), 10), cache.path(i, QQ, 10)}
    assert len(paths) == 4


def test_corrupt_record_is_recomputed(tmp_path):
    cache = SeriesCache(tmp_path)
    i = BiBracketIndex.bracket(3)
    cache.batch([i], 30, FP)
    cache.path(i, FP, 30).write_bytes(b"garbage")
    assert cache.get(i, FP, 30) is None
    again = cache.batch([i], 30, FP)
    assert again[i] == bibracket_batch([i], 30, FP)[i]


def test_no_temporary_files_left(tmp_path):
    SeriesCache(tmp_path).batch(enumerate_indices(3, 3), 20, QQ)
    assert not list(tmp_path.glob("*.tmp"))
    assert all(p.suffix == ".qbbk" for p in tmp_path.iterdir())


def test_fil_table_with_cache_matches(tmp_path):
    cache = SeriesCache(tmp_path)
    assert fil_table(4, 4, cache=cache) == fil_table(4, 4)
    assert fil_table(4, 4, cache=cache) == fil_table(4, 4)
    assert cache.hits > 0
