import numpy as np
import pytest

from oracles import philox_stream
from speechfm.numeric import SeededRng

# first 16 raw outputs for seed 42, counter starting at 1, key (42, 0)
GOLDEN_SEED_42 = [
    0xD1F8817D4D62880E, 0x307266B65CC8797E, 0xDE1F04E7F084ED03, 0x65034A8E78CD1E59,
    0x5E3DAA8961C3E3D3, 0x6F37DEA4A04BD05C, 0x31D3A1AE26E190B9, 0x0FEF7FAE0AB2A01A,
    0xE075D4E361A857A3, 0xC45C9A0E3834D9B8, 0x59963B8B0A6888A7, 0x0AF13E4FD3F6BC82,
    0x10FFFEC9FB4B71BD, 0x8EEEFC594E88802A, 0xBA8720F0B5116185, 0x65A2CF95D63F59FE,
]


def test_golden_sequence_seed_42():
    assert [int(v) for v in SeededRng(42).raw(16)] == GOLDEN_SEED_42


def test_matches_reference_philox_for_other_seeds():
    for seed in (0, 1, 2**63 + 5):
        assert [int(v) for v in SeededRng(seed).raw(12)] == philox_stream(seed, 0, 12)


def test_child_stream_keyed_by_parent_draw():
    parent = SeededRng(7)
    first = philox_stream(7, 0, 1)[0]
    child = parent.split()
    assert child.stream == first
    assert [int(v) for v in child.raw(4)] == philox_stream(7, first, 4)


def test_same_seed_same_draws():
    a, b = SeededRng(11), SeededRng(11)
    np.testing.assert_array_equal(a.normal(size=20), b.normal(size=20))
    np.testing.assert_array_equal(a.permutation(10), b.permutation(10))


def test_splits_are_distinct():
    r = SeededRng(0)
    x, y = r.split(), r.split()
    assert not np.array_equal(x.random(8), y.random(8))


def test_seed_range_checked():
    with pytest.raises(ValueError):
        SeededRng(-1)
    with pytest.raises(ValueError):
        SeededRng(2**64)
