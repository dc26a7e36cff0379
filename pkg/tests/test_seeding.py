from __future__ import annotations

import numpy as np
import pytest

from ratchetlab.seeding import DEFAULT_SEED, SEED_ENV, Stream, default_seed, derive_seed, derive_seeds, stream


def test_scalar_and_vector_agree():
    idx = [0, 1, 2, 17, 10 ** 9, 2 ** 40]
    vec = derive_seeds(0x5EED, idx)
    assert [int(v) for v in vec] == [derive_seed(0x5EED, i) for i in idx]


def test_no_collisions_over_a_million():
    s = derive_seeds(DEFAULT_SEED, np.arange(1_000_000))
    assert np.unique(s).size == s.size
    # distinct roots as well
    t = derive_seeds(DEFAULT_SEED + 1, np.arange(1_000_000))
    assert np.intersect1d(s, t).size == 0


def test_derive_seed_is_stable():
    # index 0 under root 0 is the first SplitMix64 output for state 0 (reference vector)
    assert derive_seed(0, 0) == 0xE220A8397B1DCDAF
    assert 0 <= derive_seed(2 ** 64 - 1, 5) < 2 ** 64


def test_streams_independent_and_reproducible():
    a = stream(123, Stream.NOISE).random(5)
    b = stream(123, Stream.NOISE).random(5)
    c = stream(123, Stream.JUMPS).random(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_stream_prefix_property():
    long = stream(9, Stream.AUX).random(100)
    short = stream(9, Stream.AUX).random(10)
    assert np.array_equal(long[:10], short)


@pytest.mark.parametrize("env, expected", [
    ({}, DEFAULT_SEED),
    ({SEED_ENV: ""}, DEFAULT_SEED),
    ({SEED_ENV: "42"}, 42),
    ({SEED_ENV: "0x10"}, 16),
])
def test_default_seed(env, expected):
    assert default_seed(env) == expected


def test_default_seed_invalid():
    with pytest.raises(ValueError):
        default_seed({SEED_ENV: "abc"})
