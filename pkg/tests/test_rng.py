import numpy as np
import pytest

from nomalink import rng


def test_key_layout():
    assert rng.stream_key(3, 1, 2, 5) == (3 << 64) + (1 << 40) + (2 << 32) + 5
    assert rng.stream_key(0) == 0


def test_same_key_same_stream():
    a = rng.stream_rng(7, rng.USER_FAR, rng.NOISE, 9).standard_normal(32)
    b = rng.stream_rng(7, rng.USER_FAR, rng.NOISE, 9).standard_normal(32)
    assert np.array_equal(a, b)


def test_streams_differ_in_every_coordinate():
    base = rng.stream_rng(1, 0, rng.NOISE, 0).standard_normal(16)
    for args in [(2, 0, rng.NOISE, 0), (1, 1, rng.NOISE, 0),
                 (1, 0, rng.FADING, 0), (1, 0, rng.NOISE, 1)]:
        other = rng.stream_rng(*args).standard_normal(16)
        assert not np.array_equal(base, other)


def test_key_validation():
    with pytest.raises(ValueError):
        rng.stream_key(-1)
    with pytest.raises(ValueError):
        rng.stream_key(0, block=2**32)
    with pytest.raises(ValueError):
        rng.stream_key(0, purpose=2**8)
