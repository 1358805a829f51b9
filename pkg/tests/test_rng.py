import numpy as np
import pytest
from hypothesis import given, strategies as st

from srbb.errors import InvalidArgument
from srbb.rng import RngSpec, map_chunks


def test_streams_are_distinct_and_reproducible():
    a = RngSpec(7).generator(0).random(5)
    assert np.array_equal(a, RngSpec(7).generator(0).random(5))
    assert not np.array_equal(a, RngSpec(7, 1).generator(0).random(5))
    assert not np.array_equal(a, RngSpec(7).generator(1).random(5))
    assert not np.array_equal(a, RngSpec(8).generator(0).random(5))


@given(n=st.integers(1, 3000), chunk=st.integers(1, 700), workers=st.integers(1, 4))
def test_map_chunks_independent_of_workers(n, chunk, workers):
    rng = RngSpec(3, chunk_size=chunk)
    fn = lambda g, s: g.random(s)
    a = np.concatenate(map_chunks(fn, rng, n, 1))
    b = np.concatenate(map_chunks(fn, rng, n, workers))
    assert len(a) == n and np.array_equal(a, b)


def test_invalid_specs():
    with pytest.raises(InvalidArgument):
        RngSpec(-1)
    with pytest.raises(InvalidArgument):
        RngSpec(1, stream=-2)
    with pytest.raises(InvalidArgument):
        RngSpec(1, chunk_size=0)
