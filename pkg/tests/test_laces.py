import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import brute_irreducible, brute_laces
from srbb import laces as L
from srbb.errors import InvalidArgument, ResourceLimit

# [DERIVED] by the brute-force oracle for N <= 5; larger values frozen from it
IRREDUCIBLE_COUNTS = {2: 1, 3: 5, 4: 49, 5: 893, 6: 30649}
LACE_COUNTS = {2: 1, 3: 2, 4: 5, 5: 13, 6: 34, 7: 89, 8: 233}


@pytest.mark.parametrize("N", [2, 3, 4, 5])
def test_counts_match_bruteforce(N):
    irr = brute_irreducible(N)
    assert len(irr) == IRREDUCIBLE_COUNTS[N] == len(L.enumerate_irreducible(N))
    mine = {frozenset(l.edges) for l in L.enumerate_laces(N)}
    assert mine == set(brute_laces(N))


@pytest.mark.parametrize("N", range(2, 9))
def test_lace_counts(N):
    assert len(L.enumerate_laces(N)) == LACE_COUNTS[N]
    if N <= 6:
        assert len(L.irreducible_masks(N)) == IRREDUCIBLE_COUNTS[N]


@pytest.mark.parametrize("N", [2, 3, 4, 5, 6])
def test_image_of_lace_of_is_the_lace_set(N):
    assert set(L.lace_fibers(N)) == set(L._lace_masks(N))


def _irreducible_graphs(N):
    masks = L.irreducible_masks(N)
    return st.sampled_from(list(masks)).map(lambda m: L.Graph(N, int(m)))


@given(st.integers(3, 6).flatmap(_irreducible_graphs))
def test_lace_of_is_a_sublace(g):
    lace = L.lace_of(g)
    lg = lace.graph
    assert lg.mask & ~g.mask == 0
    assert L.is_lace(lg) and L.interlaces(lace)
    assert L.lace_of(lg) == lace
    assert sum(L.classify_type(lace)) == lace.n
    # adding compatible edges never changes the lace
    assert L.lace_of(L.Graph(g.N, lg.mask | L._compatible_mask(g.N, lg.mask))) == lace


def test_examples():
    g = L.Graph.from_edges(3, [(1, 2), (2, 3)])
    assert L.breakpoints(g) == set() and L.is_irreducible(g)
    assert L.breakpoints(L.Graph.from_edges(4, [(1, 2), (3, 4)])) == {2}
    assert str(L.lace_of(L.Graph.from_edges(3, [(1, 2), (1, 3), (2, 3)]))) == "(1,3)"
    assert L.lace_of(L.Graph.from_edges(4, [(1, 3), (2, 4), (1, 2)])).edges == ((1, 3), (2, 4))
    assert L.classify_type(L.Lace(5, ((1, 3), (3, 5)))) == (2,)
    assert L.classify_type(L.Lace(5, ((1, 3), (2, 5)))) == (1, 1)


def test_errors():
    with pytest.raises(InvalidArgument):
        L.lace_of(L.Graph.from_edges(4, [(1, 2), (3, 4)]))
    with pytest.raises(InvalidArgument):
        L.is_irreducible(L.Graph(1))
    with pytest.raises(InvalidArgument):
        L.compatible_set(L.Graph.from_edges(3, [(1, 2), (1, 3)]))
    with pytest.raises(InvalidArgument):
        L.edge_index(3, 2, 2)
    with pytest.raises(ResourceLimit):
        L.enumerate_laces(9)
    with pytest.raises(ResourceLimit):
        L.irreducible_masks(8)


@given(seed=st.integers(0, 10**6), N=st.integers(2, 6))
def test_lace_identity_random(seed, N):
    U = np.random.default_rng(seed).uniform(-1, 1, (N, N))
    U = (U + U.T) / 2
    lhs, rhs, diff = L.lace_identity_check(N, U)
    assert diff <= 1e-12 * max(1.0, abs(lhs))


def test_lace_identity_zero_and_one():
    for N in range(2, 7):
        assert L.lace_identity_check(N, np.zeros((N, N)))[2] == 0.0
        lhs, rhs, _ = L.lace_identity_check(N, np.ones((N, N)))
        # with U = 1 only laces without compatible edges survive
        assert lhs == pytest.approx(rhs, abs=1e-12)


def test_characterization_and_mutation():
    for N in range(2, 6):
        assert L.characterization_check(N)[1] == 0
    with L.compatible_set_mutation():
        assert L.characterization_check(3)[1] > 0
    assert L.characterization_check(3)[1] == 0
