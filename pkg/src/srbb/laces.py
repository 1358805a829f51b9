"""Graphs on {1..N} as edge bitmasks: breakpoints, laces, compatible edges, types.

Edge ``(i, j)`` with ``1 <= i < j <= N`` gets bit ``edge_index(N, i, j)`` in
lexicographic order (1,2), (1,3), ..., (1,N), (2,3), ...
"""
from __future__ import annotations

import contextlib
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidArgument, ResourceLimit

LACE_CAP = 8
# the full graph list for N has 2**(N(N-1)/2) masks; 7 is the last size that fits in memory
GRAPH_CAP = 7

_mutate_compatible = False


@lru_cache(maxsize=None)
def edge_list(N: int):
    return tuple((i, j) for i in range(1, N + 1) for j in range(i + 1, N + 1))


@lru_cache(maxsize=None)
def _edge_bits(N: int):
    return {e: b for b, e in enumerate(edge_list(N))}


def edge_index(N: int, i: int, j: int) -> int:
    if not 1 <= i < j <= N:
        raise InvalidArgument(f"edge ({i},{j}) invalid for N={N}")
    return _edge_bits(N)[(i, j)]


@lru_cache(maxsize=None)
def cut_masks(N: int):
    """``cut_masks(N)[k-1]`` has the bits of all edges crossing the cut between k and k+1."""
    out = []
    for k in range(1, N):
        m = 0
        for b, (i, j) in enumerate(edge_list(N)):
            if i <= k < j:
                m |= 1 << b
        out.append(m)
    return tuple(out)


@dataclass(frozen=True)
class Graph:
    N: int
    mask: int = 0

    def __post_init__(self):
        if self.N < 1:
            raise InvalidArgument("N must be >= 1")
        if self.mask < 0 or self.mask >> len(edge_list(self.N)):
            raise InvalidArgument("mask has bits outside the edge set")

    @classmethod
    def from_edges(cls, N: int, edges) -> "Graph":
        m = 0
        for i, j in edges:
            if i > j:
                i, j = j, i
            m |= 1 << edge_index(N, i, j)
        return cls(N, m)

    @property
    def edges(self):
        E = edge_list(self.N)
        return tuple(E[b] for b in range(len(E)) if self.mask >> b & 1)

    def __contains__(self, e) -> bool:
        return bool(self.mask >> edge_index(self.N, *e) & 1)

    def __or__(self, other: "Graph") -> "Graph":
        return Graph(self.N, self.mask | other.mask)

    def __len__(self) -> int:
        return bin(self.mask).count("1")


@dataclass(frozen=True)
class Lace:
    N: int
    edges: tuple

    @property
    def graph(self) -> Graph:
        return Graph.from_edges(self.N, self.edges)

    @property
    def n(self) -> int:
        return len(self.edges)

    def endpoints(self):
        return tuple(x for e in self.edges for x in e)

    def __str__(self):
        return " ".join(f"({i},{j})" for i, j in self.edges)


def _as_graph(g, N=None) -> Graph:
    if isinstance(g, Graph):
        return g
    if isinstance(g, Lace):
        return g.graph
    if N is None:
        raise InvalidArgument("N required when passing an edge list")
    return Graph.from_edges(N, g)


def breakpoints(g: Graph) -> set:
    cuts = cut_masks(g.N)
    return {k for k in range(1, g.N) if not g.mask & cuts[k - 1]}


def _irreducible_mask(N: int, mask: int) -> bool:
    for c in cut_masks(N):
        if not mask & c:
            return False
    return True


def is_irreducible(g: Graph) -> bool:
    if g.N < 2:
        raise InvalidArgument("irreducibility needs N >= 2")
    return _irreducible_mask(g.N, g.mask)


def _lace_mask(N: int, mask: int) -> int:
    E = edge_list(N)
    bits = _edge_bits(N)
    full = bits[(1, N)]
    if mask >> full & 1:
        return 1 << full
    present = [E[b] for b in range(len(E)) if mask >> b & 1]
    j1 = max(j for i, j in present if i == 1)
    out = 1 << bits[(1, j1)]
    cur = j1
    while cur < N:
        # largest j' first, then smallest i'
        i2, j2 = min(((i, j) for i, j in present if i <= cur < j), key=lambda e: (-e[1], e[0]))
        out |= 1 << bits[(i2, j2)]
        cur = j2
    return out


def _to_lace(N: int, mask: int) -> Lace:
    return Lace(N, tuple(sorted(Graph(N, mask).edges)))


def lace_of(g) -> Lace:
    """Canonical lace of an irreducible graph by the greedy rule."""
    g = _as_graph(g)
    if g.N < 2 or not _irreducible_mask(g.N, g.mask):
        raise InvalidArgument("lace_of needs an irreducible graph")
    return _to_lace(g.N, _lace_mask(g.N, g.mask))


def is_lace(g) -> bool:
    """Irreducible, and removing any single edge breaks irreducibility."""
    g = _as_graph(g)
    if g.N < 2 or not _irreducible_mask(g.N, g.mask):
        return False
    m = g.mask
    b = 0
    while m >> b:
        if m >> b & 1 and _irreducible_mask(g.N, m & ~(1 << b)):
            return False
        b += 1
    return True


def _compatible_mask(N: int, lmask: int) -> int:
    out = 0
    for b in range(len(edge_list(N))):
        if lmask >> b & 1:
            continue
        keeps = _lace_mask(N, lmask | 1 << b) == lmask
        if keeps != _mutate_compatible:
            out |= 1 << b
    return out


def compatible_set(lace) -> set:
    """Edges not in the lace whose addition leaves the canonical lace unchanged."""
    g = _as_graph(lace)
    if not is_lace(g):
        raise InvalidArgument("compatible_set needs a lace")
    return set(Graph(g.N, _compatible_mask(g.N, g.mask)).edges)


@contextlib.contextmanager
def compatible_set_mutation():
    """Deliberately invert the compatibility predicate (fault-injection harness)."""
    global _mutate_compatible
    old = _mutate_compatible
    _mutate_compatible = True
    try:
        yield
    finally:
        _mutate_compatible = old


def classify_type(lace) -> tuple:
    """Lengths of the maximal runs of touching edges, ordered by left endpoint."""
    if isinstance(lace, Lace):
        edges = lace.edges
    else:
        edges = _as_graph(lace).edges
    edges = sorted(edges)
    if not edges:
        raise InvalidArgument("empty lace")
    tau = [1]
    for (i1, j1), (i2, j2) in zip(edges, edges[1:]):
        if j1 == i2:
            tau[-1] += 1
        else:
            tau.append(1)
    return tuple(tau)


def interlaces(lace: Lace) -> bool:
    """Check ``1 = i1 < i2 <= j1 < i3 <= j2 < ... < i_n <= j_{n-1} < j_n = N``."""
    e = sorted(lace.edges)
    n = len(e)
    if e[0][0] != 1 or e[-1][1] != lace.N:
        return False
    if n < 3:
        return True
    if not e[0][0] < e[1][0]:
        return False
    for k in range(1, n):
        # i_{k+1} <= j_k
        if not e[k][0] <= e[k - 1][1]:
            return False
        # j_k < i_{k+2}
        if k + 1 < n and not e[k - 1][1] < e[k + 1][0]:
            return False
    return e[-2][1] < e[-1][1]


# ---------------------------------------------------------------- enumeration

def _check_cap(N, cap):
    if N > cap:
        raise ResourceLimit(f"N={N} exceeds the enumeration cap {cap}")


@lru_cache(maxsize=None)
def irreducible_masks(N: int) -> np.ndarray:
    """All irreducible graph masks on {1..N}, ascending."""
    _check_cap(N, GRAPH_CAP)
    if N < 2:
        return np.zeros(0, dtype=np.int64)
    E = len(edge_list(N))
    masks = np.arange(1 << E, dtype=np.int64)
    ok = np.ones(len(masks), dtype=bool)
    for c in cut_masks(N):
        ok &= (masks & c) != 0
    out = masks[ok]
    out.setflags(write=False)
    return out


def enumerate_irreducible(N: int, cap: int = GRAPH_CAP):
    _check_cap(N, cap)
    return [Graph(N, int(m)) for m in irreducible_masks(N)]


@lru_cache(maxsize=None)
def _lace_masks(N: int) -> tuple:
    # Every lace is the greedy output of itself, so it is a chain of edges with
    # strictly increasing right ends j_1 < ... < j_n = N, starting at 1, with
    # i_{k+1} <= j_k.  Generate those chains and keep the minimal irreducible ones.
    bits = _edge_bits(N)
    found = set()

    def extend(mask, cur):
        if cur == N:
            if is_lace(Graph(N, mask)):
                found.add(mask)
            return
        for j in range(cur + 1, N + 1):
            for i in range(1, cur + 1):
                extend(mask | 1 << bits[(i, j)], j)

    for j1 in range(2, N + 1):
        extend(1 << bits[(1, j1)], j1)
    return tuple(sorted(found))


def enumerate_laces(N: int, cap: int = LACE_CAP):
    """All laces on {1..N}, sorted by edge mask."""
    _check_cap(N, cap)
    if N < 2:
        return []
    return [_to_lace(N, m) for m in _lace_masks(N)]


def lace_fibers(N: int) -> dict:
    """Map lace mask -> array of irreducible masks whose lace it is."""
    masks = irreducible_masks(N)
    lm = np.array([_lace_mask(N, int(m)) for m in masks], dtype=np.int64)
    return {int(k): masks[lm == k] for k in np.unique(lm)}


# ---------------------------------------------------------------- identity

def u_edge_vector(N: int, U: np.ndarray) -> np.ndarray:
    """Pick ``U[i-1, j-1]`` in edge order; works on a trailing (N, N) axis pair."""
    E = edge_list(N)
    ii = np.array([i - 1 for i, _ in E])
    jj = np.array([j - 1 for _, j in E])
    return np.asarray(U)[..., ii, jj]


def lace_identity_check(N: int, U, backend=None):
    """Both sides of the lace resummation for one matrix or a stack of matrices.

    lhs = sum over irreducible graphs of prod (-U_ij)
    rhs = sum over laces of prod_lace (-U_ij) * prod_compatible (1 - U_ij)
    """
    from . import _backend

    U = np.asarray(U, dtype=float)
    single = U.ndim == 2
    if single:
        U = U[None]
    if U.shape[1:] != (N, N):
        raise InvalidArgument("U must be N x N")
    if N < 2:
        z = np.zeros(len(U))
        return (0.0, 0.0, 0.0) if single else (z, z, z)
    u = np.ascontiguousarray(u_edge_vector(N, U))
    masks = np.ascontiguousarray(irreducible_masks(N))
    lhs = np.zeros((len(U), 1))
    _backend.get(backend).signed_graph_sums(u, masks, np.zeros(len(masks), dtype=np.int32), lhs)
    lhs = lhs[:, 0]
    rhs = np.zeros(len(U))
    for lm in _lace_masks(N):
        cm = _compatible_mask(N, lm)
        term = np.ones(len(U))
        for b in range(u.shape[1]):
            if lm >> b & 1:
                term = term * (-u[:, b])
            elif cm >> b & 1:
                term = term * (1.0 - u[:, b])
        rhs = rhs + term
    diff = np.abs(lhs - rhs)
    if single:
        return float(lhs[0]), float(rhs[0]), float(diff[0])
    return lhs, rhs, diff


def lace_rows(N: int):
    """Text rows ``N, edges, type`` for golden files."""
    return [(N, str(l), ",".join(map(str, classify_type(l)))) for l in enumerate_laces(N)]


# ---------------------------------------------------------------- exhaustive suites

def characterization_check(N: int):
    """Count graphs where ``lace_of(g) == l`` disagrees with ``l ⊆ g, g \\ l ⊆ C(l)``.

    Runs over every irreducible g on {1..N} and every lace l.  Returns
    ``(cases, counterexamples)``.
    """
    masks = irreducible_masks(N)
    if len(masks) == 0:
        return 0, 0
    lm_of = np.array([_lace_mask(N, int(m)) for m in masks], dtype=np.int64)
    cases = bad = 0
    for lm in _lace_masks(N):
        cm = _compatible_mask(N, lm)
        lhs = lm_of == lm
        rhs = ((masks & lm) == lm) & ((masks & ~(lm | cm)) == 0)
        cases += len(masks)
        bad += int(np.count_nonzero(lhs != rhs))
    return cases, bad


def interlacing_check(N: int):
    """``(laces, failures)`` for the interlacing pattern of every lace on {1..N}."""
    laces = enumerate_laces(N)
    return len(laces), sum(not interlaces(l) for l in laces)
