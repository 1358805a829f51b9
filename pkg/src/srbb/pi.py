"""Irreducible-graph sums, free partition functions and the bridge functions u_n.

For a free path of ``N`` legs started at the origin, one sample gives

    Z_N(w) = exp(-alpha H_N)
    P_N(w) = sum over irreducible graphs g on {1..N} of prod_{(i,j) in g} (-U_ij)

with ``U_ij = 1 - exp(-alpha V_ij)``.  All N share one path of ``N_max`` legs.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .errors import InvalidArgument
from .gamma import _merge, _moments, _check_energy, phi_density
from .laces import GRAPH_CAP, _lace_mask, irreducible_masks, u_edge_vector
from .paths import PairPotential, brownian_batch, hamiltonian_batch, leg_pair_energies, pair_matrix
from .rng import RngSpec, map_chunks


@dataclass(frozen=True)
class PiEstimate:
    value: float
    std_error: float
    n_samples: int
    params: dict = field(default_factory=dict)
    breakdown: dict = field(default_factory=dict)


@dataclass(frozen=True)
class UnEstimate:
    n: int
    anchors: np.ndarray
    value: float
    std_error: float
    n_samples: int


def _lace_size_groups(N: int):
    masks = np.ascontiguousarray(irreducible_masks(N))
    sizes = np.array([bin(_lace_mask(N, int(m))).count("1") for m in masks], dtype=np.int32)
    return masks, sizes - 1


def _free_pairs(gen, size, N, M, beta, d, v, backend):
    paths = brownian_batch(gen, size, N * M, beta / M, d)
    return pair_matrix(paths, N, M, beta, v, backend)


def _p_samples(W, N, masks, groups, backend, n_groups):
    """Per-sample signed sums over irreducible graphs, split by lace size."""
    u = np.ascontiguousarray(1.0 - u_edge_vector(N, W))
    out = np.zeros((W.shape[0], n_groups))
    _backend.get(backend).signed_graph_sums(u, masks, groups, out)
    return out


def _validate(alpha, n_samples, M):
    if alpha < 0:
        raise InvalidArgument("alpha must be non-negative")
    if n_samples < 1 or M < 1:
        raise InvalidArgument("n_samples and M must be >= 1")


def estimate_pi_integrated(alpha: float, N: int, n_samples: int, M: int, rng: RngSpec,
                           potential: PairPotential = PairPotential(), beta: float = 1.0,
                           d: int = 3, method: str = "graphs", workers: int = 1,
                           backend=None) -> PiEstimate:
    """Estimate P_N, the integral of Pi_N, with a per-lace-size breakdown.

    ``method='graphs'`` sums over all irreducible graphs; ``method='laces'``
    uses the resummed form over laces and compatible edges.  Both have the
    same expectation and agree per sample up to rounding.
    """
    _validate(alpha, n_samples, M)
    N = int(N)
    params = dict(alpha=alpha, beta=beta, d=d, M=M, N=N, seed=rng.seed, method=method)
    if N < 1:
        raise InvalidArgument("N must be >= 1")
    if N == 1:
        return PiEstimate(1.0, 0.0, n_samples, params, {1: (1.0, 0.0)})
    if N > GRAPH_CAP:
        from .errors import ResourceLimit
        raise ResourceLimit(f"N={N} exceeds the graph cap {GRAPH_CAP}")
    if method == "graphs":
        masks, groups = _lace_size_groups(N)
    elif method == "laces":
        from .laces import _compatible_mask, _lace_masks
        lm = _lace_masks(N)
        cm = [_compatible_mask(N, m) for m in lm]
        lsize = [bin(m).count("1") for m in lm]
    else:
        raise InvalidArgument(f"unknown method {method!r}")
    n_groups = N - 1

    def chunk(gen, size):
        V = _free_pairs(gen, size, N, M, beta, d, potential, backend)
        W = np.exp(-alpha * V)
        if method == "graphs":
            parts = _p_samples(W, N, masks, groups, backend, n_groups)
        else:
            u = 1.0 - u_edge_vector(N, W)
            parts = np.zeros((size, n_groups))
            for m, c, s in zip(lm, cm, lsize):
                term = np.ones(size)
                for b in range(u.shape[1]):
                    if m >> b & 1:
                        term = term * (-u[:, b])
                    elif c >> b & 1:
                        term = term * (1.0 - u[:, b])
                parts[:, s - 1] += term
        tot = parts.sum(axis=1)
        return [_moments(tot)] + [_moments(parts[:, g]) for g in range(n_groups)]

    res = map_chunks(chunk, rng, n_samples, workers)
    stats = []
    for g in range(n_groups + 1):
        n, mean, m2 = _merge([r[g] for r in res])
        stats.append((mean, float(np.sqrt(m2 / (n - 1) / n)) if n > 1 else 0.0))
    breakdown = {g + 1: stats[g + 1] for g in range(n_groups)}
    return PiEstimate(stats[0][0], stats[0][1], n_samples, params, breakdown)


def estimate_z_free(alpha: float, N: int, n_samples: int, M: int, rng: RngSpec,
                    potential: PairPotential = PairPotential(), beta: float = 1.0, d: int = 3,
                    workers: int = 1, backend=None):
    """Mean of exp(-alpha H_N) over free paths; returns ``(value, std_error)``."""
    _validate(alpha, n_samples, M)
    N = int(N)
    if N < 0:
        raise InvalidArgument("N must be >= 0")
    if N <= 1 or alpha == 0:
        return 1.0, 0.0

    def chunk(gen, size):
        H = hamiltonian_batch(_free_pairs(gen, size, N, M, beta, d, potential, backend))
        _check_energy(H, potential, N, beta)
        return _moments(np.exp(-alpha * H))

    n, mean, m2 = _merge(map_chunks(chunk, rng, n_samples, workers))
    return mean, float(np.sqrt(m2 / (n - 1) / n)) if n > 1 else 0.0


def _window_energy(V, a, b):
    """Sum of V[:, i, j] over a <= i < j < b (0-based legs)."""
    H = np.zeros(V.shape[0])
    for i in range(a, b):
        for j in range(i + 1, b):
            H = H + V[:, i, j]
    return H


@dataclass(frozen=True)
class ConvolutionRow:
    N: int
    Z: float
    Z_err: float
    P: float
    P_err: float
    r: float
    r_err: float


def convolution_identity_check(alpha: float, N_max: int, n_samples: int, M: int, rng: RngSpec,
                               potential: PairPotential = PairPotential(), beta: float = 1.0,
                               d: int = 3, workers: int = 1, backend=None):
    """Residuals ``r_N = Z_N - sum_{k=1}^N P_k Z_{N-k}`` for N = 1..N_max.

    One path of ``N_max`` legs per sample; Z_N and P_N are evaluated on its
    first N legs (common random numbers).  The residual is formed from the
    sample means and its error comes from the delta method, using the
    influence function ``Z_N - sum_k (P_k Zbar_{N-k} + Pbar_k Z_{N-k})`` so the
    covariances induced by the shared paths are included.  Because
    ``Zbar_0 = Zbar_1 = 1`` exactly and ``-U = W - 1``, r_1 and r_2 vanish
    sample by sample.
    """
    _validate(alpha, n_samples, M)
    N_max = int(N_max)
    if not 1 <= N_max <= GRAPH_CAP:
        raise InvalidArgument(f"N_max must be in 1..{GRAPH_CAP}")
    graph_data = {N: _lace_size_groups(N) for N in range(2, N_max + 1)}

    def chunk(gen, size):
        V = _free_pairs(gen, size, N_max, M, beta, d, potential, backend)
        W = np.exp(-alpha * V)
        Z = np.ones((size, N_max + 1))
        P = np.zeros((size, N_max + 1))
        P[:, 1] = 1.0
        for N in range(2, N_max + 1):
            Z[:, N] = np.exp(-alpha * _window_energy(V, 0, N))
            masks, groups = graph_data[N]
            sub = np.ascontiguousarray(W[:, :N, :N])
            P[:, N] = _p_samples(sub, N, masks, np.zeros_like(groups), backend, 1)[:, 0]
        return Z, P

    res = map_chunks(chunk, rng, n_samples, workers)
    Z = np.concatenate([r[0] for r in res])
    P = np.concatenate([r[1] for r in res])
    n = Z.shape[0]
    Zbar = Z.mean(axis=0)
    Pbar = P.mean(axis=0)

    def se(col):
        return float(np.std(col, ddof=1) / np.sqrt(n)) if n > 1 else 0.0

    rows = []
    for N in range(1, N_max + 1):
        r = Z[:, N].copy()
        infl = Z[:, N].copy()
        for k in range(1, N + 1):
            r = r - P[:, k] * Zbar[N - k]
            infl = infl - P[:, k] * Zbar[N - k] - Pbar[k] * Z[:, N - k]
        rows.append(ConvolutionRow(N, float(Zbar[N]), se(Z[:, N]), float(Pbar[N]), se(P[:, N]),
                                   float(r.mean()), se(infl)))
    return rows


def estimate_u_n(alpha: float, anchors, n_samples: int, M: int, rng: RngSpec,
                 potential: PairPotential = PairPotential(), beta: float = 1.0,
                 workers: int = 1) -> UnEstimate:
    """u_n for anchors ``x_1..x_{2n}`` (array of shape (2n, d)).

    Bridge ``f_i`` runs from ``x_{2i-1}`` to ``x_{2i}`` over one leg; the value is
    ``prod_i phi(x_{2i} - x_{2i-1}) * E[prod_{i<n} U(f_i, f_{i+1})]``.
    """
    x = np.asarray(anchors, dtype=float)
    if x.ndim != 2 or x.shape[0] % 2 or x.shape[0] < 4:
        raise InvalidArgument("anchors must have shape (2n, d) with n >= 2")
    if alpha < 0:
        raise InvalidArgument("alpha must be non-negative")
    n = x.shape[0] // 2
    d = x.shape[1]
    mass = 1.0
    for i in range(n):
        mass *= phi_density(beta, x[2 * i + 1] - x[2 * i], d)

    def chunk(gen, size):
        legs = [brownian_batch(gen, size, M, beta / M, d, x[2 * i], x[2 * i + 1]) for i in range(n)]
        prod = np.ones(size)
        for i in range(n - 1):
            V = leg_pair_energies(legs[i], legs[i + 1], beta, potential)
            prod = prod * -np.expm1(-alpha * V)
        return _moments(prod)

    cnt, mean, m2 = _merge(map_chunks(chunk, rng, n_samples, workers))
    se = float(np.sqrt(m2 / (cnt - 1) / cnt)) if cnt > 1 else 0.0
    return UnEstimate(n, x, mass * mean, mass * se, cnt)
