"""Exact sampling of cycle-weighted random partitions.

A partition of N with ``l_k`` cycles of length k has weight
``prod_k theta_k^{l_k} / (l_k! k^{l_k})``; the normalization obeys
``N Z_N = sum_{k=1}^N theta_k Z_{N-k}``.  Samples are drawn by removing the
cycle through the largest remaining element: it has length k with probability
``theta_k Z_{m-k} / (m Z_m)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from . import _backend
from .errors import InvalidArgument, NumericFailure
from .gamma import GammaTable
from .rng import RngSpec, map_chunks


@dataclass(frozen=True)
class ZTable:
    log_z: np.ndarray
    linear: np.ndarray | None

    @property
    def log_domain(self) -> bool:
        return self.linear is None


def _theta(theta, N):
    th = np.asarray(theta, dtype=float)
    if th.ndim != 1 or len(th) < N:
        raise InvalidArgument(f"need at least N={N} weights")
    th = th[:N]
    if np.any(th <= 0) or not np.all(np.isfinite(th)):
        raise InvalidArgument("weights must be positive and finite")
    return th


def z_linear(theta, N: int) -> np.ndarray:
    th = _theta(theta, N)
    Z = np.zeros(N + 1)
    Z[0] = 1.0
    for n in range(1, N + 1):
        Z[n] = np.dot(th[:n], Z[n - 1::-1]) / n
    return Z


def z_log(theta, N: int) -> np.ndarray:
    th = _theta(theta, N)
    lt = np.log(th)
    lz = np.zeros(N + 1)
    for n in range(1, N + 1):
        lz[n] = logsumexp(lt[:n] + lz[n - 1::-1]) - np.log(n)
    return lz


def z_recursion(theta, N: int, log_domain: bool | None = None) -> ZTable:
    """``Z_0..Z_N``; switches to the log domain if the linear pass over- or underflows."""
    if N < 0:
        raise InvalidArgument("N must be >= 0")
    if N == 0:
        return ZTable(np.zeros(1), np.ones(1))
    if log_domain:
        return ZTable(z_log(theta, N), None)
    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        Z = z_linear(theta, N)
    if np.all(np.isfinite(Z)) and np.all(Z > 0):
        return ZTable(np.log(Z), Z)
    if log_domain is False:
        raise NumericFailure("linear-domain recursion left the floating-point range")
    return ZTable(z_log(theta, N), None)


def removal_cdf(theta, N: int, z: ZTable | None = None) -> np.ndarray:
    """``cdf[m, k-1] = P(first removed cycle has length <= k | m elements left)``."""
    th = _theta(theta, N)
    z = z_recursion(th, N) if z is None else z
    lz = z.log_z
    lt = np.log(th)
    cdf = np.zeros((N + 1, N))
    for m in range(1, N + 1):
        k = np.arange(1, m + 1)
        lp = lt[:m] + lz[m - k] - np.log(m) - lz[m]
        c = np.cumsum(np.exp(lp))
        cdf[m, :m] = c
        cdf[m, m - 1:] = 1.0
    return cdf


@dataclass(frozen=True)
class CycleCounts:
    """``l[k]`` cycles of length k, k = 1..N (``l[0]`` unused)."""

    l: np.ndarray

    def __post_init__(self):
        l = np.asarray(self.l, dtype=np.int64)
        if l.ndim != 1 or np.any(l < 0):
            raise InvalidArgument("counts must be a non-negative 1-d array")
        object.__setattr__(self, "l", l)

    @property
    def N(self) -> int:
        return int(np.dot(np.arange(len(self.l)), self.l))

    def sparse(self) -> str:
        return " ".join(f"{k}:{c}" for k, c in enumerate(self.l) if k and c)


class PartitionSampler:
    """Sequential-removal sampler with the cdf table built once."""

    def __init__(self, theta, N: int):
        if N < 1:
            raise InvalidArgument("N must be >= 1")
        self.N = int(N)
        self.theta = _theta(theta, self.N)
        self.z = z_recursion(self.theta, self.N)
        self.cdf = removal_cdf(self.theta, self.N, self.z)

    def first_cycle_probs(self) -> np.ndarray:
        k = np.arange(1, self.N + 1)
        return np.exp(np.log(self.theta) + self.z.log_z[self.N - k] - np.log(self.N) - self.z.log_z[self.N])

    def expected_counts(self) -> np.ndarray:
        """Exact ``E[l_k] = (theta_k / k) Z_{N-k} / Z_N``."""
        k = np.arange(1, self.N + 1)
        return np.exp(np.log(self.theta / k) + self.z.log_z[self.N - k] - self.z.log_z[self.N])

    def _chunk(self, gen, size, backend):
        u = gen.random((size, self.N))
        out = np.zeros((size, self.N + 1), dtype=np.int64)
        _backend.get(backend).sample_partitions(self.cdf, u, out)
        return out

    def chunks(self, n_samples: int, rng: RngSpec, workers: int = 1, backend=None):
        """Count arrays of shape ``(chunk, N+1)`` in chunk order."""
        return map_chunks(lambda g, s: self._chunk(g, s, backend), rng, n_samples, workers)

    def sample(self, n_samples: int, rng: RngSpec, workers: int = 1, backend=None) -> np.ndarray:
        return np.concatenate(self.chunks(n_samples, rng, workers, backend))


def sample_partition(theta, N: int, rng: RngSpec, index: int = 0) -> CycleCounts:
    """Single exact sample (sample ``index`` of the stream)."""
    s = PartitionSampler(theta, N)
    c, off = divmod(index, rng.chunk_size)
    counts = s._chunk(rng.generator(c), off + 1, None)
    return CycleCounts(counts[off])


def free_gas_weights(d: int, N: int, rho: float, beta: float = 1.0, volume: float | None = None):
    """``theta_k = |Lambda| (2 pi beta k)^{-d/2}`` with ``|Lambda| = N / rho`` by default."""
    vol = N / rho if volume is None else volume
    k = np.arange(1, N + 1)
    return vol * (2 * np.pi * beta * k) ** (-d / 2), vol


def table_weights(table: GammaTable, N: int, rho: float, volume: float | None = None):
    if table.K < N:
        raise InvalidArgument(f"table has K={table.K} < N={N}")
    vol = N / rho if volume is None else volume
    return vol * table.values[:N], vol


@dataclass(frozen=True)
class CycleStats:
    k: np.ndarray
    mean: np.ndarray
    std_error: np.ndarray
    ci95: np.ndarray
    n_samples: int
    volume: float

    def mass(self, K: int | None = None) -> float:
        K = len(self.k) if K is None else K
        return float(np.sum(self.k[:K] * self.mean[:K]))


def cycle_statistics(samples, volume: float, K: int | None = None) -> CycleStats:
    """Means of ``L_k / |Lambda|`` with normal-approximation intervals.

    ``samples`` is a count array ``(n, N+1)``, a list of such arrays, or a
    list of CycleCounts.
    """
    if isinstance(samples, np.ndarray):
        parts = [samples]
    else:
        parts = [s.l[None] if isinstance(s, CycleCounts) else np.atleast_2d(s) for s in samples]
    width = max(p.shape[1] for p in parts)
    K = width - 1 if K is None else min(K, width - 1)
    n = 0
    s1 = np.zeros(K)
    s2 = np.zeros(K)
    for p in parts:
        x = p[:, 1:K + 1].astype(float) / volume
        n += x.shape[0]
        s1 += x.sum(axis=0)
        s2 += (x * x).sum(axis=0)
    if n == 0:
        raise InvalidArgument("no samples")
    mean = s1 / n
    var = np.maximum(s2 / n - mean * mean, 0.0) * (n / (n - 1)) if n > 1 else np.zeros(K)
    se = np.sqrt(var / n)
    return CycleStats(np.arange(1, K + 1), mean, se, 1.959963984540054 * se, n, float(volume))
