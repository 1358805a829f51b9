"""Discretized Brownian bridges and paths, pair interactions and the Hamiltonian.

A path of duration ``k*beta`` is stored as one array of ``k*M + 1`` grid points;
leg ``j`` is the slice ``[j*M, (j+1)*M]`` so neighbouring legs share their
junction point.  Batches of paths are arrays of shape ``(n, k*M + 1, d)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _backend
from ._fallback import BUMP, STEP, TABLE, _v
from .errors import InvalidArgument
from .rng import RngSpec

_KINDS = {"step": STEP, "bump": BUMP, "table": TABLE}


@dataclass(frozen=True)
class PairPotential:
    """Radial pair potential with support radius ``R``.

    ``step``  : v(r) = eta for r <= R
    ``bump``  : v(r) = eta (1 - r^2/R^2)^2 for r <= R (continuous)
    ``table`` : linear interpolation of ``(table_r, table_v)``, zero beyond R
    """

    kind: str = "step"
    eta: float = 1.0
    R: float = 1.0
    table_r: tuple = field(default=(), repr=False)
    table_v: tuple = field(default=(), repr=False)

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise InvalidArgument(f"unknown potential kind {self.kind!r}")
        if not self.R > 0:
            raise InvalidArgument("range R must be positive")
        if self.kind == "table":
            r = np.asarray(self.table_r, dtype=float)
            v = np.asarray(self.table_v, dtype=float)
            if r.ndim != 1 or r.shape != v.shape or len(r) < 2:
                raise InvalidArgument("table needs matching 1-d arrays of length >= 2")
            if np.any(np.diff(r) <= 0) or r[0] < 0:
                raise InvalidArgument("table radii must be non-negative and strictly increasing")
            if np.any(v < 0):
                raise InvalidArgument("table values must be non-negative")
            object.__setattr__(self, "table_r", tuple(r.tolist()))
            object.__setattr__(self, "table_v", tuple(v.tolist()))
            object.__setattr__(self, "eta", float(v.max()))
        elif self.eta < 0:
            raise InvalidArgument("potential strength must be non-negative")

    @property
    def code(self) -> int:
        return _KINDS[self.kind]

    @property
    def L_bound(self) -> float:
        return float(self.eta)

    @property
    def continuous(self) -> bool:
        if self.kind == "bump":
            return True
        if self.kind == "table":
            return self.table_v[-1] == 0.0 and self.table_r[-1] <= self.R
        return False

    def tables(self):
        if self.kind == "table":
            return np.asarray(self.table_r), np.asarray(self.table_v)
        return np.zeros(2), np.zeros(2)

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        tr, tv = self.tables()
        return _v(r * r, self.code, float(self.eta), float(self.R), tr, tv)

    def describe(self) -> str:
        s = f"{self.kind}(eta={self.eta!r},R={self.R!r}"
        if self.kind == "table":
            s += f",n={len(self.table_r)}"
        return s + f",continuous={self.continuous})"


@dataclass(frozen=True)
class Leg:
    positions: np.ndarray
    beta: float = 1.0

    def __post_init__(self):
        p = np.asarray(self.positions, dtype=float)
        if p.ndim != 2 or p.shape[0] < 2:
            raise InvalidArgument("a leg needs M+1 >= 2 points of shape (M+1, d)")
        p.setflags(write=False)
        object.__setattr__(self, "positions", p)

    @property
    def M(self) -> int:
        return self.positions.shape[0] - 1

    @property
    def d(self) -> int:
        return self.positions.shape[1]


@dataclass(frozen=True)
class PathConfig:
    """A path of ``k`` legs stored contiguously, ``positions.shape == (k*M+1, d)``."""

    positions: np.ndarray
    M: int
    beta: float = 1.0

    def __post_init__(self):
        p = np.asarray(self.positions, dtype=float)
        if p.ndim != 2 or self.M < 1 or (p.shape[0] - 1) % self.M or p.shape[0] < 2:
            raise InvalidArgument("positions must have k*M+1 rows with k >= 1")
        p.setflags(write=False)
        object.__setattr__(self, "positions", p)

    @property
    def k(self) -> int:
        return (self.positions.shape[0] - 1) // self.M

    @property
    def legs(self):
        return [Leg(self.positions[j * self.M:(j + 1) * self.M + 1], self.beta) for j in range(self.k)]

    @classmethod
    def from_legs(cls, legs):
        legs = list(legs)
        if not legs:
            raise InvalidArgument("need at least one leg")
        M, beta = legs[0].M, legs[0].beta
        for a, b in zip(legs, legs[1:]):
            if b.M != M or not np.array_equal(a.positions[-1], b.positions[0]):
                raise InvalidArgument("legs must share M and their junction points")
        pos = np.concatenate([legs[0].positions] + [g.positions[1:] for g in legs[1:]])
        return cls(pos, M, beta)


# ---------------------------------------------------------------- sampling

def brownian_batch(gen: np.random.Generator, n: int, steps: int, dt: float, d: int,
                   start=0.0, end=None) -> np.ndarray:
    """Sample ``n`` grid paths with ``steps`` increments of variance ``dt``.

    With ``end`` given the paths are bridges: ``W_t - (t/T)(W_T - (end - start))``
    has exactly the Brownian-bridge law at the grid times.  ``start`` and ``end``
    may be single points or arrays of shape ``(n, d)``.
    """
    inc = gen.standard_normal((n, steps, d)) * np.sqrt(dt)
    w = np.zeros((n, steps + 1, d))
    np.cumsum(inc, axis=1, out=w[:, 1:])
    start = np.broadcast_to(np.asarray(start, dtype=float), (n, d))
    if end is not None:
        end = np.broadcast_to(np.asarray(end, dtype=float), (n, d))
        frac = (np.arange(steps + 1) / steps)[None, :, None]
        w = w - frac * (w[:, -1:, :] - (end - start)[:, None, :])
        out = w + start[:, None, :]
        out[:, -1, :] = end
        return out
    return w + start[:, None, :]


def _legs_for(duration: float, beta: float):
    q = duration / beta
    k = int(round(q))
    if k >= 1 and abs(q - k) < 1e-12:
        return k
    return None


def sample_bridge(start, end, duration: float, M: int, rng: RngSpec, index: int = 0, beta: float = 1.0):
    """One bridge ``start -> end`` of the given duration.

    Returns a PathConfig with ``M`` steps per leg when ``duration`` is a whole
    number of legs, otherwise a single Leg with ``M`` steps over ``duration``.
    ``index`` selects the sample within the stream.
    """
    if not duration > 0:
        raise InvalidArgument("duration must be positive")
    if int(M) < 1:
        raise InvalidArgument("M must be >= 1")
    start = np.atleast_1d(np.asarray(start, dtype=float))
    end = np.atleast_1d(np.asarray(end, dtype=float))
    if start.shape != end.shape or start.ndim != 1:
        raise InvalidArgument("start and end must be points of equal dimension")
    k = _legs_for(duration, beta)
    steps = M * k if k else M
    c, off = divmod(index, rng.chunk_size)
    gen = rng.generator(c)
    batch = brownian_batch(gen, off + 1, steps, duration / steps, start.size, start, end)
    path = batch[off]
    if k:
        return PathConfig(path, M, beta)
    return Leg(path, duration)


# ---------------------------------------------------------------- energies

def leg_pair_energies(a: np.ndarray, b: np.ndarray, beta: float, v: PairPotential) -> np.ndarray:
    """Trapezoid energies between batches of legs of shape ``(n, M+1, d)``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 3:
        raise InvalidArgument("leg batches must share shape (n, M+1, d)")
    M = a.shape[1] - 1
    dt = beta / M
    r2 = np.zeros(a.shape[:2])
    for c in range(a.shape[2]):
        diff = a[..., c] - b[..., c]
        r2 = r2 + diff * diff
    tr, tv = v.tables()
    vals = _v(r2, v.code, float(v.eta), float(v.R), tr, tv)
    acc = np.zeros(a.shape[0])
    for t in range(M + 1):
        w = 0.5 * dt if t == 0 or t == M else dt
        acc = acc + w * vals[:, t]
    return acc


def interaction_V(f: Leg, g: Leg, v: PairPotential) -> float:
    """Trapezoid value of the leg-pair energy on the shared grid."""
    if f.positions.shape != g.positions.shape or f.beta != g.beta:
        raise InvalidArgument("legs must share M, beta and dimension")
    return float(leg_pair_energies(f.positions[None], g.positions[None], f.beta, v)[0])


def pair_matrix(paths: np.ndarray, n_legs: int, M: int, beta: float, v: PairPotential,
                backend: str | None = None) -> np.ndarray:
    """Leg-pair energies ``V[s, i, j]`` for a batch of paths of shape ``(n, k*M+1, d)``."""
    paths = np.ascontiguousarray(paths, dtype=float)
    if paths.ndim != 3 or paths.shape[1] != n_legs * M + 1:
        raise InvalidArgument("paths must have shape (n, k*M+1, d)")
    out = np.empty((paths.shape[0], n_legs, n_legs))
    tr, tv = v.tables()
    _backend.get(backend).pair_energies(paths, int(n_legs), int(M), beta / M, v.code,
                                        float(v.eta), float(v.R), tr, tv, out)
    return out


def hamiltonian_batch(V: np.ndarray) -> np.ndarray:
    """``H = sum_{i<j} V_ij`` for each sample of a pair-energy batch."""
    k = V.shape[-1]
    iu = np.triu_indices(k, 1)
    H = np.zeros(V.shape[0])
    for i, j in zip(*iu):
        H = H + V[:, i, j]
    return H


def hamiltonian(B: PathConfig, v: PairPotential) -> float:
    V = pair_matrix(B.positions[None], B.k, B.M, B.beta, v)
    return float(hamiltonian_batch(V)[0])


def hamiltonian_bound(v: PairPotential, k: int, beta: float = 1.0) -> float:
    """Elementary upper bound ``L beta k(k-1)/2``."""
    return v.L_bound * beta * k * (k - 1) / 2


def u_factor(f: Leg, g: Leg, alpha: float, v: PairPotential) -> float:
    if alpha < 0:
        raise InvalidArgument("alpha must be non-negative")
    return float(-np.expm1(-alpha * interaction_V(f, g, v)))


def phi(t, x, d: int):
    """Heat kernel ``(2 pi t)^{-d/2} exp(-|x|^2 / 2t)``; ``x`` may be a point or |x|."""
    x = np.asarray(x, dtype=float)
    r2 = float(np.sum(x * x)) if x.ndim else float(x) ** 2
    return (2 * np.pi * t) ** (-d / 2) * np.exp(-r2 / (2 * t))
