"""Monte Carlo estimators for the self-repellent bridge weights.

The free weight uses the exact factorization
``Gamma_{alpha,N}(x) = phi_N(x) * E_bridge[exp(-alpha H_N)]`` over bridges
``0 -> x`` of duration ``N beta``.  Each k of a table draws from its own RNG
stream, so extending a table never changes rows already computed.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from . import __version__
from . import tableio
from .errors import DegenerateInput, InvalidArgument, NumericFailure
from .paths import PairPotential, brownian_batch, hamiltonian_batch, hamiltonian_bound, pair_matrix
from .rng import RngSpec, map_chunks


@dataclass(frozen=True)
class GammaEstimate:
    value: float
    std_error: float
    n_samples: int
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.value < 0 or self.std_error < 0:
            raise InvalidArgument("estimate and error must be non-negative")


def phi_density(t: float, x, d: int) -> float:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    r2 = float(np.sum(x * x))
    return float((2 * np.pi * t) ** (-d / 2) * np.exp(-r2 / (2 * t)))


def _merge(parts):
    """Combine per-chunk ``(count, mean, M2)`` triples in order."""
    n, mean, m2 = 0, 0.0, 0.0
    for nb, mb, m2b in parts:
        if nb == 0:
            continue
        tot = n + nb
        delta = mb - mean
        mean = mean + delta * nb / tot
        m2 = m2 + m2b + delta * delta * n * nb / tot
        n = tot
    return n, mean, m2


def _moments(w):
    mean = float(np.mean(w))
    return len(w), mean, float(np.sum((w - mean) ** 2))


def _check_energy(H, v, k, beta):
    bound = hamiltonian_bound(v, k, beta)
    if np.any(H < 0) or np.any(H > bound * (1 + 1e-12) + 1e-12):
        raise NumericFailure("sampled Hamiltonian outside [0, L beta k(k-1)/2]",
                             state={"min": float(H.min()), "max": float(H.max()), "bound": bound})


def _weights(gen, size, alpha, k, M, beta, d, v, start, end, backend):
    paths = brownian_batch(gen, size, k * M, beta / M, d, start, end)
    H = hamiltonian_batch(pair_matrix(paths, k, M, beta, v, backend))
    _check_energy(H, v, k, beta)
    return np.exp(-alpha * H), paths


def estimate_gamma_point(alpha: float, N: int, x, n_samples: int, M: int, rng: RngSpec,
                         potential: PairPotential = PairPotential(), beta: float = 1.0,
                         d: int | None = None, workers: int = 1, backend=None) -> GammaEstimate:
    """Estimate Gamma_{alpha,N}(x).

    ``x`` is a point in R^d (or 0 together with ``d``).  For ``alpha = 0`` or
    ``N = 1`` the weight is identically one and the exact value is returned.
    """
    if int(N) < 1:
        raise InvalidArgument("N must be >= 1")
    if n_samples < 1 or M < 1:
        raise InvalidArgument("n_samples and M must be >= 1")
    if alpha < 0:
        raise InvalidArgument("alpha must be non-negative")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if d is None:
        d = x.size
    if x.size == 1 and d > 1:
        x = np.full(d, x[0]) if x[0] != 0 else np.zeros(d)
    if x.size != d:
        raise InvalidArgument("x does not match dimension d")
    N = int(N)
    ph = phi_density(N * beta, x, d)
    params = dict(alpha=alpha, beta=beta, d=d, M=M, N=N, x=tuple(x.tolist()), seed=rng.seed,
                  stream=rng.stream, potential=potential.describe())
    if alpha == 0 or N == 1:
        return GammaEstimate(ph, 0.0, n_samples, params)

    def chunk(gen, size):
        w, _ = _weights(gen, size, alpha, N, M, beta, d, potential, 0.0, x, backend)
        return _moments(w)

    n, mean, m2 = _merge(map_chunks(chunk, rng, n_samples, workers))
    se = np.sqrt(m2 / (n - 1) / n) if n > 1 else 0.0
    return GammaEstimate(ph * mean, ph * float(se), n, params)


def _exit_survival(paths, half, dt):
    """Product over grid intervals and faces of the bridge non-crossing probability."""
    a = paths[:, :-1, :]
    b = paths[:, 1:, :]
    lo = np.maximum((a + half) * (b + half), 0.0)
    hi = np.maximum((half - a) * (half - b), 0.0)
    p = (-np.expm1(-2 * lo / dt)) * (-np.expm1(-2 * hi / dt))
    return np.prod(p.reshape(p.shape[0], -1), axis=1)


def estimate_gamma_dirichlet(alpha: float, k: int, box_side: float, n_samples: int, M: int,
                             rng: RngSpec, potential: PairPotential = PairPotential(),
                             beta: float = 1.0, d: int = 3, crossing_correction: bool = True,
                             workers: int = 1, backend=None) -> GammaEstimate:
    """Uniform-start Dirichlet weight in the centred box of side ``box_side``.

    Starts are uniform in the box, bridges return to their start after ``k``
    legs, and each sample is weighted by ``exp(-alpha H_k)`` times the
    probability of staying inside.  With ``crossing_correction`` the grid
    indicator is replaced by the conditional probability that the bridge
    between consecutive grid points does not touch a face.
    """
    if int(k) < 1:
        raise InvalidArgument("k must be >= 1")
    if not box_side > 0:
        raise InvalidArgument("box side must be positive")
    if n_samples < 1 or M < 1:
        raise InvalidArgument("n_samples and M must be >= 1")
    k = int(k)
    half = box_side / 2
    dt = beta / M

    def chunk(gen, size):
        x0 = gen.uniform(-half, half, (size, d))
        if k > 1 and alpha > 0:
            w, paths = _weights(gen, size, alpha, k, M, beta, d, potential, x0, x0, backend)
        else:
            paths = brownian_batch(gen, size, k * M, dt, d, x0, x0)
            w = np.ones(size)
        inside = np.all(np.abs(paths) < half, axis=(1, 2))
        w = w * inside
        if crossing_correction:
            w = w * _exit_survival(paths, half, dt)
        return _moments(w)

    n, mean, m2 = _merge(map_chunks(chunk, rng, n_samples, workers))
    ph = phi_density(k * beta, 0.0, d)
    se = np.sqrt(m2 / (n - 1) / n) if n > 1 else 0.0
    params = dict(alpha=alpha, beta=beta, d=d, M=M, N=k, box_side=box_side, seed=rng.seed,
                  stream=rng.stream, potential=potential.describe(),
                  crossing_correction=crossing_correction)
    return GammaEstimate(ph * mean, ph * float(se), n, params)


# ---------------------------------------------------------------- tables

class GammaTable:
    """Estimates of Gamma_k for k = 1..K with shared parameters."""

    columns = ("k", "value", "std_error", "n_samples")

    def __init__(self, values, errors, n_samples, params: dict):
        self.values = np.asarray(values, dtype=float)
        self.errors = np.asarray(errors, dtype=float)
        self.n_samples = np.asarray(n_samples, dtype=np.int64)
        if not (self.values.shape == self.errors.shape == self.n_samples.shape) or self.values.ndim != 1:
            raise InvalidArgument("table columns must be 1-d and of equal length")
        if np.any(self.values < 0) or np.any(self.errors < 0):
            raise InvalidArgument("table entries must be non-negative")
        self.params = dict(params)

    @property
    def K(self) -> int:
        return len(self.values)

    @property
    def ks(self) -> np.ndarray:
        return np.arange(1, self.K + 1)

    def __getitem__(self, k) -> GammaEstimate:
        return GammaEstimate(float(self.values[k - 1]), float(self.errors[k - 1]),
                             int(self.n_samples[k - 1]), dict(self.params, N=k))

    def truncate(self, K: int) -> "GammaTable":
        return GammaTable(self.values[:K], self.errors[:K], self.n_samples[:K], self.params)

    @classmethod
    def free(cls, d: int, K: int, beta: float = 1.0) -> "GammaTable":
        """Exact free-gas table Gamma_k = (2 pi beta k)^{-d/2}."""
        ks = np.arange(1, K + 1)
        vals = (2 * np.pi * beta * ks) ** (-d / 2)
        return cls(vals, np.zeros(K), np.zeros(K, dtype=np.int64),
                   dict(alpha=0.0, beta=beta, d=d, M=0, seed=0, potential="none", L=0.0))

    @property
    def alpha(self) -> float:
        return float(self.params.get("alpha", 0.0))

    @property
    def beta(self) -> float:
        return float(self.params.get("beta", 1.0))

    @property
    def d(self) -> int:
        return int(self.params["d"])

    @property
    def L(self) -> float:
        return float(self.params.get("L", 0.0))

    def header(self) -> dict:
        keys = ("alpha", "beta", "d", "M", "seed", "n_samples", "potential", "L")
        h = {"format": "gamma-table"}
        for key in keys:
            if key in self.params:
                h[key] = tableio.fmt(self.params[key])
        h["code_version"] = __version__
        return h

    def dumps(self) -> str:
        rows = [(int(k), float(v), float(e), int(n))
                for k, v, e, n in zip(self.ks, self.values, self.errors, self.n_samples)]
        return tableio.dumps(self.header(), self.columns, rows)

    def save(self, path):
        with open(path, "w", newline="") as fh:
            fh.write(self.dumps())

    @classmethod
    def loads(cls, text: str) -> "GammaTable":
        header, cols, rows = tableio.loads(text)
        if tuple(cols) != cls.columns:
            raise InvalidArgument(f"unexpected columns {cols}")
        ks = [int(r[0]) for r in rows]
        if ks != list(range(1, len(ks) + 1)):
            raise InvalidArgument("table rows must be k = 1..K in order")
        params = {}
        for key, conv in (("alpha", float), ("beta", float), ("d", int), ("M", int),
                          ("seed", int), ("n_samples", int), ("L", float)):
            if key in header:
                params[key] = conv(header[key])
        if "potential" in header:
            params["potential"] = header["potential"]
        return cls([float(r[1]) for r in rows], [float(r[2]) for r in rows],
                   [int(r[3]) for r in rows], params)

    @classmethod
    def load(cls, path) -> "GammaTable":
        with open(path) as fh:
            return cls.loads(fh.read())


def estimate_gamma_table(alpha: float, K: int, n_samples: int, M: int, rng: RngSpec,
                         potential: PairPotential = PairPotential(), beta: float = 1.0, d: int = 3,
                         existing: GammaTable | None = None, workers: int = 1,
                         backend=None, progress=None) -> GammaTable:
    """Gamma_k(0) for k = 1..K; row k uses stream ``k`` of ``rng``.

    Rows already present in ``existing`` are kept verbatim, which is what
    makes a resumed run agree with a fresh one.
    """
    params = dict(alpha=float(alpha), beta=float(beta), d=int(d), M=int(M), seed=int(rng.seed),
                  n_samples=int(n_samples), potential=potential.describe(), L=potential.L_bound)
    vals, errs, ns = [], [], []
    start = 1
    if existing is not None:
        for key in ("alpha", "beta", "d", "M", "seed", "n_samples", "potential"):
            if key in existing.params and existing.params[key] != params[key]:
                raise InvalidArgument(f"existing table has {key}={existing.params[key]!r}, "
                                      f"requested {params[key]!r}")
        keep = min(existing.K, K)
        vals = list(existing.values[:keep])
        errs = list(existing.errors[:keep])
        ns = list(existing.n_samples[:keep])
        start = keep + 1
    for k in range(start, K + 1):
        est = estimate_gamma_point(alpha, k, np.zeros(d), n_samples, M, rng.with_stream(k),
                                   potential, beta, d, workers, backend)
        vals.append(est.value)
        errs.append(est.std_error)
        ns.append(est.n_samples)
        if progress is not None:
            progress(k, est)
    return GammaTable(vals, errs, ns, params)


# ---------------------------------------------------------------- lambda_c, rho_c

@dataclass(frozen=True)
class LambdaBracket:
    lower: float
    upper: float
    point_estimate: float
    k_used: list
    raw_fit: float = float("nan")


def _fit_lambda(ks, vals):
    y = -np.log(vals) / ks
    X = np.column_stack([np.ones_like(y), np.log(ks) / ks, 1.0 / ks])
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    return float(np.exp(coef[0]))


def estimate_lambda_c(table: GammaTable, k_min: int = 2, k_max: int | None = None,
                      alpha: float | None = None, L: float | None = None) -> LambdaBracket:
    """Bracket for the connective constant.

    The lower end uses sub-multiplicativity of ``Gamma_k (2 pi beta k)^{d/2}``;
    the upper end is ``exp(alpha L beta)``.  The point estimate comes from the
    fit ``-(1/k) log Gamma_k = log lambda + c log(k)/k + b/k`` over
    ``k_min..k_max``, clipped into the bracket.
    """
    if table.K < 3:
        raise InvalidArgument("need at least 3 table entries")
    if np.any(table.values <= 0):
        raise DegenerateInput("table contains zero entries")
    alpha = table.alpha if alpha is None else alpha
    L = table.L if L is None else L
    beta, d = table.beta, table.d
    ks = table.ks.astype(float)
    a = table.values * (2 * np.pi * beta * ks) ** (d / 2)
    lower = max(1.0, float(np.max(a ** (-1.0 / ks))))
    upper = float(np.exp(alpha * L * beta))
    if lower > upper:
        raise NumericFailure("lambda bracket inverted: lower > upper",
                             state={"lower": lower, "upper": upper})
    k_max = table.K if k_max is None else min(k_max, table.K)
    sel = slice(k_min - 1, k_max)
    if k_max - k_min + 1 < 3:
        raise InvalidArgument("fit window needs at least 3 points")
    raw = _fit_lambda(ks[sel], table.values[sel])
    point = min(max(raw, lower), upper)
    return LambdaBracket(lower, upper, point, list(range(k_min, k_max + 1)), raw)


@dataclass(frozen=True)
class RhoCSums:
    partial_sums: np.ndarray
    errors: np.ndarray
    increments: np.ndarray
    tail_exponent: float
    tail_estimate: float

    @property
    def value(self) -> float:
        return float(self.partial_sums[-1])

    @property
    def error(self) -> float:
        return float(self.errors[-1])


def estimate_rho_c(table: GammaTable, lam: float, K: int | None = None) -> RhoCSums:
    """Partial sums ``S_K = sum_{k<=K} lam^k Gamma_k`` with propagated errors.

    ``tail_exponent`` is a power-law fit to the second half of the increments
    and ``tail_estimate`` the matching integral tail (``inf`` when the fitted
    exponent is <= 1).  Both are diagnostics, not a verdict.
    """
    if not lam > 0:
        raise InvalidArgument("lambda must be positive")
    K = table.K if K is None else min(K, table.K)
    ks = np.arange(1, K + 1)
    w = np.exp(ks * np.log(lam))
    inc = w * table.values[:K]
    S = np.cumsum(inc)
    err = np.sqrt(np.cumsum((w * table.errors[:K]) ** 2))
    slope, tail = float("nan"), float("nan")
    half = ks >= max(2, K // 2)
    if half.sum() >= 3 and np.all(inc[half] > 0):
        slope = float(np.polyfit(np.log(ks[half]), np.log(inc[half]), 1)[0])
        s = -slope
        A = inc[-1] * K ** s
        tail = A * K ** (1 - s) / (s - 1) if s > 1 else float("inf")
    return RhoCSums(S, err, inc, slope, tail)


@dataclass(frozen=True)
class ScalingFit:
    exponent: float
    std_error: float
    ci: tuple
    window: tuple


def fit_scaling_exponent(table: GammaTable, lam: float, k_min: int = 1, k_max: int | None = None,
                         level: float = 0.95) -> ScalingFit:
    """OLS slope of ``log(lam^k Gamma_k)`` against ``log k`` over the window."""
    if table.K < 10:
        raise InvalidArgument("need K_max >= 10")
    k_max = table.K if k_max is None else min(k_max, table.K)
    ks = np.arange(k_min, k_max + 1)
    vals = table.values[k_min - 1:k_max]
    if len(ks) < 3:
        raise InvalidArgument("window needs at least 3 points")
    if np.any(vals <= 0):
        raise DegenerateInput("non-positive values in fit window")
    x = np.log(ks)
    y = ks * np.log(lam) + np.log(vals)
    res = stats.linregress(x, y)
    q = stats.t.ppf(0.5 + level / 2, len(ks) - 2)
    se = float(res.stderr)
    return ScalingFit(float(res.slope), se, (res.slope - q * se, res.slope + q * se), (k_min, k_max))
