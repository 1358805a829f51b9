"""Green-function numerics and the convolution algebra on uniform grids.

GridFn lives on ``[-X, X]^d`` (d <= 3) with an odd number of points per axis,
so the origin is a grid point and ``'same'`` convolutions stay centred.
Radial quadrature covers pointwise checks in any dimension.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, signal, special

from . import tableio
from .errors import (DegenerateInput, InvalidArgument, NumericFailure, SeriesDivergence,
                     SupercriticalInput)


@dataclass(frozen=True)
class GridFn:
    d: int
    X: float
    values: np.ndarray
    symmetric: bool = False

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if self.d not in (1, 2, 3):
            raise InvalidArgument("grid functions support d in {1, 2, 3}")
        if v.ndim != self.d or len(set(v.shape)) != 1 or v.shape[0] % 2 == 0 or v.shape[0] < 3:
            raise InvalidArgument("values must be a cube with an odd side length >= 3")
        if self.symmetric:
            for ax in range(self.d):
                if np.max(np.abs(v - np.flip(v, axis=ax)), initial=0.0) > 1e-12 * max(1.0, np.abs(v).max()):
                    raise InvalidArgument("symmetric flag set but values are not even")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def h(self) -> float:
        return 2 * self.X / (self.n - 1)

    @property
    def axis(self) -> np.ndarray:
        return np.linspace(-self.X, self.X, self.n)

    def radius(self) -> np.ndarray:
        ax = self.axis
        grids = np.meshgrid(*([ax] * self.d), indexing="ij")
        return np.sqrt(sum(g * g for g in grids))

    def like(self, values, symmetric=None) -> "GridFn":
        return GridFn(self.d, self.X, values, self.symmetric if symmetric is None else symmetric)

    def integral(self) -> float:
        return float(np.sum(self.values) * self.h ** self.d)

    def l1(self) -> float:
        return float(np.sum(np.abs(self.values)) * self.h ** self.d)

    def __add__(self, other):
        _match(self, other)
        return self.like(self.values + other.values, self.symmetric and other.symmetric)

    def __sub__(self, other):
        _match(self, other)
        return self.like(self.values - other.values, self.symmetric and other.symmetric)

    def __mul__(self, c: float):
        return self.like(self.values * c)

    __rmul__ = __mul__

    def __neg__(self):
        return self.like(-self.values)

    def dumps(self) -> str:
        header = {"format": "grid-fn", "d": self.d, "X": repr(float(self.X)), "n": self.n,
                  "h": repr(self.h), "symmetric": self.symmetric}
        return tableio.dumps(header, ["value"], [(float(x),) for x in self.values.ravel()])

    @classmethod
    def loads(cls, text: str) -> "GridFn":
        header, cols, rows = tableio.loads(text)
        d, n = int(header["d"]), int(header["n"])
        vals = np.array([float(r[0]) for r in rows]).reshape((n,) * d)
        return cls(d, float(header["X"]), vals, header.get("symmetric") == "True")


def _match(f: GridFn, g: GridFn):
    if f.d != g.d or f.n != g.n or f.X != g.X:
        raise InvalidArgument("grid functions live on different grids")


def grid_from_radial(fn, d: int, X: float, n: int, symmetric: bool = True) -> GridFn:
    proto = GridFn(d, X, np.zeros((n,) * d))
    return GridFn(d, X, fn(proto.radius()), symmetric)


def heat_kernel(t: float, d: int, X: float, n: int) -> GridFn:
    return grid_from_radial(lambda r: (2 * np.pi * t) ** (-d / 2) * np.exp(-r * r / (2 * t)), d, X, n)


def banach_norm(f: GridFn) -> float:
    """``max(L1, sup |f|, sup |x|^d |f|)`` on the grid."""
    a = np.abs(f.values)
    return float(max(f.l1(), a.max(initial=0.0), (f.radius() ** f.d * a).max(initial=0.0)))


def convolve(f: GridFn, g: GridFn) -> GridFn:
    """Grid convolution ``h^d sum_y f(y) g(x - y)`` restricted to the grid (FFT)."""
    _match(f, g)
    vals = signal.fftconvolve(f.values, g.values, mode="same") * f.h ** f.d
    return f.like(vals, f.symmetric and g.symmetric)


# ---------------------------------------------------------------- G and G_mu

def _phi_r(t, r, d):
    return (2 * np.pi * t) ** (-d / 2) * np.exp(-(r * r) / (2 * t))


def g_mu(x, mu: float, d: int, tol: float = 1e-14):
    """``sum_{n>=1} mu^n phi_n(x)`` at a point (x array or |x|), tail bounded by ``tol``."""
    if not 0 <= mu <= 1:
        raise InvalidArgument("mu must be in [0, 1]")
    r = float(np.linalg.norm(np.atleast_1d(np.asarray(x, dtype=float))))
    if mu == 0:
        return 0.0
    if mu == 1:
        return green_G(r, d, tol)
    # terms are below mu^n (2 pi)^{-d/2}; stop once the geometric tail is under tol
    c = (2 * np.pi) ** (-d / 2)
    N = max(1, int(np.ceil(np.log(tol * (1 - mu) / c) / np.log(mu))))
    n = np.arange(1, N + 1)
    return float(np.sum(mu ** n * _phi_r(n, r, d)))


def g_mu_grid(mu: float, d: int, X: float, n: int, tol: float = 1e-14) -> GridFn:
    """Grid version; the L1 tail beyond the last term is ``mu^{N+1}/(1-mu)``."""
    if not 0 <= mu < 1:
        raise SeriesDivergence("the grid sum needs mu < 1", state={"mu": mu})
    proto = GridFn(d, X, np.zeros((n,) * d))
    r = proto.radius()
    out = np.zeros_like(r)
    if mu == 0:
        return GridFn(d, X, out, True)
    N = max(1, int(np.ceil(np.log(tol * (1 - mu)) / np.log(mu))))
    for k in range(1, N + 1):
        out = out + mu ** k * _phi_r(k, r, d)
    return GridFn(d, X, out, True)


def edgeworth_constant(d: int) -> float:
    """``a_d = Gamma(d/2 - 1) / (2 pi^{d/2})``."""
    return float(special.gamma(d / 2 - 1) / (2 * np.pi ** (d / 2)))


def _tail_integral(T: float, r: float, d: int) -> float:
    """``int_T^inf phi_t(r) dt`` in closed form."""
    s = d / 2 - 1
    a = r * r / 2
    z = a / T
    lead = (2 * np.pi) ** (-d / 2) * T ** (-s)
    if z < 1e-100:
        return float(lead / s)
    return float(lead * special.gammainc(s, z) * special.gamma(s) / z ** s)


def _midpoint_K(d: int) -> float:
    s = d / 2
    u = np.linspace(0, 40, 40001)
    return float(np.max(np.abs(u * u - 2 * (s + 1) * u + s * (s + 1)) * np.exp(-u)))


@dataclass(frozen=True)
class GreenValue:
    value: float
    n_terms: int
    error_bound: float


def green_G_detail(x, d: int, tol: float = 1e-13) -> GreenValue:
    """``G(x) = sum_{n>=1} phi_n(x)``.

    Terms up to ``N*`` are summed directly; the rest is replaced by the
    integral of ``phi_t(x)`` over ``[N* + 1/2, inf)`` (midpoint rule), whose
    error is bounded through ``sup |d^2 phi_t / dt^2|``.  ``N*`` is the first
    value for which that bound is at most ``tol``.
    """
    if d <= 2:
        raise SeriesDivergence(f"G diverges in d={d}", state={"d": d})
    if not tol > 0:
        raise InvalidArgument("tol must be positive")
    r = float(np.linalg.norm(np.atleast_1d(np.asarray(x, dtype=float))))
    s = d / 2
    C = (2 * np.pi) ** (-s) * _midpoint_K(d) / 24
    # C (N*-1)^{-s-1} / (s+1) <= tol
    N = int(np.ceil((C / (tol * (s + 1))) ** (1 / (s + 1)))) + 1
    bound = C * (N - 1) ** (-s - 1) / (s + 1)
    n = np.arange(1, N + 1)
    val = float(np.sum(_phi_r(n, r, d))) + _tail_integral(N + 0.5, r, d)
    return GreenValue(val, N, float(bound))


def green_G(x, d: int, tol: float = 1e-13) -> float:
    return green_G_detail(x, d, tol).value


def green_residual_poisson(r: float, d: int, k_max: int = 2000) -> float:
    """``G(x) - a_d |x|^{2-d}`` from Poisson summation over the time lattice.

    With ``f(t) = phi_t(x)`` for t > 0 and 0 otherwise, ``sum_n f(n)`` equals
    ``sum_k fhat(k)``; ``fhat(0) = a_d |x|^{2-d}`` and for k != 0
    ``fhat(k) = 2 (2 pi)^{-d/2} (a/b)^{(1-d/2)/2} K_{d/2-1}(2 sqrt(ab))`` with
    ``a = |x|^2/2`` and ``b = 2 pi i k``.
    """
    if r <= 0:
        raise InvalidArgument("r must be positive")
    a = r * r / 2
    nu = 1 - d / 2
    total = 0.0
    for k in range(1, k_max + 1):
        b = 2j * np.pi * k
        z = 2 * np.sqrt(a * b)
        # kve(v, z) = kv(v, z) exp(z); keep the exponential separate for range
        term = 2 * (2 * np.pi) ** (-d / 2) * (a / b) ** (nu / 2) * special.kve(abs(nu), z) * np.exp(-z)
        total += 2 * term.real
        if abs(term) < 1e-300 or (k > 5 and abs(term) < 1e-18 * abs(total)):
            break
    return float(total)


def green_plot_rows(d: int, radii, tol: float = 1e-13):
    a = edgeworth_constant(d)
    return [(float(r), green_G(r, d, tol), a * float(r) ** (2 - d), green_residual_poisson(float(r), d))
            for r in radii]


# ---------------------------------------------------------------- deconvolution

@dataclass
class NeumannResult:
    S: GridFn
    mu: float
    diagnostics: dict = field(default_factory=dict)


def neumann_deconvolve(G_pi: GridFn, phi: GridFn, tol: float = 1e-12, max_terms: int = 500,
                       mu_tol: float = 1e-14) -> NeumannResult:
    """Solve ``S = G_pi + G_pi * S`` by the geometric-centred Neumann series.

    ``mu = int G_pi``, ``rho = -G_pi + mu phi``, ``A = rho * G_mu + rho``,
    ``Q = sum_{n>=1} (-1)^n A^{*n}`` and ``S = Q + G_mu + Q * G_mu``.  The
    series stops when the L1 norm of the last term times ``q / (1 - q)``,
    ``q = ||A||_1``, is below ``tol``.
    """
    _match(G_pi, phi)
    mu = G_pi.integral()
    if mu >= 1:
        raise SupercriticalInput(f"int G_pi = {mu} >= 1")
    if mu < 0:
        raise DegenerateInput(f"int G_pi = {mu} < 0")
    rho = phi * mu - G_pi
    Gm = g_mu_grid(mu, G_pi.d, G_pi.X, G_pi.n, mu_tol)
    A = convolve(rho, Gm) + rho
    normA = banach_norm(A)
    if normA >= 1:
        raise SeriesDivergence(f"contraction fails: ||A|| = {normA}", state={"norm": normA})
    q = A.l1()
    term = -A
    Q = term
    n_terms = 1
    remainder = term.l1() * q / (1 - q) if q < 1 else np.inf
    while remainder > tol:
        if n_terms >= max_terms:
            raise SeriesDivergence("Neumann series did not reach tolerance",
                                   state={"terms": n_terms, "remainder": remainder})
        term = -convolve(term, A)
        Q = Q + term
        n_terms += 1
        remainder = term.l1() * q / (1 - q)
    S = Q + Gm + convolve(Q, Gm)
    resid = (S - G_pi - convolve(G_pi, S)).l1()
    diag = dict(norm_A=normA, l1_A=q, terms=n_terms, remainder_bound=remainder,
                residual_l1=resid, rho_integral=rho.integral())
    return NeumannResult(S, mu, diag)


def synthetic_green_pair(lam: float, c: float, d: int, X: float, n: int, N_max: int = 400):
    """Forward construction with ``Pi_1 = phi`` and ``Pi_2 = c phi_2``.

    Returns ``(G_pi, G_gamma)`` where ``G_pi = lam phi + c lam^2 phi_2`` and
    ``G_gamma = sum_N lam^N F_N phi_N`` with ``F_N = F_{N-1} + c F_{N-2}``,
    ``F_0 = F_1 = 1`` (the convolution recursion with ``Gamma_0 = delta``).
    """
    G_pi = heat_kernel(1.0, d, X, n) * lam + heat_kernel(2.0, d, X, n) * (c * lam * lam)
    F = [1.0, 1.0]
    for N in range(2, N_max + 1):
        F.append(F[-1] + c * F[-2])
    proto = GridFn(d, X, np.zeros((n,) * d))
    r = proto.radius()
    out = np.zeros_like(r)
    for N in range(1, N_max + 1):
        w = lam ** N * F[N]
        if abs(w) < 1e-300:
            break
        out = out + w * _phi_r(N, r, d)
    return G_pi, GridFn(d, X, out, True)


# ---------------------------------------------------------------- radial quadrature

def _sphere_area(m: int) -> float:
    """Surface area of the unit sphere S^m in R^{m+1}."""
    return float(2 * np.pi ** ((m + 1) / 2) / special.gamma((m + 1) / 2))


def radial_convolve(f, g, s: float, d: int, r_max: float = np.inf, epsabs: float = 1e-13,
                    epsrel: float = 1e-10) -> float:
    """``int_{R^d} f(|y|) g(|x - y|) dy`` at ``|x| = s`` by (radius, distance) quadrature.

    Valid in any d >= 2: the angular integral over the sphere is rewritten in
    the distance ``rho = |x - y|`` with weight ``(1 - u^2)^{(d-3)/2}``,
    ``u = (r^2 + s^2 - rho^2)/(2 r s)``.
    """
    if d < 2:
        raise InvalidArgument("radial quadrature needs d >= 2")
    if s == 0:
        val, err = integrate.quad(lambda r: r ** (d - 1) * f(r) * g(r), 0, r_max,
                                  epsabs=epsabs, epsrel=epsrel, limit=400)
        return _sphere_area(d - 1) * val
    gam = (d - 3) / 2
    area = _sphere_area(d - 2)

    def inner(r):
        if r == 0:
            return 0.0
        lo, hi = abs(r - s), r + s
        if hi - lo <= 0:
            return 0.0
        scale = (2 * r * s) ** (-2 * gam)

        def smooth(rho):
            return g(rho) * rho * ((rho + lo) * (hi + rho)) ** gam * scale

        val, _ = integrate.quad(smooth, lo, hi, weight="alg", wvar=(gam, gam),
                                epsabs=epsabs, epsrel=epsrel, limit=200)
        return r ** (d - 1) * f(r) * val / (r * s)

    # split at |x| (kink of the inner integral) and at 2|x|
    pts = [p for p in (0.0, s, 2 * s) if p < r_max] + [r_max]
    total = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        v, _ = integrate.quad(inner, a, b, epsabs=epsabs, epsrel=epsrel, limit=400)
        total += v
    return area * total


@dataclass(frozen=True)
class FdReport:
    radii: np.ndarray
    ratios: np.ndarray
    sup: float
    inf: float


def _ratio_report(conv, target, radii) -> FdReport:
    radii = np.asarray(radii, dtype=float)
    ratios = np.array([conv(s) / target(s) for s in radii])
    if not np.all(np.isfinite(ratios)):
        raise NumericFailure("radial quadrature produced non-finite values", state={"ratios": ratios})
    return FdReport(radii, ratios, float(ratios.max()), float(ratios.min()))


def gauss_power_check(d: int, m: float, h: float, radii) -> FdReport:
    """Ratio ``int (1+|x|)^{-m} e^{-h|y-x|^2} dx / (1+|y|)^{-m}`` over ``|y|`` in ``radii``."""
    def f(r):
        return (1 + r) ** (-m)

    def g(r):
        return np.exp(-h * r * r)

    return _ratio_report(lambda s: radial_convolve(f, g, s, d), f, radii)


def Fd_self_convolution_check(d: int, radii) -> FdReport:
    """Ratio ``(F_d * F_d)(x) / F_d(x)`` with ``F_d = (1+|x|)^{-3d+6}``."""
    def F(r):
        return (1 + r) ** (6 - 3 * d)

    return _ratio_report(lambda s: radial_convolve(F, F, s, d), F, radii)


def fd_gauss_check(d: int, A: float, radii) -> FdReport:
    """Ratio ``int f_d^2(x-y) e^{-A|y|^2} dy / f_d^2(x)`` with ``f_d = (1+|x|)^{2-d}``."""
    def f2(r):
        return (1 + r) ** (2 * (2 - d))

    def g(r):
        return np.exp(-A * r * r)

    return _ratio_report(lambda s: radial_convolve(g, f2, s, d), f2, radii)
