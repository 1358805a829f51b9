"""Variational free energy, tilt parameter and cycle-density minimizer.

All sums run over k = 1..K_max.  Weights ``lam^k Gamma_k`` are formed in the
log domain so large ``lam`` or long tables do not overflow.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument, NumericFailure
from .gamma import GammaTable

SUBCRITICAL = "subcritical"
CRITICAL = "critical"
SUPERCRITICAL = "supercritical"


def gamma_array(gamma, K_max: int | None = None) -> np.ndarray:
    vals = gamma.values if isinstance(gamma, GammaTable) else np.asarray(gamma, dtype=float)
    if K_max is not None:
        if K_max > len(vals):
            raise InvalidArgument(f"K_max={K_max} exceeds table length {len(vals)}")
        vals = vals[:K_max]
    if vals.ndim != 1 or len(vals) == 0:
        raise InvalidArgument("gamma must be a non-empty 1-d sequence")
    if np.any(vals <= 0):
        raise InvalidArgument("all Gamma_k must be positive")
    return vals


def free_tail_bound(d: int, K: int, lam: float = 1.0, beta: float = 1.0) -> float:
    """Bound on ``sum_{k>K} lam^k (2 pi beta k)^{-d/2}`` for ``lam <= 1``, d > 2."""
    if lam > 1 or d <= 2:
        return float("inf")
    return float((2 * np.pi * beta) ** (-d / 2) * K ** (1 - d / 2) / (d / 2 - 1))


def _log_weights(lam, G):
    k = np.arange(1, len(G) + 1)
    return k * np.log(lam) + np.log(G), k


def mass(c: float, lam: float, G: np.ndarray) -> float:
    """``sum_k lam^k Gamma_k exp(-c k)``."""
    lw, k = _log_weights(lam, G)
    return float(np.sum(np.exp(lw - c * k)))


def rho_c_truncated(lam: float, gamma, K_max: int | None = None) -> float:
    return mass(0.0, lam, gamma_array(gamma, K_max))


def rate_I(p, gamma) -> float:
    """``sum_k p_k log(p_k k / (Gamma_k e))`` with 0 log 0 = 0."""
    p = np.asarray(p, dtype=float)
    G = gamma_array(gamma, len(p))
    if np.any(p < 0):
        raise InvalidArgument("p must be non-negative")
    k = np.arange(1, len(p) + 1)
    pos = p > 0
    return float(np.sum(p[pos] * (np.log(p[pos] * k[pos] / G[pos]) - 1.0)))


@dataclass(frozen=True)
class TiltSolution:
    c: float
    regime: str
    residual: float
    iterations: int
    rho_c: float


def solve_c(rho: float, lam: float, gamma, K_max: int | None = None, tol: float = 1e-13,
            max_iter: int = 400) -> TiltSolution:
    """Root of ``sum_k lam^k Gamma_k e^{-ck} = rho`` by bisection on c >= 0.

    Returns ``c = 0`` with the supercritical flag when the truncated critical
    density is below ``rho``.  The stopping rule is on the rho-residual.
    """
    if not rho > 0:
        raise InvalidArgument("rho must be positive")
    if not lam > 0:
        raise InvalidArgument("lambda must be positive")
    if not tol > 0:
        raise InvalidArgument("tol must be positive")
    G = gamma_array(gamma, K_max)
    rc = mass(0.0, lam, G)
    if abs(rc - rho) < tol:
        return TiltSolution(0.0, CRITICAL, rc - rho, 0, rc)
    if rc < rho:
        return TiltSolution(0.0, SUPERCRITICAL, rc - rho, 0, rc)
    lo, hi = 0.0, 1.0
    it = 0
    while mass(hi, lam, G) >= rho:
        lo, hi = hi, 2 * hi
        it += 1
        if it > max_iter or not np.isfinite(hi):
            raise NumericFailure("could not bracket c", state={"lo": lo, "hi": hi})
    while True:
        mid = 0.5 * (lo + hi)
        res = mass(mid, lam, G) - rho
        it += 1
        if abs(res) < tol:
            return TiltSolution(mid, SUBCRITICAL, res, it, rc)
        if it > max_iter or mid in (lo, hi):
            raise NumericFailure("bisection did not reach the residual tolerance",
                                 state={"lo": lo, "hi": hi, "residual": res, "iterations": it})
        if res > 0:
            lo = mid
        else:
            hi = mid


def minimizer_p_star(rho: float, lam: float, gamma, K_max: int | None = None,
                     tol: float = 1e-13) -> np.ndarray:
    """``p*_k = lam^k Gamma_k e^{-c(rho) k} / k`` (c = 0 above the critical density)."""
    G = gamma_array(gamma, K_max)
    sol = solve_c(rho, lam, G, tol=tol)
    lw, k = _log_weights(lam, G)
    return np.exp(lw - sol.c * k) / k


def objective(p, rho: float, lam: float, gamma) -> float:
    """``I(p) + (rho - sum_k k p_k) log lam``."""
    p = np.asarray(p, dtype=float)
    k = np.arange(1, len(p) + 1)
    return rate_I(p, gamma) + (rho - float(np.sum(k * p))) * np.log(lam)


def rate_J(p, rho: float, lam: float, gamma, f_value: float, slack: float = 1e-12) -> float:
    p = np.asarray(p, dtype=float)
    k = np.arange(1, len(p) + 1)
    if np.any(p < 0) or np.sum(k * p) > rho * (1 + slack):
        raise InvalidArgument("p is outside the admissible set")
    return objective(p, rho, lam, gamma) - f_value


def closed_form_f(rho: float, lam: float, gamma, K_max: int | None = None, tol: float = 1e-13) -> float:
    G = gamma_array(gamma, K_max)
    sol = solve_c(rho, lam, G, tol=tol)
    lw, k = _log_weights(lam, G)
    p = np.exp(lw - sol.c * k) / k
    if sol.regime == SUBCRITICAL:
        return float(rho * np.log(lam) - (rho * sol.c + np.sum(p)))
    return float(rho * np.log(lam) - np.sum(p))


# ---------------------------------------------------------------- numeric minimizer

def minimize_objective(rho: float, lam: float, gamma, K_max: int | None = None,
                       tol: float = 1e-22, max_iter: int = 5000):
    """Minimize ``I(p) + (rho - sum k p_k) log lam`` over ``p >= 0, sum k p_k <= rho``.

    Active-set Newton in p-space.  The Hessian of I is ``diag(1/p)``, so the
    Newton step is ``dp = -p (g + nu k)`` with ``nu = 0`` while the mass
    constraint is slack and ``nu`` chosen so that ``sum k dp = 0`` once it
    binds.  Each coordinate is safeguarded separately (it may shrink by at
    most a factor 100 per iteration), and in the bound phase the iterate is
    projected back onto ``sum k p_k = rho`` by rescaling.  Coordinates that
    underflow are fixed at zero; their optimal value is below the smallest
    double.  Stops when the Newton decrement drops below ``tol * rho``.
    Returns ``(p, value, nu, iterations)``.
    """
    G = gamma_array(gamma, K_max)
    k = np.arange(1, len(G) + 1, dtype=float)
    logG = np.log(G)
    loglam = np.log(lam)

    # strictly feasible start: the untilted shape scaled to half the mass
    q = G / k
    p = q * (0.5 * rho / np.sum(k * q))
    live = p > 0
    active = False
    nu = 0.0
    dec = np.inf
    for it in range(1, max_iter + 1):
        pl, kl = p[live], k[live]
        g = np.log(pl * kl) - logG[live] - kl * loglam
        if active:
            nu = -float(np.sum(pl * kl * g)) / float(np.sum(pl * kl * kl))
        r = g + nu * kl
        dec = float(np.sum(pl * r * r))
        if dec < tol * rho:
            if active and nu < 0:
                active, nu = False, 0.0
                continue
            return p, objective(p, rho, lam, G), nu, it
        new = p.copy()
        new[live] = pl * np.maximum(1.0 - r, 0.01)
        m = float(np.sum(k * new))
        if active or m > rho:
            active = True
            new = new * (rho / m)
        p = new
        dead = live & (p < 1e-300)
        if np.any(dead):
            p[dead] = 0.0
            live = live & ~dead
    raise NumericFailure("Newton minimizer did not converge",
                         state={"p": p.copy(), "decrement": dec, "iterations": max_iter})


@dataclass(frozen=True)
class FreeEnergy:
    closed_form: float
    numeric: float
    gap: float
    regime: str
    c: float
    mass: float


def free_energy(rho: float, lam: float, gamma, K_max: int | None = None, beta: float = 1.0,
                tol: float = 1e-13) -> FreeEnergy:
    """Free energy from the closed form and from direct minimization, plus their gap."""
    G = gamma_array(gamma, K_max)
    sol = solve_c(rho, lam, G, tol=tol)
    closed = closed_form_f(rho, lam, G, tol=tol)
    p, val, nu, _ = minimize_objective(rho, lam, G)
    k = np.arange(1, len(G) + 1)
    return FreeEnergy(closed, val, abs(closed - val), sol.regime, sol.c, float(np.sum(k * p)))


def phase_diagram(rhos, lam: float, gamma, K_max: int | None = None, tol: float = 1e-13):
    """Rows ``(rho, c, f, sum k p*_k, regime)`` over a density grid."""
    G = gamma_array(gamma, K_max)
    rows = []
    k = np.arange(1, len(G) + 1)
    for rho in rhos:
        sol = solve_c(rho, lam, G, tol=tol)
        p = minimizer_p_star(rho, lam, G, tol=tol)
        rows.append((float(rho), sol.c, closed_form_f(rho, lam, G, tol=tol), float(np.sum(k * p)), sol.regime))
    return rows
