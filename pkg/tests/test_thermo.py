import numpy as np
import pytest
from hypothesis import given, strategies as st

from srbb import thermo
from srbb.errors import InvalidArgument
from srbb.gamma import GammaTable

G5 = GammaTable.free(5, 400)
RC = thermo.rho_c_truncated(1.0, G5)


def test_free_gas_rho_c_value():
    # [DERIVED] sum_{k<=400} (2 pi k)^{-5/2}
    assert RC == pytest.approx(0.013555325544705817, rel=1e-14)


@given(frac=st.floats(0.01, 0.99))
def test_solve_c_residual_and_regime(frac):
    sol = thermo.solve_c(frac * RC, 1.0, G5)
    assert sol.regime == thermo.SUBCRITICAL and sol.c > 0
    assert abs(thermo.mass(sol.c, 1.0, G5.values) - frac * RC) < 1e-13


def test_regimes():
    assert thermo.solve_c(2 * RC, 1.0, G5).regime == thermo.SUPERCRITICAL
    assert thermo.solve_c(RC, 1.0, G5).regime == thermo.CRITICAL
    with pytest.raises(InvalidArgument):
        thermo.solve_c(-1.0, 1.0, G5)
    with pytest.raises(InvalidArgument):
        thermo.solve_c(0.01, 1.0, G5, K_max=500)


@pytest.mark.parametrize("frac", [1e-4, 0.2, 0.9, 1.0, 1.7, 10.0])
def test_numeric_minimizer_matches_closed_form(frac):
    fe = thermo.free_energy(frac * RC, 1.0, G5)
    assert fe.gap < 1e-12
    assert fe.mass == pytest.approx(min(frac * RC, RC), rel=1e-9)


def test_minimizer_with_lambda_and_interacting_shape():
    k = np.arange(1, 61)
    G = 1.2 ** -k * (2 * np.pi * k) ** -1.5 * (1 + 0.3 / k)
    rc = thermo.rho_c_truncated(1.2, G)
    for rho in (0.5 * rc, 2 * rc):
        fe = thermo.free_energy(rho, 1.2, G)
        assert fe.gap < 1e-12


def test_objective_is_minimized_by_p_star():
    rho = 0.5 * RC
    p = thermo.minimizer_p_star(rho, 1.0, G5)
    f = thermo.closed_form_f(rho, 1.0, G5)
    assert thermo.rate_J(p, rho, 1.0, G5, f) == pytest.approx(0.0, abs=1e-13)
    gen = np.random.default_rng(0)
    for _ in range(20):
        q = p * np.exp(0.1 * gen.normal(size=p.size))
        q *= min(1.0, rho / np.sum(np.arange(1, 401) * q))
        assert thermo.rate_J(q, rho, 1.0, G5, f) > 0
    with pytest.raises(InvalidArgument):
        thermo.rate_J(p * 3, rho, 1.0, G5, f)


def test_rate_I_zero_convention():
    assert thermo.rate_I(np.zeros(5), G5.values[:5]) == 0.0


def test_phase_diagram_rows_and_monotone_c():
    rows = thermo.phase_diagram(np.linspace(0.1 * RC, 2 * RC, 30), 1.0, G5)
    cs = [r[1] for r in rows]
    assert all(a >= b for a, b in zip(cs, cs[1:]))
    assert {r[4] for r in rows} == {thermo.SUBCRITICAL, thermo.SUPERCRITICAL}
    for rho, c, f, m, regime in rows:
        assert m == pytest.approx(min(rho, RC), rel=1e-9)


def test_free_tail_bound():
    tail = float(np.sum((2 * np.pi * np.arange(401, 10**6)) ** -2.5))
    assert tail <= thermo.free_tail_bound(5, 400) < 2 * tail
    assert thermo.free_tail_bound(2, 400) == np.inf
