import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import direct_convolution
from srbb import greenlab as gl
from srbb.errors import InvalidArgument, SeriesDivergence, SupercriticalInput


@pytest.mark.parametrize("d,n", [(1, 41), (2, 13)])
def test_fft_convolution_matches_direct_sum(d, n):
    gen = np.random.default_rng(d)
    f = gl.GridFn(d, 3.0, gen.normal(size=(n,) * d))
    g = gl.GridFn(d, 3.0, gen.normal(size=(n,) * d))
    ref = direct_convolution(f.values, g.values, f.h, d)
    assert np.max(np.abs(gl.convolve(f, g).values - ref)) < 1e-10


def test_heat_kernel_semigroup_on_grid():
    n = 601
    p1 = gl.heat_kernel(1.0, 1, 15.0, n)
    p2 = gl.heat_kernel(2.0, 1, 15.0, n)
    assert (gl.convolve(p1, p1) - p2).l1() < 1e-10
    assert p1.integral() == pytest.approx(1.0, abs=1e-12)


def test_gridfn_validation_and_roundtrip():
    with pytest.raises(InvalidArgument):
        gl.GridFn(1, 1.0, np.zeros(4))
    with pytest.raises(InvalidArgument):
        gl.GridFn(4, 1.0, np.zeros((3, 3, 3, 3)))
    with pytest.raises(InvalidArgument):
        gl.GridFn(1, 1.0, np.arange(5.0), symmetric=True)
    f = gl.heat_kernel(0.7, 2, 2.0, 9)
    back = gl.GridFn.loads(f.dumps())
    assert np.array_equal(back.values, f.values) and back.symmetric and back.X == 2.0


@given(seed=st.integers(0, 10**6))
def test_banach_norm_algebra(seed):
    gen = np.random.default_rng(seed)
    f = gl.GridFn(1, 5.0, gen.normal(size=51) * np.exp(-np.linspace(-5, 5, 51) ** 2))
    g = gl.GridFn(1, 5.0, gen.normal(size=51))
    assert gl.banach_norm(gl.convolve(f, g)) <= 4 * gl.banach_norm(f) * gl.banach_norm(g)
    assert gl.banach_norm(f * 2.0) == pytest.approx(2 * gl.banach_norm(f))


def test_g_mu_point_and_grid_agree():
    grid = gl.g_mu_grid(0.6, 2, 6.0, 61)
    assert grid.values[30, 30] == pytest.approx(gl.g_mu(0.0, 0.6, 2), rel=1e-12)
    assert gl.g_mu([1.0, 0.0], 0.6, 2) == pytest.approx(gl.g_mu(1.0, 0.6, 2))
    # sum of mu^n
    assert gl.g_mu_grid(0.6, 1, 40.0, 4001).integral() == pytest.approx(1.5, rel=1e-9)
    with pytest.raises(SeriesDivergence):
        gl.g_mu_grid(1.0, 1, 5.0, 11)


def test_green_function_routes_and_divergence():
    a3 = gl.edgeworth_constant(3)
    assert a3 == pytest.approx(1 / (2 * np.pi))
    for r in (0.5, 1.0, 2.0, 4.0):
        direct = gl.green_G(r, 3, 1e-13)
        assert direct == pytest.approx(a3 / r + gl.green_residual_poisson(r, 3), abs=2e-13)
    # brute partial sum with an explicit tail bound
    n = np.arange(1, 2_000_001)
    brute = np.sum((2 * np.pi * n) ** -2.5 * np.exp(-1.0 / (2 * n)))
    # remaining terms: exp(-1/2n) = 1 to 1e-7 here, so the tail is a plain power sum
    brute += (2 * np.pi) ** -2.5 * (n[-1] + 0.5) ** -1.5 / 1.5
    assert gl.green_G(1.0, 5) == pytest.approx(brute, abs=1e-12)
    assert gl.green_G(0.0, 5) == pytest.approx(gl.g_mu(0.0, 1.0, 5))
    with pytest.raises(SeriesDivergence):
        gl.green_G(1.0, 2)
    detail = gl.green_G_detail(1.0, 4, 1e-10)
    assert detail.error_bound <= 1e-10


def test_neumann_errors():
    phi = gl.heat_kernel(1.0, 1, 30.0, 601)
    with pytest.raises(SupercriticalInput):
        gl.neumann_deconvolve(phi * 1.2, phi)
    # mu < 1 but G_pi is far from a multiple of phi, so A is not a contraction
    wide = gl.heat_kernel(25.0, 1, 30.0, 601) * 0.95
    with pytest.raises(SeriesDivergence):
        gl.neumann_deconvolve(wide, phi)


def test_neumann_synthetic_2d():
    X, n = 8.0, 161
    phi = gl.heat_kernel(1.0, 2, X, n)
    Gp, Gg = gl.synthetic_green_pair(0.4, -0.1, 2, X, n)
    res = gl.neumann_deconvolve(Gp, phi)
    assert (res.S - Gg).l1() < 1e-5


def test_radial_quadrature_checks():
    r = gl.gauss_power_check(3, 0.0, 1.0, [0.0, 2.5])
    assert np.allclose(r.ratios, np.pi ** 1.5, rtol=1e-8)
    r4 = gl.gauss_power_check(4, 0.0, 2.0, [1.0])
    assert r4.ratios[0] == pytest.approx((np.pi / 2) ** 2, rel=1e-8)
    # Gaussian against a Gaussian has a closed form in any d
    val = gl.radial_convolve(lambda t: np.exp(-t * t), lambda t: np.exp(-t * t), 1.5, 5)
    assert val == pytest.approx((np.pi / 2) ** 2.5 * np.exp(-1.5 ** 2 / 2), rel=1e-8)
    fd = gl.Fd_self_convolution_check(5, [0.0, 10.0, 100.0, 1000.0])
    assert np.all(np.isfinite(fd.ratios)) and fd.sup < 1.0
    with pytest.raises(InvalidArgument):
        gl.radial_convolve(np.exp, np.exp, 1.0, 1)
