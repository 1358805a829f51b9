import numpy as np
import pytest

from srbb.errors import InvalidArgument, ResourceLimit
from srbb.paths import PairPotential
from srbb.pi import convolution_identity_check, estimate_pi_integrated, estimate_u_n, estimate_z_free
from srbb.rng import RngSpec

STEP = PairPotential("step", 1.0, 1.0)


def test_graph_and_lace_methods_agree():
    a = estimate_pi_integrated(0.5, 4, 1024, 8, RngSpec(1), STEP, method="graphs")
    b = estimate_pi_integrated(0.5, 4, 1024, 8, RngSpec(1), STEP, method="laces")
    assert a.value == pytest.approx(b.value, abs=1e-15)
    assert sum(m for m, _ in a.breakdown.values()) == pytest.approx(a.value, abs=1e-15)


def test_pi_small_cases():
    assert estimate_pi_integrated(0.5, 1, 10, 4, RngSpec(1)).value == 1.0
    # P_2 = E[-U_12] = E[exp(-alpha V)] - 1
    p2 = estimate_pi_integrated(0.5, 2, 2048, 8, RngSpec(2), STEP)
    z2, _ = estimate_z_free(0.5, 2, 2048, 8, RngSpec(2), STEP)
    assert p2.value == pytest.approx(z2 - 1, abs=1e-14)
    assert estimate_pi_integrated(0.0, 3, 64, 4, RngSpec(3)).value == 0.0
    with pytest.raises(ResourceLimit):
        estimate_pi_integrated(0.5, 8, 10, 4, RngSpec(1))
    with pytest.raises(InvalidArgument):
        estimate_pi_integrated(0.5, 3, 10, 4, RngSpec(1), method="nope")


def test_convolution_residual_small_run():
    rows = convolution_identity_check(0.5, 4, 4096, 8, RngSpec(4), STEP)
    assert rows[0].r == 0.0 and rows[1].r == 0.0
    for r in rows[2:]:
        assert abs(r.r) <= 4 * r.r_err


def test_u_n_decreases_with_separation_and_validates():
    vals = []
    for s in (0.0, 2.0):
        x = np.zeros((4, 3))
        x[3, 0] = s
        vals.append(estimate_u_n(0.5, x, 4000, 8, RngSpec(5), STEP).value)
    assert vals[0] > vals[1] > 0
    with pytest.raises(InvalidArgument):
        estimate_u_n(0.5, np.zeros((3, 3)), 10, 4, RngSpec(5))
