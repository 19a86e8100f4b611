import math

import numpy as np
import pytest

import rdagraph as rg


def test_profile_values():
    p = rg.Profile.exp_decay(0.5)
    assert rg.H(p, 1.0, 0.0) == pytest.approx(2.0 - math.exp(-0.5), rel=1e-15)
    assert rg.period_T(p, 0.0) == pytest.approx(2.0 * math.pi / 3.0, rel=1e-15)
    c = rg.level_coefficients(p, 2.0)
    assert c["alpha"] * c["T"] == pytest.approx(c["A"], rel=1e-14)
    q = rg.Profile.power_tail(0.5, 1.0)
    assert rg.invert_F(q, 1.0) == pytest.approx(2.5 - 0.5 * math.sqrt(13.0), rel=1e-14)
    ok, where, _ = rg.validate_profile(p)
    assert ok and where is None


def test_wedge_of_radial_function():
    p = rg.Profile.exp_decay(0.5)
    z = 1.7
    F = rg.invert_F(p, z)
    assert rg.wedge(p, lambda x, y: x * x + y * y, z) == pytest.approx(F, rel=1e-13)


def test_kernels_and_covariance():
    assert rg.kernel("heat", 0.0, 2.0) == pytest.approx(1.0 / (4.0 * math.pi), rel=1e-15)
    F = rg.covariance_matrix_2d("gauss_pi", 1.0, 2.0, 2)
    assert F.shape == (9, 9)
    assert F[0, 1] == pytest.approx(math.exp(-1.0) / math.pi, rel=1e-15)
    R = rg.psd_sqrt(F)
    np.testing.assert_allclose(R @ R.T, F, atol=1e-12)


def test_matrix_exp_semigroup():
    p = rg.Profile.exp_decay(0.5)
    L = rg.generator_2d(p, 1.0, 3, 1.0)
    E = rg.matrix_exp(L, 0.1)
    np.testing.assert_allclose(E @ E, rg.matrix_exp(L, 0.2), rtol=0, atol=1e-12)
    G = rg.generator_graph(p, 5.0, 10)
    assert G[0, 0] == pytest.approx(-3.0 / 0.5, rel=1e-14)


def test_increments_are_coupled():
    fine = rg.increments(1, 0.01, 2, 8, level=0)
    coarse = rg.increments(1, 0.01, 2, 8, level=1)
    assert np.array_equal(coarse, fine[:, 0::2] + fine[:, 1::2])


def test_small_convergence_run():
    rows = rg.run("convergence-2d", {"grid.M": "2", "mc.P": "4", "time.level_max": "2"})
    assert len(rows) == 2
    assert all(r[1] > 0 for r in rows)
    again = rg.run("convergence-2d", {"grid.M": "2", "mc.P": "4", "time.level_max": "2"})
    assert rows == again


def test_config_errors():
    with pytest.raises(ValueError):
        rg.run("convergence-2d", {"grid.size": "3"})
    with pytest.raises(ValueError):
        rg.run("kernel-table")


def test_slope_and_rank():
    rows = [(2.0 ** -k, 2.0 ** (-0.5 * k), 0.0) for k in range(6, 11)]
    slope, _ = rg.fit_slope(rows)
    assert slope == pytest.approx(0.5, rel=1e-12)
    assert rg.spearman([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)
