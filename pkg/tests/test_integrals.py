import math

import numpy as np
import pytest

from qmflow.errors import NoBall, NotConvex
from qmflow.integrals import (ball_quermass, ball_radius_from_quermass, enclosed_volume,
                              hemisphere_quermass, hsiung_minkowski_residual, mixed_volume,
                              newton_maclaurin_check, newton_maclaurin_margins, normalized_means,
                              quermass, quermassintegrals)
from qmflow.presets import random_convex
from qmflow.spaceform import SpaceForm
from qmflow.surface import Profile

S3 = SpaceForm(1.0, 2)
E3 = SpaceForm(0.0, 2)


def spherical_ball(R):
    """Closed forms in S^3: volume, area/3, (int H_1 + volume)/3, omega_2/3."""
    return [math.pi * (2 * R - math.sin(2 * R)), 4 * math.pi * math.sin(R) ** 2 / 3,
            math.pi * (2 * R + math.sin(2 * R)) / 3, 4 * math.pi / 3]


def euclidean_ball(R):
    return [4 * math.pi * R ** 3 / 3, 4 * math.pi * R ** 2 / 3, 4 * math.pi * R / 3, 4 * math.pi / 3]


@pytest.mark.parametrize("sf,oracle", [(S3, spherical_ball), (E3, euclidean_ball)])
def test_ball_quermassintegrals_closed_form(sf, oracle):
    R = 0.8
    rep = quermassintegrals(Profile.sphere(sf, R, 128))
    assert np.allclose(rep.W, oracle(R), rtol=1e-12)
    for ell in range(4):
        assert ball_quermass(sf, ell, R) == pytest.approx(oracle(R)[ell], rel=1e-12)


def test_single_quermass_matches_full_report():
    p = random_convex(S3, 128, seed=1)
    rep = quermassintegrals(p)
    for ell in range(4):
        assert quermass(p, ell) == pytest.approx(rep.W[ell], rel=1e-14)
    assert rep.vol == rep.W[0]
    assert rep.area == pytest.approx(mixed_volume(p, 0), rel=1e-14)


def test_volume_of_off_centre_sphere_converges():
    from qmflow.diagnostics import sphere_graph
    R, c = 0.6, 0.25
    exact = spherical_ball(R)[0]
    errs = []
    for N in (32, 64, 128):
        p = Profile.from_function(S3, lambda phi: sphere_graph(1.0, R, c, phi), N)
        errs.append(abs(enclosed_volume(p) - exact))
        errs[-1] = max(errs[-1], abs(quermassintegrals(p).W[1] - spherical_ball(R)[1]))
    assert errs[-1] < 1e-7
    assert math.log2(errs[0] / errs[1]) > 3.5


def test_gauss_bonnet_closure():
    rep = quermassintegrals(random_convex(S3, 256, seed=2))
    assert abs(rep.gauss_bonnet_defect) < 1e-8


@pytest.mark.parametrize("ell", [0, 1, 2])
def test_ball_radius_inverse(ell):
    for R in (0.2, 0.8, 1.4):
        W = ball_quermass(S3, ell, R)
        assert ball_radius_from_quermass(S3, ell, W) == pytest.approx(R, abs=1e-12)


def test_no_ball_below_range():
    with pytest.raises(NoBall):
        ball_radius_from_quermass(S3, 1, -1.0)
    with pytest.raises(NoBall):
        ball_radius_from_quermass(S3, 0, 10 * hemisphere_quermass(S3, 0))


def test_hemisphere_value():
    assert hemisphere_quermass(S3, 0) == pytest.approx(math.pi ** 2, rel=1e-7)
    assert hemisphere_quermass(S3, 2) == pytest.approx(math.pi ** 2 / 3, rel=1e-7)


@pytest.mark.parametrize("K,n", [(1.0, 2), (1.0, 3), (0.0, 2), (-1.0, 2)])
def test_hsiung_minkowski(K, n):
    p = random_convex(SpaceForm(K, n), 256, seed=3)
    for ell in range(n):
        assert hsiung_minkowski_residual(p, ell) < 1e-7


def test_hsiung_minkowski_index_range():
    with pytest.raises(ValueError):
        hsiung_minkowski_residual(Profile.sphere(S3, 0.5, 64), 2)


def test_normalized_means_example():
    H = normalized_means(np.array([1.0, 2.0, 3.0]))
    assert np.allclose(H, [1.0, 2.0, 11.0 / 3.0, 6.0])


def test_newton_maclaurin_equality_on_umbilic_tuples():
    k = np.full((10, 3), 2.5)
    assert np.max(np.abs(newton_maclaurin_margins(k))) < 1e-14
    ok, margin = newton_maclaurin_check(np.array([[1.0, 2.0, 7.0]]))
    assert ok and margin > 0
    with pytest.raises(NotConvex):
        newton_maclaurin_check(np.array([[1.0, -2.0]]))
