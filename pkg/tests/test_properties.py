import math

import numpy as np
from hypothesis import given, settings, strategies as st

from qmflow import elliptic as E
from qmflow.integrals import ball_quermass, newton_maclaurin_margins, quermassintegrals
from qmflow.spaceform import SpaceForm
from qmflow.surface import Profile, recenter

curv = st.floats(-3.0, 3.0)
cone = st.lists(st.floats(0.05, 20.0), min_size=2, max_size=4)


@given(curv, st.floats(1e-3, 1.0))
def test_pythagoras(K, frac):
    sf = SpaceForm(K, 2)
    r = frac * (0.999 * sf.radius_limit if K > 0 else 3.0)
    c, s = float(sf.c(r)), float(sf.s(r))
    assert abs(c * c + K * s * s - 1) <= 1e-12 * max(c * c, 1.0)


@given(cone)
def test_newton_maclaurin(k):
    assert np.min(newton_maclaurin_margins(np.array([k]))) >= -1e-12


@given(cone, st.floats(0.01, 100.0))
def test_builtins_homogeneous_and_monotone(k, lam):
    k = np.array(k)
    for F in E.BUILTIN.values():
        assert math.isclose(F(lam * k), lam * F(k), rel_tol=1e-12)
        assert np.all(F.grad(k) > 0)
        assert math.isclose(F.inverse().inverse()(k), F(k), rel_tol=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.sampled_from([1.0, 0.0, -1.0]), st.floats(0.2, 0.9), st.floats(0.2, 0.9))
def test_ball_quermass_increasing_in_radius(K, a, b):
    sf = SpaceForm(K, 2)
    lo, hi = sorted((a, b))
    if hi - lo < 1e-3:
        return
    for ell in range(3):
        assert ball_quermass(sf, ell, lo) < ball_quermass(sf, ell, hi)


@settings(max_examples=10, deadline=None)
@given(st.sampled_from([1.0, -1.0]), st.floats(-0.1, 0.1), st.floats(-0.04, 0.04))
def test_quermassintegrals_invariant_under_moving_origin(K, shift, delta):
    sf = SpaceForm(K, 2)
    p = Profile.from_function(sf, lambda phi: 0.6 + delta * np.cos(2 * phi), 256)
    W0 = quermassintegrals(p).W
    W1 = quermassintegrals(recenter(p, shift)).W
    assert np.max(np.abs(W1 - W0) / W0) < 1e-7
