"""Code-defined initial profiles, fully determined by their parameters and a seed."""

import math

import numpy as np

from .errors import InvalidProfile
from .surface import Profile, curvature, recenter

PRESET_DEFAULTS = {
    "sphere": {"R": 0.8},
    "perturbed-sphere": {"R": 0.8, "delta": 0.05, "mode": 2},
    "off-center": {"R": 0.8, "delta": 0.05, "mode": 2, "offset": 0.15},
    "elongated": {"R": 0.7, "delta": 0.08, "mode": 2},
    "random": {"R": 0.7, "amplitude": 0.05, "modes": 5},
}


def random_convex(sf, N, seed=0, R=0.7, amplitude=0.05, modes=5, attempts=100):
    """Sphere plus a random cosine series with coefficients decaying like 1/k^2."""
    rng = np.random.default_rng(seed)
    phi = np.linspace(0.0, math.pi, N + 1)
    k = np.arange(1, modes + 1)
    for _ in range(attempts):
        coef = rng.normal(size=modes) / k ** 2
        coef *= amplitude / np.abs(coef).sum()
        p = Profile(sf, R + np.cos(np.outer(phi, k)) @ coef)
        if curvature(p).strictly_convex:
            return p
    raise InvalidProfile("no strictly convex random profile found")


def make_preset(name, sf, N, seed=0, **params):
    if name not in PRESET_DEFAULTS:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESET_DEFAULTS)}")
    unknown = set(params) - set(PRESET_DEFAULTS[name])
    if unknown:
        raise ValueError(f"preset {name!r} has no parameter(s) {sorted(unknown)}")
    par = {**PRESET_DEFAULTS[name], **params}
    if name == "sphere":
        return Profile.sphere(sf, par["R"], N)
    if name == "random":
        return random_convex(sf, N, seed, par["R"], par["amplitude"], int(par["modes"]))
    mode = int(par["mode"])
    p = Profile.from_function(sf, lambda phi: par["R"] + par["delta"] * np.cos(mode * phi), N)
    if not curvature(p).strictly_convex:
        raise InvalidProfile(f"preset {name!r} with {par} is not strictly convex")
    if name == "off-center":
        # move the origin away from the body's centre
        p = recenter(p, -par["offset"])
    return p
