"""Quermassintegral-preserving curvature flow of convex radial graphs in space forms."""

from .spaceform import SpaceForm
from .surface import Profile, curvature
from .integrals import quermass, quermassintegrals
from .flow import RunConfig, run
from .elliptic import BUILTIN, weingarten_solve

__all__ = ["SpaceForm", "Profile", "curvature", "quermass", "quermassintegrals", "RunConfig",
           "run", "BUILTIN", "weingarten_solve"]
__version__ = "0.1.0"
