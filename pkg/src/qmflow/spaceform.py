"""Trigonometric kernel of the simply connected space form of curvature K.

    s_K(r) = sin(sqrt(K) r)/sqrt(K),  r,  sinh(sqrt(-K) r)/sqrt(-K)
    c_K(r) = s_K'(r),   co_K(r) = c_K(r)/s_K(r)

so that c_K' = -K s_K and c_K^2 + K s_K^2 = 1.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import InvalidRadius, NonConvexSphere

# below this value of |K| r^2 the Taylor series is used
SERIES_THRESHOLD = 1e-8


def sphere_area(m):
    """Area omega_m of the unit m-sphere in R^{m+1}."""
    return 2.0 * math.exp(0.5 * (m + 1) * math.log(math.pi) - math.lgamma(0.5 * (m + 1)))


@dataclass(frozen=True)
class SpaceForm:
    K: float
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"hypersurface dimension n must be an integer >= 2, got {self.n}")
        if not math.isfinite(self.K):
            raise ValueError("K must be finite")
        object.__setattr__(self, "K", float(self.K))
        object.__setattr__(self, "n", int(self.n))

    @property
    def radius_limit(self):
        """Upper end of the admissible radial range (pi/sqrt K, or inf)."""
        return math.pi / math.sqrt(self.K) if self.K > 0 else math.inf

    @property
    def hemisphere_radius(self):
        return math.pi / (2.0 * math.sqrt(self.K)) if self.K > 0 else math.inf

    def _check(self, r, open_right=False, positive=False):
        r = np.asarray(r, dtype=float)
        if np.any(np.isnan(r)):
            raise InvalidRadius("NaN radius")
        if positive and np.any(r <= 0):
            raise InvalidRadius(f"radius must be > 0, got min {r.min()}")
        if np.any(r < 0):
            raise InvalidRadius(f"radius must be >= 0, got min {r.min()}")
        lim = self.radius_limit
        if open_right and np.any(r >= lim):
            raise InvalidRadius(f"radius must be < {lim}, got max {r.max()}")
        if np.any(r > lim):
            raise InvalidRadius(f"radius must be <= {lim}, got max {r.max()}")
        return r

    def s(self, r):
        r = self._check(r)
        return _s(self.K, r)

    def c(self, r):
        r = self._check(r)
        return _c(self.K, r)

    def co(self, r):
        r = self._check(r, open_right=True, positive=True)
        return _c(self.K, r) / _s(self.K, r)

    def sphere_principal_curvature(self, R):
        """Each principal curvature of the geodesic sphere of radius R."""
        R = float(R)
        if not (R > 0 and R < self.hemisphere_radius):
            raise NonConvexSphere(f"R={R} outside the strictly convex range (0, {self.hemisphere_radius})")
        return float(self.co(R))

    def sphere_mean_curvature(self, R):
        return self.n * self.sphere_principal_curvature(R)


def sphere_mean_curvature(sf, R):
    return sf.sphere_mean_curvature(R)


def _s(K, r):
    r = np.asarray(r, dtype=float)
    x = K * r * r
    small = np.abs(x) < SERIES_THRESHOLD
    if K > 0:
        q = math.sqrt(K)
        out = np.sin(q * r) / q
    elif K < 0:
        q = math.sqrt(-K)
        out = np.sinh(q * r) / q
    else:
        return r.copy() if r.ndim else r * 1.0
    if np.any(small):
        series = r * (1.0 - x / 6.0 + x * x / 120.0)
        out = np.where(small, series, out)
    return out


def _c(K, r):
    r = np.asarray(r, dtype=float)
    x = K * r * r
    small = np.abs(x) < SERIES_THRESHOLD
    if K > 0:
        out = np.cos(math.sqrt(K) * r)
    elif K < 0:
        out = np.cosh(math.sqrt(-K) * r)
    else:
        return np.ones_like(r)
    if np.any(small):
        series = 1.0 - x / 2.0 + x * x / 24.0
        out = np.where(small, series, out)
    return out
