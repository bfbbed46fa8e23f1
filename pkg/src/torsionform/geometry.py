"""Warped-product profiles and planar conformal models for the three
simply-connected constant-curvature geometries.

The ambient space is described in geodesic polar coordinates by the metric
dr^2 + h(r)^2 dtheta^2 (and its n-dimensional analogue), where the warping
profile h is r, sinh r or sin r for curvature K = 0, -1, +1.  For the 2-D
mesh solver the same geometries are charted on the plane (K = 0) or the open
unit disk (K = +-1) with a conformal factor lambda, so that the Riemannian
area element is lambda^2 dx and the Laplace-Beltrami operator is
lambda^-2 times the Euclidean Laplacian.

Everything here is a pure function of its arguments and vectorizes over
numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .errors import ValidationError

# Spherical domains must stay this far inside the hemisphere cap r = pi/2.
HEMISPHERE_MARGIN = 1e-2


class Curvature(IntEnum):
    """Normalized sectional curvature of the ambient space form."""

    HYPERBOLIC = -1
    FLAT = 0
    SPHERICAL = 1

    @classmethod
    def of(cls, value) -> "Curvature":
        """Coerce an integer-like value, rejecting anything but -1, 0, +1."""
        try:
            return cls(int(value))
        except (ValueError, TypeError):
            raise ValidationError("K must be -1, 0, or 1") from None


@dataclass(frozen=True)
class SpaceForm:
    """A space form: curvature label plus dimension."""

    K: Curvature
    n: int

    def __post_init__(self):
        object.__setattr__(self, "K", Curvature.of(self.K))
        if not isinstance(self.n, int) or self.n < 2:
            raise ValidationError("dimension n must be an integer >= 2")

    @property
    def profile(self) -> "WarpedProfile":
        return WarpedProfile(self.K)

    @property
    def model(self) -> "ConformalModel":
        return ConformalModel(self.K)


def _as_radii(r, K: Curvature):
    arr = np.asarray(r, dtype=float)
    if np.any(arr < 0):
        raise ValidationError("geodesic radius must be nonnegative")
    if K is Curvature.SPHERICAL and np.any(arr >= np.pi / 2):
        raise ValidationError("geodesic radius must stay below pi/2 on the hemisphere")
    return arr


def profile_eval(K, r):
    """Evaluate the warping profile at geodesic radius r.

    Returns the tuple (h, hdot, hddot, H) where H(r) = integral of h from 0
    to r.  Scalar input gives scalars, array input gives arrays.
    """
    K = Curvature.of(K)
    arr = _as_radii(r, K)
    if K is Curvature.FLAT:
        out = (arr, np.ones_like(arr), np.zeros_like(arr), arr * arr / 2)
    elif K is Curvature.HYPERBOLIC:
        sh, ch = np.sinh(arr), np.cosh(arr)
        out = (sh, ch, sh, ch - 1)
    else:
        sn, cs = np.sin(arr), np.cos(arr)
        out = (sn, cs, -sn, 1 - cs)
    if arr.ndim == 0:
        return tuple(float(v) for v in out)
    return out


@dataclass(frozen=True)
class WarpedProfile:
    """Bound evaluators h, hdot, hddot, H for one curvature value."""

    K: Curvature

    def h(self, r):
        return profile_eval(self.K, r)[0]

    def hdot(self, r):
        return profile_eval(self.K, r)[1]

    def hddot(self, r):
        return profile_eval(self.K, r)[2]

    def H(self, r):
        return profile_eval(self.K, r)[3]


def conformal_factor(K, points):
    """Conformal factor lambda at model points (shape (..., 2)).

    lambda is 1 on the plane (K = 0), 2/(1 - |x|^2) on the hyperbolic disk
    and 2/(1 + |x|^2) on the spherical chart.  The hyperbolic factor is
    undefined on and outside the unit circle; the spherical chart is used on
    the closed unit disk, where the equator |x| = 1 gives lambda = 1.
    """
    K = Curvature.of(K)
    pts = np.asarray(points, dtype=float)
    if pts.shape[-1] != 2:
        raise ValidationError("model points must have shape (..., 2)")
    r2 = np.sum(pts * pts, axis=-1)
    if K is Curvature.FLAT:
        lam = np.ones_like(r2)
    elif K is Curvature.HYPERBOLIC:
        if np.any(r2 >= 1):
            raise ValidationError("hyperbolic model points must lie inside the unit disk")
        lam = 2.0 / (1.0 - r2)
    else:
        lam = 2.0 / (1.0 + r2)
    if lam.ndim == 0:
        return float(lam)
    return lam


def geodesic_radius(K, s):
    """Geodesic radius of a point at model radius s (inverse of model_radius)."""
    K = Curvature.of(K)
    arr = np.asarray(s, dtype=float)
    if np.any(arr < 0):
        raise ValidationError("model radius must be nonnegative")
    if K is Curvature.FLAT:
        r = arr.copy()
    elif K is Curvature.HYPERBOLIC:
        if np.any(arr >= 1):
            raise ValidationError("hyperbolic model radius must be below 1")
        r = 2.0 * np.arctanh(arr)
    else:
        if np.any(arr > 1):
            raise ValidationError("spherical model radius must not exceed 1")
        r = 2.0 * np.arctan(arr)
    if arr.ndim == 0:
        return float(r)
    return r


def model_radius(K, r):
    """Model radius of a point at geodesic radius r (inverse of geodesic_radius)."""
    K = Curvature.of(K)
    arr = np.asarray(r, dtype=float)
    if np.any(arr < 0):
        raise ValidationError("geodesic radius must be nonnegative")
    if K is Curvature.FLAT:
        s = arr.copy()
    elif K is Curvature.HYPERBOLIC:
        s = np.tanh(arr / 2.0)
    else:
        if np.any(arr > np.pi / 2):
            raise ValidationError("geodesic radius must not exceed pi/2 on the hemisphere")
        s = np.tan(arr / 2.0)
    if arr.ndim == 0:
        return float(s)
    return s


@dataclass(frozen=True)
class ConformalModel:
    """The planar chart (disk or plane) for one curvature, n = 2 only."""

    K: Curvature

    def factor(self, points):
        return conformal_factor(self.K, points)

    def geodesic_radius(self, s):
        return geodesic_radius(self.K, s)

    def model_radius(self, r):
        return model_radius(self.K, r)
