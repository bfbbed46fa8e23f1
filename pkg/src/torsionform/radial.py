"""Closed-form solutions on geodesic balls and the 1-D verification suite.

On a geodesic ball of radius R the problem  Delta v + n K v = -1, v = 0 on
the boundary  has the explicit radial solution

    v(r) = (H(R) - H(r)) / (n hdot(R)),      H(r) = integral_0^r h,

with constant boundary gradient c = h(R) / (n hdot(R)).  All derivatives
here are exact closed forms, never finite differences: this module is the
trusted oracle against which the 2-D mesh solver is validated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .geometry import HEMISPHERE_MARGIN, Curvature, profile_eval


def sphere_area(n: int) -> float:
    """Surface area of the unit (n-1)-sphere, 2 pi^(n/2) / Gamma(n/2)."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def gauss_legendre_panels(a: float, b: float, npoints: int, per_panel: int = 8):
    """Composite Gauss-Legendre rule on [a, b] with at least npoints nodes."""
    if npoints < 1:
        raise ValidationError("quadrature needs at least one point")
    per = min(per_panel, npoints)
    panels = int(np.ceil(npoints / per))
    x, w = np.polynomial.legendre.leggauss(per)
    edges = np.linspace(a, b, panels + 1)
    mid = (edges[:-1] + edges[1:]) / 2
    half = (edges[1:] - edges[:-1]) / 2
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


@dataclass(frozen=True)
class RadialSolution:
    """Closed-form solution of the torsion-type problem on a geodesic ball."""

    K: Curvature
    n: int
    R: float
    hR: float = field(repr=False)
    hdotR: float = field(repr=False)
    HR: float = field(repr=False)

    @property
    def c(self) -> float:
        """Boundary gradient magnitude h(R) / (n hdot(R))."""
        return self.hR / (self.n * self.hdotR)

    @property
    def v0(self) -> float:
        """Maximum value, attained at the center."""
        return self.HR / (self.n * self.hdotR)

    def v(self, r):
        H = profile_eval(self.K, r)[3]
        return (self.HR - H) / (self.n * self.hdotR)

    def dv(self, r):
        h = profile_eval(self.K, r)[0]
        return -h / (self.n * self.hdotR)

    def d2v(self, r):
        hdot = profile_eval(self.K, r)[1]
        return -hdot / (self.n * self.hdotR)

    def d3v(self, r):
        hddot = profile_eval(self.K, r)[2]
        return -hddot / (self.n * self.hdotR)

    def p_value(self, r):
        """P-function |v'|^2 + (2/n) v + K v^2 along the radius."""
        v1 = self.dv(r)
        v = self.v(r)
        return v1 * v1 + (2.0 / self.n) * v + int(self.K) * v * v


def radial_solution(K, n: int, R: float, delta: float = HEMISPHERE_MARGIN) -> RadialSolution:
    """Build the closed-form ball solution, validating the radius."""
    K = Curvature.of(K)
    if not isinstance(n, int) or n < 2:
        raise ValidationError("dimension n must be an integer >= 2")
    if R <= 0:
        raise ValidationError("ball radius R must be positive")
    if K is Curvature.SPHERICAL and R >= np.pi / 2 - delta:
        raise ValidationError(
            f"spherical ball radius must stay below pi/2 - {delta:g} (hemisphere cap)"
        )
    h, hdot, _, H = profile_eval(K, R)
    return RadialSolution(K=K, n=n, R=R, hR=h, hdotR=hdot, HR=H)


def _interior_samples(R: float, samples: int) -> np.ndarray:
    # excludes the pole, where hdot/h terms are 0/0; includes the boundary
    if samples < 2:
        raise ValidationError("need at least 2 sample points")
    return np.linspace(R / samples, R, samples)


def radial_pde_residual(sol: RadialSolution, samples: int = 200) -> float:
    """Max residual of v'' + (n-1)(hdot/h) v' + n K v + 1 over (0, R]."""
    r = _interior_samples(sol.R, samples)
    h, hdot, _, _ = profile_eval(sol.K, r)
    lap = sol.d2v(r) + (sol.n - 1) * (hdot / h) * sol.dv(r)
    res = lap + sol.n * int(sol.K) * sol.v(r) + 1.0
    return float(np.max(np.abs(res)))


def hessian_proportionality_residual(sol: RadialSolution, samples: int = 200) -> float:
    """Max deviation of the Hessian from -(1/n + K v) times the metric.

    For a radial function the Hessian has radial eigenvalue v'' and
    tangential eigenvalue (hdot/h) v', so proportionality to the metric is
    two scalar conditions.
    """
    r = _interior_samples(sol.R, samples)
    h, hdot, _, _ = profile_eval(sol.K, r)
    target = 1.0 / sol.n + int(sol.K) * sol.v(r)
    radial_part = sol.d2v(r) + target
    tangential_part = (hdot / h) * sol.dv(r) + target
    return float(max(np.max(np.abs(radial_part)), np.max(np.abs(tangential_part))))


def identity_suite_radial(sol: RadialSolution, samples: int = 200) -> dict[str, float]:
    """Pointwise residuals of the three divergence identities on [R/samples, R].

    For radial fields every identity reduces to a 1-D relation through
    div(W(r) d_r) = Wdot + (n-1)(hdot/h) W.  Returned keys:

    - "bochner":       (1/2) Delta |grad v|^2 = |Hess v|^2 + grad(Delta v) . grad v
                       + (n-1) K |grad v|^2
    - "div_hv_grad":   div(hdot v grad v) = hdot |grad v|^2 + hdot v Delta v
                       + hddot v v_r
    - "pohozaev_div":  div((|grad v|^2 / 2) X - h v_r grad v)
                       = ((n-2)/2) hdot |grad v|^2 - h v_r Delta v,  X = h d_r

    All derivatives are analytic.
    """
    r = _interior_samples(sol.R, samples)
    K, n = int(sol.K), sol.n
    h, hdot, hddot, _ = profile_eval(sol.K, r)
    v = sol.v(r)
    v1 = sol.dv(r)
    v2 = sol.d2v(r)
    v3 = sol.d3v(r)
    q = hdot / h
    lap = v2 + (n - 1) * q * v1
    dlap = v3 + (n - 1) * ((hddot / h - q * q) * v1 + q * v2)

    lhs_bochner = v2 * v2 + v1 * v3 + (n - 1) * q * v1 * v2
    rhs_bochner = v2 * v2 + (n - 1) * (q * v1) ** 2 + dlap * v1 + (n - 1) * K * v1 * v1

    W = hdot * v * v1
    Wdot = hddot * v * v1 + hdot * v1 * v1 + hdot * v * v2
    lhs_div = Wdot + (n - 1) * q * W
    rhs_div = hdot * v1 * v1 + hdot * v * lap + hddot * v * v1

    # radial flux of (|grad v|^2/2) X - h v_r grad v collapses to -(v'^2/2) h
    U = -0.5 * v1 * v1 * h
    Udot = -v1 * v2 * h - 0.5 * v1 * v1 * hdot
    lhs_poho = Udot + (n - 1) * q * U
    rhs_poho = 0.5 * (n - 2) * hdot * v1 * v1 - h * v1 * lap

    return {
        "bochner": float(np.max(np.abs(lhs_bochner - rhs_bochner))),
        "div_hv_grad": float(np.max(np.abs(lhs_div - rhs_div))),
        "pohozaev_div": float(np.max(np.abs(lhs_poho - rhs_poho))),
    }


def p_constancy_residual(sol: RadialSolution, samples: int = 200) -> float:
    """Max deviation of the P-function from c^2 along the radius."""
    r = np.linspace(0.0, sol.R, samples)
    return float(np.max(np.abs(sol.p_value(r) - sol.c**2)))


@dataclass(frozen=True)
class ObataTrajectory:
    """RK4 samples of f along a unit-speed geodesic through the maximum point.

    f solves fddot = -1/n - K f with f(0) = a, fdot(0) = 0.
    """

    K: Curvature
    n: int
    a: float
    s: np.ndarray
    f: np.ndarray
    fdot: np.ndarray

    def ode_residual(self) -> float:
        """Central-difference check of the ODE at interior grid points."""
        ds = self.s[1] - self.s[0]
        fdd = (self.f[2:] - 2 * self.f[1:-1] + self.f[:-2]) / ds**2
        res = fdd + 1.0 / self.n + int(self.K) * self.f[1:-1]
        return float(np.max(np.abs(res)))


def obata_closed_form(K, n: int, a: float, s):
    """Exact trajectory a hdot(s) - H(s)/n of the geodesic restriction ODE."""
    K = Curvature.of(K)
    arr = np.asarray(s, dtype=float)
    if K is Curvature.FLAT:
        out = a - arr * arr / (2 * n)
    elif K is Curvature.HYPERBOLIC:
        out = a * np.cosh(arr) - (np.cosh(arr) - 1) / n
    else:
        out = a * np.cos(arr) - (1 - np.cos(arr)) / n
    if arr.ndim == 0:
        return float(out)
    return out


def obata_ode_solve(K, n: int, a: float, s_max: float, step: float) -> ObataTrajectory:
    """Integrate fddot = -1/n - K f, f(0) = a, fdot(0) = 0 with classic RK4."""
    K = Curvature.of(K)
    if a <= 0:
        raise ValidationError("initial maximum value a must be positive")
    if step <= 0 or s_max <= 0:
        raise ValidationError("step and s_max must be positive")
    nsteps = max(1, int(round(s_max / step)))
    ds = s_max / nsteps
    Kf = float(int(K))
    inv_n = 1.0 / n

    def rhs(y):
        return np.array([y[1], -inv_n - Kf * y[0]])

    ys = np.empty((nsteps + 1, 2))
    ys[0] = (a, 0.0)
    y = ys[0].copy()
    for i in range(nsteps):
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * ds * k1)
        k3 = rhs(y + 0.5 * ds * k2)
        k4 = rhs(y + ds * k3)
        y = y + (ds / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        ys[i + 1] = y
    s = np.linspace(0.0, s_max, nsteps + 1)
    return ObataTrajectory(K=K, n=n, a=a, s=s, f=ys[:, 0], fdot=ys[:, 1])


def hemisphere_eigen_residual(n: int, samples: int = 200) -> float:
    """Residual of Delta phi + n phi for phi = cos r on the hemisphere.

    phi = cos r is the first Dirichlet eigenfunction of the hemisphere with
    eigenvalue n; it is positive on [0, pi/2) and vanishes at the equator.
    Both facts are asserted here alongside the residual.
    """
    if n < 2:
        raise ValidationError("dimension n must be >= 2")
    r = np.linspace(np.pi / 2 / samples, np.pi / 2 * (1 - 1e-9), samples)
    phi = np.cos(r)
    dphi = -np.sin(r)
    d2phi = -np.cos(r)
    res = d2phi + (n - 1) * (np.cos(r) / np.sin(r)) * dphi + n * phi
    interior = np.linspace(0.0, np.pi / 2 * (1 - 1e-12), samples)
    if not np.all(np.cos(interior) > 0):
        raise ValidationError("eigenfunction cos r failed positivity on [0, pi/2)")
    if abs(math.cos(np.pi / 2)) > 1e-15:
        raise ValidationError("eigenfunction cos r failed to vanish at the equator")
    return float(np.max(np.abs(res)))


@dataclass(frozen=True)
class PohozaevCheck:
    """The two sides of the integral identity and their relative gap."""

    lhs: float
    rhs: float
    relative_residual: float


def pohozaev_ball_check(K, n: int, R: float, quadrature_points: int = 512) -> PohozaevCheck:
    """Both sides of  c^2 int hdot = (1 + 2/n)(int hdot v - K int h v v_r)
    on the geodesic ball, by 1-D quadrature with volume element
    |S^(n-1)| h(r)^(n-1) dr."""
    if quadrature_points < 16:
        raise ValidationError("need at least 16 quadrature points")
    sol = radial_solution(K, n, R)
    r, w = gauss_legendre_panels(0.0, R, quadrature_points)
    h, hdot, _, _ = profile_eval(sol.K, r)
    omega = sphere_area(n) * h ** (n - 1)
    v = sol.v(r)
    v1 = sol.dv(r)
    lhs = sol.c**2 * float(np.sum(w * omega * hdot))
    i2 = float(np.sum(w * omega * hdot * v))
    i3 = float(np.sum(w * omega * h * v * v1))
    rhs = (1.0 + 2.0 / n) * (i2 - int(sol.K) * i3)
    rel = abs(lhs - rhs) / max(abs(lhs), abs(rhs))
    return PohozaevCheck(lhs=lhs, rhs=rhs, relative_residual=rel)
