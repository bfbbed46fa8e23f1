"""Post-processing diagnostics for solved fields.

Given a solution of the torsion-type problem this module computes the
P-function  P = |grad v|_g^2 + (2/n) v + K v^2, the maximum-principle
margins, the integral identity residual, boundary gradient statistics, and
(on balls) errors against the closed-form radial solution.  P is subharmonic
along solutions, so its interior maximum may never exceed its boundary
maximum beyond the discretization error; on balls P is the constant c^2.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ValidationError
from .fem import Field, assemble, boundary_gradient_trace, recover_gradient, solve
from .geometry import Curvature, conformal_factor, geodesic_radius, profile_eval
from .mesh import StarDomain, TriMesh, _signed_areas, mesh_at_level
from .radial import PohozaevCheck, radial_solution


def boundary_weights(mesh: TriMesh) -> np.ndarray:
    """Riemannian length weight per boundary node (half the two adjacent
    boundary segments)."""
    b = mesh.boundary_nodes
    pts = mesh.nodes[b]
    nxt = np.roll(pts, -1, axis=0)
    mids = 0.5 * (pts + nxt)
    seg = np.linalg.norm(nxt - pts, axis=1) * conformal_factor(mesh.domain.K, mids)
    return 0.5 * (seg + np.roll(seg, 1))


def boundary_stats(values: np.ndarray, mesh: TriMesh) -> tuple[float, float]:
    """Length-weighted mean and population standard deviation on the boundary."""
    w = boundary_weights(mesh)
    mean = float(np.sum(w * values) / np.sum(w))
    var = float(np.sum(w * (values - mean) ** 2) / np.sum(w))
    return mean, float(np.sqrt(max(var, 0.0)))


def p_function(field: Field, gradients: np.ndarray, mesh: TriMesh, K, n: int) -> Field:
    """Nodal P-function lambda^-2 |grad v|^2 + (2/n) v + K v^2."""
    K = Curvature.of(K)
    lam = conformal_factor(K, mesh.nodes)
    g2 = np.sum(gradients * gradients, axis=1)
    v = field.values
    return Field(values=g2 / lam**2 + (2.0 / n) * v + int(K) * v * v, mesh=mesh)


class MaxPrincipleReport(NamedTuple):
    interior_max: float
    boundary_max: float
    margin: float


def max_principle_report(P: Field, mesh: TriMesh) -> MaxPrincipleReport:
    """Interior vs boundary maxima of P; margin = interior - boundary.

    Subharmonicity of P along solutions means the margin must not exceed
    the mesh tolerance.
    """
    interior = float(np.max(P.values[~mesh.boundary_mask]))
    boundary = float(np.max(P.values[mesh.boundary_mask]))
    return MaxPrincipleReport(interior, boundary, interior - boundary)


def pohozaev_integrals_2d(field: Field, gradients: np.ndarray, mesh: TriMesh, K,
                          n: int = 2) -> PohozaevCheck:
    """Both sides of  c^2 int hdot dA_g = (1 + 2/n)(int hdot v dA_g
    - K int h v v_r dA_g)  on the mesh, 3-point mid-edge quadrature.

    c is the length-weighted boundary mean of |grad v|_g, so the identity is
    only quantitative where the constant-gradient condition actually holds
    (balls); elsewhere the residual measures its failure.
    """
    K = Curvature.of(K)
    tris = mesh.triangles
    p = mesh.nodes[tris]
    area = _signed_areas(mesh.nodes, mesh.triangles)
    mids = 0.5 * (np.roll(p, -1, axis=1) + np.roll(p, -2, axis=1))  # m_k opposite vertex k
    lam = conformal_factor(K, mids)
    w = (area[:, None] / 3.0) * lam**2

    vt = field.values[tris]
    v_mid = 0.5 * (vt.sum(axis=1, keepdims=True) - vt)
    gt = gradients[tris]
    g_mid = 0.5 * (gt.sum(axis=1, keepdims=True) - gt)

    s = np.linalg.norm(mids, axis=2)
    r_geo = geodesic_radius(K, s)
    h, hdot, _, _ = profile_eval(K, r_geo)
    radial_dir = mids / s[..., None]
    v_r = np.sum(g_mid * radial_dir, axis=2) / lam

    i1 = float(np.sum(w * hdot))
    i2 = float(np.sum(w * hdot * v_mid))
    i3 = float(np.sum(w * h * v_mid * v_r))

    trace = boundary_gradient_trace(field, mesh, K)
    c_mean, _ = boundary_stats(trace, mesh)
    lhs = c_mean**2 * i1
    rhs = (1.0 + 2.0 / n) * (i2 - int(K) * i3)
    rel = abs(lhs - rhs) / max(abs(lhs), abs(rhs))
    return PohozaevCheck(lhs=lhs, rhs=rhs, relative_residual=rel)


def compare_to_radial(field: Field, mesh: TriMesh, K, n: int, R: float) -> tuple[float, float]:
    """Linf and (Riemannian) L2 errors against the radial closed form.

    Raises unless the mesh boundary is the geodesic circle of radius R.
    """
    K = Curvature.of(K)
    b_geo = geodesic_radius(K, np.linalg.norm(mesh.nodes[mesh.boundary_nodes], axis=1))
    if float(np.max(b_geo) - np.min(b_geo)) > 1e-12 * max(1.0, R):
        raise ValidationError("domain is not a geodesic ball; radial comparison undefined")
    if abs(float(np.mean(b_geo)) - R) > 1e-9 * max(1.0, R):
        raise ValidationError("mesh boundary radius does not match R")
    sol = radial_solution(K, n, R)
    r_nodes = geodesic_radius(K, np.linalg.norm(mesh.nodes, axis=1))
    exact = sol.v(r_nodes)
    diff = field.values - exact
    linf = float(np.max(np.abs(diff)))

    p = mesh.nodes[mesh.triangles]
    mids = 0.5 * (np.roll(p, -1, axis=1) + np.roll(p, -2, axis=1))
    lam2 = conformal_factor(K, mids) ** 2
    tri_area_g = _signed_areas(mesh.nodes, mesh.triangles) * lam2.mean(axis=1)
    node_w = np.zeros(mesh.n_nodes)
    np.add.at(node_w, mesh.triangles.ravel(), np.repeat(tri_area_g / 3.0, 3))
    l2 = float(np.sqrt(np.sum(node_w * diff * diff)))
    return linf, l2


@dataclass(frozen=True)
class VerifyReport:
    """Flat summary of all diagnostics for one solved domain."""

    c_mean: float
    c_std: float
    P_boundary_max: float
    P_interior_max: float
    P_min: float
    pohozaev_lhs: float
    pohozaev_rhs: float
    pohozaev_relative_residual: float
    linf_error_vs_radial: float | None
    l2_error_vs_radial: float | None

    def __post_init__(self):
        for name, value in self.as_dict().items():
            if value is not None and not np.isfinite(value):
                raise ValidationError(f"verify report entry {name} is not finite")

    @property
    def p_range(self) -> float:
        return max(self.P_interior_max, self.P_boundary_max) - self.P_min

    def as_dict(self) -> dict:
        return {
            "c_mean": self.c_mean,
            "c_std": self.c_std,
            "P_boundary_max": self.P_boundary_max,
            "P_interior_max": self.P_interior_max,
            "P_min": self.P_min,
            "pohozaev_lhs": self.pohozaev_lhs,
            "pohozaev_rhs": self.pohozaev_rhs,
            "pohozaev_relative_residual": self.pohozaev_relative_residual,
            "linf_error_vs_radial": self.linf_error_vs_radial,
            "l2_error_vs_radial": self.l2_error_vs_radial,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True) + "\n"


def solve_and_verify(domain: StarDomain, level: int = 3, tol: float = 1e-10,
                     max_iter: int | None = None) -> tuple[VerifyReport, Field, TriMesh]:
    """Mesh, solve and post-process one domain; the full diagnostic pipeline."""
    K = domain.K
    mesh = mesh_at_level(domain, level)
    system = assemble(mesh, K, n=2)
    field = solve(system, tol=tol, max_iter=max_iter)
    grads = recover_gradient(field, mesh)
    trace = boundary_gradient_trace(field, mesh, K)
    c_mean, c_std = boundary_stats(trace, mesh)
    P = p_function(field, grads, mesh, K, 2)
    mp = max_principle_report(P, mesh)
    poho = pohozaev_integrals_2d(field, grads, mesh, K, 2)
    if domain.is_ball:
        linf, l2 = compare_to_radial(field, mesh, K, 2, domain.a0)
    else:
        linf, l2 = None, None
    report = VerifyReport(
        c_mean=c_mean,
        c_std=c_std,
        P_boundary_max=mp.boundary_max,
        P_interior_max=mp.interior_max,
        P_min=float(np.min(P.values)),
        pohozaev_lhs=poho.lhs,
        pohozaev_rhs=poho.rhs,
        pohozaev_relative_residual=poho.relative_residual,
        linf_error_vs_radial=linf,
        l2_error_vs_radial=l2,
    )
    return report, field, mesh
