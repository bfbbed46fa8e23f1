"""Structured polar triangulations of star-shaped geodesic domains.

Domains are star-shaped about the model origin and described by a boundary
radius function rho(theta) in geodesic units.  Meshes are built on a polar
template (one pole node, `rings` concentric rings graded linearly in
geodesic radius, `sectors` angular divisions) and converted to model
coordinates, so the same construction serves all three curvatures.
Refinement is regular 4-way subdivision with boundary midpoints projected
back onto the curve.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .geometry import (
    HEMISPHERE_MARGIN,
    Curvature,
    conformal_factor,
    geodesic_radius,
    model_radius,
)

BOUNDARY_FIT_TOL = 1e-12


@dataclass(frozen=True)
class StarDomain:
    """Boundary radius rho(theta) = a0 (1 + sum a_k cos k theta + b_k sin k theta),
    in geodesic units."""

    K: Curvature
    a0: float
    cos_coeffs: dict[int, float] = field(default_factory=dict)
    sin_coeffs: dict[int, float] = field(default_factory=dict)
    delta: float = HEMISPHERE_MARGIN

    def __post_init__(self):
        object.__setattr__(self, "K", Curvature.of(self.K))
        object.__setattr__(
            self, "cos_coeffs", {int(k): float(v) for k, v in sorted(self.cos_coeffs.items())}
        )
        object.__setattr__(
            self, "sin_coeffs", {int(k): float(v) for k, v in sorted(self.sin_coeffs.items())}
        )
        if self.a0 <= 0:
            raise ValidationError("base radius a0 must be positive")
        for k in list(self.cos_coeffs) + list(self.sin_coeffs):
            if k < 1:
                raise ValidationError("Fourier modes must have k >= 1")
        self.validate()

    @classmethod
    def ball(cls, K, R: float, delta: float = HEMISPHERE_MARGIN) -> "StarDomain":
        return cls(K=K, a0=R, delta=delta)

    @classmethod
    def cosine(cls, K, R: float, k: int, eps: float, delta: float = HEMISPHERE_MARGIN) -> "StarDomain":
        """The perturbation family rho(theta) = R (1 + eps cos k theta)."""
        if eps == 0.0:
            return cls.ball(K, R, delta=delta)
        return cls(K=K, a0=R, cos_coeffs={k: eps}, delta=delta)

    @property
    def is_ball(self) -> bool:
        return not self.cos_coeffs and not self.sin_coeffs

    def rho(self, theta):
        t = np.asarray(theta, dtype=float)
        val = np.ones_like(t)
        for k, a in self.cos_coeffs.items():
            val = val + a * np.cos(k * t)
        for k, b in self.sin_coeffs.items():
            val = val + b * np.sin(k * t)
        out = self.a0 * val
        return float(out) if t.ndim == 0 else out

    def drho(self, theta):
        t = np.asarray(theta, dtype=float)
        val = np.zeros_like(t)
        for k, a in self.cos_coeffs.items():
            val = val - a * k * np.sin(k * t)
        for k, b in self.sin_coeffs.items():
            val = val + b * k * np.cos(k * t)
        out = self.a0 * val
        return float(out) if t.ndim == 0 else out

    def validate(self, samples: int = 8192) -> None:
        modes = list(self.cos_coeffs) + list(self.sin_coeffs)
        samples = max(samples, 64 * max(modes, default=1))
        theta = np.linspace(0.0, 2 * np.pi, samples, endpoint=False)
        r = self.rho(theta)
        if np.min(r) <= 0:
            raise ValidationError("star domain radius rho(theta) must be positive everywhere")
        if self.K is Curvature.SPHERICAL and np.max(r) > np.pi / 2 - self.delta:
            raise ValidationError(
                f"spherical domain must stay below the hemisphere cap pi/2 - {self.delta:g}"
            )


@dataclass(frozen=True)
class TriMesh:
    """Planar triangulation in model coordinates with boundary markers.

    `boundary_nodes` lists the boundary node indices ordered by angle; the
    parallel arrays `boundary_theta` and `boundary_normals` carry the curve
    parameter and the outward unit normal (Euclidean direction, which equals
    the geodesic one because the models are conformal).
    """

    nodes: np.ndarray
    triangles: np.ndarray
    boundary_mask: np.ndarray
    boundary_nodes: np.ndarray
    boundary_theta: np.ndarray
    boundary_normals: np.ndarray
    domain: StarDomain
    h_mesh: float

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_triangles(self) -> int:
        return self.triangles.shape[0]

    def save(self, path) -> None:
        save_mesh(self, path)


def _signed_areas(nodes: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    p = nodes[triangles]
    e1 = p[:, 1] - p[:, 0]
    e2 = p[:, 2] - p[:, 0]
    return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])


def triangle_areas(mesh: TriMesh) -> np.ndarray:
    return _signed_areas(mesh.nodes, mesh.triangles)


def _max_edge_length(nodes: np.ndarray, triangles: np.ndarray) -> float:
    p = nodes[triangles]
    l01 = np.linalg.norm(p[:, 0] - p[:, 1], axis=1)
    l12 = np.linalg.norm(p[:, 1] - p[:, 2], axis=1)
    l20 = np.linalg.norm(p[:, 2] - p[:, 0], axis=1)
    return float(max(l01.max(), l12.max(), l20.max()))


def _outward_normals(domain: StarDomain, theta: np.ndarray) -> np.ndarray:
    """Unit outward normals from the analytic tangent of the boundary curve."""
    rho = domain.rho(theta)
    drho = domain.drho(theta)
    s = model_radius(domain.K, rho)
    lam = conformal_factor(domain.K, np.stack([s * np.cos(theta), s * np.sin(theta)], axis=-1))
    ds_dtheta = drho / lam  # dm/dr = 1/lambda along a ray
    u = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    uperp = np.stack([-np.sin(theta), np.cos(theta)], axis=-1)
    tangent = ds_dtheta[..., None] * u + s[..., None] * uperp
    normals = np.stack([tangent[..., 1], -tangent[..., 0]], axis=-1)
    normals /= np.linalg.norm(normals, axis=-1, keepdims=True)
    return normals


def build_star_mesh(domain: StarDomain, rings: int, sectors: int) -> TriMesh:
    """Structured polar triangulation with boundary nodes on rho(theta)."""
    if rings < 2:
        raise ValidationError("rings must be >= 2")
    if sectors < 8:
        raise ValidationError("sectors must be >= 8")
    domain.validate()

    theta = 2 * np.pi * np.arange(sectors) / sectors
    rho = domain.rho(theta)
    n_nodes = 1 + rings * sectors
    nodes = np.zeros((n_nodes, 2))
    fractions = np.arange(1, rings + 1) / rings
    geo = fractions[:, None] * rho[None, :]
    s = model_radius(domain.K, geo)
    nodes[1:, 0] = (s * np.cos(theta)[None, :]).ravel()
    nodes[1:, 1] = (s * np.sin(theta)[None, :]).ravel()

    def idx(i, j):
        return 1 + (i - 1) * sectors + (j % sectors)

    tris = []
    for j in range(sectors):
        tris.append((0, idx(1, j), idx(1, j + 1)))
    for i in range(1, rings):
        for j in range(sectors):
            tris.append((idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)))
            tris.append((idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)))
    triangles = np.asarray(tris, dtype=np.int64)

    if np.any(_signed_areas(nodes, triangles) <= 0):
        raise ValidationError("star domain produced a degenerate or inverted triangle")

    boundary_nodes = np.array([idx(rings, j) for j in range(sectors)], dtype=np.int64)
    boundary_mask = np.zeros(n_nodes, dtype=bool)
    boundary_mask[boundary_nodes] = True
    normals = _outward_normals(domain, theta)
    return TriMesh(
        nodes=nodes,
        triangles=triangles,
        boundary_mask=boundary_mask,
        boundary_nodes=boundary_nodes,
        boundary_theta=theta,
        boundary_normals=normals,
        domain=domain,
        h_mesh=_max_edge_length(nodes, triangles),
    )


def _edge_counts(triangles: np.ndarray) -> dict[tuple[int, int], int]:
    counts: dict[tuple[int, int], int] = {}
    for a, b, c in triangles:
        for u, v in ((a, b), (b, c), (c, a)):
            key = (u, v) if u < v else (v, u)
            counts[key] = counts.get(key, 0) + 1
    return counts


def refine(mesh: TriMesh) -> TriMesh:
    """Regular 4-way subdivision; boundary midpoints projected onto rho(theta)."""
    nodes = mesh.nodes
    tris = mesh.triangles
    counts = _edge_counts(tris)
    boundary_edges = {e for e, c in counts.items() if c == 1}

    mid_index: dict[tuple[int, int], int] = {}
    new_coords: list[np.ndarray] = []
    new_is_boundary: list[bool] = []
    next_idx = mesh.n_nodes
    domain = mesh.domain

    def midpoint(u: int, v: int) -> int:
        nonlocal next_idx
        key = (u, v) if u < v else (v, u)
        if key in mid_index:
            return mid_index[key]
        p = 0.5 * (nodes[u] + nodes[v])
        on_boundary = key in boundary_edges
        if on_boundary:
            th = float(np.arctan2(p[1], p[0])) % (2 * np.pi)
            s = model_radius(domain.K, domain.rho(th))
            p = np.array([s * np.cos(th), s * np.sin(th)])
        mid_index[key] = next_idx
        new_coords.append(p)
        new_is_boundary.append(on_boundary)
        next_idx += 1
        return mid_index[key]

    new_tris = np.empty((4 * len(tris), 3), dtype=np.int64)
    for t, (a, b, c) in enumerate(tris):
        mab = midpoint(a, b)
        mbc = midpoint(b, c)
        mca = midpoint(c, a)
        new_tris[4 * t + 0] = (a, mab, mca)
        new_tris[4 * t + 1] = (b, mbc, mab)
        new_tris[4 * t + 2] = (c, mca, mbc)
        new_tris[4 * t + 3] = (mab, mbc, mca)

    all_nodes = np.vstack([nodes, np.asarray(new_coords)])
    if np.any(_signed_areas(all_nodes, new_tris) <= 0):
        raise ValidationError("refinement produced a degenerate or inverted triangle")

    boundary_mask = np.concatenate([mesh.boundary_mask, np.asarray(new_is_boundary, dtype=bool)])
    bidx = np.nonzero(boundary_mask)[0]
    btheta = np.arctan2(all_nodes[bidx, 1], all_nodes[bidx, 0]) % (2 * np.pi)
    order = np.argsort(btheta, kind="stable")
    bidx = bidx[order]
    btheta = btheta[order]
    normals = _outward_normals(domain, btheta)
    return TriMesh(
        nodes=all_nodes,
        triangles=new_tris,
        boundary_mask=boundary_mask,
        boundary_nodes=bidx,
        boundary_theta=btheta,
        boundary_normals=normals,
        domain=domain,
        h_mesh=_max_edge_length(all_nodes, new_tris),
    )


@dataclass(frozen=True)
class MeshQuality:
    min_angle_deg: float
    max_aspect: float
    h_max: float


def mesh_quality(mesh: TriMesh) -> MeshQuality:
    """Per-triangle statistics: minimum angle, worst edge-length ratio, h_max."""
    p = mesh.nodes[mesh.triangles]
    lengths = np.stack(
        [
            np.linalg.norm(p[:, 1] - p[:, 2], axis=1),
            np.linalg.norm(p[:, 2] - p[:, 0], axis=1),
            np.linalg.norm(p[:, 0] - p[:, 1], axis=1),
        ],
        axis=1,
    )
    a2 = lengths**2
    # angle at vertex k is opposite edge k
    angles = np.empty_like(lengths)
    for k in range(3):
        i, j = (k + 1) % 3, (k + 2) % 3
        cosang = (a2[:, i] + a2[:, j] - a2[:, k]) / (2 * lengths[:, i] * lengths[:, j])
        angles[:, k] = np.degrees(np.arccos(np.clip(cosang, -1.0, 1.0)))
    min_angle = float(np.min(angles))
    max_aspect = float(np.max(lengths.max(axis=1) / lengths.min(axis=1)))
    h_max = float(np.max(lengths))
    if min_angle < 10.0:
        warnings.warn(f"mesh contains a triangle with minimum angle {min_angle:.2f} deg")
    return MeshQuality(min_angle_deg=min_angle, max_aspect=max_aspect, h_max=h_max)


def riemannian_area(mesh: TriMesh) -> float:
    """Total Riemannian area, mid-edge quadrature of lambda^2 per triangle."""
    p = mesh.nodes[mesh.triangles]
    mids = 0.5 * (p + np.roll(p, -1, axis=1))
    lam2 = conformal_factor(mesh.domain.K, mids) ** 2
    return float(np.sum(_signed_areas(mesh.nodes, mesh.triangles) * lam2.mean(axis=1)))


def boundary_fit_error(mesh: TriMesh) -> float:
    """Max |geodesic radius - rho(theta)| over boundary nodes."""
    pts = mesh.nodes[mesh.boundary_nodes]
    r_geo = geodesic_radius(mesh.domain.K, np.linalg.norm(pts, axis=1))
    return float(np.max(np.abs(r_geo - mesh.domain.rho(mesh.boundary_theta))))


def validate_mesh(mesh: TriMesh) -> None:
    """Raise unless areas are positive, the boundary fits, and the mesh is connected."""
    if np.any(triangle_areas(mesh) <= 0):
        raise ValidationError("mesh has a non-positive triangle area")
    if boundary_fit_error(mesh) > BOUNDARY_FIT_TOL:
        raise ValidationError("boundary nodes do not lie on the domain curve")
    adj: dict[int, set[int]] = {i: set() for i in range(mesh.n_nodes)}
    for a, b, c in mesh.triangles:
        adj[a].update((b, c))
        adj[b].update((a, c))
        adj[c].update((a, b))
    seen = {0}
    stack = [0]
    while stack:
        u = stack.pop()
        for w in adj[u]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    if len(seen) != mesh.n_nodes:
        raise ValidationError("mesh adjacency graph is not connected")


def save_mesh(mesh: TriMesh, path) -> None:
    """Plain-text export: 'N T', then N lines 'x y flag', then T lines 'i j k'."""
    lines = [f"{mesh.n_nodes} {mesh.n_triangles}"]
    for (x, y), flag in zip(mesh.nodes, mesh.boundary_mask):
        lines.append(f"{x!r} {y!r} {int(flag)}")
    for i, j, k in mesh.triangles:
        lines.append(f"{i} {j} {k}")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


BASE_RINGS = 16
BASE_SECTORS = 32


def mesh_at_level(domain: StarDomain, level: int, base_rings: int = BASE_RINGS,
                  base_sectors: int = BASE_SECTORS) -> TriMesh:
    """Resolution ladder used throughout: level 1 is the base polar mesh,
    each further level is one regular refinement."""
    if not isinstance(level, int) or level < 1:
        raise ValidationError("mesh level must be an integer >= 1")
    mesh = build_star_mesh(domain, base_rings, base_sectors)
    for _ in range(level - 1):
        mesh = refine(mesh)
    return mesh
