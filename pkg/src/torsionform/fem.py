"""P1 finite elements for  Delta_g v + n K v = -1,  v = 0 on the boundary.

In the 2-D conformal models the problem becomes a flat-metric one,

    -Delta v - n K lambda^2 v = lambda^2        (Euclidean operators),

so a single Euclidean assembly with the scalar weight lambda^2 serves all
three curvatures.  The stiffness term is integrated exactly; the weighted
mass and load use the 3-point mid-edge rule, which is exact for quadratics.
The linear solve is Jacobi-preconditioned conjugate gradients with a fixed
iteration order, so repeated runs are bit-identical.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import ConvergenceError, ValidationError
from .geometry import Curvature, conformal_factor
from .mesh import TriMesh, _signed_areas


@dataclass(frozen=True)
class SparseSystem:
    """Symmetric CSR system over the interior nodes of a mesh."""

    matrix: sp.csr_matrix
    rhs: np.ndarray
    interior: np.ndarray
    mesh: TriMesh

    def symmetry_error(self) -> float:
        diff = self.matrix - self.matrix.T
        return float(np.max(np.abs(diff.data))) if diff.nnz else 0.0


@dataclass(frozen=True)
class Field:
    """Nodal scalar values tied to their mesh; zero on the boundary when it
    represents the solution v."""

    values: np.ndarray
    mesh: TriMesh


def assemble(mesh: TriMesh, K, n: int = 2) -> SparseSystem:
    """Assemble stiffness minus nK-weighted mass, Dirichlet rows eliminated."""
    K = Curvature.of(K)
    if n != 2:
        raise ValidationError("the mesh solver is 2-D only (n = 2)")
    p = mesh.nodes[mesh.triangles]
    area = _signed_areas(mesh.nodes, mesh.triangles)
    if np.any(area <= 1e-14 * mesh.h_mesh**2):
        raise ValidationError("degenerate triangle encountered during assembly")

    # gradients of the barycentric basis: grad phi_i = rot90(x_k - x_j) / (2A)
    grads = np.empty((len(area), 3, 2))
    for i in range(3):
        e = p[:, (i + 2) % 3] - p[:, (i + 1) % 3]
        grads[:, i, 0] = -e[:, 1]
        grads[:, i, 1] = e[:, 0]
    grads /= (2 * area)[:, None, None]

    stiff = np.einsum("tid,tjd->tij", grads, grads) * area[:, None, None]

    # lambda^2 at the three edge midpoints; midpoint m_k is opposite vertex k
    mids = 0.5 * (np.roll(p, -1, axis=1) + np.roll(p, -2, axis=1))
    lam2 = conformal_factor(K, mids) ** 2
    lam2_total = lam2.sum(axis=1)
    mass = np.empty_like(stiff)
    for i in range(3):
        for j in range(3):
            if i == j:
                mass[:, i, j] = (area / 12.0) * (lam2_total - lam2[:, i])
            else:
                k = 3 - i - j
                mass[:, i, j] = (area / 12.0) * lam2[:, k]

    local = stiff - n * int(K) * mass
    tris = mesh.triangles
    rows = np.repeat(tris, 3, axis=1).ravel()
    cols = np.tile(tris, (1, 3)).ravel()
    full = sp.coo_matrix(
        (local.ravel(), (rows, cols)), shape=(mesh.n_nodes, mesh.n_nodes)
    ).tocsr()

    load = (area[:, None] / 6.0) * (lam2_total[:, None] - lam2)
    rhs_full = np.zeros(mesh.n_nodes)
    np.add.at(rhs_full, tris.ravel(), load.ravel())

    interior = np.nonzero(~mesh.boundary_mask)[0]
    matrix = full[interior][:, interior].tocsr()
    matrix.sum_duplicates()
    return SparseSystem(matrix=matrix, rhs=rhs_full[interior], interior=interior, mesh=mesh)


def pcg_jacobi(A: sp.csr_matrix, b: np.ndarray, tol: float, max_iter: int) -> tuple[np.ndarray, int]:
    """Jacobi-preconditioned CG.  Returns (solution, iterations).

    Raises ConvergenceError on a non-positive preconditioner diagonal, on
    p.Ap <= 0 (the matrix is not positive definite, e.g. a spherical domain
    too close to the hemisphere cap), or when max_iter is exhausted.
    """
    bnorm = float(np.linalg.norm(b))
    x = np.zeros_like(b)
    if bnorm == 0.0:
        return x, 0
    diag = A.diagonal()
    if np.any(diag <= 0):
        raise ConvergenceError("non-positive diagonal; system is not positive definite", 0, np.inf)
    r = b.copy()
    z = r / diag
    pvec = z.copy()
    rz = float(r @ z)
    residual = 1.0
    for it in range(1, max_iter + 1):
        Ap = A @ pvec
        pAp = float(pvec @ Ap)
        if pAp <= 0.0:
            raise ConvergenceError(
                "conjugate gradients broke down; matrix is not positive definite",
                it,
                residual,
            )
        alpha = rz / pAp
        x += alpha * pvec
        r -= alpha * Ap
        residual = float(np.linalg.norm(r)) / bnorm
        if residual <= tol:
            return x, it
        z = r / diag
        rz_new = float(r @ z)
        pvec = z + (rz_new / rz) * pvec
        rz = rz_new
    raise ConvergenceError("conjugate gradients did not converge", max_iter, residual)


def solve(system: SparseSystem, tol: float = 1e-10, max_iter: int | None = None) -> Field:
    """Solve the assembled system; returns the full nodal field (zero on the boundary)."""
    if tol <= 0:
        raise ValidationError("solver tolerance must be positive")
    m = system.rhs.size
    if max_iter is None:
        max_iter = 20 * m + 200
    x, _ = pcg_jacobi(system.matrix, system.rhs, tol, max_iter)
    values = np.zeros(system.mesh.n_nodes)
    values[system.interior] = x
    return Field(values=values, mesh=system.mesh)


def recover_gradient(field: Field, mesh: TriMesh) -> np.ndarray:
    """Recover nodal gradients from the per-triangle constant P1 gradients.

    Interior nodes take the area-weighted average over incident triangles.
    A plain one-sided average at boundary nodes evaluates the gradient an
    O(h) distance inside the domain and that bias would dominate every
    boundary diagnostic, so boundary nodes instead fit a linear function to
    the incident-triangle gradients (area-weighted, evaluated at the node).
    The fit is exact for linear fields and still one-sided.
    """
    if field.mesh is not mesh and field.values.shape[0] != mesh.n_nodes:
        raise ValidationError("field does not match mesh")
    p = mesh.nodes[mesh.triangles]
    area = _signed_areas(mesh.nodes, mesh.triangles)
    grads = np.empty((len(area), 3, 2))
    for i in range(3):
        e = p[:, (i + 2) % 3] - p[:, (i + 1) % 3]
        grads[:, i, 0] = -e[:, 1]
        grads[:, i, 1] = e[:, 0]
    grads /= (2 * area)[:, None, None]
    vt = field.values[mesh.triangles]
    tri_grad = np.einsum("ti,tid->td", vt, grads)

    acc = np.zeros((mesh.n_nodes, 2))
    wsum = np.zeros(mesh.n_nodes)
    weighted = np.repeat(area[:, None] * tri_grad, 3, axis=0)
    np.add.at(acc, mesh.triangles.ravel(), weighted)
    np.add.at(wsum, mesh.triangles.ravel(), np.repeat(area, 3))
    out = acc / wsum[:, None]

    incident: dict[int, list[int]] = {int(b): [] for b in mesh.boundary_nodes}
    for t, tri in enumerate(mesh.triangles):
        for node in tri:
            if bool(mesh.boundary_mask[node]):
                incident[int(node)].append(t)
    centroids = p.mean(axis=1)
    for b, ts in incident.items():
        if len(ts) < 3:
            continue  # keep the plain average; not enough data for a plane
        ts = np.asarray(ts)
        rel = (centroids[ts] - mesh.nodes[b]) / mesh.h_mesh
        w = area[ts]
        basis = np.column_stack([np.ones(len(ts)), rel[:, 0], rel[:, 1]])
        ata = basis.T @ (w[:, None] * basis)
        try:
            coef = np.linalg.solve(ata, basis.T @ (w[:, None] * tri_grad[ts]))
        except np.linalg.LinAlgError:
            continue
        out[b] = coef[0]
    return out


def boundary_gradient_trace(field: Field, mesh: TriMesh, K) -> np.ndarray:
    """Riemannian gradient norm lambda^-1 |grad v| at the boundary nodes,
    ordered like mesh.boundary_nodes.  With v = 0 on the boundary this is the
    normal derivative magnitude."""
    K = Curvature.of(K)
    grads = recover_gradient(field, mesh)
    b = mesh.boundary_nodes
    lam = conformal_factor(K, mesh.nodes[b])
    return np.linalg.norm(grads[b], axis=1) / lam
