"""Numerical probes of ball rigidity for the overdetermined problem.

Among star-shaped domains only geodesic balls admit a solution with
constant boundary gradient.  Two probes realize this computationally: a
perturbation scan showing the boundary-gradient spread grows monotonically
with the perturbation amplitude, and a shape descent on the boundary
Fourier coefficients that recovers the ball by minimizing the
length-weighted variance J of |grad v|_g on the boundary.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LineSearchError, SolverError, ValidationError
from .fem import assemble, boundary_gradient_trace, solve
from .geometry import Curvature
from .mesh import StarDomain, mesh_at_level
from .verify import boundary_stats, solve_and_verify


def _fmt(x: float) -> str:
    return repr(float(x))


@dataclass(frozen=True)
class ScanRow:
    eps: float
    c_mean: float
    c_std: float
    p_range: float
    pohozaev_residual: float
    error: str | None = None


@dataclass(frozen=True)
class ScanResult:
    K: Curvature
    R: float
    mode_k: int
    level: int
    rows: tuple[ScanRow, ...]

    def csv_text(self) -> str:
        lines = ["eps,c_mean,c_std,P_range,poho_residual"]
        for row in self.rows:
            lines.append(
                ",".join(
                    _fmt(x)
                    for x in (row.eps, row.c_mean, row.c_std, row.p_range, row.pohozaev_residual)
                )
            )
        return "\n".join(lines) + "\n"

    def save(self, path) -> None:
        with open(path, "w", newline="\n") as fh:
            fh.write(self.csv_text())


def perturbation_scan(K, R: float, k: int, eps_list, level: int = 3,
                      tol: float = 1e-10) -> ScanResult:
    """Solve and verify rho = R (1 + eps cos k theta) for each eps in order.

    Rows where meshing or solving fails carry NaN statistics and the error
    message instead of aborting the scan.
    """
    K = Curvature.of(K)
    if not isinstance(k, int) or k < 2:
        raise ValidationError("perturbation mode k must be an integer >= 2")
    eps_arr = [float(e) for e in eps_list]
    if len(eps_arr) == 0:
        raise ValidationError("eps list must not be empty")
    if any(b <= a for a, b in zip(eps_arr, eps_arr[1:])):
        raise ValidationError("eps values must be strictly increasing")
    rows = []
    for eps in eps_arr:
        try:
            domain = StarDomain.cosine(K, R, k, eps)
            report, _, _ = solve_and_verify(domain, level=level, tol=tol)
            rows.append(
                ScanRow(
                    eps=eps,
                    c_mean=report.c_mean,
                    c_std=report.c_std,
                    p_range=report.p_range,
                    pohozaev_residual=report.pohozaev_relative_residual,
                )
            )
        except (ValidationError, SolverError) as exc:
            nan = float("nan")
            rows.append(ScanRow(eps=eps, c_mean=nan, c_std=nan, p_range=nan,
                                pohozaev_residual=nan, error=str(exc)))
    return ScanResult(K=K, R=R, mode_k=k, level=level, rows=tuple(rows))


@dataclass(frozen=True)
class DescentState:
    iteration: int
    coefficients: dict[int, tuple[float, float]]  # mode -> (cos, sin)
    J: float
    step: float
    grad_norm: float

    @property
    def coeff_norm(self) -> float:
        return float(sum(abs(a) + abs(b) for a, b in self.coefficients.values()))


def descent_csv(states) -> str:
    lines = ["iter,J,coeff_norm"]
    for st in states:
        lines.append(f"{st.iteration},{_fmt(st.J)},{_fmt(st.coeff_norm)}")
    return "\n".join(lines) + "\n"


def _domain_from_vector(K, R, modes, x, delta) -> StarDomain:
    m = len(modes)
    cos = {k: float(x[i]) for i, k in enumerate(modes) if x[i] != 0.0}
    sin = {k: float(x[m + i]) for i, k in enumerate(modes) if x[m + i] != 0.0}
    return StarDomain(K=K, a0=R, cos_coeffs=cos, sin_coeffs=sin, delta=delta)


def boundary_gradient_variance(domain: StarDomain, level: int, tol: float) -> float:
    """The descent objective: length-weighted variance of |grad v|_g on the boundary."""
    mesh = mesh_at_level(domain, level)
    system = assemble(mesh, domain.K, n=2)
    field = solve(system, tol=tol)
    trace = boundary_gradient_trace(field, mesh, domain.K)
    _, c_std = boundary_stats(trace, mesh)
    return c_std**2


def shape_descent(K, R: float, initial_coeffs: dict[int, float], level: int = 3,
                  max_iters: int = 50, fd_step: float = 1e-3, grad_tol: float = 1e-6,
                  tol: float = 1e-10, delta: float = 1e-2) -> list[DescentState]:
    """Gradient descent on boundary Fourier coefficients (modes k >= 2).

    The gradient of J is formed by central finite differences of size
    fd_step per coefficient; steps use backtracking halving until decrease
    (at most 30 halvings, then LineSearchError).  Each mode contributes a
    cosine and a sine coefficient; sine components start at zero.  Stops
    when |grad J| <= grad_tol or after max_iters iterations.
    """
    K = Curvature.of(K)
    if not initial_coeffs:
        raise ValidationError("descent needs at least one Fourier mode")
    modes = sorted(int(k) for k in initial_coeffs)
    if modes[0] < 2:
        raise ValidationError("descent modes are restricted to k >= 2")
    if fd_step <= 0:
        raise ValidationError("fd_step must be positive")
    m = len(modes)
    x = np.zeros(2 * m)
    for i, k in enumerate(modes):
        x[i] = float(initial_coeffs[k])

    def objective(vec) -> float:
        domain = _domain_from_vector(K, R, modes, vec, delta)
        return boundary_gradient_variance(domain, level, tol)

    def gradient(vec) -> np.ndarray:
        g = np.empty_like(vec)
        for i in range(vec.size):
            plus = vec.copy()
            minus = vec.copy()
            plus[i] += fd_step
            minus[i] -= fd_step
            g[i] = (objective(plus) - objective(minus)) / (2 * fd_step)
        return g

    states: list[DescentState] = []
    J = objective(x)
    step = 1.0
    for it in range(max_iters + 1):
        g = gradient(x)
        gnorm = float(np.linalg.norm(g))
        states.append(
            DescentState(
                iteration=it,
                coefficients={
                    k: (float(x[i]), float(x[m + i])) for i, k in enumerate(modes)
                },
                J=J,
                step=step,
                grad_norm=gnorm,
            )
        )
        if gnorm <= grad_tol or it == max_iters:
            break
        t = step
        accepted = False
        for _ in range(31):
            trial = x - t * g
            try:
                J_trial = objective(trial)
            except (ValidationError, SolverError):
                J_trial = np.inf
            if J_trial < J:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            raise LineSearchError("line search found no decrease after 30 halvings")
        x = trial
        J = J_trial
        step = 2.0 * t
    return states
