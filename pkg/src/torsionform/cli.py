"""Batch command-line front end.

Subcommands:
    radial      closed-form ball summary: c, v(0), integral identity check
    identities  radial identity suite plus the geodesic ODE and
                hemisphere-eigenfunction checks
    solve       mesh + solve; writes field.csv and boundary.csv
    verify      full diagnostics; writes verify.json (also printed)
    scan        perturbation scan; writes scan.csv
    descent     shape descent; writes descent.csv

Configuration comes from an optional JSON file (--config), overridden by
flags.  Defaults: K=0, n=2, R=1, level 3, tol 1e-10, delta 1e-2.
Exit codes: 0 success, 2 validation error, 3 solver failure.  Errors are
printed to stderr as one line with a stable prefix (VALIDATION_ERROR: or
SOLVER_ERROR:).  Identical invocations produce identical output bytes.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import SolverError, ValidationError
from .fem import assemble, boundary_gradient_trace, recover_gradient, solve
from .geometry import Curvature, conformal_factor, geodesic_radius
from .mesh import StarDomain, mesh_at_level
from .radial import (
    hemisphere_eigen_residual,
    hessian_proportionality_residual,
    identity_suite_radial,
    obata_closed_form,
    obata_ode_solve,
    p_constancy_residual,
    pohozaev_ball_check,
    radial_pde_residual,
    radial_solution,
)
from .rigidity import descent_csv, perturbation_scan, shape_descent
from .verify import p_function, solve_and_verify

IDENTITY_TOL = 1e-10
OBATA_TOL = 1e-8

_CONFIG_KEYS = (
    "K", "n", "R", "coeffs", "eps", "eps_k", "level", "tol", "delta",
    "out_dir", "max_iters", "fd_step",
)


def _fmt(x: float) -> str:
    return repr(float(x))


@dataclass(frozen=True)
class RunConfig:
    command: str
    K: Curvature = Curvature.FLAT
    n: int = 2
    R: float = 1.0
    coeffs: dict[int, float] = field(default_factory=dict)
    eps: list[float] | None = None
    eps_k: int = 3
    level: int = 3
    tol: float = 1e-10
    delta: float = 1e-2
    out_dir: str = "out"
    max_iters: int = 50
    fd_step: float = 1e-3

    def __post_init__(self):
        object.__setattr__(self, "K", Curvature.of(self.K))
        if not isinstance(self.n, int) or self.n < 2:
            raise ValidationError("n must be an integer >= 2")
        if self.R <= 0:
            raise ValidationError("R must be positive")
        if not isinstance(self.level, int) or self.level < 1:
            raise ValidationError("level must be an integer >= 1")
        if self.tol <= 0:
            raise ValidationError("tol must be positive")
        if self.delta <= 0:
            raise ValidationError("delta must be positive")
        if not isinstance(self.eps_k, int) or self.eps_k < 0:
            raise ValidationError("eps_k must be a nonnegative integer")
        if self.max_iters < 1:
            raise ValidationError("max_iters must be >= 1")
        if self.fd_step <= 0:
            raise ValidationError("fd_step must be positive")

    def domain(self) -> StarDomain:
        if self.coeffs:
            return StarDomain(K=self.K, a0=self.R, cos_coeffs=self.coeffs, delta=self.delta)
        eps = self.single_eps()
        if eps != 0.0:
            if self.eps_k == 0:
                return StarDomain.ball(self.K, self.R * (1.0 + eps), delta=self.delta)
            return StarDomain.cosine(self.K, self.R, self.eps_k, eps, delta=self.delta)
        return StarDomain.ball(self.K, self.R, delta=self.delta)

    def single_eps(self) -> float:
        if self.eps is None:
            return 0.0
        if len(self.eps) != 1:
            raise ValidationError("this command takes a single eps value")
        return self.eps[0]


def _parse_coeffs(text) -> dict[int, float]:
    if isinstance(text, dict):
        items = text.items()
    else:
        if not text:
            return {}
        try:
            items = (pair.split(":") for pair in str(text).split(","))
            items = [(k, v) for k, v in items]
        except ValueError:
            raise ValidationError(
                "coeffs must be comma-separated k:a_k pairs, e.g. 3:0.15"
            ) from None
    out = {}
    for k, v in items:
        try:
            out[int(k)] = float(v)
        except ValueError:
            raise ValidationError(f"invalid Fourier coefficient entry {k}:{v}") from None
    return out


def _parse_eps(text) -> list[float]:
    if isinstance(text, (list, tuple)):
        vals = list(text)
    else:
        vals = str(text).split(",")
    try:
        return [float(v) for v in vals]
    except ValueError:
        raise ValidationError("eps must be a comma-separated list of numbers") from None


def parse_config(command: str, flags: dict, config_path: str | None) -> RunConfig:
    """Merge JSON config and flags (flags win) into a validated RunConfig."""
    merged: dict = {}
    if config_path is not None:
        try:
            with open(config_path) as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ValidationError(f"cannot read config file: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ValidationError(f"config file is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ValidationError("config file must hold a JSON object")
        for key in data:
            if key not in _CONFIG_KEYS:
                raise ValidationError(f"unknown config key: {key}")
        merged.update(data)
    for key, value in flags.items():
        if value is not None:
            merged[key] = value

    kwargs: dict = {"command": command}
    if "K" in merged:
        kwargs["K"] = Curvature.of(merged["K"])
    if "n" in merged:
        try:
            kwargs["n"] = int(merged["n"])
        except (TypeError, ValueError):
            raise ValidationError("n must be an integer") from None
    for key in ("R", "tol", "delta", "fd_step"):
        if key in merged:
            try:
                kwargs[key] = float(merged[key])
            except (TypeError, ValueError):
                raise ValidationError(f"{key} must be a number") from None
    for key in ("level", "eps_k", "max_iters"):
        if key in merged:
            try:
                kwargs[key] = int(merged[key])
            except (TypeError, ValueError):
                raise ValidationError(f"{key} must be an integer") from None
    if "coeffs" in merged:
        kwargs["coeffs"] = _parse_coeffs(merged["coeffs"])
    if "eps" in merged:
        kwargs["eps"] = _parse_eps(merged["eps"])
    if "out_dir" in merged:
        kwargs["out_dir"] = str(merged["out_dir"])
    return RunConfig(**kwargs)


def _cmd_radial(cfg: RunConfig) -> int:
    sol = radial_solution(cfg.K, cfg.n, cfg.R, delta=cfg.delta)
    check = pohozaev_ball_check(cfg.K, cfg.n, cfg.R)
    print(f"K = {int(cfg.K)}")
    print(f"n = {cfg.n}")
    print(f"R = {_fmt(cfg.R)}")
    print(f"c = {_fmt(sol.c)}")
    print(f"v0 = {_fmt(sol.v0)}")
    print(f"poho_lhs = {_fmt(check.lhs)}")
    print(f"poho_rhs = {_fmt(check.rhs)}")
    print(f"poho_residual = {_fmt(check.relative_residual)}")
    return 0


def _cmd_identities(cfg: RunConfig) -> int:
    sol = radial_solution(cfg.K, cfg.n, cfg.R, delta=cfg.delta)
    suite = identity_suite_radial(sol)
    traj = obata_ode_solve(cfg.K, cfg.n, sol.v0, s_max=cfg.R, step=1e-3)
    obata_err = float(
        np.max(np.abs(traj.f - obata_closed_form(cfg.K, cfg.n, sol.v0, traj.s)))
    )
    results = {
        "pde_residual": radial_pde_residual(sol),
        "hessian_residual": hessian_proportionality_residual(sol),
        "bochner_residual": suite["bochner"],
        "div_hv_grad_residual": suite["div_hv_grad"],
        "pohozaev_div_residual": suite["pohozaev_div"],
        "p_constancy_residual": p_constancy_residual(sol),
        "obata_sup_error": obata_err,
        "hemisphere_eigen_residual": hemisphere_eigen_residual(cfg.n),
    }
    failed = False
    for name, value in results.items():
        threshold = OBATA_TOL if name == "obata_sup_error" else IDENTITY_TOL
        failed = failed or value > threshold
        print(f"{name} = {_fmt(value)}")
    if failed:
        raise SolverError("identity residual exceeded tolerance")
    return 0


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def _cmd_solve(cfg: RunConfig) -> int:
    domain = cfg.domain()
    mesh = mesh_at_level(domain, cfg.level)
    system = assemble(mesh, domain.K, n=2)
    sol = solve(system, tol=cfg.tol)
    grads = recover_gradient(sol, mesh)
    trace = boundary_gradient_trace(sol, mesh, domain.K)
    P = p_function(sol, grads, mesh, domain.K, 2)
    grad_g = np.linalg.norm(grads, axis=1) / conformal_factor(domain.K, mesh.nodes)

    lines = ["x,y,v,P,grad_norm_g"]
    for i in range(mesh.n_nodes):
        lines.append(
            ",".join(
                _fmt(x)
                for x in (mesh.nodes[i, 0], mesh.nodes[i, 1], sol.values[i],
                          P.values[i], grad_g[i])
            )
        )
    _write(Path(cfg.out_dir) / "field.csv", "\n".join(lines) + "\n")

    rho = geodesic_radius(domain.K, np.linalg.norm(mesh.nodes[mesh.boundary_nodes], axis=1))
    blines = ["theta,rho,grad_norm_g,P"]
    for j, node in enumerate(mesh.boundary_nodes):
        blines.append(
            ",".join(
                _fmt(x)
                for x in (mesh.boundary_theta[j], rho[j], trace[j], P.values[node])
            )
        )
    _write(Path(cfg.out_dir) / "boundary.csv", "\n".join(blines) + "\n")
    print(f"wrote {Path(cfg.out_dir) / 'field.csv'} and {Path(cfg.out_dir) / 'boundary.csv'}")
    return 0


def _cmd_verify(cfg: RunConfig) -> int:
    report, _, _ = solve_and_verify(cfg.domain(), level=cfg.level, tol=cfg.tol)
    text = report.to_json()
    _write(Path(cfg.out_dir) / "verify.json", text)
    print(text, end="")
    return 0


def _cmd_scan(cfg: RunConfig) -> int:
    eps = cfg.eps if cfg.eps is not None else [0.0, 0.05, 0.1, 0.2]
    result = perturbation_scan(cfg.K, cfg.R, cfg.eps_k, eps, level=cfg.level, tol=cfg.tol)
    _write(Path(cfg.out_dir) / "scan.csv", result.csv_text())
    print(result.csv_text(), end="")
    return 0


def _cmd_descent(cfg: RunConfig) -> int:
    if not cfg.coeffs:
        raise ValidationError("descent needs --coeffs with at least one k:a_k mode (k >= 2)")
    states = shape_descent(
        cfg.K, cfg.R, cfg.coeffs, level=cfg.level, max_iters=cfg.max_iters,
        fd_step=cfg.fd_step, tol=cfg.tol, delta=cfg.delta,
    )
    text = descent_csv(states)
    _write(Path(cfg.out_dir) / "descent.csv", text)
    print(text, end="")
    return 0


_COMMANDS = {
    "radial": _cmd_radial,
    "identities": _cmd_identities,
    "solve": _cmd_solve,
    "verify": _cmd_verify,
    "scan": _cmd_scan,
    "descent": _cmd_descent,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="torsionform", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--K", type=int, default=None, help="curvature: -1, 0 or 1")
        p.add_argument("--n", type=int, default=None, help="dimension (>= 2)")
        p.add_argument("--R", type=float, default=None, help="ball/base radius, geodesic units")
        p.add_argument("--coeffs", type=str, default=None,
                       help="boundary Fourier cosine coefficients, e.g. 3:0.15,5:0.02")
        p.add_argument("--eps", type=str, default=None,
                       help="perturbation amplitude(s); comma list for scan")
        p.add_argument("--eps-k", dest="eps_k", type=int, default=None,
                       help="perturbation mode number")
        p.add_argument("--level", type=int, default=None, help="mesh resolution level (>= 1)")
        p.add_argument("--tol", type=float, default=None, help="linear solver tolerance")
        p.add_argument("--delta", type=float, default=None, help="hemisphere cap margin")
        p.add_argument("--out-dir", dest="out_dir", type=str, default=None)
        p.add_argument("--max-iters", dest="max_iters", type=int, default=None)
        p.add_argument("--fd-step", dest="fd_step", type=float, default=None)
        p.add_argument("--config", type=str, default=None, help="JSON config file")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    flags = {
        "K": args.K,
        "n": args.n,
        "R": args.R,
        "coeffs": args.coeffs,
        "eps": args.eps,
        "eps_k": args.eps_k,
        "level": args.level,
        "tol": args.tol,
        "delta": args.delta,
        "out_dir": args.out_dir,
        "max_iters": args.max_iters,
        "fd_step": args.fd_step,
    }
    try:
        cfg = parse_config(args.command, flags, args.config)
        return _COMMANDS[args.command](cfg)
    except ValidationError as exc:
        print(f"VALIDATION_ERROR: {exc}", file=sys.stderr)
        return 2
    except SolverError as exc:
        print(f"SOLVER_ERROR: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
