"""Torsion-type PDE on constant-curvature space forms.

Closed-form solutions and identity checks on geodesic balls (any dimension),
a P1 finite-element solver on 2-D conformal models, P-function and integral
diagnostics, and rigidity probes showing that only balls carry a constant
boundary gradient.
"""

from .errors import ConvergenceError, LineSearchError, SolverError, ValidationError
from .fem import Field, SparseSystem, assemble, boundary_gradient_trace, pcg_jacobi, recover_gradient, solve
from .geometry import (
    HEMISPHERE_MARGIN,
    ConformalModel,
    Curvature,
    SpaceForm,
    WarpedProfile,
    conformal_factor,
    geodesic_radius,
    model_radius,
    profile_eval,
)
from .mesh import (
    MeshQuality,
    StarDomain,
    TriMesh,
    build_star_mesh,
    mesh_at_level,
    mesh_quality,
    refine,
    riemannian_area,
    save_mesh,
    triangle_areas,
    validate_mesh,
)
from .radial import (
    ObataTrajectory,
    PohozaevCheck,
    RadialSolution,
    hemisphere_eigen_residual,
    hessian_proportionality_residual,
    identity_suite_radial,
    obata_closed_form,
    obata_ode_solve,
    p_constancy_residual,
    pohozaev_ball_check,
    radial_pde_residual,
    radial_solution,
    sphere_area,
)
from .rigidity import (
    DescentState,
    ScanResult,
    ScanRow,
    boundary_gradient_variance,
    descent_csv,
    perturbation_scan,
    shape_descent,
)
from .verify import (
    MaxPrincipleReport,
    VerifyReport,
    boundary_stats,
    compare_to_radial,
    max_principle_report,
    p_function,
    pohozaev_integrals_2d,
    solve_and_verify,
)

__version__ = "0.1.0"
