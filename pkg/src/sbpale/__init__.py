"""Energy-stable summation-by-parts method-of-lines solvers on moving meshes."""

from .ale import (
    AleOperators,
    DegenerateMeshError,
    SystemMatrices,
    assemble,
    build_ale_operators,
    build_dm,
    divergence_discrete,
    jacobian_rhs,
    reynolds_identity_residual,
)
from . import audit
from .audit import AuditReport, inertia_equivalence, jacobi_eigenvalues
from .boundary import (
    BoundaryOperators,
    advection_diffusion_bcs,
    energy_functional,
    lifting_apply,
    lifting_matrix,
)
from .curvilinear import CurvilinearAdvectionSystem, Mapping2D, TensorOps2D, fsp_mode_check
from .experiment import ExperimentConfig, mms_data, mms_solution, run_convergence
from .motion import BlockLayout, MeshMotion, boundary_layer_layout, oscillating_motion, stationary_motion
from .sbp import MultiblockOperator, SbpOperator1D, build_operator, couple_blocks, sbp_residual
from .system import AleSystem, freestream_data
from .timestep import (
    ButcherTableau,
    FilterSpec,
    SolverState,
    classic_rk4,
    filter_step,
    initial_state,
    rk_step,
    run,
    undivided_difference_filter,
)

__version__ = "0.1.0"
