"""Nonlocal concave-convex solver with mixed Dirichlet/Neumann exterior data.

Discretizes the fractional Laplacian with a vanishing nonlocal normal
derivative on part of the exterior, and implements the constructive program
for lam*u^q + u^p right-hand sides: concave auxiliary solutions, minimal
branches via monotone iteration, bracketing of the extremal threshold, and
mountain-pass second solutions.
"""

from .errors import (
    BracketInconsistencyError,
    CapViolationError,
    ConfigError,
    ConvergenceError,
    FracmixedError,
    PureNeumannError,
)
from .geometry import DomainSpec, Discretization, KernelParams, build_discretization
from .operator import (
    Field,
    GagliardoForm,
    ProblemParams,
    apply_frac_laplacian,
    assemble_form,
    energy_J,
    grad_J,
    neumann_extension,
    nonlocal_normal_derivative,
    oracle_pv,
)
from .linsolve import min_eigen, solve_linear, stampacchia_linfty_bound
from .nonlinear import (
    Branch,
    BracketResult,
    Diverged,
    SolutionRecord,
    estimate_Lambda,
    extremal_solution,
    find_minimal,
    lambda_star,
    monotone_iterate,
    mountain_pass_second,
    mu1_linearized,
    solve_concave,
)
from .verify import (
    CheckResult,
    check_comparison,
    check_compactness_surrogate,
    check_picone,
    check_strong_max,
    check_truncation,
    run_suite,
)

__version__ = "0.1.0"
