"""Fractional-order DAE solver on a hybrid piecewise-constant/ramp basis.

The pieces compose bottom-up: `basis` expands functions on a uniform grid,
`operational` carries closed-form fractional-integration matrices acting on
those expansions, `solver` marches semi-explicit fractional DAEs node by
node with Newton solves, `problems` ships benchmark systems, and `reference`
provides independent oracles for all of it.
"""

from .basis import (
    BasisInnerProducts,
    Grid,
    HfSeries,
    basis_hold,
    basis_inner_products,
    basis_ramp,
    evaluate,
    expand_composite,
    expand_function,
    expand_samples,
)
from .operational import (
    OpMatrixSet,
    UpperToeplitz,
    build_op_matrices,
    frac_integrate,
    gamma_fn,
    toeplitz_apply,
)
from .problems import PROBLEM_IDS, AkzoParams, build_problem
from .reference import (
    OracleError,
    QuadratureSpec,
    exact_solution,
    implicit_euler_dae,
    rl_integral_power,
    rl_integral_quadrature,
)
from .solver import (
    EvaluationError,
    FdaeProblem,
    NewtonFailure,
    ResidualMap,
    SolutionGrid,
    SolverConfig,
    error_report,
    integral_reformulate,
    newton_solve_node,
    ramp_equation_residual,
    solve,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "Grid",
    "HfSeries",
    "BasisInnerProducts",
    "expand_samples",
    "expand_function",
    "expand_composite",
    "evaluate",
    "basis_hold",
    "basis_ramp",
    "basis_inner_products",
    "UpperToeplitz",
    "OpMatrixSet",
    "gamma_fn",
    "build_op_matrices",
    "toeplitz_apply",
    "frac_integrate",
    "FdaeProblem",
    "SolverConfig",
    "SolutionGrid",
    "ResidualMap",
    "NewtonFailure",
    "EvaluationError",
    "integral_reformulate",
    "newton_solve_node",
    "solve",
    "error_report",
    "ramp_equation_residual",
    "QuadratureSpec",
    "OracleError",
    "rl_integral_power",
    "rl_integral_quadrature",
    "implicit_euler_dae",
    "exact_solution",
    "PROBLEM_IDS",
    "AkzoParams",
    "build_problem",
]
