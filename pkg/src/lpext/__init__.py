"""Minimal weighted L^p holomorphic extensions on model domains.

The direct solver (``solve_lp_direct``) minimises the smoothed p-energy over
the feasible polynomials; the IRLS solver (``irls_solve``) reaches the same
minimiser through a sequence of reweighted L^2 problems.  ``run_ledger``
checks both against a fixed list of residual identities.
"""

from .config import Instance, InstanceConfig, build_instance, load_config, parse_config
from .errors import (ConfigurationError, ConvergenceError, DegenerateRuleError, LpExtError,
                     NoExtensionError)
from .function_space import HoloFunction, build_basis, feasible_set, gram, restrict
from .geometry import (DomainKind, DomainSpec, QuadratureRule, SubmanifoldKind,
                       SubmanifoldSpec, WeightSpec, build_domain_quadrature,
                       build_submanifold_quadrature, eval_weight)
from .irls import IrlsSchedule, fixed_point_residual, irls_solve, reweight
from .l2_solver import make_l2_problem, orthogonality_residual, solve_l2
from .lp_solver import (DescentOptions, LpProblem, default_starts, make_lp_problem,
                        solve_lp_direct, uniqueness_probe, variational_residual_p)
from .verifier import SHIPPED_CHECKS, CheckLedger, run_ledger

__version__ = "0.1.0"
