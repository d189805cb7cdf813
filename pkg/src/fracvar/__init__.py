"""fracvar: weighted fractional operators and variational verification tools.

The library is organised around four layers: kernel families and their exact
moments (``kernels``), grid operators built on product integration
(``operators``), variational residuals and a direct solver (``variational``),
and dissipative oscillator dynamics (``physics``).  ``cli`` exposes the whole
surface as subcommands on JSON problem files.
"""

from .errors import (ConvergenceError, DegenerateConstraintError, DomainError,
                     FracvarError, GridMismatchError, IncompatibleDataError,
                     LagrangianValidationError, NormBoundViolation, RangeError,
                     SchemaError, SimulationBlowUpError, UnsupportedKernelError,
                     UsageError)
from .grid import GridFunction
from .kernels import (KernelSpec, ParamSet, eval_kernel, eval_kernel_dt,
                      kernel_l1_norm, kernel_moments)
from .operators import (OperatorConfig, OperatorKind, frac_deriv_caputo,
                        frac_deriv_rl, frac_integral, left_caputo_derivative,
                        left_rl_derivative, left_rl_integral, operator_norm_check,
                        parts_defect_caputo, parts_defect_integral,
                        right_caputo_derivative, right_rl_derivative,
                        right_rl_integral, solve_volterra_first_kind)
from .physics import (DeltaLimitReport, OscillatorParams, delta_limit_report,
                      dissipation_rate, oscillator_energy,
                      simulate_caldirola_kanai, simulate_damped_oscillator)
from .specfun import MLParams, gamma_fn, log_gamma, mittag_leffler
from .variational import (Constraint, LagrangianSpec, ResidualReport,
                          SolveResult, SolverOptions, VariationalProblem,
                          constraint_value, el_residual, estimate_multiplier,
                          evaluate_functional, isoperimetric_el_residual,
                          natural_bc_residual, solve_direct)

__version__ = "0.1.0"
