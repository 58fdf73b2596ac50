"""Gap-tooth patch dynamics with meso-scale timestepper schedules.

Simulates the macroscopic evolution of a PDE system using a microscopic
solver run only inside small teeth around the macro grid nodes.  Supports
the classic single-burst schedule (all gap-tooth timesteps up front, one
long extrapolation) and generalized schedules that distribute the
timesteppers and extrapolation spans across each macro step, uniformly or
not.
"""

from .errors import (ArityMismatch, BudgetMismatch, ConfigError, GeometryError,
                     InvalidSplit, NegativeSpan, NonCommensurate,
                     SingularSystem, SpecDocumentError, StabilityViolation)
from .grid import (CoarseField, MacroConfig, PatchState, macro_nodes,
                   patch_offsets, validate_config)
from .micro import BENCHMARK, MicroProblem, evolve_patch, ghost_value
from .coupling import LagrangeStencil, boundary_slopes, lift, restrict
from .gtt import estimate_time_derivative, gtt_step
from .schedule import (DIVERGENCE_THRESHOLD, GttSchedule, RunReport,
                       ScheduleKind, extrapolate, make_custom_schedule,
                       make_uniform_schedule, run)
from .reference import (analytic_solution, benchmark_initial,
                        full_domain_oracle, max_percent_error,
                        oracle_as_reference)

__version__ = "0.1.0"

__all__ = [
    "ArityMismatch", "BudgetMismatch", "ConfigError", "GeometryError",
    "InvalidSplit", "NegativeSpan", "NonCommensurate", "SingularSystem",
    "SpecDocumentError", "StabilityViolation",
    "CoarseField", "MacroConfig", "PatchState", "macro_nodes",
    "patch_offsets", "validate_config",
    "BENCHMARK", "MicroProblem", "evolve_patch", "ghost_value",
    "LagrangeStencil", "boundary_slopes", "lift", "restrict",
    "estimate_time_derivative", "gtt_step",
    "DIVERGENCE_THRESHOLD", "GttSchedule", "RunReport", "ScheduleKind",
    "extrapolate", "make_custom_schedule", "make_uniform_schedule", "run",
    "analytic_solution", "benchmark_initial", "full_domain_oracle",
    "max_percent_error", "oracle_as_reference",
    "__version__",
]
