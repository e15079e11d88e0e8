"""Central numeric tolerances for the solvers.

All solver-level tolerances live in one record so nothing is tuned ad hoc at
call sites.
"""

from dataclasses import dataclass


@dataclass(frozen=True)
class SolverSettings:
    # width tolerance of the multiplier search bracket, relative to its scale
    tau_tol: float = 1e-10
    # width tolerance of 1-D searches over the auxiliary variable alpha
    alpha_tol: float = 1e-9
    # relative feasibility margin below which the trace bound is treated as
    # exactly tight (single-ray feasible set)
    boundary_margin: float = 1e-7
    # primal constraint residual tolerance
    feas_tol: float = 1e-7
    # primal/dual value agreement: |primal - dual| <= gap_tol * (1 + |value|)
    gap_tol: float = 1e-7
    # early-stop tolerance of the multiplier search: remaining dual
    # suboptimality relative to the value scale (0 disables the early stop)
    search_gap_tol: float = 1e-12
    # relative eigenvalue window treated as a degenerate smallest eigenspace
    degenerate_tol: float = 1e-7
    # recovery is declared failed beyond this constraint residual
    recovery_tol: float = 1e-6
    # geometric bracket expansions before the search gives up
    max_expand: int = 200


DEFAULT_SETTINGS = SolverSettings()
