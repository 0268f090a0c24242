"""Grid-based backward reachable sets with coupling-as-disturbance decomposition.

The package solves the terminal-value Hamilton-Jacobi PDE on rectangular
grids (global Lax-Friedrichs, explicit CFL-limited stepping), uncouples
self-coupled systems by treating cross-block state variables as bounded
adversarial disturbances, optionally splits those disturbance ranges into
sections, and recombines the low-dimensional solves into a guaranteed
under-approximation of the full-dimensional reachable set.
"""

from .grid import Grid, ScalarField, cell_volume, make_grid, one_sided_diff, state_of_index
from .shapes import ImplicitSurface, combine, sample_on_grid, slab
from .systems import (
    Interval,
    SubsystemModel,
    builtin_model,
    dissipation_bound,
    hamiltonian,
    interval_linear_extrema,
    interval_sin_extrema,
)
from .solver import (
    CflViolationError,
    SolveOptions,
    ValueFunction,
    cfl_timestep,
    lax_friedrichs_update,
    solve_terminal_hjpde,
)
from .decompose import Piece, SelfCoupledSpec, SplitSchedule, build_pieces, uniform_split
from .reconstruct import (
    PieceResult,
    Reconstruction,
    ReconstructionReport,
    backproject,
    compare,
    evaluate_reconstruction,
    sublevel_volume,
)
from .hjvf import (
    BadMagicError,
    FieldFileError,
    TruncatedPayloadError,
    VersionMismatchError,
    read_field,
    write_field,
)
from .pipeline import (
    ConfigError,
    MemoryBudgetError,
    ProblemConfig,
    SweepRow,
    run_decoupled_solve,
    run_full_solve,
    run_sweep,
)

__version__ = "0.1.0"
