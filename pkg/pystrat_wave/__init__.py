# MODULES
import logging

# PYSTRAT_WAVE
from pystrat_wave._config import (
    RunConfig as RunConfig,
    load_config as load_config,
    parse_config as parse_config,
)
from pystrat_wave._constants.enum import (
    BifurcationRoot as BifurcationRoot,
    ReflectionCase as ReflectionCase,
    StagnationCase as StagnationCase,
    Subcommand as Subcommand,
)
from pystrat_wave._continuation import (
    BranchPoint as BranchPoint,
    SolutionBranch as SolutionBranch,
    continue_branch as continue_branch,
)
from pystrat_wave._core import (
    FluidParameters as FluidParameters,
    Grid2D as Grid2D,
    HeightField as HeightField,
    PhysicalFields as PhysicalFields,
    StratificationProfile as StratificationProfile,
    StreamSolution as StreamSolution,
    linear_stratification as linear_stratification,
    make_grid as make_grid,
    make_sigma_grid as make_sigma_grid,
    tabulated_stratification as tabulated_stratification,
)
from pystrat_wave._exceptions import (
    BranchTerminated as BranchTerminated,
    ConfigError as ConfigError,
    ModelError as ModelError,
    NoConvergence as NoConvergence,
    NonMonotoneStream as NonMonotoneStream,
    SingularMapping as SingularMapping,
    StagnationEncountered as StagnationEncountered,
    StagnationOnSurface as StagnationOnSurface,
    SurfaceStagnation as SurfaceStagnation,
    TroughNotAligned as TroughNotAligned,
    WaveError as WaveError,
)
from pystrat_wave._height_solver import (
    DiscreteOperator as DiscreteOperator,
    SolveReport as SolveReport,
    assemble_linearization as assemble_linearization,
    column_flux as column_flux,
    laminar_height_field as laminar_height_field,
    min_height_derivative as min_height_derivative,
    newton_solve as newton_solve,
    pde_residual as pde_residual,
    recover_physical as recover_physical,
)
from pystrat_wave._laminar import (
    LaminarFlow as LaminarFlow,
    StagnationClassification as StagnationClassification,
    bifurcation_parameters as bifurcation_parameters,
    dispersion_lambdas as dispersion_lambdas,
    dispersion_residual as dispersion_residual,
    find_stagnation_depths as find_stagnation_depths,
    laminar_psi as laminar_psi,
    laminar_psi_y as laminar_psi_y,
    laminar_psi_y_factored as laminar_psi_y_factored,
    laminar_q as laminar_q,
)
from pystrat_wave._max_principle import (
    Counterexample as Counterexample,
    MaxPrincipleReport as MaxPrincipleReport,
    StencilViolation as StencilViolation,
    check_discrete_max_principle as check_discrete_max_principle,
)
from pystrat_wave._repository import RunRepository as RunRepository
from pystrat_wave._service import Service as Service
from pystrat_wave._stream_solver import (
    FreeBoundaryReport as FreeBoundaryReport,
    PhysicalDerivatives as PhysicalDerivatives,
    SlopeReport as SlopeReport,
    StagnationPoint as StagnationPoint,
    SurfaceShape as SurfaceShape,
    bernoulli_residual as bernoulli_residual,
    laminar_stream_solution as laminar_stream_solution,
    locate_stagnation_points as locate_stagnation_points,
    physical_derivatives as physical_derivatives,
    solve_dirichlet as solve_dirichlet,
    solve_free_boundary as solve_free_boundary,
    solve_sigma_poisson as solve_sigma_poisson,
    surface_slope_check as surface_slope_check,
)
from pystrat_wave._symmetry import (
    EdgeEntry as EdgeEntry,
    EdgePointTable as EdgePointTable,
    MonotonicityReport as MonotonicityReport,
    ReflectionReport as ReflectionReport,
    align_phase as align_phase,
    asymmetry_norm as asymmetry_norm,
    check_monotone_streamlines as check_monotone_streamlines,
    moving_plane_sweep_height as moving_plane_sweep_height,
    moving_plane_sweep_stream as moving_plane_sweep_stream,
    reflect_height as reflect_height,
    reflect_stream as reflect_stream,
    serrin_edge_check as serrin_edge_check,
)
from pystrat_wave._wave_service import WaveService as WaveService


logging.basicConfig()
_logger = logging.getLogger("pystrat_wave.timing")
_logger.setLevel(logging.INFO)
