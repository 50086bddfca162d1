# MODULES
import dataclasses
import math
from logging import Logger
from pathlib import Path
from typing import Dict, Optional, Tuple

# NUMPY
import numpy

# CONFIG
from pystrat_wave._config import RunConfig

# CONTINUATION
from pystrat_wave._continuation import SolutionBranch, continue_branch

# CORE
from pystrat_wave._core import (
    FluidParameters,
    HeightField,
    StratificationProfile,
    StreamSolution,
    make_grid,
    make_sigma_grid,
)

# EXCEPTIONS
from pystrat_wave._exceptions import BranchTerminated

# HEIGHT SOLVER
from pystrat_wave._height_solver import (
    assemble_linearization,
    column_flux,
    laminar_height_field,
    newton_solve,
    recover_physical,
)

# LAMINAR
from pystrat_wave._laminar import (
    LaminarFlow,
    bifurcation_parameters,
    dispersion_lambdas,
    dispersion_residual,
    find_stagnation_depths,
    laminar_psi,
    laminar_psi_y,
)

# MAX PRINCIPLE
from pystrat_wave._max_principle import check_discrete_max_principle

# REPOSITORY
from pystrat_wave._repository import RunRepository

# SERVICE
from pystrat_wave._service import Service

# STREAM SOLVER
from pystrat_wave._stream_solver import (
    locate_stagnation_points,
    solve_free_boundary,
)

# SYMMETRY
from pystrat_wave._symmetry import (
    align_phase,
    asymmetry_norm,
    check_monotone_streamlines,
    moving_plane_sweep_height,
    moving_plane_sweep_stream,
    serrin_edge_check,
)

# LIBS
from pystrat_wave.libs.file_lib import KeyValue

Report = Dict[str, KeyValue]


def _joined(values: Tuple[float, ...]) -> str:
    return ",".join(format(value, ".16e") for value in values) if values else "none"


class WaveService(Service[RunRepository]):
    """
    Runs the solver operations of one configuration and stores their artifacts.
    """

    def __init__(
        self,
        repository: RunRepository,
        config: RunConfig,
        logger: Logger,
    ) -> None:
        super().__init__(
            repository=repository,
            logger=logger,
        )
        self._config = config

    @property
    def config(self) -> RunConfig:
        return self._config

    @property
    def params(self) -> FluidParameters:
        return self._config.to_fluid_parameters()

    @property
    def profile(self) -> StratificationProfile:
        return self._config.to_profile()

    def write_meta(self) -> Path:
        return self._repository.write_key_values("run.meta", self._config.as_meta(), sort_keys=True)

    def laminar(self) -> Report:
        flow = LaminarFlow(params=self.params)
        classification = find_stagnation_depths(flow)

        y = numpy.linspace(0.0, flow.params.depth, self._config.np)
        psi = numpy.atleast_1d(laminar_psi(flow, y))
        psi_y = numpy.atleast_1d(laminar_psi_y(flow, y))
        self._repository.save_profile("laminar_profile.csv", ("y", "psi", "psi_y"), zip(y, psi, psi_y))

        report: Report = {
            "lambda": flow.lambda_,
            "Q": flow.params.Q,
            "monotone": flow.is_monotone,
            "case_tag": classification.case_tag.value,
            "stagnation_depths": _joined(classification.depths),
            "tangency": classification.tangency,
            "balance_values": _joined(classification.balance_values),
        }
        self._repository.write_key_values("laminar.txt", report)
        self._logger.info("Laminar lambda = %.10f, %s", flow.lambda_, classification.case_tag.value)

        return report

    def dispersion(self) -> Report:
        params = self.params
        minus, plus = dispersion_lambdas(params)
        report: Report = {
            "lambda_minus": minus,
            "lambda_plus": plus,
            "residual_minus": dispersion_residual(params, minus),
            "residual_plus": dispersion_residual(params, plus),
        }
        self._repository.write_key_values("dispersion.txt", report)

        return report

    def solve_height(self) -> Tuple[HeightField, Report]:
        params = self.params
        profile = self.profile
        grid = make_grid(nq=self._config.nq, np=self._config.np, p0=params.p0)

        h, solve_report = newton_solve(
            laminar_height_field(params=params, profile=profile, grid=grid),
            params,
            profile,
            tol=self._config.newton_tol,
            max_iter=self._config.newton_max_iter,
        )
        flux = column_flux(recover_physical(h, params, profile))

        report: Report = {
            "iterations": solve_report.iterations,
            "residual": solve_report.residual,
            "converged": solve_report.converged,
            "min_hp": solve_report.min_hp,
            "phase_pinned": solve_report.phase_pinned,
            "amplitude": h.amplitude,
            "mean_height": h.mean_height,
            "flux_spread": float(flux.max() - flux.min()),
        }
        self._repository.save_field(h, "field.csv")
        self._repository.write_key_values("height_report.txt", report)

        return h, report

    def continue_branch(self) -> SolutionBranch:
        config = self._config
        try:
            branch = continue_branch(
                seed_params=self.params,
                profile=self.profile,
                which=config.which,
                steps=config.steps,
                ds=config.ds,
                nq=config.nq,
                np=config.np,
                ds_min=config.ds_min,
                tol=config.newton_tol,
                max_iter=config.newton_max_iter,
            )
        except BranchTerminated as error:
            if isinstance(error.branch, SolutionBranch):
                self._repository.save_branch(error.branch)
                self._write_branch_report(error.branch, terminated=True)
            raise

        self._repository.save_branch(branch)
        self._write_branch_report(branch, terminated=False)

        return branch

    def _write_branch_report(self, branch: SolutionBranch, terminated: bool) -> None:
        last = branch.last
        report: Report = {
            "which": branch.which.value,
            "points": len(branch.points),
            "terminated": terminated,
            "p0": branch.params.p0,
            "Q_bifurcation": branch.params.Q,
            "Q_last": last.Q,
            "amplitude_last": last.amplitude,
            "asymmetry_last": asymmetry_norm(last.field),
        }
        self._repository.write_key_values("continue.txt", report)

    def solve_stream(self) -> Tuple[StreamSolution, Report]:
        """
        Solves the free-boundary problem on the surface-fitted grid.

        With a positive amplitude the run starts from the bifurcation point of
        the configured root with a cos(kx) surface seed and solves for Q;
        otherwise it starts from the flat surface with the configured Q.
        """
        config = self._config
        params = self.params
        grid = make_sigma_grid(nq=config.nq, nt=config.np)
        x = numpy.asarray(grid.q_values)

        free_q = config.amplitude > 0.0
        if free_q:
            params = bifurcation_parameters(params, config.which)
            k = int(round(params.k))
            if k != params.k:
                raise ValueError(f"wave number must be an integer on a 2*pi period, got {params.k}")
            initial = params.depth + config.amplitude * numpy.cos(k * x)
            self._logger.info("Stream seed at the %s root: p0 = %.10f", config.which.value, params.p0)
        else:
            initial = numpy.full(grid.nq, params.depth)

        solution, solve_report = solve_free_boundary(
            initial,
            params,
            grid,
            tol=config.stream_tol,
            max_iter=config.stream_max_iter,
            free_q=free_q,
        )
        report: Report = {
            "iterations": solve_report.iterations,
            "residual": solve_report.residual,
            "converged": solve_report.converged,
            "Q": solve_report.Q,
            "modes": solve_report.modes,
            "p0": params.p0,
            "amplitude": float(solution.eta.max() - solution.eta.min()),
            "mean_height": float(solution.eta.mean()),
        }
        self._repository.save_stream_solution(solution)
        self._repository.write_key_values("stream_report.txt", report)

        return solution, report

    def _stream_solution(self, field: Optional[Path]) -> StreamSolution:
        if field is not None:
            return self._repository.load_stream_solution(field)
        return self.solve_stream()[0]

    def stagnation(self, field: Optional[Path] = None) -> Report:
        solution = self._stream_solution(field)
        points = locate_stagnation_points(solution)

        self._repository.save_profile(
            "stagnation.csv",
            ("x", "y", "residual"),
            [(point.x, point.y, point.residual) for point in points],
        )
        report: Report = {
            "count": len(points),
            "min_depth_below_trough": (
                min(point.depth_below_trough for point in points) if points else math.nan
            ),
            "trough": float(solution.eta.min()),
        }
        self._repository.write_key_values("stagnation.txt", report)

        return report

    def symmetry_check(self, field: Optional[Path] = None) -> Report:
        """
        Symmetry diagnostics of a stored solution.

        A directory is read as a stream solution, a file as a height field. The
        default is the last step of the run's branch.
        """
        report: Report = {}
        if field is not None and field.is_dir():
            solution = self._repository.load_stream_solution(field)
            sweep = moving_plane_sweep_stream(solution, tol=self._config.sweep_tol)
            report.update(sweep.as_dict())
            report["asymmetry_norm"] = asymmetry_norm(solution)
            report.update(serrin_edge_check(solution).as_dict())
        else:
            h = (
                self._repository.load_height_field(field)
                if field is not None
                else self._repository.last_branch_field()
            )
            sweep_height = moving_plane_sweep_height(h, tol=self._config.sweep_tol)
            report.update(sweep_height.as_dict())
            report.update(check_monotone_streamlines(align_phase(h)).as_dict())

        self._repository.write_key_values("symmetry.txt", report)

        return report

    def validate_max_principle(self, field: Optional[Path] = None) -> Report:
        params = self.params
        profile = self.profile
        if field is not None:
            h = self._repository.load_height_field(field)
            params = dataclasses.replace(params, p0=h.grid.p_min)
        else:
            grid = make_grid(nq=self._config.nq, np=self._config.np, p0=params.p0)
            h = laminar_height_field(params=params, profile=profile, grid=grid)

        operator = assemble_linearization(h, params, profile)
        result = check_discrete_max_principle(
            operator,
            trials=self._config.mp_trials,
            seed=self._config.seed,
        )
        report: Report = dict(result.as_dict())
        report["passed"] = result.passed
        self._repository.write_key_values("max_principle.txt", report)

        return report
