# MODULES
import dataclasses
import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Tuple, Union

# NUMPY
import numpy

# SCIPY
import scipy.sparse as sparse
import scipy.sparse.linalg as sparse_linalg

# CONSTANTS
from pystrat_wave._constants.enum import BifurcationRoot

# CORE
from pystrat_wave._core import (
    FloatArray,
    FluidParameters,
    Grid2D,
    HeightField,
    StratificationProfile,
    make_grid,
)

# DECORATORS
from pystrat_wave._decorators import timed as _timed

# EXCEPTIONS
from pystrat_wave._exceptions import (
    BranchTerminated,
    NoConvergence,
    StagnationEncountered,
)

# HEIGHT SOLVER
from pystrat_wave._height_solver import (
    _linearization,
    _residual,
    laminar_height_field,
    newton_solve,
)

# FINITE DIFFERENCES
from pystrat_wave._finite_difference import GridOperators, grid_operators

# LAMINAR
from pystrat_wave._laminar import bifurcation_parameters

_logger = logging.getLogger("pystrat_wave.continuation")

_INVERSE_ITERATIONS = 8
_STAGNATION_FLOOR = 1e-3


@dataclass(frozen=True, eq=False)
class BranchPoint:
    """
    One accepted solution of a branch.

    Attributes:
        Q: The continuation parameter.
        field: The height field.
        amplitude: Crest-to-trough height of the surface.
        params: The fluid parameters with this Q.
    """

    Q: float
    field: HeightField
    amplitude: float
    params: FluidParameters


@dataclass(frozen=True, eq=False)
class SolutionBranch:
    """
    Solutions continued from a laminar flow at a bifurcation value.

    Attributes:
        which: The dispersion root of the seed.
        params: Parameters at the bifurcation value.
        grid: The height grid.
        tol: Newton tolerance.
        ds: Largest arclength step.
        ds_min: Smallest arclength step before the branch is abandoned.
        points: Accepted solutions, the laminar state first.
    """

    which: BifurcationRoot
    params: FluidParameters
    grid: Grid2D
    tol: float
    ds: float
    ds_min: float
    points: Tuple[BranchPoint, ...]

    @property
    def amplitudes(self) -> List[float]:
        return [point.amplitude for point in self.points]

    @property
    def last(self) -> BranchPoint:
        return self.points[-1]

    def meta(self) -> Dict[str, Union[str, int, float]]:
        data: Dict[str, Union[str, int, float]] = {
            key: value for key, value in self.params.as_dict().items()
        }
        data.update(
            {
                "which": self.which.value,
                "nq": self.grid.nq,
                "np": self.grid.np,
                "newton_tol": self.tol,
                "ds": self.ds,
                "ds_min": self.ds_min,
                "steps": len(self.points) - 1,
            }
        )
        return data


def _kernel_mode(
    laminar: HeightField,
    ops: GridOperators,
    params: FluidParameters,
    profile: StratificationProfile,
    k: int,
) -> FloatArray:
    """
    The cos(kq) mode of the linearization at the laminar field, by inverse iteration.

    Normalized to max |surface| = 1 with a positive crest at q = 0.
    """
    grid = laminar.grid
    operator = _linearization(laminar.values, ops, params, profile, params.Q)
    factor = sparse_linalg.splu(operator.matrix.tocsc())

    q_values = numpy.asarray(grid.q_values)
    p_values = numpy.asarray(grid.p_values)
    mode = numpy.cos(k * q_values)[None, :] * (p_values - grid.p_min)[:, None]
    vector = mode[1:].ravel()
    for _ in range(_INVERSE_ITERATIONS):
        vector = factor.solve(vector)
        vector /= numpy.abs(vector).max()

    mode = numpy.zeros(grid.shape)
    mode[1:] = vector.reshape(-1, grid.nq)
    # even part about q = 0: column j reflects to (nq - j) % nq
    mode = 0.5 * (mode + mode[:, (-numpy.arange(grid.nq)) % grid.nq])

    surface = mode[-1]
    scale = numpy.abs(surface).max()
    if surface[grid.nq // 2] < 0.0:
        scale = -scale

    return mode / scale


def _weighted_norm(x: FloatArray, Q: float) -> float:
    return math.sqrt(float(x @ x) / x.size + Q * Q)


def _correct(
    x: FloatArray,
    Q: float,
    x_prev: FloatArray,
    Q_prev: float,
    tangent: Tuple[FloatArray, float],
    ds: float,
    phase: FloatArray,
    x_phase: FloatArray,
    ops: GridOperators,
    params: FluidParameters,
    profile: StratificationProfile,
    tol: float,
    max_iter: int,
) -> Tuple[FloatArray, float]:
    grid = ops.grid
    size = x.size
    tau_x, tau_Q = tangent
    shift = 0.0
    values = numpy.zeros(grid.shape)

    for iteration in range(max_iter + 1):
        values[1:] = x.reshape(-1, grid.nq)
        residual, h_p = _residual(values, ops, params, profile, Q)
        if not float(h_p.min()) > 0.0:
            raise StagnationEncountered(f"corrector iterate has min h_p = {h_p.min()}")

        equations = numpy.concatenate(
            [
                residual[1:].ravel() + shift * phase,
                [float(phase @ (x - x_phase))],
                [float(tau_x @ (x - x_prev)) / size + (Q - Q_prev) * tau_Q - ds],
            ]
        )
        norm = float(numpy.abs(equations).max())
        _logger.debug("corrector iteration %d: residual %.3e", iteration, norm)
        if norm < tol:
            return x, Q
        if iteration == max_iter or not math.isfinite(norm):
            break

        operator = _linearization(values, ops, params, profile, Q)
        system = sparse.vstack(
            [
                sparse.hstack(
                    [
                        operator.matrix,
                        sparse.csr_matrix(operator.q_column[:, None]),
                        sparse.csr_matrix(phase[:, None]),
                    ]
                ),
                sparse.hstack([sparse.csr_matrix(phase[None, :]), sparse.csr_matrix((1, 2))]),
                sparse.csr_matrix(numpy.concatenate([tau_x / size, [tau_Q, 0.0]])[None, :]),
            ],
            format="csc",
        )
        delta = numpy.asarray(sparse_linalg.spsolve(system, -equations))
        if not numpy.all(numpy.isfinite(delta)):
            break

        x = x + delta[:size]
        Q += float(delta[size])
        shift += float(delta[size + 1])

    raise NoConvergence(f"corrector stopped with residual {norm:.3e}")


@_timed("continue_branch")
def continue_branch(
    seed_params: FluidParameters,
    profile: StratificationProfile,
    which: BifurcationRoot,
    steps: int,
    ds: float,
    nq: int = 64,
    np: int = 33,
    ds_min: float = 1e-6,
    tol: float = 1e-10,
    max_iter: int = 30,
) -> SolutionBranch:
    """
    Continues nontrivial solutions from the laminar flow at a bifurcation value.

    The unknowns are (h, Q). The first step follows the cos(kq) mode of the
    linearization; later predictors follow the secant. Each corrector solves
    the height equations with a translation constraint and the arclength
    condition in the norm sqrt(|h|^2/N + Q^2).

    Args:
        seed_params (FluidParameters): Base parameters; p0 and Q are set from the dispersion root.
        profile (StratificationProfile): The stratification.
        which (BifurcationRoot): The dispersion root of the seed.
        steps (int): Number of nontrivial solutions to compute.
        ds (float): Largest arclength step.
        nq (int, optional): Number of q samples. Defaults to 64.
        np (int, optional): Number of p samples. Defaults to 33.
        ds_min (float, optional): Smallest arclength step. Defaults to 1e-6.
        tol (float, optional): Newton tolerance. Defaults to 1e-10.
        max_iter (int, optional): Maximum corrector iterations. Defaults to 30.

    Raises:
        ValueError: If the wave number is not an integer or the seed is not admissible.
        NonMonotoneStream: If the laminar seed has a stagnation level.
        BranchTerminated: If the step falls below `ds_min` or h_p approaches 0,
            with the accepted part of the branch.

    Returns:
        SolutionBranch: The branch, the laminar state first.
    """
    if steps < 0:
        raise ValueError(f"steps must be >= 0, got {steps}")
    if not 0.0 < ds_min <= ds:
        raise ValueError(f"expected 0 < ds_min <= ds, got ds_min={ds_min}, ds={ds}")
    k = int(round(seed_params.k))
    if k != seed_params.k:
        raise ValueError(f"wave number must be an integer on a 2*pi period, got {seed_params.k}")

    params = bifurcation_parameters(params=seed_params, which=which)
    grid = make_grid(nq=nq, np=np, p0=params.p0)
    ops = grid_operators(grid)
    _logger.info(
        "Continuing from %s root: p0 = %.6f, Q = %.6f", which.value, params.p0, params.Q
    )

    laminar, _ = newton_solve(
        laminar_height_field(params=params, profile=profile, grid=grid),
        params,
        profile,
        tol=tol,
        max_iter=max_iter,
    )
    floor = _STAGNATION_FLOOR * params.depth / abs(params.p0)

    points = [
        BranchPoint(Q=params.Q, field=laminar, amplitude=laminar.amplitude, params=params)
    ]

    def branch() -> SolutionBranch:
        return SolutionBranch(
            which=which,
            params=params,
            grid=grid,
            tol=tol,
            ds=ds,
            ds_min=ds_min,
            points=tuple(points),
        )

    if steps == 0:
        return branch()

    mode = _kernel_mode(laminar, ops, params, profile, k)
    x_prev = laminar.values[1:].ravel().copy()
    Q_prev = params.Q
    tau_x = mode[1:].ravel()
    tau_Q = 0.0
    norm = _weighted_norm(tau_x, tau_Q)
    tau_x, tau_Q = tau_x / norm, tau_Q / norm

    phase = ops.apply(ops.q, mode)[1:].ravel()
    phase /= numpy.linalg.norm(phase)
    x_phase = x_prev.copy()

    step_size = ds
    while len(points) <= steps:
        try:
            x, Q = _correct(
                x=x_prev + step_size * tau_x,
                Q=Q_prev + step_size * tau_Q,
                x_prev=x_prev,
                Q_prev=Q_prev,
                tangent=(tau_x, tau_Q),
                ds=step_size,
                phase=phase,
                x_phase=x_phase,
                ops=ops,
                params=params,
                profile=profile,
                tol=tol,
                max_iter=max_iter,
            )
        except (NoConvergence, StagnationEncountered) as error:
            step_size /= 2.0
            _logger.warning("Step %d failed (%s), ds reduced to %.3e", len(points), error, step_size)
            if step_size < ds_min:
                raise BranchTerminated(
                    f"step {len(points)}: ds fell below {ds_min:.1e}",
                    branch=branch(),
                ) from error
            continue

        values = numpy.zeros(grid.shape)
        values[1:] = x.reshape(-1, grid.nq)
        field = HeightField(grid=grid, values=values)
        min_hp = float(ops.apply(ops.p, values).min())
        if min_hp < floor:
            raise BranchTerminated(
                f"step {len(points)}: min h_p = {min_hp:.3e} below the stagnation floor {floor:.3e}",
                branch=branch(),
            )

        points.append(
            BranchPoint(
                Q=Q,
                field=field,
                amplitude=field.amplitude,
                params=dataclasses.replace(params, Q=Q),
            )
        )
        _logger.info(
            "Step %d accepted: Q = %.10f, amplitude = %.6e, ds = %.3e",
            len(points) - 1,
            Q,
            field.amplitude,
            step_size,
        )

        secant_x, secant_Q = x - x_prev, Q - Q_prev
        norm = _weighted_norm(secant_x, secant_Q)
        tau_x, tau_Q = secant_x / norm, secant_Q / norm
        x_prev, Q_prev = x, Q
        step_size = min(ds, 2.0 * step_size)

    return branch()
