# MODULES
import dataclasses
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple, Union

# NUMPY
import numpy
import numpy.typing as npt

# SCIPY
import scipy.sparse as sparse
import scipy.sparse.linalg as sparse_linalg
from scipy.interpolate import CubicSpline, RectBivariateSpline

# CORE
from pystrat_wave._core import (
    FloatArray,
    FluidParameters,
    Grid2D,
    StreamSolution,
    make_sigma_grid,
)

# DECORATORS
from pystrat_wave._decorators import timed as _timed

# EXCEPTIONS
from pystrat_wave._exceptions import (
    NoConvergence,
    SingularMapping,
    StagnationOnSurface,
    SurfaceStagnation,
)

# FINITE DIFFERENCES
from pystrat_wave._finite_difference import grid_operators, spectral_derivative

_logger = logging.getLogger("pystrat_wave.stream")

_MIN_STEP = 2.0**-10
_SURFACE_MARGIN = 0.05
_PERIOD_PADDING = 3


@dataclass(frozen=True, eq=False)
class SurfaceShape:
    """
    Free surface samples on the periodic x-grid.

    Attributes:
        eta: eta(x) > 0, shape (nq,).
        mean: The mean surface height.
    """

    eta: FloatArray
    mean: float = field(init=False)

    def __post_init__(self) -> None:
        eta = numpy.array(self.eta, dtype=numpy.float64)
        if eta.ndim != 1:
            raise ValueError(f"eta must be one-dimensional, got shape {eta.shape}")
        if numpy.any(eta <= 0.0):
            raise SingularMapping(f"eta must be > 0, min is {eta.min()}")
        eta.setflags(write=False)
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "mean", float(eta.mean()))


@dataclass(frozen=True)
class StagnationPoint:
    """
    A critical point of psi inside the fluid.

    Attributes:
        x: Horizontal position in [-pi, pi).
        y: Height above the bed.
        residual: |grad psi| at the polished point.
        column: Index of the grid column the search started from.
        depth_below_trough: min(eta) - y.
    """

    x: float
    y: float
    residual: float
    column: int
    depth_below_trough: float


@dataclass(frozen=True, eq=False)
class PhysicalDerivatives:
    """
    Derivatives of psi with respect to the physical coordinates on the sigma grid.
    """

    psi_x: FloatArray
    psi_y: FloatArray
    psi_xx: FloatArray
    psi_xy: FloatArray
    psi_yy: FloatArray

    @property
    def gradient_norm(self) -> FloatArray:
        return numpy.asarray(numpy.hypot(self.psi_x, self.psi_y))


@dataclass(frozen=True)
class FreeBoundaryReport:
    """
    Outcome of a free-boundary solve.

    Attributes:
        iterations: Number of Gauss-Newton steps taken.
        residual: Infinity norm of the Bernoulli residual.
        converged: Whether the residual dropped below the tolerance.
        Q: The Bernoulli head of the returned solution.
        modes: Number of Fourier harmonics of the surface.
    """

    iterations: int
    residual: float
    converged: bool
    Q: float
    modes: int


@dataclass(frozen=True)
class SlopeReport:
    """
    Surface slope computed from eta and from the stream function.

    Attributes:
        from_surface: Derivative of the surface samples.
        from_stream: -psi_x/psi_y on the surface.
        max_discrepancy: Largest difference of the two.
        oddness_defect: max |eta_x(x) + eta_x(-x)|.
    """

    from_surface: FloatArray
    from_stream: FloatArray
    max_discrepancy: float
    oddness_defect: float


def _surface_array(eta: Union[SurfaceShape, npt.ArrayLike]) -> FloatArray:
    if isinstance(eta, SurfaceShape):
        return eta.eta
    return SurfaceShape(eta=numpy.asarray(eta, dtype=numpy.float64)).eta


def _mapping_coefficients(
    eta: FloatArray,
    grid: Grid2D,
) -> Tuple[FloatArray, FloatArray, FloatArray]:
    """
    a = -t eta'/eta, its X and t derivatives at fixed t.
    """
    t = numpy.asarray(grid.p_values)[:, None]
    eta_x = spectral_derivative(eta, order=1)[None, :]
    eta_xx = spectral_derivative(eta, order=2)[None, :]
    ratio = eta_x / eta[None, :]

    a = -t * ratio
    a_x = -t * eta_xx / eta[None, :] + t * ratio**2
    a_t = numpy.broadcast_to(-ratio, grid.shape)

    return a, a_x, numpy.asarray(a_t)


def solve_sigma_poisson(
    eta: Union[SurfaceShape, npt.ArrayLike],
    grid: Grid2D,
    source: npt.ArrayLike,
    bottom: float,
    top: float,
) -> FloatArray:
    """
    Solves Laplace(psi) = source under y = eta(x) t with Dirichlet values on t = 0 and t = 1.

    Args:
        eta (Union[SurfaceShape, ArrayLike]): The surface, eta > 0.
        grid (Grid2D): The sigma grid.
        source (ArrayLike): Source samples, shape (nt, nq).
        bottom (float): psi on the bed.
        top (float): psi on the surface.

    Raises:
        SingularMapping: If eta <= 0 somewhere.

    Returns:
        FloatArray: psi on the sigma grid, shape (nt, nq).
    """
    surface = _surface_array(eta)
    if surface.shape != (grid.nq,):
        raise ValueError(f"eta has shape {surface.shape}, grid expects ({grid.nq},)")

    ops = grid_operators(grid)
    a, a_x, a_t = _mapping_coefficients(surface, grid)
    stretch = 1.0 / surface[None, :] ** 2

    def diag(values: FloatArray) -> sparse.spmatrix:
        return sparse.diags(numpy.ravel(numpy.broadcast_to(values, grid.shape)))

    laplacian = (
        ops.qq
        + diag(2.0 * a) @ ops.qp
        + diag(a**2 + stretch) @ ops.pp
        + diag(a_x + a * a_t) @ ops.p
    )

    interior = numpy.zeros(grid.shape)
    interior[1:-1] = 1.0
    system = diag(interior) @ laplacian + diag(1.0 - interior)

    rhs = numpy.array(numpy.broadcast_to(source, grid.shape), dtype=numpy.float64)
    rhs[0] = bottom
    rhs[-1] = top

    solution = sparse_linalg.splu(sparse.csc_matrix(system)).solve(rhs.ravel())

    return numpy.asarray(solution).reshape(grid.shape)


def solve_dirichlet(
    eta: Union[SurfaceShape, npt.ArrayLike],
    params: FluidParameters,
    grid: Grid2D,
) -> FloatArray:
    """
    Solves Laplace(psi) = gamma - A g y below eta with psi = -p0 on the bed and 0 on the surface.

    Raises:
        SingularMapping: If eta <= 0 somewhere.
    """
    surface = _surface_array(eta)
    y = numpy.outer(grid.p_values, surface)

    return solve_sigma_poisson(
        eta=surface,
        grid=grid,
        source=params.gamma - params.A * params.g * y,
        bottom=-params.p0,
        top=0.0,
    )


def _derivatives(
    psi: FloatArray,
    eta: FloatArray,
    grid: Grid2D,
) -> PhysicalDerivatives:
    ops = grid_operators(grid)
    a, a_x, a_t = _mapping_coefficients(eta, grid)
    height = eta[None, :]

    psi_X = ops.apply(ops.q, psi)
    psi_XX = ops.apply(ops.qq, psi)
    psi_t = ops.apply(ops.p, psi)
    psi_tt = ops.apply(ops.pp, psi)
    psi_Xt = ops.apply(ops.qp, psi)

    return PhysicalDerivatives(
        psi_x=psi_X + a * psi_t,
        psi_y=psi_t / height,
        psi_xx=psi_XX + 2.0 * a * psi_Xt + a**2 * psi_tt + (a_x + a * a_t) * psi_t,
        psi_xy=(psi_Xt + a_t * psi_t + a * psi_tt) / height,
        psi_yy=psi_tt / height**2,
    )


def physical_derivatives(solution: StreamSolution) -> PhysicalDerivatives:
    """
    psi_x, psi_y, psi_xx, psi_xy and psi_yy at the nodes of the sigma grid.
    """
    return _derivatives(solution.psi, solution.eta, solution.grid)


def bernoulli_residual(
    psi: npt.ArrayLike,
    eta: Union[SurfaceShape, npt.ArrayLike],
    params: FluidParameters,
) -> FloatArray:
    """
    The surface residual psi_x^2 + psi_y^2 + 2 g B eta - Q.

    Args:
        psi (ArrayLike): psi on the sigma grid, shape (nt, nq).
        eta (Union[SurfaceShape, ArrayLike]): The surface.
        params (FluidParameters): The fluid parameters.

    Returns:
        FloatArray: The residual at each surface node.
    """
    surface = _surface_array(eta)
    psi_array = numpy.asarray(psi, dtype=numpy.float64)
    grid = make_sigma_grid(nq=surface.size, nt=psi_array.shape[0])
    derivatives = _derivatives(psi_array, surface, grid)

    return (
        derivatives.psi_x[-1] ** 2
        + derivatives.psi_y[-1] ** 2
        + 2.0 * params.g * params.B * surface
        - params.Q
    )


def _fourier_basis(nq: int, modes: int) -> FloatArray:
    x = -math.pi + numpy.arange(nq) * (2.0 * math.pi / nq)
    columns = [numpy.ones(nq)]
    columns += [numpy.cos(m * x) for m in range(1, modes + 1)]
    columns += [numpy.sin(m * x) for m in range(1, modes + 1)]
    return numpy.column_stack(columns)


@_timed("solve_free_boundary")
def solve_free_boundary(
    initial_eta: Union[SurfaceShape, npt.ArrayLike],
    params: FluidParameters,
    grid: Grid2D,
    tol: float = 1e-9,
    max_iter: int = 40,
    free_q: bool = False,
    workers: int = 1,
) -> Tuple[StreamSolution, FreeBoundaryReport]:
    """
    Solves the constant-Bernoulli free-boundary problem by Gauss-Newton on the surface.

    The surface is the truncated Fourier series with nq // 3 harmonics fitted
    to `initial_eta`. Jacobian columns are forward differences, each needing
    one Dirichlet solve. With `free_q` the first cosine coefficient is held
    fixed and Q is solved for instead.

    Args:
        initial_eta (Union[SurfaceShape, ArrayLike]): The initial surface, eta > 0.
        params (FluidParameters): The fluid parameters.
        grid (Grid2D): The sigma grid.
        tol (float, optional): Residual tolerance. Defaults to 1e-9.
        max_iter (int, optional): Maximum number of steps. Defaults to 40.
        free_q (bool, optional): Whether Q is an unknown. Defaults to False.
        workers (int, optional): Threads for the Jacobian columns. Defaults to 1.

    Raises:
        SingularMapping: If the initial surface is not positive.
        NoConvergence: If the tolerance is not reached, with the best solution.

    Returns:
        Tuple[StreamSolution, FreeBoundaryReport]: The solution and its report.
    """
    surface = _surface_array(initial_eta)
    if surface.shape != (grid.nq,):
        raise ValueError(f"eta has shape {surface.shape}, grid expects ({grid.nq},)")

    modes = grid.nq // 3
    basis = _fourier_basis(grid.nq, modes)
    coefficients = numpy.linalg.lstsq(basis, surface, rcond=None)[0]
    free = numpy.ones(coefficients.size, dtype=bool)
    if free_q:
        free[1] = False

    def unpack(z: FloatArray) -> Tuple[FloatArray, float]:
        full = numpy.array(coefficients)
        full[free] = z[: int(free.sum())]
        return full, float(z[-1]) if free_q else params.Q

    def evaluate(z: FloatArray) -> Tuple[FloatArray, FloatArray, FloatArray]:
        full, Q = unpack(z)
        eta = basis @ full
        psi = solve_dirichlet(eta, params, grid)
        residual = bernoulli_residual(psi, eta, dataclasses.replace(params, Q=Q))
        return residual, eta, psi

    z = numpy.array(coefficients[free])
    if free_q:
        z = numpy.append(z, params.Q)

    residual, eta, psi = evaluate(z)
    norm = float(numpy.abs(residual).max())
    best = (norm, z, eta, psi)
    iterations = 0

    def result(converged: bool) -> Tuple[StreamSolution, FreeBoundaryReport]:
        best_norm, best_z, best_eta, best_psi = best
        Q = unpack(best_z)[1]
        solution = StreamSolution(
            grid=grid,
            eta=best_eta,
            psi=best_psi,
            params=dataclasses.replace(params, Q=Q),
        )
        report = FreeBoundaryReport(
            iterations=iterations,
            residual=best_norm,
            converged=converged,
            Q=Q,
            modes=modes,
        )
        return solution, report

    def column(index: int) -> FloatArray:
        step = 1e-7 * max(1.0, abs(float(z[index])))
        shifted = numpy.array(z)
        shifted[index] += step
        return (evaluate(shifted)[0] - residual) / step

    while norm >= tol and iterations < max_iter:
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as executor:
                columns = list(executor.map(column, range(z.size)))
        else:
            columns = [column(index) for index in range(z.size)]
        jacobian = numpy.column_stack(columns)
        step = numpy.linalg.lstsq(jacobian, -residual, rcond=None)[0]

        alpha = 1.0
        accepted = False
        while alpha >= _MIN_STEP:
            trial = z + alpha * step
            try:
                trial_residual, trial_eta, trial_psi = evaluate(trial)
            except SingularMapping:
                alpha *= 0.5
                continue
            trial_norm = float(numpy.abs(trial_residual).max())
            if trial_norm < norm:
                accepted = True
                break
            alpha *= 0.5

        iterations += 1
        if not accepted:
            break

        z, residual, norm = trial, trial_residual, trial_norm
        best = (norm, z, trial_eta, trial_psi)
        _logger.debug(
            "Free-boundary iteration %d: residual %.3e, step %.3e",
            iterations,
            norm,
            alpha,
        )

    if norm >= tol:
        solution, report = result(converged=False)
        raise NoConvergence(
            f"Bernoulli residual {norm:.3e} after {iterations} iterations, tolerance {tol:.1e}",
            best=solution,
            report=report,
        )

    _logger.info("Free boundary converged in %d iterations, residual %.3e", iterations, norm)

    return result(converged=True)


def _periodic_interpolants(
    solution: StreamSolution,
) -> Tuple[RectBivariateSpline, CubicSpline]:
    grid = solution.grid
    x = numpy.asarray(grid.q_values)
    pad = _PERIOD_PADDING
    period = 2.0 * math.pi

    x_extended = numpy.concatenate([x[-pad:] - period, x, x[:pad] + period])
    psi_extended = numpy.concatenate(
        [solution.psi[:, -pad:], solution.psi, solution.psi[:, :pad]],
        axis=1,
    )
    psi_spline = RectBivariateSpline(grid.p_values, x_extended, psi_extended, kx=3, ky=3)
    eta_spline = CubicSpline(
        numpy.append(x, x[0] + period),
        numpy.append(solution.eta, solution.eta[0]),
        bc_type="periodic",
    )

    return psi_spline, eta_spline


def _wrap(x: float) -> float:
    return (x + math.pi) % (2.0 * math.pi) - math.pi


def _gradient_function(
    solution: StreamSolution,
) -> Callable[[float, float], FloatArray]:
    psi_spline, eta_spline = _periodic_interpolants(solution)

    def gradient(x: float, y: float) -> FloatArray:
        xw = _wrap(x)
        eta = float(eta_spline(xw))
        eta_x = float(eta_spline(xw, 1))
        t = y / eta
        s_x = float(psi_spline(t, xw, dy=1)[0, 0])
        s_t = float(psi_spline(t, xw, dx=1)[0, 0])
        return numpy.array([s_x - t * eta_x / eta * s_t, s_t / eta])

    return gradient


def _polish(
    gradient: Callable[[float, float], FloatArray],
    x: float,
    y: float,
    scale: float,
    max_iter: int = 50,
) -> Tuple[float, float, float]:
    for _ in range(max_iter):
        value = gradient(x, y)
        if float(numpy.linalg.norm(value)) < 1e-14 * scale:
            break
        hx = 1e-6
        hy = 1e-6 * max(1.0, abs(y))
        jacobian = numpy.column_stack(
            [
                (gradient(x + hx, y) - gradient(x - hx, y)) / (2.0 * hx),
                (gradient(x, y + hy) - gradient(x, y - hy)) / (2.0 * hy),
            ]
        )
        step = -numpy.linalg.pinv(jacobian, rcond=1e-8) @ value
        x, y = x + float(step[0]), y + float(step[1])
        if not (math.isfinite(x) and math.isfinite(y)):
            break

    return _wrap(x), y, float(numpy.linalg.norm(gradient(x, y)))


@_timed("locate_stagnation_points")
def locate_stagnation_points(
    solution: StreamSolution,
    candidate_ratio: float = 0.1,
    gradient_tol: float = 1e-9,
) -> List[StagnationPoint]:
    """
    Locates interior points where grad psi vanishes.

    Candidates are cells where psi_y changes sign along a column and psi_x is
    small or changes sign across the neighbouring columns. Each candidate is
    polished by Newton's method on a periodic spline of psi.

    Args:
        solution (StreamSolution): The converged solution.
        candidate_ratio (float, optional): |psi_x| below this fraction of max|grad psi| marks a candidate. Defaults to 0.1.
        gradient_tol (float, optional): Accepted |grad psi| relative to max|grad psi|. Defaults to 1e-9.

    Raises:
        StagnationOnSurface: If a point lies above the trough line or in the top 5% of its column.

    Returns:
        List[StagnationPoint]: The points, sorted by (x, y).
    """
    derivatives = physical_derivatives(solution)
    scale = float(derivatives.gradient_norm.max())
    psi_x, psi_y = derivatives.psi_x, derivatives.psi_y
    y_nodes = solution.y_values
    nq = solution.grid.nq

    gradient = _gradient_function(solution)
    trough = float(solution.eta.min())
    points: List[StagnationPoint] = []

    for j in range(nq):
        crossings = numpy.flatnonzero(numpy.sign(psi_y[:-1, j]) * numpy.sign(psi_y[1:, j]) <= 0)
        for i in crossings:
            if psi_y[i, j] == psi_y[i + 1, j]:
                continue
            small = min(abs(psi_x[i, j]), abs(psi_x[i + 1, j])) <= candidate_ratio * scale
            left, right = psi_x[i, (j - 1) % nq], psi_x[i, (j + 1) % nq]
            if not small and left * right > 0:
                continue

            weight = psi_y[i, j] / (psi_y[i, j] - psi_y[i + 1, j])
            y_start = y_nodes[i, j] + weight * (y_nodes[i + 1, j] - y_nodes[i, j])
            x, y, residual = _polish(gradient, float(solution.x_values[j]), float(y_start), scale)
            if not residual < gradient_tol * scale or not 0.0 < y:
                continue
            if any(abs(x - point.x) < 1e-7 and abs(y - point.y) < 1e-7 for point in points):
                continue

            points.append(
                StagnationPoint(
                    x=x,
                    y=y,
                    residual=residual,
                    column=j,
                    depth_below_trough=trough - y,
                )
            )

    _, eta_spline = _periodic_interpolants(solution)
    for point in points:
        local_height = float(eta_spline(point.x))
        if point.y >= trough or point.y > (1.0 - _SURFACE_MARGIN) * local_height:
            raise StagnationOnSurface(
                f"stagnation point ({point.x:.6f}, {point.y:.6f}) is not below the trough line {trough:.6f}"
            )

    _logger.info("Located %d stagnation points", len(points))

    return sorted(points, key=lambda point: (point.x, point.y))


def surface_slope_check(
    solution: StreamSolution,
    threshold: float = 1e-8,
) -> SlopeReport:
    """
    Compares eta_x with -psi_x/psi_y on the surface and measures its oddness.

    eta_x is differentiated spectrally, the same x-derivative that
    `physical_derivatives` applies to psi, so the discrepancy measures the
    solution and not a mismatch of stencils. It is exact for band-limited
    surfaces.

    Args:
        solution (StreamSolution): The converged solution.
        threshold (float, optional): Smallest accepted |psi_y| on the surface relative to max|grad psi|. Defaults to 1e-8.

    Raises:
        SurfaceStagnation: If |psi_y| on the surface is below the threshold.

    Returns:
        SlopeReport: The two slopes and their defects.
    """
    derivatives = physical_derivatives(solution)
    scale = float(derivatives.gradient_norm.max())
    surface_psi_y = derivatives.psi_y[-1]
    if float(numpy.abs(surface_psi_y).min()) < threshold * max(scale, 1.0):
        raise SurfaceStagnation(
            f"|psi_y| = {numpy.abs(surface_psi_y).min():.3e} on the surface"
        )

    from_surface = spectral_derivative(solution.eta, order=1)
    from_stream = -derivatives.psi_x[-1] / surface_psi_y
    reflected = (-numpy.arange(solution.grid.nq)) % solution.grid.nq

    return SlopeReport(
        from_surface=from_surface,
        from_stream=from_stream,
        max_discrepancy=float(numpy.abs(from_surface - from_stream).max()),
        oddness_defect=float(numpy.abs(from_surface + from_surface[reflected]).max()),
    )


def laminar_stream_solution(
    params: FluidParameters,
    grid: Grid2D,
    height: Optional[float] = None,
) -> StreamSolution:
    """
    The flat-surface solution of height `height` (defaults to params.depth).
    """
    level = params.depth if height is None else height
    eta = numpy.full(grid.nq, level)

    return StreamSolution(
        grid=grid,
        eta=eta,
        psi=solve_dirichlet(eta, params, grid),
        params=params,
    )
