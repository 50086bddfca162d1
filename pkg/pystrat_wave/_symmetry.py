# MODULES
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple, Union, overload

# NUMPY
import numpy
import numpy.typing as npt

# SCIPY
from scipy.interpolate import CubicSpline

# CONSTANTS
from pystrat_wave._constants.enum import ReflectionCase

# CORE
from pystrat_wave._core import FloatArray, Grid2D, HeightField, StreamSolution

# DECORATORS
from pystrat_wave._decorators import timed as _timed

# EXCEPTIONS
from pystrat_wave._exceptions import SurfaceStagnation, TroughNotAligned

# FINITE DIFFERENCES
from pystrat_wave._finite_difference import spectral_derivative

# STREAM SOLVER
from pystrat_wave._stream_solver import PhysicalDerivatives, physical_derivatives

_logger = logging.getLogger("pystrat_wave.symmetry")

_HALF_GRID_TOLERANCE = 1e-9
_ERROR_FLOOR = 1e-11


@dataclass(frozen=True)
class ReflectionReport:
    """
    Outcome of a moving-plane sweep.

    Attributes:
        lambda0: The extremal position farthest from 0.
        lambda0_left: Extremal position of the sweep from q = -pi.
        lambda0_right: Extremal position of the sweep from q = pi.
        case_tag: ReachedZero, InteriorTouching or Indeterminate.
        min_w: Minimum of the reflection function, at the blocking position if a sweep stopped.
        touching_point: (q, surface value) where w vanishes on the surface at lambda0, if any.
        asymmetry_norm: Infinity norm of the field minus its reflection about 0.
        sweep_step: Spacing of the candidate positions.
    """

    lambda0: float
    lambda0_left: float
    lambda0_right: float
    case_tag: ReflectionCase
    min_w: float
    touching_point: Optional[Tuple[float, float]]
    asymmetry_norm: float
    sweep_step: float

    def as_dict(self) -> Dict[str, Union[str, float]]:
        data: Dict[str, Union[str, float]] = {
            "lambda0": self.lambda0,
            "lambda0_left": self.lambda0_left,
            "lambda0_right": self.lambda0_right,
            "case_tag": self.case_tag.value,
            "min_w": self.min_w,
            "asymmetry_norm": self.asymmetry_norm,
            "sweep_step": self.sweep_step,
        }
        if self.touching_point is not None:
            data["touching_q"] = self.touching_point[0]
            data["touching_value"] = self.touching_point[1]
        return data


@dataclass(frozen=True)
class EdgeEntry:
    value: float
    error: float

    def violated(self, factor: float) -> bool:
        return abs(self.value) > factor * self.error


@dataclass(frozen=True)
class EdgePointTable:
    """
    Derivatives of the reflection function m at the trough point, with error estimates.

    The errors are Richardson estimates from the solution restricted to every
    other node, floored at a small multiple of max |grad psi|. The chain entries
    eta_x, psi_x and psi_xy are the surface quantities whose vanishing makes the
    table vanish.
    """

    m: EdgeEntry
    m_x: EdgeEntry
    m_y: EdgeEntry
    m_xx: EdgeEntry
    m_xy: EdgeEntry
    m_yy: EdgeEntry
    eta_x: EdgeEntry
    psi_x: EdgeEntry
    psi_xy: EdgeEntry
    orientation: int
    violations: Tuple[str, ...]

    @property
    def passed(self) -> bool:
        return not self.violations

    def entries(self) -> Dict[str, EdgeEntry]:
        return {
            "m": self.m,
            "m_x": self.m_x,
            "m_y": self.m_y,
            "m_xx": self.m_xx,
            "m_xy": self.m_xy,
            "m_yy": self.m_yy,
            "eta_x": self.eta_x,
            "psi_x": self.psi_x,
            "psi_xy": self.psi_xy,
        }

    def as_dict(self) -> Dict[str, Union[str, int, float]]:
        data: Dict[str, Union[str, int, float]] = {}
        for name, entry in self.entries().items():
            data[f"edge_{name}"] = entry.value
            data[f"edge_{name}_error"] = entry.error
        data["edge_orientation"] = self.orientation
        data["edge_violations"] = ",".join(self.violations) if self.violations else "none"
        return data


@dataclass(frozen=True)
class MonotonicityReport:
    """
    Monotonicity of the streamlines between trough and crest.

    Attributes:
        monotone: Every row rises from the trough to its crest and falls after.
        strict_near_trough: Every row above the bed strictly rises over the two cells on each side of the trough.
        violation: (row, column) of the first failure of the monotone check.
        strict_violation: (row, column) of the first failure of the strict check.
    """

    monotone: bool
    strict_near_trough: bool
    violation: Optional[Tuple[int, int]] = None
    strict_violation: Optional[Tuple[int, int]] = None

    @property
    def hypothesis_met(self) -> bool:
        return self.monotone and self.strict_near_trough

    def as_dict(self) -> Dict[str, Union[str, bool]]:
        def location(value: Optional[Tuple[int, int]]) -> str:
            return "none" if value is None else f"{value[0]},{value[1]}"

        return {
            "monotone": self.monotone,
            "strict_near_trough": self.strict_near_trough,
            "hypothesis_met": self.hypothesis_met,
            "monotone_violation": location(self.violation),
            "strict_violation": location(self.strict_violation),
        }


def _half_grid_index(grid: Grid2D, lambda_: float) -> int:
    position = (lambda_ + math.pi) / (0.5 * grid.dq)
    index = int(round(position))
    if abs(position - index) > _HALF_GRID_TOLERANCE * max(1.0, abs(position)):
        raise ValueError(f"lambda = {lambda_} is not a multiple of dq/2 from -pi")
    return index


def _half_grid_value(grid: Grid2D, index: int) -> float:
    return -math.pi + 0.5 * index * grid.dq


def _reflected_columns(nq: int, index: int) -> npt.NDArray[numpy.int64]:
    return (index - numpy.arange(nq)) % nq


def _reflect(values: FloatArray, index: int) -> FloatArray:
    return values - values[:, _reflected_columns(values.shape[1], index)]


def _left_domain(index: int) -> npt.NDArray[numpy.int64]:
    # q in [lambda, 2 lambda + pi]
    return numpy.arange((index + 1) // 2, index + 1)


def _right_domain(nq: int, index: int) -> npt.NDArray[numpy.int64]:
    # q in [2 lambda - pi, lambda]
    return numpy.arange(index - nq, index // 2 + 1)


@overload
def align_phase(field: HeightField) -> HeightField:
    ...


@overload
def align_phase(field: StreamSolution) -> StreamSolution:
    ...


def align_phase(field: Union[HeightField, StreamSolution]) -> Union[HeightField, StreamSolution]:
    """
    Rotates the field so the first minimum of the surface sits at q = -pi.
    """
    if isinstance(field, HeightField):
        return field.shifted(-int(numpy.argmin(field.surface)))

    cells = -int(numpy.argmin(field.eta))
    return StreamSolution(
        grid=field.grid,
        eta=numpy.roll(field.eta, cells),
        psi=numpy.roll(field.psi, cells, axis=1),
        params=field.params,
    )


def _check_aligned(surface: FloatArray) -> None:
    trough = int(numpy.argmin(surface))
    if surface[trough] < surface[0]:
        raise TroughNotAligned(
            f"surface minimum {surface[trough]:.6e} at column {trough} is below the value at q = -pi"
        )


def reflect_height(h: HeightField, lambda_: float) -> FloatArray:
    """
    The reflection function w(q, p; lambda) = h(q, p) - h(2 lambda - q, p).

    Values are returned on the whole period; the reflected index is taken
    periodically, which is the extension h(2 lambda + 2 pi - q, p) beyond the
    fold. Use the sweep domains to restrict it.

    Args:
        h (HeightField): The height field.
        lambda_ (float): The reflection position, a multiple of dq/2 from -pi.

    Raises:
        ValueError: If lambda is not on the half grid.

    Returns:
        FloatArray: w, shape (np, nq).
    """
    return _reflect(h.values, _half_grid_index(h.grid, lambda_))


def asymmetry_norm(field: Union[HeightField, StreamSolution, npt.ArrayLike]) -> float:
    """
    Infinity norm of the field minus its reflection q -> -q.

    For a stream solution both eta and psi are compared.
    """
    if isinstance(field, HeightField):
        values = field.values
    elif isinstance(field, StreamSolution):
        return max(
            float(numpy.abs(_reflect(field.eta[None, :], 0)).max()),
            float(numpy.abs(_reflect(field.psi, 0)).max()),
        )
    else:
        values = numpy.atleast_2d(numpy.asarray(field, dtype=numpy.float64))

    # q_j reflects to q_{(nq - j) % nq}, the half-grid position 0 from -pi
    return float(numpy.abs(_reflect(values, 0)).max())


def _domain_minimum(values: FloatArray, index: int, left: bool) -> float:
    nq = values.shape[1]
    columns = _left_domain(index) if left else _right_domain(nq, index)
    return float(_reflect(values, index)[:, columns % nq].min())


def _sweep(
    values: FloatArray,
    tol: float,
    left: bool,
    workers: int,
) -> Tuple[int, float, float]:
    """
    Moves the plane from the trough towards 0 and stops at the first position where min w < -tol.

    Returns the last admissible index, the minimum there and the minimum at the
    blocking index (the final minimum when the sweep reaches 0).
    """
    nq = values.shape[1]
    candidates = list(range(1, nq + 1)) if left else list(range(2 * nq - 1, nq - 1, -1))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            minima = list(executor.map(lambda index: _domain_minimum(values, index, left), candidates))
    else:
        minima = [_domain_minimum(values, index, left) for index in candidates]

    last = 0 if left else 2 * nq
    last_minimum = 0.0
    for index, minimum in zip(candidates, minima):
        if minimum < -tol:
            return last, last_minimum, minimum
        last, last_minimum = index, minimum

    return last, last_minimum, last_minimum


def _touching_point(
    values: FloatArray,
    grid: Grid2D,
    index: int,
    left: bool,
    tol: float,
) -> Tuple[Optional[Tuple[float, float]], Optional[float]]:
    """
    A surface column of the domain, off the plane, where w and w_q vanish within tol.

    Returns the point and w_qq there.
    """
    nq = grid.nq
    surface = _reflect(values, index)[-1]
    columns = _left_domain(index) if left else _right_domain(nq, index)
    plane = index / 2.0

    best: Optional[int] = None
    for column in columns:
        if column == plane:
            continue
        j = int(column) % nq
        w_q = (surface[(j + 1) % nq] - surface[(j - 1) % nq]) / (2.0 * grid.dq)
        if abs(surface[j]) <= tol and abs(w_q) <= math.sqrt(tol):
            if best is None or abs(surface[j]) < abs(surface[best]):
                best = j

    if best is None:
        return None, None

    w_qq = (surface[(best + 1) % nq] - 2.0 * surface[best] + surface[(best - 1) % nq]) / grid.dq**2

    return (float(grid.q_values[best]), float(values[-1, best])), float(w_qq)


def _sweep_report(
    values: FloatArray,
    grid: Grid2D,
    tol: float,
    workers: int,
) -> ReflectionReport:
    nq = grid.nq
    left_index, left_minimum, left_block = _sweep(values, tol, left=True, workers=workers)
    right_index, right_minimum, right_block = _sweep(values, tol, left=False, workers=workers)
    lambda_left = _half_grid_value(grid, left_index)
    lambda_right = _half_grid_value(grid, right_index)

    if left_index == nq and right_index == nq:
        case_tag = ReflectionCase.REACHED_ZERO
        touching = None
        lambda0 = 0.0
        min_w = min(left_minimum, right_minimum)
    else:
        use_left = abs(lambda_left) >= abs(lambda_right)
        index = left_index if use_left else right_index
        lambda0 = lambda_left if use_left else lambda_right
        min_w = min(left_block, right_block)
        touching, w_qq = _touching_point(values, grid, index, use_left, tol)
        if touching is not None and w_qq is not None and w_qq > tol:
            case_tag = ReflectionCase.INTERIOR_TOUCHING
        else:
            case_tag = ReflectionCase.INDETERMINATE

    return ReflectionReport(
        lambda0=lambda0,
        lambda0_left=lambda_left,
        lambda0_right=lambda_right,
        case_tag=case_tag,
        min_w=min_w,
        touching_point=touching,
        asymmetry_norm=float(numpy.abs(_reflect(values, 0)).max()),
        sweep_step=0.5 * grid.dq,
    )


@_timed("moving_plane_sweep_height")
def moving_plane_sweep_height(
    h: HeightField,
    tol: float = 1e-9,
    align: bool = True,
    workers: int = 1,
) -> ReflectionReport:
    """
    Moving-plane sweeps of the height field from both troughs towards q = 0.

    The left sweep takes the largest lambda in (-pi, 0] with w >= -tol on
    [lambda, 2 lambda + pi]; the right sweep takes the smallest lambda in
    [0, pi) with w >= -tol on [2 lambda - pi, lambda]. Candidates are the
    half-grid positions so every reflection is exact.

    Args:
        h (HeightField): The height field.
        tol (float, optional): Tolerance of the sign test. Defaults to 1e-9.
        align (bool, optional): Whether to rotate the trough to q = -pi first. Defaults to True.
        workers (int, optional): Threads evaluating the candidates. Defaults to 1.

    Raises:
        TroughNotAligned: If `align` is False and the surface minimum is not at q = -pi.

    Returns:
        ReflectionReport: The report.
    """
    field = align_phase(h) if align else h
    _check_aligned(field.surface)

    report = _sweep_report(field.values, field.grid, tol, workers)
    _logger.info(
        "Height sweep: %s, lambda0 = %.6f, min w = %.3e",
        report.case_tag.value,
        report.lambda0,
        report.min_w,
    )
    return report


@_timed("moving_plane_sweep_stream")
def moving_plane_sweep_stream(
    solution: StreamSolution,
    tol: float = 1e-9,
    align: bool = True,
    workers: int = 1,
) -> ReflectionReport:
    """
    Moving-plane sweep of the fluid domain: the reflected domain must stay inside the fluid.

    On the grid this is the sign test on eta(x) - eta(2 lambda - x). The
    touching point, if any, is where the reflected surface meets the surface.
    """
    field = align_phase(solution) if align else solution
    _check_aligned(field.eta)

    report = _sweep_report(field.eta[None, :], field.grid, tol, workers)
    _logger.info(
        "Domain sweep: %s, lambda0 = %.6f, min difference = %.3e",
        report.case_tag.value,
        report.lambda0,
        report.min_w,
    )
    return report


def _surface_orientation(derivatives: PhysicalDerivatives) -> int:
    surface = derivatives.psi_y[-1]
    if numpy.all(surface > 0.0):
        return 1
    if numpy.all(surface < 0.0):
        return -1
    raise SurfaceStagnation("psi_y changes sign on the surface")


def reflect_stream(solution: StreamSolution, lambda0: float) -> FloatArray:
    """
    The reflection function m of the stream function about x = lambda0.

    For lambda0 = 0, m = psi(x, y) - psi(-x, y) on -pi < x < 0. Otherwise
    m = psi(2 lambda0 - x, y) - psi(x, y) on lambda0 < x <= lambda0 + pi, the
    mirror taken periodically. Both flip sign when psi_y < 0 on the surface.

    Args:
        solution (StreamSolution): The solution.
        lambda0 (float): The reflection position, a multiple of dx/2 from -pi.

    Raises:
        ValueError: If lambda0 is not on the half grid.
        SurfaceStagnation: If psi_y changes sign on the surface.

    Returns:
        FloatArray: m at the nodes, shape (nt, nq), NaN outside the domain or where the mirror lies above the surface.
    """
    grid = solution.grid
    nq = grid.nq
    index = _half_grid_index(grid, lambda0)
    orientation = _surface_orientation(physical_derivatives(solution))
    mirror = _reflected_columns(nq, index)
    t = numpy.asarray(grid.p_values)
    y = solution.y_values

    if index == nq:
        columns = numpy.arange(1, nq // 2)
        sign = orientation
    else:
        lower = index / 2.0
        columns = numpy.array(
            [j % nq for j in range(int(math.floor(lower)) + 1, int(math.floor(lower)) + nq // 2 + 1)]
        )
        sign = -orientation

    m = numpy.full(grid.shape, numpy.nan)
    for j in columns:
        k = int(mirror[j])
        spline = CubicSpline(t, solution.psi[:, k])
        t_mirror = y[:, j] / solution.eta[k]
        inside = t_mirror <= 1.0 + 1e-12
        values = solution.psi[:, j] - spline(numpy.minimum(t_mirror, 1.0))
        m[inside, j] = sign * values[inside]

    return m


def _forward_first(values: FloatArray, step: float) -> float:
    return float((-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * step))


def _forward_second(values: FloatArray, step: float) -> float:
    return float((2.0 * values[0] - 5.0 * values[1] + 4.0 * values[2] - values[3]) / step**2)


def _trough_m_samples(solution: StreamSolution, orientation: int, levels: FloatArray) -> FloatArray:
    # m = psi(x, y) - psi(-x, y) on columns 0..3 at the heights `levels`, shape (levels, 4)
    grid = solution.grid
    t = numpy.asarray(grid.p_values)
    mirror = _reflected_columns(grid.nq, grid.nq)
    samples = numpy.empty((levels.size, 4))
    for j in range(4):
        k = int(mirror[j])
        own = CubicSpline(t, solution.psi[:, j])
        other = CubicSpline(t, solution.psi[:, k])
        samples[:, j] = own(levels / solution.eta[j]) - other(levels / solution.eta[k])
    return orientation * samples


def _edge_values(solution: StreamSolution) -> Dict[str, float]:
    derivatives = physical_derivatives(solution)
    orientation = _surface_orientation(derivatives)
    eta_x = spectral_derivative(solution.eta, order=1)

    t = numpy.asarray(solution.grid.p_values)
    dx = 2.0 * math.pi / solution.grid.nq
    dy = float(solution.eta[0] * (t[-1] - t[-2]))
    levels = solution.eta[0] - dy * numpy.arange(4)
    samples = _trough_m_samples(solution, orientation, levels)

    psi_x = float(derivatives.psi_x[-1, 0])
    psi_xy = float(derivatives.psi_xy[-1, 0])

    return {
        "m": float(samples[0, 0]),
        "m_x": orientation * 2.0 * psi_x,
        "m_y": -_forward_first(samples[:, 0], dy),
        "m_xx": _forward_second(samples[0], dx),
        "m_xy": orientation * 2.0 * psi_xy,
        "m_yy": _forward_second(samples[:, 0], dy),
        "eta_x": float(eta_x[0]),
        "psi_x": psi_x,
        "psi_xy": psi_xy,
        "orientation": float(orientation),
        "scale": float(derivatives.gradient_norm.max()),
        "psi_y": float(derivatives.psi_y[-1, 0]),
    }


def _coarsened(solution: StreamSolution) -> Optional[StreamSolution]:
    try:
        grid = solution.grid.coarsened()
    except ValueError:
        return None
    return StreamSolution(
        grid=grid,
        eta=solution.eta[::2],
        psi=solution.psi[::2, ::2],
        params=solution.params,
    )


@_timed("serrin_edge_check")
def serrin_edge_check(
    solution: StreamSolution,
    align: bool = True,
    threshold: float = 1e-8,
    factor: float = 10.0,
) -> EdgePointTable:
    """
    Derivatives of m = psi(x, y) - psi(-x, y) up to order two at the trough point (-pi, eta(-pi)).

    m, m_y, m_xx and m_yy come from one-sided second-order stencils on m
    sampled at the trough column and the three columns after it, at the
    surface height and the three levels below. m_x and m_xy equal twice psi_x
    and psi_xy there. Error estimates compare against the grid coarsened by
    two. An entry is a violation when it exceeds `factor` times its error
    estimate.

    Args:
        solution (StreamSolution): The solution.
        align (bool, optional): Whether to rotate the trough to x = -pi first. Defaults to True.
        threshold (float, optional): Smallest accepted |psi_y| at the trough relative to max|grad psi|. Defaults to 1e-8.
        factor (float, optional): Violation factor. Defaults to 10.0.

    Raises:
        TroughNotAligned: If `align` is False and the surface minimum is not at x = -pi.
        SurfaceStagnation: If psi_y nearly vanishes at the trough.

    Returns:
        EdgePointTable: The table.
    """
    field = align_phase(solution) if align else solution
    _check_aligned(field.eta)

    fine = _edge_values(field)
    if abs(fine["psi_y"]) < threshold * max(fine["scale"], 1.0):
        raise SurfaceStagnation(f"|psi_y| = {abs(fine['psi_y']):.3e} at the trough")

    coarse_solution = _coarsened(field)
    coarse = _edge_values(coarse_solution) if coarse_solution is not None else None
    floor = _ERROR_FLOOR * max(1.0, fine["scale"])

    entries: Dict[str, EdgeEntry] = {}
    for name in ("m", "m_x", "m_y", "m_xx", "m_xy", "m_yy", "eta_x", "psi_x", "psi_xy"):
        estimate = abs(fine[name] - coarse[name]) / 3.0 if coarse is not None else 0.0
        entries[name] = EdgeEntry(value=fine[name], error=max(estimate, floor))

    violations = tuple(name for name, entry in entries.items() if entry.violated(factor))
    if violations:
        _logger.warning("Edge-point table violations at the trough: %s", ", ".join(violations))

    return EdgePointTable(
        m=entries["m"],
        m_x=entries["m_x"],
        m_y=entries["m_y"],
        m_xx=entries["m_xx"],
        m_xy=entries["m_xy"],
        m_yy=entries["m_yy"],
        eta_x=entries["eta_x"],
        psi_x=entries["psi_x"],
        psi_xy=entries["psi_xy"],
        orientation=int(fine["orientation"]),
        violations=violations,
    )


def check_monotone_streamlines(h: HeightField, tol: float = 0.0) -> MonotonicityReport:
    """
    Checks that each streamline rises from the trough to its crest and falls after.

    Rows above the bed must also rise strictly over the two cells on each side
    of q = -pi. The field is expected to be phase aligned. Failing the strict
    check is reported, not raised.

    Args:
        h (HeightField): The height field.
        tol (float, optional): Allowed decrease in the monotone check. Defaults to 0.0.

    Returns:
        MonotonicityReport: The report.
    """
    values = h.values
    nq = h.grid.nq

    violation: Optional[Tuple[int, int]] = None
    for i, row in enumerate(values):
        crest = int(numpy.argmax(row))
        increments = numpy.diff(numpy.append(row, row[0]))
        rising = increments[:crest]
        falling = increments[crest:]
        bad_rise = numpy.flatnonzero(rising < -tol)
        bad_fall = numpy.flatnonzero(falling > tol)
        if bad_rise.size:
            violation = (i, int(bad_rise[0]) + 1)
            break
        if bad_fall.size:
            violation = (i, (crest + int(bad_fall[0]) + 1) % nq)
            break

    strict_violation: Optional[Tuple[int, int]] = None
    for i in range(1, values.shape[0]):
        row = values[i]
        checks: List[Tuple[int, bool]] = [
            (1, row[1] > row[0]),
            (2, row[2] > row[1]),
            (nq - 1, row[nq - 1] > row[0]),
            (nq - 2, row[nq - 2] > row[nq - 1]),
        ]
        failed = [column for column, ok in checks if not ok]
        if failed:
            strict_violation = (i, failed[0])
            break

    report = MonotonicityReport(
        monotone=violation is None,
        strict_near_trough=strict_violation is None,
        violation=violation,
        strict_violation=strict_violation,
    )
    if not report.hypothesis_met:
        _logger.warning(
            "Streamline monotonicity hypothesis not met: monotone=%s, strict near trough=%s",
            report.monotone,
            report.strict_near_trough,
        )
    return report
