# MODULES
import dataclasses
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

# NUMPY
import numpy
import numpy.typing as npt

# SCIPY
import scipy.sparse as sparse
import scipy.sparse.linalg as sparse_linalg
from scipy.integrate import cumulative_trapezoid, solve_bvp, trapezoid
from scipy.optimize import brentq

# CORE
from pystrat_wave._core import (
    FloatArray,
    FluidParameters,
    Grid2D,
    HeightField,
    PhysicalFields,
    StratificationProfile,
)

# DECORATORS
from pystrat_wave._decorators import (
    check_bottom_condition as _check_bottom_condition,
    timed as _timed,
)

# EXCEPTIONS
from pystrat_wave._exceptions import (
    NoConvergence,
    NonMonotoneStream,
    StagnationEncountered,
)

# FINITE DIFFERENCES
from pystrat_wave._finite_difference import (
    GridOperators,
    SparseMatrix,
    grid_operators,
)

# LAMINAR
from pystrat_wave._laminar import LaminarFlow, laminar_psi

_logger = logging.getLogger("pystrat_wave.height")

_MIN_STEP = 2.0**-10
_PHASE_THRESHOLD = 1e-9

IndexArray = npt.NDArray[numpy.intp]


@dataclass(frozen=True, eq=False)
class DiscreteOperator:
    """
    Linearization of the height equations at a field.

    The interior equation linearizes to
    a_pp*w_pp + a_qp*w_qp + a_qq*w_qq + b_p*w_p + b_q*w_q + c*w.

    Attributes:
        grid: The grid of the field.
        matrix: Jacobian of the interior and surface rows with respect to the
            unknowns h(q, p), p > p0, in row-major order.
        a_pp, a_qq, a_qp, b_q, b_p, c: Coefficient fields of shape (np, nq).
        interior_operator: The interior linear operator on the whole closed grid;
            only rows 1..np-2 are interior equations.
        q_column: Derivative of the equations with respect to Q.
    """

    grid: Grid2D
    matrix: SparseMatrix
    a_pp: FloatArray
    a_qq: FloatArray
    a_qp: FloatArray
    b_q: FloatArray
    b_p: FloatArray
    c: FloatArray
    interior_operator: SparseMatrix
    q_column: FloatArray

    @property
    def interior_rows(self) -> IndexArray:
        """
        Flat indices of the interior nodes of the closed grid.
        """
        nq = self.grid.nq
        return numpy.arange(nq, (self.grid.np - 1) * nq)

    @property
    def boundary_rows(self) -> IndexArray:
        nq = self.grid.nq
        size = self.grid.np * nq
        return numpy.concatenate(
            [numpy.arange(0, nq), numpy.arange(size - nq, size)]
        )


@dataclass(frozen=True)
class SolveReport:
    """
    Outcome of a Newton solve.

    Attributes:
        iterations: Number of Newton steps taken.
        residual: Infinity norm of the interior and surface residual.
        converged: Whether the residual dropped below the tolerance.
        min_hp: Smallest h_p over the grid.
        residual_history: Residual before each step and after the last one.
        phase_pinned: Whether the horizontal phase was held fixed.
    """

    iterations: int
    residual: float
    converged: bool
    min_hp: float
    residual_history: Tuple[float, ...] = ()
    phase_pinned: bool = False


def _derivatives(values: FloatArray, ops: GridOperators) -> Dict[str, FloatArray]:
    return {
        "h_q": ops.apply(ops.q, values),
        "h_qq": ops.apply(ops.qq, values),
        "h_p": ops.apply(ops.p, values),
        "h_pp": ops.apply(ops.pp, values),
        "h_qp": ops.apply(ops.qp, values),
    }


def _profile_fields(
    grid: Grid2D,
    profile: StratificationProfile,
) -> Tuple[FloatArray, FloatArray, float]:
    p_column = grid.p_values[:, None]
    bernoulli = numpy.broadcast_to(profile.bernoulli(p_column), grid.shape)
    slope = numpy.broadcast_to(profile.density_slope(p_column), grid.shape)
    surface_density = float(numpy.asarray(profile.density(0.0)))
    return bernoulli, slope, surface_density


def _residual(
    values: FloatArray,
    ops: GridOperators,
    params: FluidParameters,
    profile: StratificationProfile,
    Q: float,
) -> Tuple[FloatArray, FloatArray]:
    """
    Residual field with a zero bed row, and h_p.
    """
    d = _derivatives(values, ops)
    h_q, h_qq, h_p, h_pp, h_qp = d["h_q"], d["h_qq"], d["h_p"], d["h_pp"], d["h_qp"]
    bernoulli, slope, surface_density = _profile_fields(ops.grid, profile)

    forcing = -(bernoulli + params.g * values * slope)
    residual = (
        (1.0 + h_q**2) * h_pp
        - 2.0 * h_q * h_p * h_qp
        + h_p**2 * h_qq
        + forcing * h_p**3
    )

    s_q, s_qq, s_p, s_h = h_q[-1], h_qq[-1], h_p[-1], values[-1]
    curvature = s_qq / (1.0 + s_q**2) ** 1.5
    residual[-1] = 1.0 + s_q**2 + (
        2.0 * params.g * surface_density * s_h - Q - 2.0 * params.sigma * curvature
    ) * s_p**2
    residual[0] = 0.0

    return residual, h_p


def _linearization(
    values: FloatArray,
    ops: GridOperators,
    params: FluidParameters,
    profile: StratificationProfile,
    Q: float,
) -> DiscreteOperator:
    grid = ops.grid
    d = _derivatives(values, ops)
    h_q, h_qq, h_p, h_pp, h_qp = d["h_q"], d["h_qq"], d["h_p"], d["h_pp"], d["h_qp"]
    bernoulli, slope, surface_density = _profile_fields(grid, profile)

    forcing = -(bernoulli + params.g * values * slope)
    a_pp = 1.0 + h_q**2
    a_qq = h_p**2
    a_qp = -2.0 * h_q * h_p
    b_q = 2.0 * h_q * h_pp - 2.0 * h_p * h_qp
    b_p = -2.0 * h_q * h_qp + 2.0 * h_p * h_qq + 3.0 * forcing * h_p**2
    c = -params.g * slope * h_p**3

    def diag(field: FloatArray) -> SparseMatrix:
        return sparse.diags(numpy.ravel(field))

    interior = sparse.csr_matrix(
        diag(a_pp) @ ops.pp
        + diag(a_qq) @ ops.qq
        + diag(a_qp) @ ops.qp
        + diag(b_q) @ ops.q
        + diag(b_p) @ ops.p
        + diag(c)
    )

    s_q, s_qq, s_p, s_h = h_q[-1], h_qq[-1], h_p[-1], values[-1]
    stretch = 1.0 + s_q**2
    curvature = s_qq / stretch**1.5
    head = 2.0 * params.g * surface_density * s_h - Q - 2.0 * params.sigma * curvature

    surface_coefficients = {
        "q": 2.0 * s_q + 6.0 * params.sigma * s_q * s_qq * s_p**2 / stretch**2.5,
        "qq": -2.0 * params.sigma * s_p**2 / stretch**1.5,
        "p": 2.0 * head * s_p,
        "h": 2.0 * params.g * surface_density * s_p**2,
    }

    def surface_diag(name: str) -> SparseMatrix:
        field = numpy.zeros(grid.shape)
        field[-1] = surface_coefficients[name]
        return diag(field)

    surface = sparse.csr_matrix(
        surface_diag("q") @ ops.q
        + surface_diag("qq") @ ops.qq
        + surface_diag("p") @ ops.p
        + surface_diag("h")
    )

    nq = grid.nq
    size = grid.np * nq
    matrix = sparse.vstack(
        [interior[nq : size - nq], surface[size - nq :]],
        format="csr",
    )[:, nq:]

    q_column = numpy.zeros(size - nq)
    q_column[-nq:] = -(s_p**2)

    return DiscreteOperator(
        grid=grid,
        matrix=sparse.csr_matrix(matrix),
        a_pp=a_pp,
        a_qq=a_qq,
        a_qp=a_qp,
        b_q=b_q,
        b_p=b_p,
        c=c,
        interior_operator=interior,
        q_column=q_column,
    )


def _check_no_stagnation(h_p: FloatArray) -> None:
    min_hp = float(h_p.min())
    if not min_hp > 0.0:
        index = numpy.unravel_index(int(numpy.argmin(h_p)), h_p.shape)
        raise StagnationEncountered(
            f"h_p = {min_hp} <= 0 at node (p row {index[0]}, q column {index[1]})"
        )


def min_height_derivative(h: HeightField) -> float:
    """
    Smallest discrete h_p over the closed grid.
    """
    ops = grid_operators(h.grid)
    return float(ops.apply(ops.p, h.values).min())


@_check_bottom_condition(param="h")
def pde_residual(
    h: HeightField,
    params: FluidParameters,
    profile: StratificationProfile,
) -> FloatArray:
    """
    Residual of the height equations.

    Interior rows hold
    (1 + h_q^2) h_pp - 2 h_q h_p h_qp + h_p^2 h_qq - (bernoulli + g h rho') h_p^3,
    the last row holds the surface condition
    1 + h_q^2 + (2 g rho(0) h - Q - 2 sigma kappa) h_p^2 and the bed row is zero.

    Args:
        h (HeightField): The field, with h(q, p0) = 0.
        params (FluidParameters): The fluid parameters.
        profile (StratificationProfile): The stratification.

    Raises:
        ValueError: If the bed row is not zero.
        StagnationEncountered: If a discrete h_p is not positive.

    Returns:
        FloatArray: The residual, shape (np, nq).
    """
    residual, h_p = _residual(
        values=h.values,
        ops=grid_operators(h.grid),
        params=params,
        profile=profile,
        Q=params.Q,
    )
    _check_no_stagnation(h_p)

    return residual


@_check_bottom_condition(param="h")
def assemble_linearization(
    h: HeightField,
    params: FluidParameters,
    profile: StratificationProfile,
) -> DiscreteOperator:
    """
    Assembles the Frechet derivative of `pde_residual` at `h`.

    Args:
        h (HeightField): The field, with h(q, p0) = 0 and h_p > 0.
        params (FluidParameters): The fluid parameters.
        profile (StratificationProfile): The stratification.

    Raises:
        ValueError: If the bed row is not zero.
        StagnationEncountered: If a discrete h_p is not positive.

    Returns:
        DiscreteOperator: The linearization.
    """
    ops = grid_operators(h.grid)
    _check_no_stagnation(ops.apply(ops.p, h.values))

    return _linearization(
        values=h.values,
        ops=ops,
        params=params,
        profile=profile,
        Q=params.Q,
    )


def _bordered_solve(
    matrix: SparseMatrix,
    border: Optional[FloatArray],
    rhs: FloatArray,
) -> FloatArray:
    if border is None:
        return numpy.asarray(sparse_linalg.spsolve(matrix.tocsc(), rhs))

    column = sparse.csr_matrix(border[:, None])
    system = sparse.bmat([[matrix, column], [column.T, None]], format="csc")
    solution = sparse_linalg.spsolve(system, numpy.append(rhs, 0.0))

    return numpy.asarray(solution[:-1])


@_timed("newton_solve")
@_check_bottom_condition(param="initial")
def newton_solve(
    initial: HeightField,
    params: FluidParameters,
    profile: StratificationProfile,
    tol: float = 1e-10,
    max_iter: int = 30,
) -> Tuple[HeightField, SolveReport]:
    """
    Solves the height equations by damped Newton iteration.

    Steps are halved down to 2**-10 until the residual infinity norm decreases
    with h_p > 0. When the initial field is not q-independent its horizontal
    phase is pinned with a bordered translation constraint.

    Args:
        initial (HeightField): The initial field, with h(q, p0) = 0 and h_p > 0.
        params (FluidParameters): The fluid parameters.
        profile (StratificationProfile): The stratification.
        tol (float, optional): Residual tolerance. Defaults to 1e-10.
        max_iter (int, optional): Maximum number of Newton steps. Defaults to 30.

    Raises:
        ValueError: If the bed row of `initial` is not zero.
        StagnationEncountered: If `initial` has h_p <= 0 or no damped step keeps h_p > 0.
        NoConvergence: If the tolerance is not reached, with the best iterate.

    Returns:
        Tuple[HeightField, SolveReport]: The solution and its report.
    """
    ops = grid_operators(initial.grid)
    nq = initial.grid.nq

    values = numpy.array(initial.values)
    residual, h_p = _residual(values, ops, params, profile, params.Q)
    _check_no_stagnation(h_p)

    h_q = ops.apply(ops.q, values)
    border: Optional[FloatArray] = None
    if float(numpy.abs(h_q).max()) > _PHASE_THRESHOLD * max(1.0, float(numpy.abs(values).max())):
        border = h_q[1:].ravel()
        border = border / numpy.linalg.norm(border)

    norm = float(numpy.abs(residual).max())
    history: List[float] = [norm]
    best_values, best_norm = values, norm
    iterations = 0

    def report(converged: bool) -> SolveReport:
        return SolveReport(
            iterations=iterations,
            residual=best_norm,
            converged=converged,
            min_hp=float(ops.apply(ops.p, best_values).min()),
            residual_history=tuple(history),
            phase_pinned=border is not None,
        )

    while norm >= tol and iterations < max_iter:
        operator = _linearization(values, ops, params, profile, params.Q)
        step = _bordered_solve(operator.matrix, border, -residual[1:].ravel())
        step_field = numpy.zeros_like(values)
        step_field[1:] = step.reshape(-1, nq)

        alpha = 1.0
        accepted = False
        stagnation_only = True
        while alpha >= _MIN_STEP:
            trial = values + alpha * step_field
            trial_residual, trial_hp = _residual(trial, ops, params, profile, params.Q)
            if float(trial_hp.min()) > 0.0:
                stagnation_only = False
                trial_norm = float(numpy.abs(trial_residual).max())
                if trial_norm < norm or trial_norm < tol:
                    accepted = True
                    break
            alpha *= 0.5

        iterations += 1
        if not accepted:
            if stagnation_only:
                raise StagnationEncountered(
                    f"no damped step keeps h_p > 0 at iteration {iterations}"
                )
            raise NoConvergence(
                f"line search failed at iteration {iterations}, residual {best_norm:.3e}",
                best=initial.with_values(best_values),
                report=report(converged=False),
            )

        values, residual, norm = trial, trial_residual, trial_norm
        history.append(norm)
        if norm < best_norm:
            best_values, best_norm = values, norm

        _logger.debug(
            "Newton iteration %d: residual %.3e, step %.3e",
            iterations,
            norm,
            alpha,
        )

    if norm >= tol:
        raise NoConvergence(
            f"residual {best_norm:.3e} after {iterations} iterations, tolerance {tol:.1e}",
            best=initial.with_values(best_values),
            report=report(converged=False),
        )

    _logger.info("Newton converged in %d iterations, residual %.3e", iterations, norm)

    return initial.with_values(values), report(converged=True)


def laminar_height_field(
    params: FluidParameters,
    profile: StratificationProfile,
    grid: Grid2D,
) -> HeightField:
    """
    The q-independent height field of the laminar flow of height `params.depth`.

    Linear profiles invert the closed-form laminar stream function by
    bracketing; tabulated profiles solve the q-independent height equation as a
    two-point boundary value problem.

    Args:
        params (FluidParameters): The fluid parameters; p0 must match the grid.
        profile (StratificationProfile): The stratification.
        grid (Grid2D): The height grid on [p0, 0].

    Raises:
        ValueError: If the grid does not span [p0, 0] or the density is not positive.
        NonMonotoneStream: If the laminar flow has a stagnation level.
        NoConvergence: If the boundary value problem cannot be solved.

    Returns:
        HeightField: The laminar field.
    """
    if grid.p_min != params.p0 or grid.p_max != 0.0:
        raise ValueError(
            f"grid spans [{grid.p_min}, {grid.p_max}], expected [{params.p0}, 0]"
        )
    profile.check_positive(grid.p_values)

    if profile.coefficients is not None:
        column = _linear_laminar_column(params, profile, grid)
    else:
        column = _tabulated_laminar_column(params, profile, grid)

    return HeightField(grid=grid, values=numpy.tile(column[:, None], (1, grid.nq)))


def _linear_laminar_column(
    params: FluidParameters,
    profile: StratificationProfile,
    grid: Grid2D,
) -> FloatArray:
    assert profile.coefficients is not None
    A, B, gamma = profile.coefficients
    flow = LaminarFlow(params=dataclasses.replace(params, A=A, B=B, gamma=gamma))
    if not flow.is_monotone:
        raise NonMonotoneStream(
            f"laminar psi_y changes sign on [0, {params.depth}] (lambda = {flow.lambda_})"
        )

    column = numpy.empty(grid.np)
    column[0] = 0.0
    column[-1] = params.depth
    for i in range(1, grid.np - 1):
        p = float(grid.p_values[i])
        column[i] = brentq(
            lambda y: float(laminar_psi(flow, y)) + p,
            0.0,
            params.depth,
            xtol=1e-15,
            rtol=4.0 * numpy.finfo(float).eps,
        )

    return column


def _tabulated_laminar_column(
    params: FluidParameters,
    profile: StratificationProfile,
    grid: Grid2D,
) -> FloatArray:
    g = params.g
    depth = params.depth
    p0 = params.p0

    def rhs(p: FloatArray, y: FloatArray) -> FloatArray:
        forcing = profile.bernoulli(p) + g * y[0] * profile.density_slope(p)
        return numpy.vstack([y[1], forcing * y[1] ** 3])

    def boundary(ya: FloatArray, yb: FloatArray) -> FloatArray:
        return numpy.array([ya[0], yb[0] - depth])

    mesh = numpy.array(grid.p_values)
    guess = numpy.vstack(
        [depth * (mesh - p0) / -p0, numpy.full_like(mesh, depth / -p0)]
    )
    solution = solve_bvp(rhs, boundary, mesh, guess, tol=1e-10, max_nodes=100000)
    if not solution.success:
        raise NoConvergence(f"laminar boundary value problem failed: {solution.message}")

    sampled = solution.sol(mesh)
    if numpy.any(sampled[1] <= 0.0):
        raise NonMonotoneStream("laminar h_p is not positive on [p0, 0]")

    column = numpy.array(sampled[0])
    column[0] = 0.0
    column[-1] = depth

    return column


@_check_bottom_condition(param="h")
def recover_physical(
    h: HeightField,
    params: FluidParameters,
    profile: StratificationProfile,
    wave_speed: float = 0.0,
    atmospheric_pressure: float = 0.0,
) -> PhysicalFields:
    """
    Recovers velocity, energy and pressure from a height field.

    psi_y = -1/h_p and psi_x = h_q/h_p give u = c + psi_y/sqrt(rho) and
    v = -psi_x/sqrt(rho). The energy integrates dE/dp = -bernoulli from its
    surface value P_atm + Q/2.

    Args:
        h (HeightField): The field, with h_p > 0.
        params (FluidParameters): The fluid parameters.
        profile (StratificationProfile): The stratification.
        wave_speed (float, optional): The wave speed c. Defaults to 0.0.
        atmospheric_pressure (float, optional): The surface pressure. Defaults to 0.0.

    Raises:
        StagnationEncountered: If a discrete h_p is not positive.

    Returns:
        PhysicalFields: The recovered fields.
    """
    grid = h.grid
    ops = grid_operators(grid)
    h_q = ops.apply(ops.q, h.values)
    h_p = ops.apply(ops.p, h.values)
    _check_no_stagnation(h_p)

    p_values = numpy.asarray(grid.p_values)
    density = numpy.broadcast_to(profile.density(p_values[:, None]), grid.shape)
    root_density = numpy.sqrt(density)

    psi_y = -1.0 / h_p
    psi_x = h_q / h_p
    u = wave_speed + psi_y / root_density
    v = -psi_x / root_density

    work = cumulative_trapezoid(profile.bernoulli(p_values), p_values, initial=0.0)
    energy_column = atmospheric_pressure + params.Q / 2.0 - (work - work[-1])
    energy = numpy.broadcast_to(energy_column[:, None], grid.shape)
    pressure = energy - 0.5 * (psi_x**2 + psi_y**2) - params.g * density * h.values

    return PhysicalFields(
        grid=grid,
        u=u,
        v=v,
        pressure=pressure,
        energy=energy,
        wave_speed=wave_speed,
        density=density,
        psi_x=psi_x,
        psi_y=psi_y,
        height_p=h_p,
    )


def column_flux(fields: PhysicalFields) -> FloatArray:
    """
    Flux integral of sqrt(rho)(u - c) dy over each column, taken along streamlines.

    Returns:
        FloatArray: The flux per q column, p0 for a consistent field.
    """
    integrand = numpy.sqrt(fields.density) * (fields.u - fields.wave_speed) * fields.height_p

    return numpy.asarray(trapezoid(integrand, fields.grid.p_values, axis=0))
