# MODULES
import dataclasses
import math
from dataclasses import dataclass, field
from typing import List, Tuple, Union

# NUMPY
import numpy
import numpy.typing as npt

# CONSTANTS
from pystrat_wave._constants.enum import BifurcationRoot, StagnationCase

# CORE
from pystrat_wave._core import FloatArray, FluidParameters

_DOUBLE_ROOT_TOLERANCE = 1e-12

Scalar = Union[float, FloatArray]


@dataclass(frozen=True)
class LaminarFlow:
    """
    The x-independent flow of the constant-Bernoulli system with layer height `params.depth`.

    Attributes:
        params: The fluid parameters.
        lambda_: The surface value of psi_y, p0/h + gamma*h/2 - A*g*h^2/3.
    """

    params: FluidParameters
    lambda_: float = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "lambda_", self.params.surface_speed)

    @classmethod
    def from_lambda(
        cls,
        params: FluidParameters,
        lambda_: float,
    ) -> "LaminarFlow":
        """
        The laminar flow of height `params.depth` whose surface speed is `lambda_`.

        The flux p0 is solved from the definition of lambda and Q is reset to the
        laminar head.

        Raises:
            ValueError: If the resulting flux is not negative.
        """
        return cls(params=_parameters_for_lambda(params=params, lambda_=lambda_))

    @property
    def is_monotone(self) -> bool:
        """
        Whether psi_y < 0 on the whole layer [0, depth].
        """
        p = self.params
        candidates = [0.0, p.depth]
        if p.A != 0.0:
            vertex = p.gamma / (p.A * p.g)
            if 0.0 < vertex < p.depth:
                candidates.append(vertex)

        return bool(numpy.all(laminar_psi_y(self, numpy.asarray(candidates)) < 0.0))


@dataclass(frozen=True)
class StagnationClassification:
    """
    Stagnation depths of a laminar flow and their classification.

    Attributes:
        case_tag: Which side of the balance gamma = (A*g/2)(y + h) the roots lie on.
        depths: Roots y of psi_y in [0, depth), increasing.
        tangency: Whether psi_y touches zero at a double root.
        balance_values: (A*g/2)(y + h) at each root.
    """

    case_tag: StagnationCase
    depths: Tuple[float, ...]
    tangency: bool = False
    balance_values: Tuple[float, ...] = ()


def _check_depth(flow: LaminarFlow, y: npt.ArrayLike) -> FloatArray:
    y_array = numpy.asarray(y, dtype=numpy.float64)
    if numpy.any(y_array < 0.0) or numpy.any(y_array > flow.params.depth):
        raise ValueError(f"y must lie in [0, {flow.params.depth}]")
    return y_array


def _as_output(values: FloatArray) -> Scalar:
    return numpy.asarray(values)[()]  # type: ignore[no-any-return]


def laminar_psi(flow: LaminarFlow, y: npt.ArrayLike) -> Scalar:
    """
    The laminar pseudo-stream function
    gamma*y^2/2 - A*g*y^3/6 + (p0/h - gamma*h/2 + A*g*h^2/6)*y - p0.

    Args:
        flow (LaminarFlow): The flow.
        y (ArrayLike): Heights in [0, depth].

    Raises:
        ValueError: If a height lies outside [0, depth].

    Returns:
        Union[float, FloatArray]: psi at the heights, same shape as `y`.
    """
    y_array = _check_depth(flow, y)
    p = flow.params
    h = p.depth
    slope = p.p0 / h - p.gamma * h / 2.0 + p.A * p.g * h**2 / 6.0

    return _as_output(
        p.gamma * y_array**2 / 2.0 - p.A * p.g * y_array**3 / 6.0 + slope * y_array - p.p0
    )


def laminar_psi_y(flow: LaminarFlow, y: npt.ArrayLike) -> Scalar:
    """
    psi_y = gamma*y - (A*g/2)*y^2 + p0/h - gamma*h/2 + A*g*h^2/6.

    Raises:
        ValueError: If a height lies outside [0, depth].
    """
    y_array = _check_depth(flow, y)
    p = flow.params
    h = p.depth

    return _as_output(
        p.gamma * y_array
        - p.A * p.g / 2.0 * y_array**2
        + p.p0 / h
        - p.gamma * h / 2.0
        + p.A * p.g * h**2 / 6.0
    )


def laminar_psi_y_factored(flow: LaminarFlow, y: npt.ArrayLike) -> Scalar:
    """
    psi_y written around the surface value, (h - y)((A*g/2)(y + h) - gamma) + lambda.

    Raises:
        ValueError: If a height lies outside [0, depth].
    """
    y_array = _check_depth(flow, y)
    p = flow.params
    h = p.depth

    return _as_output(
        (h - y_array) * (p.A * p.g / 2.0 * (y_array + h) - p.gamma) + flow.lambda_
    )


def dispersion_lambdas(params: FluidParameters) -> Tuple[float, float]:
    """
    Roots of k*coth(k*h)*lambda^2 - (gamma - A*g*h)*lambda - (g*B + sigma*k^2) = 0.

    With sigma = 0 this is the bifurcation condition of the constant-Bernoulli
    laminar flows.

    Args:
        params (FluidParameters): The parameters; p0 does not enter.

    Raises:
        ValueError: If g*B + sigma*k^2 <= 0.

    Returns:
        Tuple[float, float]: (lambda_minus, lambda_plus), lambda_minus < 0 < lambda_plus.
    """
    h = params.depth
    k = params.k
    a = k / math.tanh(k * h)
    b = -(params.gamma - params.A * params.g * h)
    c = -(params.g * params.B + params.sigma * k**2)
    if not c < 0.0:
        raise ValueError(
            f"g*B + sigma*k^2 must be > 0, got {-c}; no bifurcation pair exists"
        )

    discriminant = b * b - 4.0 * a * c
    # larger root in magnitude first, the other from the product of roots
    q = -0.5 * (b + math.copysign(math.sqrt(discriminant), b))
    first = q / a
    second = c / q

    return (min(first, second), max(first, second))


def dispersion_residual(params: FluidParameters, lambda_: float) -> float:
    """
    The dispersion quadratic evaluated at `lambda_`.
    """
    h = params.depth
    k = params.k
    return (
        k / math.tanh(k * h) * lambda_**2
        - (params.gamma - params.A * params.g * h) * lambda_
        - (params.g * params.B + params.sigma * k**2)
    )


def find_stagnation_depths(flow: LaminarFlow) -> StagnationClassification:
    """
    Finds the heights y in [0, depth) where the laminar psi_y vanishes.

    The roots solve (h - y)((A*g/2)(y + h) - gamma) + lambda = 0. Each root
    satisfies lambda = (h - y)(gamma - balance) with balance = (A*g/2)(y + h), so
    gamma exceeds the balance at every root exactly when lambda > 0.

    Args:
        flow (LaminarFlow): The flow.

    Returns:
        StagnationClassification: The depths and their case.
    """
    p = flow.params
    h = p.depth
    a2 = p.A * p.g / 2.0
    a1 = -p.gamma
    a0 = -(a2 * h**2 - p.gamma * h + flow.lambda_)

    roots: List[float] = []
    tangency = False
    if a2 == 0.0:
        if a1 != 0.0:
            roots.append(-a0 / a1)
    else:
        discriminant = a1 * a1 - 4.0 * a2 * a0
        scale = a1 * a1 + abs(4.0 * a2 * a0)
        if abs(discriminant) <= _DOUBLE_ROOT_TOLERANCE * scale:
            roots.append(-a1 / (2.0 * a2))
            tangency = True
        elif discriminant > 0.0:
            q = -0.5 * (a1 + math.copysign(math.sqrt(discriminant), a1))
            roots.append(q / a2)
            if q != 0.0:
                roots.append(a0 / q)

    depths = tuple(sorted(y for y in roots if 0.0 <= y < h))
    tangency = tangency and bool(depths)

    if not depths:
        case_tag = StagnationCase.NO_STAGNATION_SURFACE_OR_BALANCE
    elif flow.lambda_ > 0.0:
        case_tag = StagnationCase.STAGNATION_FOR_LAMBDA_PLUS
    else:
        case_tag = StagnationCase.STAGNATION_FOR_LAMBDA_MINUS

    return StagnationClassification(
        case_tag=case_tag,
        depths=depths,
        tangency=tangency,
        balance_values=tuple(a2 * (y + h) for y in depths),
    )


def laminar_q(params: FluidParameters) -> float:
    """
    Bernoulli head of the laminar flow of height `params.depth`, lambda^2 + 2*g*B*depth.
    """
    return params.surface_speed**2 + 2.0 * params.g * params.B * params.depth


def _parameters_for_lambda(params: FluidParameters, lambda_: float) -> FluidParameters:
    h = params.depth
    p0 = h * (lambda_ - params.gamma * h / 2.0 + params.A * params.g * h**2 / 3.0)
    if not p0 < 0.0:
        raise ValueError(
            f"lambda = {lambda_} requires p0 = {p0} >= 0 at depth {h}"
        )

    return dataclasses.replace(
        params,
        p0=p0,
        Q=lambda_**2 + 2.0 * params.g * params.B * h,
        d=h,
    )


def bifurcation_parameters(
    params: FluidParameters,
    which: BifurcationRoot,
) -> FluidParameters:
    """
    Parameters at which the laminar flow of height `params.depth` bifurcates.

    Args:
        params (FluidParameters): Base parameters; p0 and Q are replaced.
        which (BifurcationRoot): The dispersion root to use.

    Raises:
        ValueError: If the root requires a non-negative flux.

    Returns:
        FluidParameters: Parameters with lambda = lambda_plus or lambda_minus.
    """
    lambda_minus, lambda_plus = dispersion_lambdas(params)
    lambda_ = lambda_plus if which is BifurcationRoot.PLUS else lambda_minus

    return _parameters_for_lambda(params=params, lambda_=lambda_)
