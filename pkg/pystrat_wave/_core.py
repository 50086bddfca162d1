# MODULES
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

# NUMPY
import numpy
import numpy.typing as npt

# SCIPY
from scipy.interpolate import PchipInterpolator

# EXCEPTIONS
from pystrat_wave._exceptions import SingularMapping

FloatArray = npt.NDArray[numpy.float64]
ProfileFunction = Callable[[npt.ArrayLike], FloatArray]


def _readonly(values: npt.ArrayLike) -> FloatArray:
    array = numpy.array(values, dtype=numpy.float64)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class FluidParameters:
    """
    Physical and model constants of a stratified periodic wave.

    `Q` and `d` may be omitted: `d` then defaults to `depth` and `Q` to the
    Bernoulli head of the laminar flow of height `depth`.

    Attributes:
        p0: Relative pseudo mass flux (< 0).
        depth: Laminar layer height (> 0).
        B: Density intercept (> 0).
        g: Gravitational acceleration.
        sigma: Surface tension coefficient (<= 0).
        Q: Bernoulli head constant.
        d: Mean surface height.
        k: Wave number (> 0).
        A: Density slope constant.
        gamma: Constant Bernoulli value.
    """

    p0: float
    depth: float
    B: float
    g: float = 9.8
    sigma: float = 0.0
    Q: float = math.nan
    d: float = math.nan
    k: float = 1.0
    A: float = 0.0
    gamma: float = 0.0

    def __post_init__(self) -> None:
        problems = []
        if not self.sigma <= 0:
            problems.append(f"sigma must be <= 0, got {self.sigma}")
        if not self.p0 < 0:
            problems.append(f"p0 must be < 0, got {self.p0}")
        if not self.B > 0:
            problems.append(f"B must be > 0, got {self.B}")
        if not self.depth > 0:
            problems.append(f"depth must be > 0, got {self.depth}")
        if not self.k > 0:
            problems.append(f"k must be > 0, got {self.k}")
        if not self.g > 0:
            problems.append(f"g must be > 0, got {self.g}")
        if problems:
            raise ValueError("; ".join(problems))

        if math.isnan(self.d):
            object.__setattr__(self, "d", float(self.depth))
        if math.isnan(self.Q):
            surface_speed = self.surface_speed
            object.__setattr__(
                self,
                "Q",
                surface_speed**2 + 2.0 * self.g * self.B * self.depth,
            )

    @property
    def surface_speed(self) -> float:
        """
        The laminar surface value of psi_y, lambda = p0/h + gamma*h/2 - A*g*h^2/3.
        """
        h = self.depth
        return self.p0 / h + self.gamma * h / 2.0 - self.A * self.g * h**2 / 3.0

    def as_dict(self) -> Dict[str, float]:
        return {
            "g": self.g,
            "sigma": self.sigma,
            "p0": self.p0,
            "Q": self.Q,
            "d": self.d,
            "k": self.k,
            "depth": self.depth,
            "A": self.A,
            "B": self.B,
            "gamma": self.gamma,
        }


@dataclass(frozen=True, eq=False)
class StratificationProfile:
    """
    Streamline density and energy gradient as functions of the streamline label p.

    `bernoulli(p)` is dE/dpsi on the streamline p; for the linear profile it is
    the constant gamma.

    Attributes:
        density: p -> rho(p).
        density_slope: p -> rho'(p).
        bernoulli: p -> dE/dpsi on streamline p.
        coefficients: (A, B, gamma) when the profile is the linear closed form.
    """

    density: ProfileFunction
    density_slope: ProfileFunction
    bernoulli: ProfileFunction
    coefficients: Optional[Tuple[float, float, float]] = None

    @property
    def is_linear(self) -> bool:
        return self.coefficients is not None

    def is_stable(self, p_values: npt.ArrayLike) -> bool:
        """
        Whether the density does not increase upwards, rho'(p) <= 0 on the samples.
        """
        return bool(numpy.all(self.density_slope(p_values) <= 0.0))

    def check_positive(self, p_values: npt.ArrayLike) -> None:
        """
        Raises:
            ValueError: If the density is not positive at one of the samples.
        """
        p_array = numpy.atleast_1d(numpy.asarray(p_values, dtype=numpy.float64))
        density = numpy.atleast_1d(self.density(p_array))
        bad = numpy.flatnonzero(density <= 0.0)
        if bad.size:
            index = int(bad[0])
            raise ValueError(
                f"density must be > 0, got {density[index]} at p = {p_array[index]}"
            )


def linear_stratification(
    A: float,
    B: float,
    gamma: float,
    p0: Optional[float] = None,
) -> StratificationProfile:
    """
    Builds the closed-form profile rho(p) = -A*p + B with constant Bernoulli value gamma.

    Args:
        A (float): The density slope constant.
        B (float): The density intercept, must be positive.
        gamma (float): The constant Bernoulli value.
        p0 (Optional[float], optional): When given, the density is checked on [p0, 0]. Defaults to None.

    Raises:
        ValueError: If B <= 0 or the density is not positive on [p0, 0].

    Returns:
        StratificationProfile: The profile.
    """
    if not B > 0:
        raise ValueError(f"B must be > 0, got {B}")

    def density(p: npt.ArrayLike) -> FloatArray:
        return -A * numpy.asarray(p, dtype=numpy.float64) + B

    def density_slope(p: npt.ArrayLike) -> FloatArray:
        return numpy.full(numpy.shape(p), -float(A))

    def bernoulli(p: npt.ArrayLike) -> FloatArray:
        return numpy.full(numpy.shape(p), float(gamma))

    profile = StratificationProfile(
        density=density,
        density_slope=density_slope,
        bernoulli=bernoulli,
        coefficients=(float(A), float(B), float(gamma)),
    )

    if p0 is not None:
        # linear in p: the endpoints bound the minimum
        profile.check_positive([p0, 0.0])

    return profile


def tabulated_stratification(
    p_samples: Sequence[float],
    density_samples: Sequence[float],
    bernoulli_samples: Sequence[float],
) -> StratificationProfile:
    """
    Builds a profile from samples with monotone cubic interpolation.

    Args:
        p_samples (Sequence[float]): Strictly increasing streamline labels covering [p0, 0].
        density_samples (Sequence[float]): Positive densities at the labels.
        bernoulli_samples (Sequence[float]): dE/dpsi at the labels.

    Raises:
        ValueError: If the samples are inconsistent or a density is not positive.

    Returns:
        StratificationProfile: The profile, its slope taken from the interpolant.
    """
    p_array = numpy.asarray(p_samples, dtype=numpy.float64)
    density_array = numpy.asarray(density_samples, dtype=numpy.float64)
    bernoulli_array = numpy.asarray(bernoulli_samples, dtype=numpy.float64)

    if p_array.ndim != 1 or p_array.size < 2:
        raise ValueError("at least two p samples are required")
    if density_array.shape != p_array.shape or bernoulli_array.shape != p_array.shape:
        raise ValueError("p, density and bernoulli samples must have the same length")
    if numpy.any(numpy.diff(p_array) <= 0.0):
        raise ValueError("p samples must be strictly increasing")

    density_interpolant = PchipInterpolator(p_array, density_array, extrapolate=True)
    slope_interpolant = density_interpolant.derivative()
    bernoulli_interpolant = PchipInterpolator(p_array, bernoulli_array, extrapolate=True)

    def density(p: npt.ArrayLike) -> FloatArray:
        return numpy.asarray(density_interpolant(p), dtype=numpy.float64)

    def density_slope(p: npt.ArrayLike) -> FloatArray:
        return numpy.asarray(slope_interpolant(p), dtype=numpy.float64)

    def bernoulli(p: npt.ArrayLike) -> FloatArray:
        return numpy.asarray(bernoulli_interpolant(p), dtype=numpy.float64)

    profile = StratificationProfile(
        density=density,
        density_slope=density_slope,
        bernoulli=bernoulli,
    )
    profile.check_positive(p_array)

    return profile


@dataclass(frozen=True, eq=False)
class Grid2D:
    """
    Rectangular grid, periodic in q on [-pi, pi) and bounded in p on [p_min, p_max].

    Field arrays sampled on the grid have shape (np, nq): row 0 is p_min.
    """

    nq: int
    np: int
    p_min: float
    p_max: float
    q_values: FloatArray = field(init=False, repr=False)
    p_values: FloatArray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.nq < 8 or self.nq % 2:
            raise ValueError(f"nq must be even and >= 8, got {self.nq}")
        if self.np < 4:
            raise ValueError(f"np must be >= 4, got {self.np}")
        if not self.p_min < self.p_max:
            raise ValueError(f"p range is empty: [{self.p_min}, {self.p_max}]")

        object.__setattr__(
            self,
            "q_values",
            _readonly(-math.pi + numpy.arange(self.nq) * (2.0 * math.pi / self.nq)),
        )
        object.__setattr__(
            self,
            "p_values",
            _readonly(numpy.linspace(self.p_min, self.p_max, self.np)),
        )

    @property
    def dq(self) -> float:
        return 2.0 * math.pi / self.nq

    @property
    def dp(self) -> float:
        return (self.p_max - self.p_min) / (self.np - 1)

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.np, self.nq)

    def same_as(self, other: "Grid2D") -> bool:
        return (
            self.nq == other.nq
            and self.np == other.np
            and self.p_min == other.p_min
            and self.p_max == other.p_max
        )

    def coarsened(self) -> "Grid2D":
        """
        The grid of every other node in both directions.

        Raises:
            ValueError: If the grid cannot be halved.
        """
        if self.nq % 4 or (self.np - 1) % 2:
            raise ValueError(f"grid {self.nq}x{self.np} cannot be coarsened")

        return Grid2D(
            nq=self.nq // 2,
            np=(self.np - 1) // 2 + 1,
            p_min=self.p_min,
            p_max=self.p_max,
        )


def make_grid(nq: int, np: int, p0: float) -> Grid2D:
    """
    Builds the height-formulation grid on [-pi, pi) x [p0, 0].

    Args:
        nq (int): Number of q samples, even and >= 8.
        np (int): Number of p samples including both endpoints, >= 4.
        p0 (float): The relative pseudo mass flux, < 0.

    Raises:
        ValueError: If a count is out of range or p0 >= 0.

    Returns:
        Grid2D: The grid.
    """
    if not p0 < 0:
        raise ValueError(f"p0 must be < 0, got {p0}")

    return Grid2D(nq=nq, np=np, p_min=float(p0), p_max=0.0)


def make_sigma_grid(nq: int, nt: int) -> Grid2D:
    """
    Builds the surface-fitted grid on [-pi, pi) x [0, 1], y = eta(x) * t.
    """
    return Grid2D(nq=nq, np=nt, p_min=0.0, p_max=1.0)


@dataclass(frozen=True, eq=False)
class HeightField:
    """
    Samples of the height h(q, p) of streamline p above the bed.

    Attributes:
        grid: The grid, row 0 at the bed p = p0.
        values: Read-only array of shape (np, nq).
    """

    grid: Grid2D
    values: FloatArray

    def __post_init__(self) -> None:
        values = _readonly(self.values)
        if values.shape != self.grid.shape:
            raise ValueError(
                f"values have shape {values.shape}, grid expects {self.grid.shape}"
            )
        object.__setattr__(self, "values", values)

    @property
    def surface(self) -> FloatArray:
        """
        eta(q) = h(q, 0).
        """
        return self.values[-1]

    @property
    def amplitude(self) -> float:
        """
        Crest-to-trough height of the surface.
        """
        return float(self.surface.max() - self.surface.min())

    @property
    def mean_height(self) -> float:
        return float(self.surface.mean())

    def satisfies_bottom_condition(self, tolerance: float = 0.0) -> bool:
        return bool(numpy.all(numpy.abs(self.values[0]) <= tolerance))

    def with_values(self, values: npt.ArrayLike) -> "HeightField":
        return HeightField(grid=self.grid, values=numpy.asarray(values))

    def shifted(self, cells: int) -> "HeightField":
        """
        The field translated by a whole number of q cells, h(q - cells*dq, p).
        """
        return self.with_values(numpy.roll(self.values, cells, axis=1))

    def to_rows(self) -> List[Tuple[float, float, float]]:
        return [
            (float(q), float(p), float(self.values[i, j]))
            for i, p in enumerate(self.grid.p_values)
            for j, q in enumerate(self.grid.q_values)
        ]

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[float]]) -> "HeightField":
        """
        Rebuilds a field from (q, p, h) rows written by `to_rows`.

        Raises:
            ValueError: If the rows do not cover a full grid.
        """
        data = numpy.asarray(rows, dtype=numpy.float64)
        if data.ndim != 2 or data.shape[1] != 3:
            raise ValueError("expected rows of (q, p, h)")

        nq = numpy.unique(data[:, 0]).size
        np = numpy.unique(data[:, 1]).size
        if nq * np != data.shape[0]:
            raise ValueError(f"{data.shape[0]} rows do not form a {np}x{nq} grid")

        grid = make_grid(nq=nq, np=np, p0=float(data[:, 1].min()))

        return cls(grid=grid, values=data[:, 2].reshape(np, nq))


@dataclass(frozen=True, eq=False)
class StreamSolution:
    """
    Free surface eta(x) and pseudo-stream function psi on the surface-fitted grid.

    Attributes:
        grid: Sigma grid, row 0 at the bed t = 0, last row at the surface t = 1.
        eta: Surface samples, shape (nq,).
        psi: Stream function samples at y = eta(x) * t, shape (nt, nq).
        params: The fluid parameters the solution was computed with.
    """

    grid: Grid2D
    eta: FloatArray
    psi: FloatArray
    params: FluidParameters

    def __post_init__(self) -> None:
        eta = _readonly(self.eta)
        psi = _readonly(self.psi)
        if eta.shape != (self.grid.nq,):
            raise ValueError(f"eta has shape {eta.shape}, expected ({self.grid.nq},)")
        if psi.shape != self.grid.shape:
            raise ValueError(f"psi has shape {psi.shape}, expected {self.grid.shape}")
        if numpy.any(eta <= 0.0):
            raise SingularMapping(f"eta must be > 0, min is {eta.min()}")

        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "psi", psi)

    @property
    def x_values(self) -> FloatArray:
        return self.grid.q_values

    @property
    def y_values(self) -> FloatArray:
        """
        Physical heights of the nodes, shape (nt, nq).
        """
        return numpy.outer(self.grid.p_values, self.eta)

    def surface_rows(self) -> List[Tuple[float, float]]:
        return [(float(x), float(e)) for x, e in zip(self.x_values, self.eta)]

    def field_rows(self) -> List[Tuple[float, float, float, float]]:
        y_values = self.y_values
        return [
            (float(x), float(t), float(y_values[i, j]), float(self.psi[i, j]))
            for i, t in enumerate(self.grid.p_values)
            for j, x in enumerate(self.x_values)
        ]

    @classmethod
    def from_rows(
        cls,
        surface_rows: Sequence[Sequence[float]],
        field_rows: Sequence[Sequence[float]],
        params: FluidParameters,
    ) -> "StreamSolution":
        """
        Rebuilds a solution from (x, eta) and (x, t, y, psi) rows.

        Raises:
            ValueError: If the rows do not cover a full grid.
        """
        surface = numpy.asarray(surface_rows, dtype=numpy.float64)
        data = numpy.asarray(field_rows, dtype=numpy.float64)
        if surface.ndim != 2 or surface.shape[1] != 2:
            raise ValueError("expected surface rows of (x, eta)")
        if data.ndim != 2 or data.shape[1] != 4:
            raise ValueError("expected field rows of (x, t, y, psi)")

        nq = surface.shape[0]
        nt = numpy.unique(data[:, 1]).size
        if nq * nt != data.shape[0]:
            raise ValueError(f"{data.shape[0]} rows do not form a {nt}x{nq} grid")

        return cls(
            grid=make_sigma_grid(nq=nq, nt=nt),
            eta=surface[:, 1],
            psi=data[:, 3].reshape(nt, nq),
            params=params,
        )


@dataclass(frozen=True, eq=False)
class PhysicalFields:
    """
    Velocity, pressure and energy recovered from a height field.

    Attributes:
        grid: Grid of the source field.
        u: Horizontal velocity.
        v: Vertical velocity.
        pressure: Pressure P.
        energy: E = P + rho/2 * |relative velocity|^2 + g*rho*y.
        wave_speed: The wave speed c.
        density: rho on each node.
        psi_x: Pseudo-stream function derivative psi_x.
        psi_y: Pseudo-stream function derivative psi_y.
        height_p: The streamline spacing h_p.
    """

    grid: Grid2D
    u: FloatArray
    v: FloatArray
    pressure: FloatArray
    energy: FloatArray
    wave_speed: float
    density: FloatArray
    psi_x: FloatArray
    psi_y: FloatArray
    height_p: FloatArray

    def __post_init__(self) -> None:
        for name in ("u", "v", "pressure", "energy", "density", "psi_x", "psi_y", "height_p"):
            object.__setattr__(self, name, _readonly(getattr(self, name)))
