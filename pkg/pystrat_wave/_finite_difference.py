# MODULES
import functools
from dataclasses import dataclass

# NUMPY
import numpy
import numpy.typing as npt

# SCIPY
import scipy.sparse as sparse

# CORE
from pystrat_wave._core import FloatArray, Grid2D

SparseMatrix = sparse.csr_matrix


def periodic_first(n: int, step: float) -> SparseMatrix:
    """
    Centered first derivative with periodic wraparound.
    """
    weight = 1.0 / (2.0 * step)
    matrix = sparse.diags(
        [-weight, weight, weight, -weight],
        [-1, 1, -(n - 1), n - 1],
        shape=(n, n),
    )
    return sparse.csr_matrix(matrix)


def periodic_second(n: int, step: float) -> SparseMatrix:
    """
    Centered second derivative with periodic wraparound.
    """
    weight = 1.0 / step**2
    matrix = sparse.diags(
        [weight, -2.0 * weight, weight, weight, weight],
        [-1, 0, 1, -(n - 1), n - 1],
        shape=(n, n),
    )
    return sparse.csr_matrix(matrix)


def bounded_first(n: int, step: float) -> SparseMatrix:
    """
    Centered first derivative, second-order one-sided rows at both ends.
    """
    matrix = sparse.lil_matrix((n, n))
    for i in range(1, n - 1):
        matrix[i, i - 1] = -0.5 / step
        matrix[i, i + 1] = 0.5 / step

    matrix[0, 0:3] = numpy.array([-3.0, 4.0, -1.0]) / (2.0 * step)
    matrix[n - 1, n - 3 : n] = numpy.array([1.0, -4.0, 3.0]) / (2.0 * step)

    return sparse.csr_matrix(matrix)


def bounded_second(n: int, step: float) -> SparseMatrix:
    """
    Centered second derivative, second-order four-point one-sided rows at both ends.
    """
    matrix = sparse.lil_matrix((n, n))
    for i in range(1, n - 1):
        matrix[i, i - 1 : i + 2] = numpy.array([1.0, -2.0, 1.0]) / step**2

    matrix[0, 0:4] = numpy.array([2.0, -5.0, 4.0, -1.0]) / step**2
    matrix[n - 1, n - 4 : n] = numpy.array([-1.0, 4.0, -5.0, 2.0]) / step**2

    return sparse.csr_matrix(matrix)


@dataclass(frozen=True, eq=False)
class GridOperators:
    """
    Difference operators acting on fields flattened row-major from shape (np, nq).

    Attributes:
        q: d/dq, periodic.
        qq: d2/dq2, periodic.
        p: d/dp, one-sided at p_min and p_max.
        pp: d2/dp2, one-sided at p_min and p_max.
        qp: d2/dqdp.
        identity: The identity of the grid size.
    """

    grid: Grid2D
    q: SparseMatrix
    qq: SparseMatrix
    p: SparseMatrix
    pp: SparseMatrix
    qp: SparseMatrix
    identity: SparseMatrix

    @classmethod
    def build(cls, grid: Grid2D) -> "GridOperators":
        eye_q = sparse.identity(grid.nq, format="csr")
        eye_p = sparse.identity(grid.np, format="csr")

        d_q = sparse.kron(eye_p, periodic_first(grid.nq, grid.dq), format="csr")
        d_qq = sparse.kron(eye_p, periodic_second(grid.nq, grid.dq), format="csr")
        d_p = sparse.kron(bounded_first(grid.np, grid.dp), eye_q, format="csr")
        d_pp = sparse.kron(bounded_second(grid.np, grid.dp), eye_q, format="csr")

        return cls(
            grid=grid,
            q=d_q,
            qq=d_qq,
            p=d_p,
            pp=d_pp,
            qp=sparse.csr_matrix(d_p @ d_q),
            identity=sparse.identity(grid.nq * grid.np, format="csr"),
        )

    def apply(self, operator: SparseMatrix, values: npt.ArrayLike) -> FloatArray:
        """
        Applies an operator to a field of shape (np, nq) and reshapes the result.
        """
        flat = numpy.asarray(values, dtype=numpy.float64).ravel()
        return numpy.asarray(operator @ flat).reshape(self.grid.shape)


@functools.lru_cache(maxsize=16)
def _cached_operators(nq: int, np: int, p_min: float, p_max: float) -> GridOperators:
    return GridOperators.build(Grid2D(nq=nq, np=np, p_min=p_min, p_max=p_max))


def grid_operators(grid: Grid2D) -> GridOperators:
    """
    The operators of a grid, shared between grids with the same extent.
    """
    return _cached_operators(grid.nq, grid.np, grid.p_min, grid.p_max)


def spectral_derivative(
    values: npt.ArrayLike,
    order: int = 1,
    axis: int = -1,
) -> FloatArray:
    """
    Derivative of 2*pi-periodic samples by FFT.

    The Nyquist mode is dropped for odd orders so real input stays real.

    Args:
        values (ArrayLike): Uniform samples over one period along `axis`.
        order (int, optional): The derivative order. Defaults to 1.
        axis (int, optional): The periodic axis. Defaults to -1.

    Returns:
        FloatArray: The derivative samples.
    """
    array = numpy.asarray(values, dtype=numpy.float64)
    n = array.shape[axis]
    wavenumbers = numpy.fft.fftfreq(n, d=1.0 / n)
    multiplier = (1j * wavenumbers) ** order
    if order % 2 and n % 2 == 0:
        multiplier[n // 2] = 0.0

    shape = [1] * array.ndim
    shape[axis] = n
    spectrum = numpy.fft.fft(array, axis=axis) * multiplier.reshape(shape)

    return numpy.real(numpy.fft.ifft(spectrum, axis=axis))
