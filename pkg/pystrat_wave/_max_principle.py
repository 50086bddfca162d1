# MODULES
import logging
from dataclasses import dataclass
from typing import Dict, Optional, Tuple, Union

# NUMPY
import numpy

# SCIPY
import scipy.sparse as sparse
import scipy.sparse.linalg as sparse_linalg

# CORE
from pystrat_wave._core import FloatArray

# DECORATORS
from pystrat_wave._decorators import timed as _timed

# HEIGHT SOLVER
from pystrat_wave._height_solver import DiscreteOperator

_logger = logging.getLogger("pystrat_wave.max_principle")

_STRUCTURE_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class Counterexample:
    """
    A nonnegative grid function with Lw <= 0 whose minimum lies in the interior.

    Attributes:
        trial: Index of the random trial.
        w: The grid function, shape (np, nq).
        interior_min: Minimum over interior nodes.
        boundary_min: Minimum over bed and surface nodes.
    """

    trial: int
    w: FloatArray
    interior_min: float
    boundary_min: float


@dataclass(frozen=True)
class StencilViolation:
    """
    The largest positive off-diagonal entry of -(L - c+).

    Nodes are (p index, q index) pairs.
    """

    row: Tuple[int, int]
    column: Tuple[int, int]
    value: float


@dataclass(frozen=True, eq=False)
class MaxPrincipleReport:
    """
    Structure tests on -(L - c+) and the outcome of a randomized search.

    Attributes:
        diagonal_positive: Every interior diagonal entry of -(L - c+) is positive.
        off_diagonal_nonpositive: Every interior off-diagonal entry is <= 0.
        row_sums_nonnegative: Every interior row sum is >= 0.
        max_off_diagonal: Largest off-diagonal entry.
        min_row_sum: Smallest row sum.
        zeroth_order_positive: Whether c > 0 somewhere (the sign the comparison operator removes).
        trials: Number of random trials evaluated.
        skipped: Trials discarded because w was negative somewhere.
        counterexample: The first trial violating the minimum principle, if any.
        stencil_violation: Where the off-diagonal sign test fails, if it does.
    """

    diagonal_positive: bool
    off_diagonal_nonpositive: bool
    row_sums_nonnegative: bool
    max_off_diagonal: float
    min_row_sum: float
    zeroth_order_positive: bool
    trials: int
    skipped: int
    counterexample: Optional[Counterexample] = None
    stencil_violation: Optional[StencilViolation] = None

    @property
    def structure_ok(self) -> bool:
        return (
            self.diagonal_positive
            and self.off_diagonal_nonpositive
            and self.row_sums_nonnegative
        )

    @property
    def passed(self) -> bool:
        return self.structure_ok and self.counterexample is None

    def as_dict(self) -> Dict[str, Union[bool, int, float, str]]:
        data: Dict[str, Union[bool, int, float, str]] = {
            "diagonal_positive": self.diagonal_positive,
            "off_diagonal_nonpositive": self.off_diagonal_nonpositive,
            "row_sums_nonnegative": self.row_sums_nonnegative,
            "max_off_diagonal": self.max_off_diagonal,
            "min_row_sum": self.min_row_sum,
            "zeroth_order_positive": self.zeroth_order_positive,
            "trials": self.trials,
            "skipped": self.skipped,
            "counterexample_found": self.counterexample is not None,
        }
        if self.counterexample is not None:
            data["counterexample_trial"] = self.counterexample.trial
            data["counterexample_interior_min"] = self.counterexample.interior_min
            data["counterexample_boundary_min"] = self.counterexample.boundary_min
        if self.stencil_violation is not None:
            data["stencil_violation_row"] = "%d,%d" % self.stencil_violation.row
            data["stencil_violation_column"] = "%d,%d" % self.stencil_violation.column
            data["stencil_violation_value"] = self.stencil_violation.value
        return data


@_timed("check_discrete_max_principle")
def check_discrete_max_principle(
    op: DiscreteOperator,
    trials: int = 10000,
    seed: int = 20240101,
    tol: float = 1e-12,
    batch_size: int = 250,
) -> MaxPrincipleReport:
    """
    Checks the discrete weak minimum principle of the interior operator.

    The structure of M = -(L - c+) on interior rows is tested for positive
    diagonal, nonpositive off-diagonals and nonnegative row sums. The search
    draws boundary data in [1, 2] on the bed and surface rows and a source
    f <= 0, solves Lw = f at interior nodes and keeps trials with w >= 0. A
    trial whose interior minimum is below the boundary minimum by more than
    tol * max|w| is returned as a counterexample.
    The largest positive off-diagonal, if any, is reported with its nodes.

    Args:
        op (DiscreteOperator): The assembled operator.
        trials (int, optional): Number of random trials. Defaults to 10000.
        seed (int, optional): Seed of the random generator. Defaults to 20240101.
        tol (float, optional): Relative tolerance of the comparison. Defaults to 1e-12.
        batch_size (int, optional): Trials solved per factorization sweep. Defaults to 250.

    Returns:
        MaxPrincipleReport: The report.
    """
    grid = op.grid
    interior = op.interior_rows
    boundary = op.boundary_rows
    operator = sparse.csr_matrix(op.interior_operator)

    c_values = numpy.ravel(op.c)
    positive_part = numpy.maximum(c_values, 0.0)
    comparison = -(operator - sparse.diags(positive_part))
    rows = sparse.csr_matrix(comparison[interior])

    diagonal = numpy.asarray(rows[:, interior].diagonal())
    off_diagonal = rows - sparse.csr_matrix(
        (diagonal, (numpy.arange(interior.size), interior)),
        shape=rows.shape,
    )
    scale = max(float(numpy.abs(diagonal).max()), 1.0)
    max_off_diagonal = float(off_diagonal.max()) if off_diagonal.nnz else 0.0
    min_row_sum = float(numpy.asarray(rows.sum(axis=1)).min())
    stencil_violation = None
    if max_off_diagonal > _STRUCTURE_TOLERANCE * scale:
        entries = off_diagonal.tocoo()
        worst = int(numpy.argmax(entries.data))
        stencil_violation = StencilViolation(
            row=divmod(int(interior[entries.row[worst]]), grid.nq),
            column=divmod(int(entries.col[worst]), grid.nq),
            value=float(entries.data[worst]),
        )
        _logger.warning(
            "Positive off-diagonal %.6e couples node %s to node %s",
            stencil_violation.value,
            stencil_violation.row,
            stencil_violation.column,
        )

    generator = numpy.random.default_rng(seed)
    operator_ii = sparse.csc_matrix(operator[interior][:, interior])
    operator_ib = sparse.csr_matrix(operator[interior][:, boundary])
    factor = sparse_linalg.splu(operator_ii)
    source_scale = 0.1 * float(numpy.abs(operator_ii.diagonal()).mean())

    evaluated = 0
    skipped = 0
    counterexample: Optional[Counterexample] = None
    while evaluated + skipped < trials and counterexample is None:
        count = min(batch_size, trials - evaluated - skipped)
        boundary_values = generator.uniform(1.0, 2.0, size=(boundary.size, count))
        source = -source_scale * generator.uniform(0.0, 1.0, size=(interior.size, count))
        interior_values = factor.solve(source - operator_ib @ boundary_values)

        for column in range(count):
            w_interior = interior_values[:, column]
            w_boundary = boundary_values[:, column]
            if w_interior.min() < 0.0:
                skipped += 1
                continue

            trial = evaluated + skipped
            evaluated += 1
            size = max(float(w_interior.max()), float(w_boundary.max()))
            interior_min = float(w_interior.min())
            boundary_min = float(w_boundary.min())
            if interior_min < boundary_min - tol * size:
                w = numpy.empty(grid.np * grid.nq)
                w[interior] = w_interior
                w[boundary] = w_boundary
                counterexample = Counterexample(
                    trial=trial,
                    w=w.reshape(grid.shape),
                    interior_min=interior_min,
                    boundary_min=boundary_min,
                )
                break

    if skipped:
        _logger.warning("%d of %d random trials had negative values and were skipped", skipped, evaluated + skipped)
    if counterexample is not None:
        _logger.warning(
            "Minimum principle violated at trial %d: interior min %.6e < boundary min %.6e",
            counterexample.trial,
            counterexample.interior_min,
            counterexample.boundary_min,
        )

    return MaxPrincipleReport(
        diagonal_positive=bool(numpy.all(diagonal > 0.0)),
        off_diagonal_nonpositive=max_off_diagonal <= _STRUCTURE_TOLERANCE * scale,
        row_sums_nonnegative=min_row_sum >= -_STRUCTURE_TOLERANCE * scale,
        max_off_diagonal=max_off_diagonal,
        min_row_sum=min_row_sum,
        zeroth_order_positive=bool(numpy.any(c_values > 0.0)),
        trials=evaluated,
        skipped=skipped,
        counterexample=counterexample,
        stencil_violation=stencil_violation,
    )
