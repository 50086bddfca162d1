# MODULES
import dataclasses

# NUMPY
import numpy

# SCIPY
import scipy.sparse as sparse

# PYSTRAT_WAVE
from pystrat_wave import (
    MaxPrincipleReport,
    StencilViolation,
    assemble_linearization,
    check_discrete_max_principle,
    laminar_height_field,
    make_grid,
)

# TESTS
from tests._base import TestCase


class TestDiscreteMaxPrinciple(TestCase):
    def test_laplacian_structure(self) -> None:
        # GIVEN
        params = self.homogeneous_params
        grid = make_grid(nq=16, np=9, p0=params.p0)
        h = laminar_height_field(params, self.homogeneous_profile, grid)
        operator = assemble_linearization(h, params, self.homogeneous_profile)

        # WHEN
        report = check_discrete_max_principle(operator, trials=500, seed=1)

        # THEN
        self.assertIsInstance(report, MaxPrincipleReport)
        self.assertTrue(report.structure_ok)
        self.assertFalse(report.zeroth_order_positive)
        self.assertIsNone(report.counterexample)
        self.assertTrue(report.passed)
        self.assertEqual(report.trials + report.skipped, 500)

    def test_stratified_linearization(self) -> None:
        # GIVEN
        params = self.stratified_params
        grid = make_grid(nq=16, np=9, p0=params.p0)
        h = laminar_height_field(params, self.stratified_profile, grid)
        operator = assemble_linearization(h, params, self.stratified_profile)

        # WHEN
        report = check_discrete_max_principle(operator, trials=10000)

        # THEN
        self.assertTrue(report.zeroth_order_positive)
        self.assertTrue(report.structure_ok)
        self.assertIsNone(report.counterexample)
        self.assertTrue(report.passed)

    def test_corrupted_stencil(self) -> None:
        # GIVEN
        params = self.homogeneous_params
        grid = make_grid(nq=16, np=9, p0=params.p0)
        h = laminar_height_field(params, self.homogeneous_profile, grid)
        operator = assemble_linearization(h, params, self.homogeneous_profile)

        corrupted = operator.interior_operator.tolil()
        row = grid.nq + 3
        corrupted[row, row] = 3.0 * corrupted[row, row]
        operator = dataclasses.replace(operator, interior_operator=sparse.csr_matrix(corrupted))

        # WHEN
        report = check_discrete_max_principle(operator, trials=1000, seed=2)

        # THEN
        self.assertIsNotNone(report.counterexample)
        self.assertFalse(report.passed)
        assert report.counterexample is not None
        self.assertLess(report.counterexample.trial, 1000)
        self.assertLess(report.counterexample.interior_min, report.counterexample.boundary_min)
        self.assertEqual(report.counterexample.w.shape, grid.shape)
        self.assertTrue(report.as_dict()["counterexample_found"])

    def test_flipped_off_diagonal(self) -> None:
        # GIVEN
        params = self.homogeneous_params
        grid = make_grid(nq=16, np=9, p0=params.p0)
        h = laminar_height_field(params, self.homogeneous_profile, grid)
        operator = assemble_linearization(h, params, self.homogeneous_profile)

        corrupted = operator.interior_operator.tolil()
        row = grid.nq + 3
        corrupted[row, row + 1] = -corrupted[row, row + 1]
        operator = dataclasses.replace(operator, interior_operator=sparse.csr_matrix(corrupted))

        # WHEN
        report = check_discrete_max_principle(operator, trials=1000, seed=2)

        # THEN
        self.assertFalse(report.off_diagonal_nonpositive)
        self.assertFalse(report.passed)
        self.assertEqual(
            report.stencil_violation,
            StencilViolation(row=(1, 3), column=(1, 4), value=report.max_off_diagonal),
        )
        self.assertGreater(report.max_off_diagonal, 0.0)
        self.assertEqual(report.as_dict()["stencil_violation_row"], "1,3")

    def test_reproducible(self) -> None:
        # GIVEN
        params = self.stratified_params
        grid = make_grid(nq=16, np=9, p0=params.p0)
        h = laminar_height_field(params, self.stratified_profile, grid)
        operator = assemble_linearization(h, params, self.stratified_profile)

        # WHEN
        first = check_discrete_max_principle(operator, trials=300, seed=9)
        second = check_discrete_max_principle(operator, trials=300, seed=9)

        # THEN
        self.assertEqual(first.as_dict(), second.as_dict())
        numpy.testing.assert_equal(first.min_row_sum, second.min_row_sum)
