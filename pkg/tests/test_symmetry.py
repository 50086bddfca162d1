# MODULES
import math

# NUMPY
import numpy

# PYSTRAT_WAVE
from pystrat_wave import (
    BifurcationRoot,
    EdgePointTable,
    FluidParameters,
    HeightField,
    LaminarFlow,
    ReflectionCase,
    ReflectionReport,
    StreamSolution,
    SurfaceStagnation,
    TroughNotAligned,
    align_phase,
    asymmetry_norm,
    bifurcation_parameters,
    check_monotone_streamlines,
    laminar_height_field,
    laminar_stream_solution,
    make_grid,
    make_sigma_grid,
    moving_plane_sweep_height,
    moving_plane_sweep_stream,
    reflect_height,
    reflect_stream,
    serrin_edge_check,
    solve_free_boundary,
)
from pystrat_wave._core import FloatArray

# TESTS
from tests._base import TestCase


def _height_field(surface: FloatArray) -> HeightField:
    grid = make_grid(nq=surface.size, np=9, p0=-1.0)
    ramp = numpy.linspace(0.0, 1.0, grid.np)
    return HeightField(grid=grid, values=ramp[:, None] * surface[None, :])


def _q(nq: int = 16) -> FloatArray:
    return numpy.asarray(make_grid(nq=nq, np=9, p0=-1.0).q_values)


class TestMovingPlaneSweepHeight(TestCase):
    def test_laminar_field_reaches_zero(self) -> None:
        # GIVEN
        grid = make_grid(nq=16, np=9, p0=-1.0)
        h = laminar_height_field(self.homogeneous_params, self.homogeneous_profile, grid)

        # WHEN
        report = moving_plane_sweep_height(h)

        # THEN
        self.assertIsInstance(report, ReflectionReport)
        self.assertEqual(report.case_tag, ReflectionCase.REACHED_ZERO)
        self.assertEqual(report.lambda0, 0.0)
        self.assertEqual(report.asymmetry_norm, 0.0)
        self.assertAlmostEqual(report.sweep_step, math.pi / 16, places=14)

    def test_symmetric_wave_reaches_zero(self) -> None:
        # GIVEN
        h = _height_field(1.0 + 0.1 * numpy.cos(_q()))

        # WHEN
        report = moving_plane_sweep_height(h, tol=1e-12, workers=2)

        # THEN
        self.assertEqual(report.case_tag, ReflectionCase.REACHED_ZERO)
        self.assertAlmostEqual(report.lambda0_left, 0.0, places=14)
        self.assertAlmostEqual(report.lambda0_right, 0.0, places=14)
        self.assertLess(report.asymmetry_norm, 1e-14)
        self.assertGreaterEqual(report.min_w, -1e-12)
        self.assertIsNone(report.touching_point)

    def test_asymmetric_wave_is_blocked(self) -> None:
        # GIVEN
        q = _q(32)
        h = _height_field(1.0 + 0.05 * (numpy.cos(q) + 0.3 * numpy.sin(2.0 * q)))

        # WHEN
        report = moving_plane_sweep_height(h)

        # THEN
        self.assertNotEqual(report.case_tag, ReflectionCase.REACHED_ZERO)
        self.assertGreater(report.asymmetry_norm, 1e-3)
        self.assertLess(report.min_w, 0.0)
        self.assertGreater(report.lambda0, -math.pi)
        self.assertLess(report.lambda0, math.pi)
        self.assertIn(report.as_dict()["case_tag"], ("InteriorTouching", "Indeterminate"))

    def test_sweep_workers_agree(self) -> None:
        # GIVEN
        q = _q(32)
        h = _height_field(1.0 + 0.05 * (numpy.cos(q) + 0.3 * numpy.sin(2.0 * q)))

        # WHEN
        serial = moving_plane_sweep_height(h, workers=1)
        threaded = moving_plane_sweep_height(h, workers=4)

        # THEN
        self.assertEqual(serial.as_dict(), threaded.as_dict())

    def test_trough_not_aligned(self) -> None:
        # GIVEN
        h = _height_field(1.0 + 0.1 * numpy.cos(_q())).shifted(3)

        # THEN
        with self.assertRaises(TroughNotAligned):
            moving_plane_sweep_height(h, align=False)
        self.assertEqual(moving_plane_sweep_height(h).case_tag, ReflectionCase.REACHED_ZERO)

    def test_align_phase(self) -> None:
        # GIVEN
        h = _height_field(1.0 + 0.1 * numpy.cos(_q())).shifted(5)

        # WHEN
        aligned = align_phase(h)

        # THEN
        self.assertEqual(int(numpy.argmin(aligned.surface)), 0)


class TestReflectHeight(TestCase):
    def test_values(self) -> None:
        # GIVEN
        q = _q()
        h = _height_field(1.0 + 0.1 * numpy.cos(q) + 0.02 * numpy.sin(q))
        dq = 2.0 * math.pi / 16

        # WHEN
        at_zero = reflect_height(h, 0.0)
        near_trough = reflect_height(h, -math.pi + 0.5 * dq)

        # THEN
        numpy.testing.assert_allclose(at_zero[:, 4], h.values[:, 4] - h.values[:, 12], atol=1e-15)
        numpy.testing.assert_allclose(near_trough[-1, 1], h.values[-1, 1] - h.values[-1, 0], atol=1e-15)
        numpy.testing.assert_allclose(at_zero[0], 0.0)

    def test_off_half_grid(self) -> None:
        # GIVEN
        h = _height_field(1.0 + 0.1 * numpy.cos(_q()))

        # THEN
        with self.assertRaises(ValueError):
            reflect_height(h, 0.1)


class TestAsymmetryNorm(TestCase):
    def test_arrays(self) -> None:
        # GIVEN
        q = _q()

        # THEN
        self.assertLess(asymmetry_norm(numpy.cos(q)), 1e-15)
        self.assertAlmostEqual(asymmetry_norm(numpy.sin(q)), 2.0, places=14)


class TestMonotoneStreamlines(TestCase):
    def test_single_crest(self) -> None:
        # GIVEN
        h = _height_field(1.0 + 0.1 * numpy.cos(_q()))

        # WHEN
        report = check_monotone_streamlines(h)

        # THEN
        self.assertTrue(report.monotone)
        self.assertTrue(report.strict_near_trough)
        self.assertTrue(report.hypothesis_met)
        self.assertEqual(report.as_dict()["monotone_violation"], "none")

    def test_two_crests(self) -> None:
        # GIVEN
        h = _height_field(1.0 - 0.1 * numpy.cos(2.0 * _q()))

        # WHEN
        report = check_monotone_streamlines(h)

        # THEN
        self.assertFalse(report.monotone)
        self.assertIsNotNone(report.violation)
        self.assertTrue(report.strict_near_trough)
        self.assertFalse(report.hypothesis_met)

    def test_flat_near_trough(self) -> None:
        # GIVEN
        grid = make_grid(nq=16, np=9, p0=-1.0)
        h = laminar_height_field(self.homogeneous_params, self.homogeneous_profile, grid)

        # WHEN
        report = check_monotone_streamlines(h)

        # THEN
        self.assertTrue(report.monotone)
        self.assertFalse(report.strict_near_trough)
        self.assertEqual(report.strict_violation, (1, 1))


class TestReflectStream(TestCase):
    def test_laminar_flow(self) -> None:
        # GIVEN
        solution = laminar_stream_solution(self.homogeneous_params, make_sigma_grid(nq=16, nt=9))

        # WHEN
        m = reflect_stream(solution, 0.0)

        # THEN
        inside = numpy.arange(1, 8)
        self.assertEqual(m.shape, (9, 16))
        self.assertLess(float(numpy.abs(m[:, inside]).max()), 1e-12)
        self.assertTrue(numpy.isnan(m[:, 0]).all())
        self.assertTrue(numpy.isnan(m[:, 8:]).all())

    def test_off_half_grid(self) -> None:
        # GIVEN
        solution = laminar_stream_solution(self.homogeneous_params, make_sigma_grid(nq=16, nt=9))

        # THEN
        with self.assertRaises(ValueError):
            reflect_stream(solution, 0.1)


class TestStreamDiagnostics(TestCase):
    @classmethod
    def setUpClass(cls) -> None:
        params = bifurcation_parameters(cls.homogeneous_params, BifurcationRoot.MINUS)
        grid = make_sigma_grid(nq=16, nt=9)
        x = numpy.asarray(grid.q_values)
        cls.wave, _ = solve_free_boundary(params.depth + 0.01 * numpy.cos(x), params, grid, free_q=True)

    def test_domain_sweep_reaches_zero(self) -> None:
        # WHEN
        report = moving_plane_sweep_stream(self.wave)

        # THEN
        self.assertEqual(report.case_tag, ReflectionCase.REACHED_ZERO)
        self.assertLess(asymmetry_norm(self.wave), 1e-9)

    def test_domain_sweep_of_asymmetric_surface(self) -> None:
        # GIVEN
        grid = self.wave.grid
        x = numpy.asarray(grid.q_values)
        eta = 1.0 + 0.05 * (numpy.cos(x) + 0.3 * numpy.sin(2.0 * x))
        solution = StreamSolution(grid=grid, eta=eta, psi=numpy.zeros(grid.shape), params=self.wave.params)

        # WHEN
        report = moving_plane_sweep_stream(solution)

        # THEN
        self.assertNotEqual(report.case_tag, ReflectionCase.REACHED_ZERO)

    def test_edge_table_passes(self) -> None:
        # WHEN
        table = serrin_edge_check(self.wave)

        # THEN
        self.assertIsInstance(table, EdgePointTable)
        self.assertTrue(table.passed)
        self.assertEqual(table.orientation, -1)
        self.assertLess(abs(table.eta_x.value), 1e-9)
        self.assertEqual(table.as_dict()["edge_violations"], "none")
        for name, entry in table.entries().items():
            self.assertGreater(entry.error, 0.0)
            self.assertLessEqual(abs(entry.value), 10.0 * entry.error, name)

    def test_edge_table_of_asymmetric_field(self) -> None:
        # GIVEN
        grid = self.wave.grid
        x = numpy.asarray(grid.q_values)
        t = numpy.asarray(grid.p_values)
        tilted = StreamSolution(
            grid=grid,
            eta=self.wave.eta,
            psi=self.wave.psi + 1e-3 * numpy.outer(t**2, numpy.sin(x) + numpy.sin(2.0 * x)),
            params=self.wave.params,
        )

        # WHEN
        table = serrin_edge_check(tilted)

        # THEN
        self.assertFalse(table.passed)
        self.assertIn("m_x", table.violations)
        self.assertLessEqual(abs(table.m_xx.value), 10.0 * table.m_xx.error)

    def test_edge_table_at_surface_stagnation(self) -> None:
        # GIVEN
        base = FluidParameters(p0=-1.0, depth=2.0, B=1.0, gamma=20.0)
        flow = LaminarFlow.from_lambda(base, 0.0)
        solution = laminar_stream_solution(flow.params, make_sigma_grid(nq=16, nt=9))

        # THEN
        with self.assertRaises(SurfaceStagnation):
            serrin_edge_check(solution)
