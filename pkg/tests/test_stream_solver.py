# MODULES
import math

# NUMPY
import numpy

# PYSTRAT_WAVE
from pystrat_wave import (
    BifurcationRoot,
    FluidParameters,
    FreeBoundaryReport,
    LaminarFlow,
    NoConvergence,
    SingularMapping,
    StagnationOnSurface,
    StreamSolution,
    SurfaceShape,
    SurfaceStagnation,
    bernoulli_residual,
    bifurcation_parameters,
    dispersion_lambdas,
    find_stagnation_depths,
    laminar_psi,
    laminar_stream_solution,
    locate_stagnation_points,
    make_sigma_grid,
    solve_dirichlet,
    solve_free_boundary,
    solve_sigma_poisson,
    surface_slope_check,
)

# TESTS
from tests._base import TestCase


class TestSurfaceShape(TestCase):
    def test_mean(self) -> None:
        # WHEN
        shape = SurfaceShape(eta=numpy.array([1.0, 2.0, 3.0, 2.0]))

        # THEN
        self.assertEqual(shape.mean, 2.0)

    def test_rejects_non_positive(self) -> None:
        # THEN
        with self.assertRaises(SingularMapping):
            SurfaceShape(eta=numpy.array([1.0, -0.1, 1.0]))


class TestDirichletSolve(TestCase):
    def test_flat_surface_matches_laminar_flow(self) -> None:
        for params in (self.homogeneous_params, self.stratified_params):
            # GIVEN
            grid = make_sigma_grid(nq=16, nt=17)
            flow = LaminarFlow(params=params)

            # WHEN
            psi = solve_dirichlet(numpy.full(16, params.depth), params, grid)

            # THEN
            y = numpy.asarray(grid.p_values) * params.depth
            expected = numpy.asarray(laminar_psi(flow, y))
            numpy.testing.assert_allclose(psi, numpy.tile(expected[:, None], (1, 16)), atol=1e-10)

    def test_poisson_on_wavy_surface(self) -> None:
        # GIVEN
        grid = make_sigma_grid(nq=32, nt=33)
        x = numpy.asarray(grid.q_values)
        eta = 1.0 + 0.1 * numpy.cos(x)
        y = numpy.outer(grid.p_values, eta)
        # psi = y (y - eta) vanishes on both boundaries
        source = 2.0 + 0.1 * y * numpy.cos(x)[None, :]

        # WHEN
        psi = solve_sigma_poisson(eta, grid, source=source, bottom=0.0, top=0.0)

        # THEN
        numpy.testing.assert_allclose(psi, y * (y - eta[None, :]), atol=1e-3)
        self.assertEqual(float(numpy.abs(psi[0]).max()), 0.0)
        self.assertEqual(float(numpy.abs(psi[-1]).max()), 0.0)

    def test_shape_mismatch(self) -> None:
        # THEN
        with self.assertRaises(ValueError):
            solve_dirichlet(numpy.ones(8), self.homogeneous_params, make_sigma_grid(nq=16, nt=9))


class TestBernoulliResidual(TestCase):
    def test_laminar_flow_has_zero_residual(self) -> None:
        # GIVEN
        grid = make_sigma_grid(nq=16, nt=9)
        solution = laminar_stream_solution(self.homogeneous_params, grid)

        # WHEN
        residual = bernoulli_residual(solution.psi, solution.eta, self.homogeneous_params)

        # THEN
        self.assertLess(float(numpy.abs(residual).max()), 1e-10)

    def test_residual_measures_head(self) -> None:
        # GIVEN
        grid = make_sigma_grid(nq=16, nt=9)
        solution = laminar_stream_solution(self.homogeneous_params, grid)
        params = FluidParameters(p0=-1.0, depth=1.0, B=1.0, Q=self.homogeneous_params.Q + 0.5)

        # WHEN
        residual = bernoulli_residual(solution.psi, solution.eta, params)

        # THEN
        numpy.testing.assert_allclose(residual, -0.5, atol=1e-10)


class TestSolveFreeBoundary(TestCase):
    def test_flat_start_is_a_solution(self) -> None:
        # GIVEN
        grid = make_sigma_grid(nq=16, nt=9)
        params = self.homogeneous_params

        # WHEN
        solution, report = solve_free_boundary(numpy.full(16, params.depth), params, grid)

        # THEN
        self.assertIsInstance(report, FreeBoundaryReport)
        self.assertTrue(report.converged)
        self.assertEqual(report.iterations, 0)
        self.assertEqual(report.modes, 5)
        numpy.testing.assert_allclose(solution.eta, params.depth, atol=1e-12)

    def test_small_wave_from_bifurcation(self) -> None:
        # GIVEN
        params = bifurcation_parameters(self.homogeneous_params, BifurcationRoot.MINUS)
        grid = make_sigma_grid(nq=16, nt=9)
        x = numpy.asarray(grid.q_values)

        # WHEN
        solution, report = solve_free_boundary(
            params.depth + 0.01 * numpy.cos(x),
            params,
            grid,
            free_q=True,
            workers=2,
        )

        # THEN
        self.assertTrue(report.converged)
        self.assertLess(report.residual, 1e-9)
        self.assertAlmostEqual(float(solution.eta.max() - solution.eta.min()), 0.02, delta=2e-3)
        self.assertEqual(solution.params.Q, report.Q)
        residual = bernoulli_residual(solution.psi, solution.eta, solution.params)
        self.assertLess(float(numpy.abs(residual).max()), 1e-9)

        slope = surface_slope_check(solution)
        self.assertLess(slope.oddness_defect, 1e-9)
        self.assertLess(slope.max_discrepancy, 1e-2)

    def test_no_convergence(self) -> None:
        # GIVEN
        params = self.homogeneous_params
        grid = make_sigma_grid(nq=16, nt=9)
        x = numpy.asarray(grid.q_values)

        # WHEN
        with self.assertRaises(NoConvergence) as context:
            solve_free_boundary(params.depth + 0.2 * numpy.cos(x), params, grid, max_iter=1)

        # THEN
        self.assertIsInstance(context.exception.best, StreamSolution)
        self.assertFalse(context.exception.report.converged)


class TestStagnationPoints(TestCase):
    def test_laminar_stagnation_line(self) -> None:
        # GIVEN
        generator = numpy.random.default_rng(11)

        for _ in range(3):
            seed = FluidParameters(
                p0=-1.0,
                depth=generator.uniform(2.2, 3.0),
                B=1.0,
                gamma=generator.uniform(15.0, 30.0),
            )
            params = bifurcation_parameters(seed, BifurcationRoot.PLUS)
            lambda_minus, lambda_plus = dispersion_lambdas(params)
            solution = laminar_stream_solution(params, make_sigma_grid(nq=128, nt=65))

            # WHEN
            points = locate_stagnation_points(solution)

            # THEN
            self.assertLess(lambda_minus, 0.0)
            self.assertGreater(lambda_plus, 0.0)
            expected = params.depth - lambda_plus / params.gamma
            self.assertEqual(len(points), 128)
            for point in points:
                self.assertAlmostEqual(point.y, expected, delta=1e-6)
                self.assertAlmostEqual(point.depth_below_trough, params.depth - expected, delta=1e-6)
                self.assertGreaterEqual(point.x, -math.pi)
                self.assertLess(point.x, math.pi)
            depth = find_stagnation_depths(LaminarFlow(params=params)).depths[0]
            self.assertAlmostEqual(points[0].y, depth, delta=1e-8)

    def test_monotone_flow_has_none(self) -> None:
        # GIVEN
        solution = laminar_stream_solution(self.homogeneous_params, make_sigma_grid(nq=16, nt=9))

        # THEN
        self.assertEqual(locate_stagnation_points(solution), [])

    def test_stagnation_near_surface(self) -> None:
        # GIVEN
        base = FluidParameters(p0=-1.0, depth=2.0, B=1.0, gamma=20.0)
        flow = LaminarFlow.from_lambda(base, 0.4)
        solution = laminar_stream_solution(flow.params, make_sigma_grid(nq=16, nt=17))

        # THEN
        with self.assertRaises(StagnationOnSurface):
            locate_stagnation_points(solution)


class TestSurfaceSlope(TestCase):
    def test_flat_surface(self) -> None:
        # GIVEN
        solution = laminar_stream_solution(self.stratified_params, make_sigma_grid(nq=16, nt=9))

        # WHEN
        report = surface_slope_check(solution)

        # THEN
        self.assertLess(report.max_discrepancy, 1e-12)
        self.assertLess(report.oddness_defect, 1e-12)

    def test_surface_stagnation(self) -> None:
        # GIVEN
        base = FluidParameters(p0=-1.0, depth=2.0, B=1.0, gamma=20.0)
        flow = LaminarFlow.from_lambda(base, 0.0)
        solution = laminar_stream_solution(flow.params, make_sigma_grid(nq=16, nt=9))

        # THEN
        with self.assertRaises(SurfaceStagnation):
            surface_slope_check(solution)

    def test_surface_slope_is_exact_for_band_limited_surfaces(self) -> None:
        # GIVEN
        grid = make_sigma_grid(nq=16, nt=9)
        x = numpy.asarray(grid.q_values)
        flat = laminar_stream_solution(self.homogeneous_params, grid)
        solution = StreamSolution(
            grid=grid,
            eta=flat.eta + 0.01 * numpy.cos(x),
            psi=flat.psi,
            params=flat.params,
        )

        # WHEN
        report = surface_slope_check(solution)

        # THEN
        numpy.testing.assert_allclose(report.from_surface, -0.01 * numpy.sin(x), atol=1e-14)
        self.assertLess(report.oddness_defect, 1e-14)
