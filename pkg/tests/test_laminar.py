# MODULES
import math

# NUMPY
import numpy

# PYSTRAT_WAVE
from pystrat_wave import (
    BifurcationRoot,
    FluidParameters,
    LaminarFlow,
    StagnationCase,
    bifurcation_parameters,
    dispersion_lambdas,
    dispersion_residual,
    find_stagnation_depths,
    laminar_psi,
    laminar_psi_y,
    laminar_psi_y_factored,
    laminar_q,
)

# TESTS
from tests._base import TestCase


def _random_params(generator: numpy.random.Generator) -> FluidParameters:
    return FluidParameters(
        p0=-generator.uniform(0.1, 3.0),
        depth=generator.uniform(0.2, 3.0),
        B=generator.uniform(0.5, 2.0),
        A=generator.uniform(-0.5, 0.5),
        gamma=generator.uniform(-5.0, 5.0),
        k=float(generator.integers(1, 4)),
    )


class TestLaminarPsi(TestCase):
    def test_boundary_values_and_equation(self) -> None:
        # GIVEN
        generator = numpy.random.default_rng(7)

        for _ in range(100):
            params = _random_params(generator)
            flow = LaminarFlow(params=params)
            h = params.depth
            scale = abs(params.p0) + abs(params.gamma) * h**2 + abs(params.A) * params.g * h**3

            # WHEN
            bottom = float(laminar_psi(flow, 0.0))
            top = float(laminar_psi(flow, h))
            y = generator.uniform(0.1 * h, 0.9 * h)
            # psi_yy = gamma - A*g*y integrated from the bed
            rise = float(laminar_psi_y(flow, y)) - float(laminar_psi_y(flow, 0.0))
            speed_scale = abs(params.p0) / h + abs(params.gamma) * h + abs(params.A) * params.g * h**2

            # THEN
            self.assertLess(abs(bottom + params.p0), 1e-12 * scale)
            self.assertLess(abs(top), 1e-12 * scale)
            self.assertLess(
                abs(rise - params.gamma * y + params.A * params.g * y**2 / 2.0),
                1e-12 * speed_scale,
            )

    def test_surface_speed(self) -> None:
        # GIVEN
        flow = LaminarFlow(params=self.stratified_params)

        # WHEN
        surface = float(laminar_psi_y(flow, flow.params.depth))

        # THEN
        self.assertAlmostEqual(surface, flow.lambda_, places=13)

    def test_factored_form(self) -> None:
        # GIVEN
        flow = LaminarFlow(params=self.stratified_params)
        y = numpy.linspace(0.0, 1.0, 11)

        # THEN
        numpy.testing.assert_allclose(
            laminar_psi_y_factored(flow, y),
            laminar_psi_y(flow, y),
            rtol=1e-12,
            atol=1e-13,
        )

    def test_vectorized(self) -> None:
        # GIVEN
        flow = LaminarFlow(params=self.homogeneous_params)

        # WHEN
        values = laminar_psi(flow, numpy.array([0.0, 0.5, 1.0]))

        # THEN
        numpy.testing.assert_allclose(values, [1.0, 0.5, 0.0], atol=1e-15)

    def test_out_of_layer(self) -> None:
        # GIVEN
        flow = LaminarFlow(params=self.homogeneous_params)

        # THEN
        with self.assertRaises(ValueError):
            laminar_psi(flow, 1.5)
        with self.assertRaises(ValueError):
            laminar_psi_y(flow, -0.1)


class TestDispersion(TestCase):
    def test_roots_and_vieta_product(self) -> None:
        # GIVEN
        generator = numpy.random.default_rng(11)

        for _ in range(100):
            params = _random_params(generator)
            k, h = params.k, params.depth

            # WHEN
            minus, plus = dispersion_lambdas(params)

            # THEN
            self.assertGreater(plus, 0.0)
            self.assertLess(minus, 0.0)
            for root in (minus, plus):
                scale = k / math.tanh(k * h) * root**2 + params.g * params.B
                self.assertLess(abs(dispersion_residual(params, root)), 1e-12 * scale)
            product = -params.g * params.B * math.tanh(k * h) / k
            self.assertLess(abs(plus * minus - product), 1e-12 * abs(product))

    def test_surface_tension(self) -> None:
        # GIVEN
        params = FluidParameters(p0=-1.0, depth=1.0, B=1.0, sigma=-0.5)

        # WHEN
        minus, plus = dispersion_lambdas(params)

        # THEN
        expected = math.sqrt((9.8 - 0.5) * math.tanh(1.0))
        self.assertAlmostEqual(plus, expected, places=12)
        self.assertAlmostEqual(minus, -expected, places=12)

    def test_no_pair_without_restoring_force(self) -> None:
        # GIVEN
        params = FluidParameters(p0=-1.0, depth=1.0, B=1.0, sigma=-10.0)

        # THEN
        with self.assertRaises(ValueError):
            dispersion_lambdas(params)


class TestStagnationDepths(TestCase):
    def test_plus_root_has_stagnation_line(self) -> None:
        # GIVEN
        seed = FluidParameters(p0=-1.0, depth=2.0, B=1.0, gamma=20.0)
        params = bifurcation_parameters(seed, BifurcationRoot.PLUS)
        flow = LaminarFlow(params=params)

        # WHEN
        classification = find_stagnation_depths(flow)

        # THEN
        self.assertAlmostEqual(flow.lambda_, dispersion_lambdas(seed)[1], places=12)
        self.assertEqual(classification.case_tag, StagnationCase.STAGNATION_FOR_LAMBDA_PLUS)
        self.assertEqual(len(classification.depths), 1)
        self.assertAlmostEqual(classification.depths[0], 2.0 - flow.lambda_ / 20.0, places=12)
        self.assertFalse(classification.tangency)
        self.assertFalse(flow.is_monotone)

        scale = float(numpy.abs(laminar_psi_y(flow, numpy.linspace(0.0, 2.0, 101))).max())
        self.assertLess(abs(float(laminar_psi_y(flow, classification.depths[0]))), 1e-10 * scale)

    def test_minus_root_without_vorticity(self) -> None:
        # GIVEN
        flow = LaminarFlow(params=bifurcation_parameters(self.homogeneous_params, BifurcationRoot.MINUS))

        # WHEN
        classification = find_stagnation_depths(flow)

        # THEN
        self.assertEqual(classification.case_tag, StagnationCase.NO_STAGNATION_SURFACE_OR_BALANCE)
        self.assertEqual(classification.depths, ())
        self.assertTrue(flow.is_monotone)

    def test_double_root_reports_tangency(self) -> None:
        # GIVEN
        base = FluidParameters(p0=-1.0, depth=2.0, B=1.0, A=1.0, gamma=9.8)
        flow = LaminarFlow.from_lambda(base, -4.9)

        # WHEN
        classification = find_stagnation_depths(flow)

        # THEN
        self.assertTrue(classification.tangency)
        self.assertEqual(len(classification.depths), 1)
        self.assertAlmostEqual(classification.depths[0], 1.0, places=10)
        self.assertEqual(classification.case_tag, StagnationCase.STAGNATION_FOR_LAMBDA_MINUS)
        self.assertAlmostEqual(classification.balance_values[0], 14.7, places=9)

    def test_depths_lie_below_surface(self) -> None:
        # GIVEN
        generator = numpy.random.default_rng(3)

        for _ in range(50):
            params = _random_params(generator)

            # WHEN
            classification = find_stagnation_depths(LaminarFlow(params=params))

            # THEN
            for depth in classification.depths:
                self.assertGreaterEqual(depth, 0.0)
                self.assertLess(depth, params.depth)


class TestBifurcationParameters(TestCase):
    def test_minus_root(self) -> None:
        # WHEN
        params = bifurcation_parameters(self.homogeneous_params, BifurcationRoot.MINUS)

        # THEN
        self.assertLess(params.p0, 0.0)
        self.assertLess(abs(dispersion_residual(params, params.surface_speed)), 1e-12)
        self.assertAlmostEqual(params.Q, laminar_q(params), places=12)

    def test_plus_root_needs_vorticity(self) -> None:
        # THEN
        with self.assertRaises(ValueError):
            bifurcation_parameters(self.homogeneous_params, BifurcationRoot.PLUS)
