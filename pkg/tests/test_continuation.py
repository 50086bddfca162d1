# MODULES
from unittest import mock

# NUMPY
import numpy

# PYSTRAT_WAVE
from pystrat_wave import (
    BifurcationRoot,
    FluidParameters,
    BranchTerminated,
    NoConvergence,
    ReflectionCase,
    SolutionBranch,
    asymmetry_norm,
    continue_branch,
    moving_plane_sweep_height,
    pde_residual,
)

# TESTS
from tests._base import TestCase


class TestContinueBranch(TestCase):
    @classmethod
    def setUpClass(cls) -> None:
        cls.branch = continue_branch(
            seed_params=cls.homogeneous_params,
            profile=cls.homogeneous_profile,
            which=BifurcationRoot.MINUS,
            steps=10,
            ds=0.02,
            nq=16,
            np=9,
        )

    def test_branch_layout(self) -> None:
        # THEN
        self.assertIsInstance(self.branch, SolutionBranch)
        self.assertEqual(len(self.branch.points), 11)
        self.assertEqual(self.branch.which, BifurcationRoot.MINUS)
        self.assertEqual(self.branch.points[0].amplitude, 0.0)
        self.assertEqual(self.branch.meta()["steps"], 10)

    def test_amplitude_grows(self) -> None:
        # WHEN
        amplitudes = self.branch.amplitudes

        # THEN
        self.assertTrue(all(b > a for a, b in zip(amplitudes, amplitudes[1:])))

    def test_points_solve_the_equations(self) -> None:
        for point in self.branch.points[1:]:
            # WHEN
            residual = pde_residual(point.field, point.params, self.homogeneous_profile)

            # THEN
            self.assertLess(float(numpy.abs(residual).max()), 1e-8)
            self.assertEqual(point.params.Q, point.Q)

    def test_points_are_symmetric(self) -> None:
        for point in self.branch.points[1:]:
            # WHEN
            report = moving_plane_sweep_height(point.field, tol=1e-9)

            # THEN
            self.assertEqual(report.case_tag, ReflectionCase.REACHED_ZERO)
            self.assertLess(asymmetry_norm(point.field), 1e-9)

    def test_surface_tension_branch(self) -> None:
        # GIVEN
        params = FluidParameters(p0=-1.0, depth=1.0, B=1.0, sigma=-0.01)

        # WHEN
        branch = continue_branch(
            seed_params=params,
            profile=self.homogeneous_profile,
            which=BifurcationRoot.MINUS,
            steps=10,
            ds=0.02,
            nq=16,
            np=9,
        )

        # THEN
        self.assertEqual(len(branch.points), 11)
        for point in branch.points[1:]:
            self.assertEqual(point.params.sigma, -0.01)
            report = moving_plane_sweep_height(point.field, tol=1e-9)
            self.assertEqual(report.case_tag, ReflectionCase.REACHED_ZERO)
            self.assertLess(asymmetry_norm(point.field), 1e-9)

    def test_zero_steps_returns_laminar_state(self) -> None:
        # WHEN
        branch = continue_branch(
            seed_params=self.homogeneous_params,
            profile=self.homogeneous_profile,
            which=BifurcationRoot.MINUS,
            steps=0,
            ds=0.02,
            nq=16,
            np=9,
        )

        # THEN
        self.assertEqual(len(branch.points), 1)
        self.assertLess(branch.last.amplitude, 1e-12)


class TestContinueBranchErrors(TestCase):
    def test_plus_root_without_vorticity(self) -> None:
        # THEN
        with self.assertRaises(ValueError):
            continue_branch(
                seed_params=self.homogeneous_params,
                profile=self.homogeneous_profile,
                which=BifurcationRoot.PLUS,
                steps=1,
                ds=0.02,
                nq=16,
                np=9,
            )

    def test_invalid_step_bounds(self) -> None:
        # THEN
        with self.assertRaises(ValueError):
            continue_branch(
                seed_params=self.homogeneous_params,
                profile=self.homogeneous_profile,
                which=BifurcationRoot.MINUS,
                steps=1,
                ds=0.01,
                ds_min=0.1,
                nq=16,
                np=9,
            )

    def test_terminated_branch_keeps_accepted_points(self) -> None:
        # GIVEN
        failing = mock.patch(
            "pystrat_wave._continuation._correct",
            side_effect=NoConvergence("corrector failed"),
        )

        # WHEN
        with failing, self.assertRaises(BranchTerminated) as context:
            continue_branch(
                seed_params=self.homogeneous_params,
                profile=self.homogeneous_profile,
                which=BifurcationRoot.MINUS,
                steps=2,
                ds=0.02,
                ds_min=0.02,
                nq=16,
                np=9,
            )

        # THEN
        branch = context.exception.branch
        self.assertIsInstance(branch, SolutionBranch)
        self.assertEqual(len(branch.points), 1)
