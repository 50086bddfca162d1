# NUMPY
import numpy

# PYSTRAT_WAVE
from pystrat_wave import (
    BifurcationRoot,
    continue_branch,
    laminar_height_field,
    laminar_stream_solution,
    make_grid,
    make_sigma_grid,
)

# TESTS
from tests._base import TestCase


class TestRunRepository(TestCase):
    def test_height_field(self) -> None:
        # GIVEN
        grid = make_grid(nq=16, np=9, p0=self.stratified_params.p0)
        h = laminar_height_field(self.stratified_params, self.stratified_profile, grid)

        # WHEN
        path = self._repository.save_field(h)
        loaded = self._repository.load_height_field(path)

        # THEN
        self.assertTrue(loaded.grid.same_as(grid))
        numpy.testing.assert_array_equal(loaded.values, h.values)

    def test_height_field_header(self) -> None:
        # GIVEN
        path = self._run_dir / "field.csv"
        path.write_text("x,t,y\n0,0,0\n", encoding="utf-8")

        # THEN
        with self.assertRaises(ValueError):
            self._repository.load_height_field(path)

    def test_stream_solution(self) -> None:
        # GIVEN
        solution = laminar_stream_solution(self.stratified_params, make_sigma_grid(nq=16, nt=9))

        # WHEN
        paths = self._repository.save_stream_solution(solution, prefix="stream")
        loaded = self._repository.load_stream_solution(self._run_dir / "stream")

        # THEN
        self.assertEqual([path.name for path in paths], ["eta.csv", "psi.csv", "stream.meta"])
        numpy.testing.assert_array_equal(loaded.eta, solution.eta)
        numpy.testing.assert_array_equal(loaded.psi, solution.psi)
        self.assertEqual(loaded.params, solution.params)

    def test_branch(self) -> None:
        # GIVEN
        branch = continue_branch(
            seed_params=self.homogeneous_params,
            profile=self.homogeneous_profile,
            which=BifurcationRoot.MINUS,
            steps=1,
            ds=0.02,
            nq=16,
            np=9,
        )

        # WHEN
        directory = self._repository.save_branch(branch)
        loaded = self._repository.load_branch(directory)
        last = self._repository.last_branch_field()

        # THEN
        self.assertEqual(loaded.which, BifurcationRoot.MINUS)
        self.assertEqual(len(loaded.points), 2)
        self.assertEqual(loaded.ds, branch.ds)
        self.assertEqual([point.Q for point in loaded.points], [point.Q for point in branch.points])
        numpy.testing.assert_array_equal(last.values, branch.last.field.values)

    def test_key_values(self) -> None:
        # WHEN
        self._repository.write_key_values("report.txt", {"count": 2, "tag": "ReachedZero"})

        # THEN
        self.assertEqual(self._repository.read_key_values("report.txt"), {"count": "2", "tag": "ReachedZero"})
