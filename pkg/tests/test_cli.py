# MODULES
import contextlib
import io
from typing import Dict, List, Tuple

# PYSTRAT_WAVE
from pystrat_wave._cli import EXIT_MODEL, EXIT_OK, EXIT_USAGE, main
from pystrat_wave.libs.file_lib import open_key_value_file

# TESTS
from tests._base import TestCase
from tests.utils import SavedPath


class TestCli(TestCase):
    def _run(self, *argv: str) -> Tuple[int, str, str]:
        stdout, stderr = io.StringIO(), io.StringIO()
        with contextlib.redirect_stdout(stdout), contextlib.redirect_stderr(stderr):
            code = main(list(argv))
        return code, stdout.getvalue(), stderr.getvalue()

    def _config(self, name: str) -> str:
        return str(SavedPath.PATH_ASSET_CONFIGS / name)

    def test_dispersion(self) -> None:
        # WHEN
        code, stdout, _ = self._run("dispersion", self._config("dispersion.conf"), "--output", str(self._run_dir))

        # THEN
        self.assertEqual(code, EXIT_OK)
        self.assertIn("lambda_minus = ", stdout)
        report = open_key_value_file(self._run_dir / "dispersion.txt")
        self.assertLess(float(report["lambda_minus"]), 0.0)
        self.assertGreater(float(report["lambda_plus"]), 0.0)
        meta = open_key_value_file(self._run_dir / "run.meta")
        self.assertEqual(meta["nq"], "16")
        self.assertEqual(list(meta), sorted(meta))

    def test_laminar(self) -> None:
        # WHEN
        code, _, _ = self._run("laminar", self._config("dispersion.conf"), "--output", str(self._run_dir))

        # THEN
        self.assertEqual(code, EXIT_OK)
        report = open_key_value_file(self._run_dir / "laminar.txt")
        self.assertEqual(float(report["lambda"]), -1.0)
        self.assertEqual(report["monotone"], "True")
        self.assertTrue((self._run_dir / "laminar_profile.csv").is_file())

    def test_unknown_subcommand(self) -> None:
        # WHEN
        code, _, stderr = self._run("levitate", self._config("dispersion.conf"))

        # THEN
        self.assertEqual(code, EXIT_USAGE)
        self.assertIn("usage error", stderr)

    def test_missing_config(self) -> None:
        # WHEN
        code, _, stderr = self._run("dispersion", str(self._run_dir / "absent.conf"))

        # THEN
        self.assertEqual(code, EXIT_USAGE)
        self.assertIn("cannot read", stderr)

    def test_invalid_config(self) -> None:
        # GIVEN
        config = self._config("TestParseConfig__test_diagnostics.conf")

        # WHEN
        code, _, stderr = self._run("dispersion", config, "--output", str(self._run_dir))

        # THEN
        self.assertEqual(code, EXIT_USAGE)
        self.assertIn("line 5: colour: unknown key", stderr)
        self.assertEqual(len(stderr.strip().splitlines()), 4)
        self.assertFalse((self._run_dir / "run.meta").exists())

    def test_nonpositive_density(self) -> None:
        # GIVEN
        config = self._run_dir / "heavy_bed.conf"
        config.write_text("p0 = -2.0\ndepth = 1.0\nA = -1.0\nB = 1.0\nnq = 16\nnp = 9\n")
        output = self._run_dir / "out"

        for subcommand in ("laminar", "dispersion", "solve-height"):
            # WHEN
            code, _, stderr = self._run(subcommand, str(config), "--output", str(output))

            # THEN
            self.assertEqual(code, EXIT_USAGE, subcommand)
            self.assertIn("density must be > 0", stderr)
        self.assertFalse(output.exists())

    def test_model_failure(self) -> None:
        # WHEN
        code, _, stderr = self._run("solve-height", self._config("stagnating.conf"), "--output", str(self._run_dir))

        # THEN
        self.assertEqual(code, EXIT_MODEL)
        self.assertIn("NonMonotoneStream", stderr)

    def test_symmetry_check_of_branch(self) -> None:
        # GIVEN
        config = self._config("branch.conf")
        output = str(self._run_dir)

        # WHEN
        continued, _, _ = self._run("continue", config, "--output", output)
        checked, _, _ = self._run("symmetry-check", config, "--output", output)
        validated, _, _ = self._run("validate-mp", config, "--output", output)

        # THEN
        self.assertEqual((continued, checked, validated), (EXIT_OK, EXIT_OK, EXIT_OK))
        self.assertTrue((self._run_dir / "branch" / "step_002.csv").is_file())
        symmetry = open_key_value_file(self._run_dir / "symmetry.txt")
        self.assertEqual(symmetry["case_tag"], "ReachedZero")
        self.assertEqual(symmetry["monotone"], "True")
        max_principle = open_key_value_file(self._run_dir / "max_principle.txt")
        self.assertEqual(max_principle["passed"], "True")

    def test_deterministic_outputs(self) -> None:
        # GIVEN
        config = self._config("branch.conf")
        trees: List[Dict[str, bytes]] = []

        for name in ("first", "second"):
            output = self._run_dir / name

            # WHEN
            code, _, _ = self._run("continue", config, "--output", str(output))
            self.assertEqual(code, EXIT_OK)
            trees.append(
                {
                    path.relative_to(output).as_posix(): path.read_bytes()
                    for path in sorted(output.rglob("*"))
                    if path.is_file()
                }
            )

        # THEN
        self.assertEqual(trees[0], trees[1])
        self.assertIn("branch/branch.meta", trees[0])
        self.assertIn("continue.txt", trees[0])
