# MODULES
import dataclasses
import logging
import math
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence

# CONSTANTS
from pystrat_wave._constants.enum import BifurcationRoot

# CONTINUATION
from pystrat_wave._continuation import BranchPoint, SolutionBranch

# CORE
from pystrat_wave._core import (
    FluidParameters,
    HeightField,
    StreamSolution,
)

# LIBS
from pystrat_wave.libs.file_lib import (
    KeyValue,
    open_csv_file as _open_csv_file,
    open_key_value_file as _open_key_value_file,
    save_csv_file as _save_csv_file,
    save_key_value_file as _save_key_value_file,
)

_logger = logging.getLogger("pystrat_wave.repository")

HEIGHT_HEADER = ("q", "p", "h")
SURFACE_HEADER = ("x", "eta")
STREAM_HEADER = ("x", "t", "y", "psi")

_PARAMETER_KEYS = ("p0", "depth", "B", "g", "sigma", "Q", "d", "k", "A", "gamma")


class RunRepository:
    """
    Reads and writes the artifacts of one run directory.

    Attributes:
        _root: The run directory.
        _encoding: The text encoding of every file.

    Methods:
        path: Resolves a file name inside the run directory.
        write_key_values: Saves a key-value report.
        read_key_values: Reads a key-value report.
        save_field / load_height_field: Height fields as (q, p, h) CSV.
        save_stream_solution / load_stream_solution: eta.csv and psi.csv pairs.
        save_branch / load_branch: A branch directory with branch.meta and step_NNN.csv.
    """

    def __init__(
        self,
        root: Path,
        encoding: str = "utf-8",
    ) -> None:
        """
        Initializes the RunRepository.

        Args:
            root: The run directory, created on the first write.
            encoding: The text encoding of every file.
        """
        self._root = Path(root)
        self._encoding = encoding

    @property
    def root(self) -> Path:
        return self._root

    def path(self, name: str) -> Path:
        return self._root / name

    def _prepare(self, path: Path) -> Path:
        path.parent.mkdir(parents=True, exist_ok=True)
        return path

    def write_key_values(
        self,
        name: str,
        data: Mapping[str, KeyValue],
        sort_keys: bool = False,
    ) -> Path:
        """
        Saves a `key = value` file in the run directory.

        Returns:
            Path: The written file.
        """
        path = self._prepare(self.path(name))
        _save_key_value_file(path, dict(data), encoding=self._encoding, sort_keys=sort_keys)
        _logger.info("Wrote %s", path)
        return path

    def read_key_values(self, name: str) -> Dict[str, str]:
        return _open_key_value_file(self.path(name), encoding=self._encoding)

    def save_profile(
        self,
        name: str,
        header: Sequence[str],
        rows: Iterable[Sequence[float]],
    ) -> Path:
        """
        Saves numeric rows as a CSV file in the run directory.
        """
        path = self._prepare(self.path(name))
        _save_csv_file(path, header, rows, encoding=self._encoding)
        _logger.info("Wrote %s", path)
        return path

    def save_field(self, h: HeightField, name: str = "field.csv") -> Path:
        path = self._prepare(self.path(name))
        _save_csv_file(path, HEIGHT_HEADER, h.to_rows(), encoding=self._encoding)
        _logger.info("Wrote height field %dx%d to %s", h.grid.np, h.grid.nq, path)
        return path

    def load_height_field(self, path: Path) -> HeightField:
        """
        Loads a (q, p, h) CSV file.

        Raises:
            FileNotFoundError: If the file does not exist.
            ValueError: If the header or the rows are malformed.
        """
        header, rows = _open_csv_file(path, encoding=self._encoding)
        if tuple(header) != HEIGHT_HEADER:
            raise ValueError(f"File {path}: expected header {','.join(HEIGHT_HEADER)}, got {','.join(header)}")
        return HeightField.from_rows(rows)

    def save_stream_solution(
        self,
        solution: StreamSolution,
        prefix: str = "",
    ) -> List[Path]:
        """
        Saves eta.csv and psi.csv, and the parameters as stream.meta.

        Args:
            solution: The solution.
            prefix: Subdirectory inside the run directory.

        Returns:
            List[Path]: The written files.
        """
        directory = self.path(prefix) if prefix else self._root
        eta_path = self._prepare(directory / "eta.csv")
        psi_path = directory / "psi.csv"
        meta_path = directory / "stream.meta"

        _save_csv_file(eta_path, SURFACE_HEADER, solution.surface_rows(), encoding=self._encoding)
        _save_csv_file(psi_path, STREAM_HEADER, solution.field_rows(), encoding=self._encoding)
        _save_key_value_file(
            meta_path,
            dict(solution.params.as_dict()),
            encoding=self._encoding,
            sort_keys=True,
        )
        _logger.info("Wrote stream solution %dx%d to %s", solution.grid.np, solution.grid.nq, directory)

        return [eta_path, psi_path, meta_path]

    def load_stream_solution(
        self,
        directory: Path,
        params: Optional[FluidParameters] = None,
    ) -> StreamSolution:
        """
        Loads a solution written by `save_stream_solution`.

        Args:
            directory: The directory holding eta.csv and psi.csv.
            params: Parameters to attach; read from stream.meta when omitted.

        Raises:
            FileNotFoundError: If a file is missing.
            ValueError: If a header or the rows are malformed.
        """
        surface_header, surface_rows = _open_csv_file(directory / "eta.csv", encoding=self._encoding)
        field_header, field_rows = _open_csv_file(directory / "psi.csv", encoding=self._encoding)
        if tuple(surface_header) != SURFACE_HEADER:
            raise ValueError(f"File {directory / 'eta.csv'}: unexpected header {','.join(surface_header)}")
        if tuple(field_header) != STREAM_HEADER:
            raise ValueError(f"File {directory / 'psi.csv'}: unexpected header {','.join(field_header)}")

        if params is None:
            params = _parameters_from_meta(
                _open_key_value_file(directory / "stream.meta", encoding=self._encoding)
            )

        return StreamSolution.from_rows(surface_rows, field_rows, params)

    def save_branch(self, branch: SolutionBranch, name: str = "branch") -> Path:
        """
        Saves a branch as a directory with branch.meta and one step_NNN.csv per point.

        Step 0 is the laminar state. Each point's Q and amplitude are listed in
        branch.meta.

        Returns:
            Path: The branch directory.
        """
        directory = self.path(name)
        directory.mkdir(parents=True, exist_ok=True)

        meta: Dict[str, KeyValue] = dict(branch.meta())
        for index, point in enumerate(branch.points):
            _save_csv_file(
                directory / f"step_{index:03d}.csv",
                HEIGHT_HEADER,
                point.field.to_rows(),
                encoding=self._encoding,
            )
            meta[f"step_{index:03d}_Q"] = point.Q
            meta[f"step_{index:03d}_amplitude"] = point.amplitude

        _save_key_value_file(directory / "branch.meta", meta, encoding=self._encoding)
        _logger.info("Wrote branch of %d points to %s", len(branch.points), directory)

        return directory

    def load_branch(self, directory: Path) -> SolutionBranch:
        """
        Loads a branch written by `save_branch`.

        Raises:
            FileNotFoundError: If branch.meta or a step file is missing.
            ValueError: If an entry is malformed.
        """
        meta = _open_key_value_file(directory / "branch.meta", encoding=self._encoding)
        params = _parameters_from_meta(meta)
        steps = int(meta["steps"])

        points = []
        for index in range(steps + 1):
            field = self.load_height_field(directory / f"step_{index:03d}.csv")
            Q = float(meta[f"step_{index:03d}_Q"])
            points.append(
                BranchPoint(
                    Q=Q,
                    field=field,
                    amplitude=field.amplitude,
                    params=dataclasses.replace(params, Q=Q),
                )
            )

        return SolutionBranch(
            which=BifurcationRoot(meta["which"]),
            params=params,
            grid=points[0].field.grid,
            tol=float(meta["newton_tol"]),
            ds=float(meta["ds"]),
            ds_min=float(meta["ds_min"]),
            points=tuple(points),
        )

    def last_branch_field(self, name: str = "branch") -> HeightField:
        """
        The last step of the branch saved under `name`.
        """
        directory = self.path(name)
        meta = _open_key_value_file(directory / "branch.meta", encoding=self._encoding)
        return self.load_height_field(directory / f"step_{int(meta['steps']):03d}.csv")


def _parameters_from_meta(meta: Mapping[str, str]) -> FluidParameters:
    values = {key: float(meta[key]) for key in _PARAMETER_KEYS if key in meta}
    missing = [key for key in ("p0", "depth", "B") if key not in values]
    if missing:
        raise ValueError(f"missing parameter entries: {', '.join(missing)}")
    for key in ("Q", "d"):
        if key in values and math.isnan(values[key]):
            del values[key]

    return FluidParameters(**values)
