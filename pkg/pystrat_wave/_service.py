# MODULES
from logging import Logger
from pathlib import Path
from typing import Generic, List, TypeVar

# REPOSITORY
from pystrat_wave._repository import RunRepository


_T = TypeVar("_T", bound=RunRepository)


class Service(Generic[_T]):
    """
    Base class of the services writing into one run directory.

    Attributes:
        _repository: The repository owning the run directory.
        _logger: The logger of the service.

    Methods:
        repository: Returns the repository.
        written_files: Lists the artifacts written so far.
    """

    def __init__(
        self,
        repository: _T,
        logger: Logger,
    ) -> None:
        self._repository = repository
        self._logger = logger

    @property
    def repository(self) -> _T:
        return self._repository

    def written_files(self) -> List[Path]:
        """
        Every file under the run directory, relative to it and sorted.
        """
        root = self._repository.root
        if not root.exists():
            return []

        return sorted(path.relative_to(root) for path in root.rglob("*") if path.is_file())
