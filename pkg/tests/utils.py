# MODULES
import logging
from pathlib import Path

LOGGER_TESTS = logging.getLogger("tests")
LOGGER_TESTS.setLevel(logging.DEBUG)


class SavedPath:
    PATH_ASSET = Path("tests") / "assets"
    PATH_ASSET_CONFIGS = PATH_ASSET / "configs"
