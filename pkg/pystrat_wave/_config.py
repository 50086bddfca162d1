# MODULES
import math
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

# PYDANTIC
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

# CONSTANTS
from pystrat_wave._constants.enum import BifurcationRoot

# CORE
from pystrat_wave._core import FluidParameters, StratificationProfile, linear_stratification

# EXCEPTIONS
from pystrat_wave._exceptions import ConfigError

# LIBS
from pystrat_wave.libs.file_lib import KeyValue, parse_key_value_text

Diagnostic = Tuple[Optional[int], Optional[str], str]


class RunConfig(BaseModel):
    """
    Validated run configuration.

    Q and d are None when they derive from the laminar flow of height `depth`.
    sweep_tol defaults to ten times newton_tol.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    g: float = Field(default=9.8, gt=0)
    sigma: float = Field(default=0.0, le=0)
    p0: float = Field(lt=0)
    Q: Optional[float] = None
    d: Optional[float] = Field(default=None, gt=0)
    k: float = Field(default=1.0, gt=0)
    depth: float = Field(gt=0)
    A: float = 0.0
    B: float = Field(gt=0)
    gamma: float = 0.0

    nq: int = Field(default=64, ge=8)
    np: int = Field(default=33, ge=4)
    newton_tol: float = Field(default=1e-10, gt=0)
    newton_max_iter: int = Field(default=30, ge=1)
    sweep_tol: float = Field(default=1e-9, gt=0)
    steps: int = Field(default=10, ge=0)
    ds: float = Field(default=0.01, gt=0)
    ds_min: float = Field(default=1e-6, gt=0)
    which: BifurcationRoot = BifurcationRoot.MINUS
    output_dir: Path = Path("run")
    seed: int = 20240101
    mp_trials: int = Field(default=10000, ge=1)
    stream_tol: float = Field(default=1e-9, gt=0)
    stream_max_iter: int = Field(default=40, ge=1)
    amplitude: float = Field(default=0.01, ge=0)

    @model_validator(mode="before")
    @classmethod
    def default_sweep_tol(cls, data: Any) -> Any:
        if isinstance(data, dict) and data.get("sweep_tol") is None:
            try:
                newton_tol = float(data.get("newton_tol", 1e-10))
            except (TypeError, ValueError):
                return data
            data = {**data, "sweep_tol": 10.0 * newton_tol}
        return data

    @field_validator("nq")
    @classmethod
    def nq_even(cls, value: int) -> int:
        if value % 2:
            raise ValueError("must be even")
        return value

    @field_validator("Q", "A", "gamma", "g", "sigma", "p0", "depth", "B", "k")
    @classmethod
    def finite(cls, value: Optional[float]) -> Optional[float]:
        if value is not None and not math.isfinite(value):
            raise ValueError("must be finite")
        return value

    @model_validator(mode="after")
    def step_bounds(self) -> "RunConfig":
        if self.ds_min > self.ds:
            raise ValueError(f"ds_min = {self.ds_min} exceeds ds = {self.ds}")
        return self

    @model_validator(mode="after")
    def physical_invariants(self) -> "RunConfig":
        # the density is linear in p, so the two end streamlines bound it
        self.to_profile().check_positive([self.p0, 0.0])
        self.to_fluid_parameters()
        return self

    def to_fluid_parameters(self) -> FluidParameters:
        return FluidParameters(
            p0=self.p0,
            depth=self.depth,
            B=self.B,
            g=self.g,
            sigma=self.sigma,
            Q=math.nan if self.Q is None else self.Q,
            d=math.nan if self.d is None else self.d,
            k=self.k,
            A=self.A,
            gamma=self.gamma,
        )

    def to_profile(self) -> StratificationProfile:
        return linear_stratification(A=self.A, B=self.B, gamma=self.gamma, p0=self.p0)

    def as_meta(self) -> Dict[str, KeyValue]:
        """
        The resolved configuration, Q and d included.
        """
        params = self.to_fluid_parameters()
        data: Dict[str, KeyValue] = {}
        for key, value in self.model_dump().items():
            if isinstance(value, BifurcationRoot):
                data[key] = value.value
            elif isinstance(value, Path):
                data[key] = value.as_posix()
            elif value is not None:
                data[key] = value
        data["Q"] = params.Q
        data["d"] = params.d
        return data


def parse_config(text: str) -> RunConfig:
    """
    Parses and validates a `key = value` configuration text.

    Args:
        text (str): The configuration text.

    Raises:
        ConfigError: With one (line, key, message) diagnostic per problem.

    Returns:
        RunConfig: The validated configuration.
    """
    errors: List[Tuple[int, str]] = []
    entries = parse_key_value_text(text, errors=errors)
    diagnostics: List[Diagnostic] = [(line, None, message) for line, message in errors]

    raw: Dict[str, str] = {}
    lines: Dict[str, int] = {}
    for line, key, value in entries:
        if key in lines:
            diagnostics.append((line, key, f"duplicate key, first set on line {lines[key]}"))
            continue
        raw[key] = value
        lines[key] = line

    config: Optional[RunConfig] = None
    try:
        config = RunConfig.model_validate(raw)
    except ValidationError as error:
        for item in error.errors():
            location = item.get("loc", ())
            key = str(location[0]) if location else None
            if item.get("type") == "extra_forbidden":
                message = "unknown key"
            elif item.get("type") == "missing":
                message = "required key is missing"
            else:
                message = str(item.get("msg", "invalid value"))
            diagnostics.append((lines.get(key) if key is not None else None, key, message))

    if diagnostics or config is None:
        diagnostics.sort(key=lambda item: (item[0] is None, item[0] or 0))
        raise ConfigError(diagnostics)

    return config


def load_config(path: Path, encoding: str = "utf-8") -> RunConfig:
    """
    Reads and validates a configuration file.

    Raises:
        FileNotFoundError: If the file does not exist.
        ConfigError: If the text is invalid.
    """
    with open(path, encoding=encoding) as file:
        return parse_config(file.read())
