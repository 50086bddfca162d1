# MODULES
from typing import Any, List, Optional, Tuple


class WaveError(Exception):
    """
    Base class of every error raised by pystrat_wave.
    """


class ModelError(WaveError):
    """
    The data violates a hypothesis of the water wave model (not a code fault).
    """


class NonMonotoneStream(ModelError):
    """
    The laminar stream function is not monotone in y, so the height
    formulation does not apply.
    """


class StagnationEncountered(ModelError):
    """
    A discrete h_p is not positive: the height field describes a flow with
    stagnation points.
    """


class StagnationOnSurface(ModelError):
    """
    A located stagnation point lies above the trough line or inside the
    surface margin.
    """


class SurfaceStagnation(ModelError):
    """
    The vertical pseudo velocity vanishes on the free surface.
    """


class SingularMapping(ModelError):
    """
    The surface-fitted coordinate mapping degenerates (eta <= 0 somewhere).
    """


class TroughNotAligned(ModelError):
    """
    The surface minimum of a field is not located at q = -pi.
    """


class NoConvergence(ModelError):
    """
    An iterative solver stopped before reaching its tolerance.

    Attributes:
        best: The iterate with the smallest residual.
        report: The solver report describing the failed run.
    """

    def __init__(
        self,
        message: str,
        best: Any = None,
        report: Any = None,
    ) -> None:
        super().__init__(message)
        self.best = best
        self.report = report


class BranchTerminated(ModelError):
    """
    Continuation stopped early.

    Attributes:
        branch: The accepted part of the branch.
    """

    def __init__(
        self,
        message: str,
        branch: Any = None,
    ) -> None:
        super().__init__(message)
        self.branch = branch


class ConfigError(WaveError, ValueError):
    """
    A configuration text could not be parsed or validated.

    Attributes:
        diagnostics: (line number, key, message) triples, line None when the
            problem is not attached to a single line.
    """

    def __init__(
        self,
        diagnostics: List[Tuple[Optional[int], Optional[str], str]],
    ) -> None:
        self.diagnostics = diagnostics
        super().__init__(
            "; ".join(
                f"line {line}: {key}: {message}"
                if line is not None
                else f"{key}: {message}"
                for line, key, message in diagnostics
            )
        )
