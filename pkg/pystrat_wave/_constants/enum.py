# MODULES
import enum


class BifurcationRoot(enum.Enum):
    """
    Enum class selecting one of the two dispersion roots of the laminar flow.
    """

    PLUS = "plus"
    MINUS = "minus"


class StagnationCase(enum.Enum):
    """
    Enum class representing the classification of stagnation in a laminar flow.
    """

    NO_STAGNATION_SURFACE_OR_BALANCE = "NoStagnation_SurfaceOrBalance"
    STAGNATION_FOR_LAMBDA_PLUS = "StagnationForLambdaPlus"
    STAGNATION_FOR_LAMBDA_MINUS = "StagnationForLambdaMinus"


class ReflectionCase(enum.Enum):
    """
    Enum class representing the outcome of a moving-plane sweep.
    """

    REACHED_ZERO = "ReachedZero"
    INTERIOR_TOUCHING = "InteriorTouching"
    INDETERMINATE = "Indeterminate"


class Subcommand(enum.Enum):
    """
    Enum class representing the command-line subcommands.
    """

    LAMINAR = "laminar"
    DISPERSION = "dispersion"
    SOLVE_HEIGHT = "solve-height"
    CONTINUE = "continue"
    SOLVE_STREAM = "solve-stream"
    STAGNATION = "stagnation"
    SYMMETRY_CHECK = "symmetry-check"
    VALIDATE_MP = "validate-mp"
