# MODULES
import functools
import inspect
import logging
import time
from typing import Callable, ParamSpec, TypeVar

# CORE
from pystrat_wave._core import HeightField

_P = ParamSpec("_P")
_T = TypeVar("_T")

_logger = logging.getLogger("pystrat_wave.timing")


def timed(
    name: str,
) -> Callable[[Callable[_P, _T]], Callable[_P, _T]]:
    """
    Decorator that logs the wall time of the decorated function.

    Args:
        name (str): The label used in the log records.

    Returns:
        function: The decorated function.
    """

    def decorator(func: Callable[_P, _T]) -> Callable[_P, _T]:

        @functools.wraps(func)
        def wrapper(*args: _P.args, **kwargs: _P.kwargs) -> _T:
            start = time.perf_counter()
            _logger.debug("Start %s", name)
            try:
                return func(*args, **kwargs)
            finally:
                _logger.debug("%s completed in %fs", name, time.perf_counter() - start)

        return wrapper

    return decorator


def check_bottom_condition(
    param: str = "h",
    tolerance: float = 0.0,
) -> Callable[[Callable[_P, _T]], Callable[_P, _T]]:
    """
    Decorator that checks the bed condition h(q, p0) = 0 of a height field argument.

    Args:
        param (str, optional): The name of the HeightField parameter. Defaults to "h".
        tolerance (float, optional): Largest accepted |h(q, p0)|. Defaults to 0.0.

    Raises:
        TypeError: If the argument is not a HeightField.
        ValueError: If the bed row of the field is not zero.

    Returns:
        function: The decorated function.
    """

    def decorator(func: Callable[_P, _T]) -> Callable[_P, _T]:
        signature = inspect.signature(func)

        @functools.wraps(func)
        def wrapper(*args: _P.args, **kwargs: _P.kwargs) -> _T:
            field = signature.bind(*args, **kwargs).arguments.get(param)

            if not isinstance(field, HeightField):
                raise TypeError(
                    f"{param} must be instance of {HeightField.__name__}"
                )

            if not field.satisfies_bottom_condition(tolerance=tolerance):
                raise ValueError(
                    f"{param} violates the bed condition h(q, p0) = 0"
                )

            return func(*args, **kwargs)

        return wrapper

    return decorator

