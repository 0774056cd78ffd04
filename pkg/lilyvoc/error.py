import logging
import sys
from collections.abc import Callable

logger = logging.getLogger(__name__)


class BadRequestError(Exception):
    """Raised for invalid input or arguments."""

    pass


class DimensionError(BadRequestError):
    """Raised when tensor shapes do not agree."""

    pass


class InputTooShortError(BadRequestError):
    """Raised when a signal is too short for the requested operation."""

    pass


class ConfigError(BadRequestError):
    """Raised when a configuration file or override is invalid."""

    pass


class NotFoundError(Exception):
    """Raised when a file or resource is not found."""

    pass


class ConflictError(Exception):
    """Raised when persisted state does not match the requested run."""

    pass


class CorruptFileError(Exception):
    """Raised when a file fails to decode or its checksum does not validate."""

    pass


class GraphError(Exception):
    """Raised when the autodiff graph is used incorrectly."""

    pass


class NumericalError(Exception):
    """Raised when an op produces NaN or Inf from finite inputs."""

    pass


class InternalError(Exception):
    """Raised when an internal invariant is broken."""

    pass


EXIT_OK = 0
EXIT_USER_ERROR = 1
EXIT_INTERNAL_ERROR = 2

type ErrorHandler = Callable[[Exception], int]


def _report(exception: Exception, code: int) -> int:
    message = " ".join(str(exception).split()) or "No details."
    print(f"error: {type(exception).__name__}: {message}", file=sys.stderr)
    return code


# pyright: reportUnusedFunction=false
def register_error_handlers(handlers: dict[type[Exception], ErrorHandler]) -> None:
    def user_error_handler(exception: Exception) -> int:
        return _report(exception, EXIT_USER_ERROR)

    def internal_error_handler(exception: Exception) -> int:
        logger.exception("Internal error.")
        return _report(exception, EXIT_INTERNAL_ERROR)

    handlers[BadRequestError] = user_error_handler
    handlers[NotFoundError] = user_error_handler
    handlers[ConflictError] = user_error_handler
    handlers[CorruptFileError] = user_error_handler
    handlers[Exception] = internal_error_handler


def handle_error(
    handlers: dict[type[Exception], ErrorHandler], exception: Exception
) -> int:
    """Dispatch to the handler of the closest registered base class."""
    for klass in type(exception).__mro__:
        handler = handlers.get(klass)
        if handler is not None:
            return handler(exception)
    return _report(exception, EXIT_INTERNAL_ERROR)
