"""tmvn-ess errors."""

from typing import Callable, Dict, Optional, Type

from fastapi import FastAPI
from starlette import status
from starlette.requests import Request
from starlette.responses import JSONResponse


class ESSError(Exception):
    """Base exception class."""


class DimensionMismatch(ESSError):
    """Array shapes do not agree."""


class InvalidProblem(ESSError):
    """Problem definition could not be parsed or validated."""


class CholeskyError(ESSError):
    """Covariance matrix is not symmetric positive-definite."""


class InvalidConstraint(ESSError):
    """Constraint with a zero projection and a negative offset."""


class InfeasibleCurrentPoint(ESSError):
    """The current iterate violates a constraint by more than the tolerance."""


class InfeasibleStart(ESSError):
    """Chain start is not strictly feasible."""

    def __init__(self, message: str, index: Optional[int] = None):
        """Store the failing constraint index."""
        super().__init__(message)
        self.index = index


class DuplicateAngles(ESSError):
    """Likelihood testing needs distinct intersection angles."""


class EmptyIntervalSet(ESSError):
    """Cannot sample from an empty set of angles."""


class UnderflowingMass(ESSError):
    """Normalizing constant underflows."""


class AcceptanceTooLow(ESSError):
    """Rejection sampling acceptance rate is too low to be practical."""


class WorstCaseTooLarge(ESSError):
    """Worst-case angle family would underflow."""


# CLI exit codes
EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INPUT_ERROR = 2
EXIT_INFEASIBLE_START = 3

EXIT_CODES: Dict[Type[Exception], int] = {
    InfeasibleStart: EXIT_INFEASIBLE_START,
    DimensionMismatch: EXIT_INPUT_ERROR,
    InvalidProblem: EXIT_INPUT_ERROR,
    CholeskyError: EXIT_INPUT_ERROR,
    InvalidConstraint: EXIT_INPUT_ERROR,
    WorstCaseTooLarge: EXIT_INPUT_ERROR,
}

DEFAULT_STATUS_CODES: Dict[Type[Exception], int] = {
    DimensionMismatch: status.HTTP_400_BAD_REQUEST,
    InvalidProblem: status.HTTP_400_BAD_REQUEST,
    CholeskyError: status.HTTP_400_BAD_REQUEST,
    InvalidConstraint: status.HTTP_400_BAD_REQUEST,
    InfeasibleStart: status.HTTP_422_UNPROCESSABLE_ENTITY,
}


def exit_code(exc: Exception) -> int:
    """Return the CLI exit code for an exception (input error by default)."""
    for klass in type(exc).__mro__:
        if klass in EXIT_CODES:
            return EXIT_CODES[klass]

    return EXIT_INPUT_ERROR


def exception_handler_factory(status_code: int) -> Callable:
    """Create a FastAPI exception handler from a status code."""

    def handler(request: Request, exc: Exception):
        if status_code == status.HTTP_204_NO_CONTENT:
            return JSONResponse(content=None, status_code=status_code)

        content = {"detail": str(exc)}
        index = getattr(exc, "index", None)
        if index is not None:
            content["constraint"] = index

        return JSONResponse(content=content, status_code=status_code)

    return handler


def add_exception_handlers(
    app: FastAPI, status_codes: Dict[Type[Exception], int]
) -> None:
    """Add exception handlers to the FastAPI app."""
    for exc, code in status_codes.items():
        app.add_exception_handler(exc, exception_handler_factory(code))
