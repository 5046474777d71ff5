import sys
import logging

from src.constants import (EXIT_CAP, EXIT_CONVERGENCE, EXIT_NUMERIC, EXIT_RESOURCE,
                           EXIT_USAGE)


def error_message_detail(error: Exception, error_detail: sys) -> str:
    """
    Extracts detailed error information including file name, line number, and the error message.

    :param error: The exception that occurred.
    :param error_detail: The sys module to access traceback details.
    :return: A formatted error message string.
    """
    _, _, exc_tb = error_detail.exc_info()

    # raised directly rather than from an except block: no traceback yet
    if exc_tb is None:
        error_message = f"Error occurred: {str(error)}"
    else:
        while exc_tb.tb_next is not None:
            exc_tb = exc_tb.tb_next
        file_name = exc_tb.tb_frame.f_code.co_filename
        line_number = exc_tb.tb_lineno
        error_message = f"Error occurred in python script: [{file_name}] at line number [{line_number}]: {str(error)}"

    logging.error(error_message)

    return error_message


class BandRMTException(Exception):
    """
    Base exception for the banded random matrix toolkit.

    Subclasses carry the process exit code the command line surface reports.
    """
    exit_code: int = EXIT_NUMERIC

    def __init__(self, error_message, error_detail: sys = sys):
        """
        :param error_message: A string (or exception) describing the error.
        :param error_detail: The sys module to access traceback details.
        """
        super().__init__(str(error_message))
        self.error_message = error_message_detail(error_message, error_detail)

    def __str__(self) -> str:
        return self.error_message


class DomainError(BandRMTException):
    """Input outside the domain of an operation (Im z <= 0, |theta| <= sigma, genus != 1, ...)."""
    exit_code = EXIT_USAGE


class EnumerationTooLargeError(BandRMTException):
    """Pair partition enumeration requested above the configured cap."""
    exit_code = EXIT_CAP

    def __init__(self, ell: int, cap: int, error_detail: sys = sys):
        self.ell = ell
        self.cap = cap
        super().__init__(f"enumeration too large: ell={ell} exceeds the cap ell <= {cap} "
                         f"(raise it with --max-ell)", error_detail)


class ResourceBudgetError(BandRMTException):
    """Exact counting exceeded its node budget."""
    exit_code = EXIT_RESOURCE


class NumericalSolverError(BandRMTException):
    """Eigensolver, quadrature or I/O failure."""
    exit_code = EXIT_NUMERIC


class ConvergenceError(BandRMTException):
    """Subordination fixed point did not converge; carries the failing points."""
    exit_code = EXIT_CONVERGENCE

    def __init__(self, error_message, points=(), error_detail: sys = sys):
        self.points = list(points)
        super().__init__(error_message, error_detail)
