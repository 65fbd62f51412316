"""
errors.py

Exception hierarchy shared by the numerical modules.

Library code raises these; the command line maps them to exit codes
(argument problems -> 2, numeric trouble -> 3).
"""


class BridgeLoeError(Exception):
    """Root of every error raised by this project."""


class ArgumentError(BridgeLoeError, ValueError):
    """A caller broke a function contract (bad N, order, grid, non-finite input)."""


class DomainError(ArgumentError):
    """Evaluation requested outside the supported domain of a function."""


class NumericError(BridgeLoeError, ArithmeticError):
    """Floating-point breakdown, e.g. an LU pivot below the underflow floor."""


class ConvergenceError(NumericError):
    """An iterative method did not reach its tolerance within its budget."""


class ConsistencyError(NumericError):
    """Two routes to the same quantity disagree beyond tolerance."""
