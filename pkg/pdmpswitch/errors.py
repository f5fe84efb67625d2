"""Exception classes raised by the toolkit.

Every error carries the operation that failed, the object it failed on and a
human readable reason, so the command line front end can print one line and
map the class onto an exit status.
"""

from __future__ import annotations

from typing import Any


class Error(Exception):
    """Base error.

    Member documentation:

    op_name -- name of the operation that generated this error.
    obj     -- the object (spec, model, value) that generated this error.
    reason  -- description of the error.
    """

    def __init__(self, op_name: str, obj: Any = None, reason: str = ""):
        super().__init__(reason)
        self.op_name = op_name
        self.obj = obj
        self.reason = reason

    def __str__(self) -> str:
        if self.obj is None:
            return f"{self.op_name}: {self.reason}"
        return f"{self.op_name}: {self.reason} (object: {self.obj!r})"


class DomainError(Error, ValueError):
    """An input lies outside the domain of the operation."""


class RegimeError(Error):
    """The switching parameters are in a regime where the object does not exist."""


class QuadratureError(Error):
    """Quadrature did not reach the requested tolerance."""

    def __init__(self, op_name: str, obj: Any = None, reason: str = "",
                 level: int = 0, estimates: tuple[float, ...] = ()):
        super().__init__(op_name, obj, reason)
        self.level = level
        self.estimates = estimates

    def __str__(self) -> str:
        diag = ", ".join(f"{e:.17g}" for e in self.estimates)
        return f"{super().__str__()} [level={self.level}, estimates=({diag})]"


class InsufficientSamplesError(Error):
    """Too few samples or segments to form an estimate."""


class ConfigError(Error):
    """Invalid configuration (environment, config file or flags)."""


class UndefinedSymbolError(Error):
    """An equation refers to a symbol that has no definition."""


class FieldEvaluationError(Error):
    """A user supplied vector field failed during integration."""

    def __init__(self, op_name: str, obj: Any = None, reason: str = "",
                 time: float = 0.0, position: Any = None, mode: int = 0):
        super().__init__(op_name, obj, reason)
        self.time = time
        self.position = position
        self.mode = mode

    def __str__(self) -> str:
        return (f"{self.op_name}: {self.reason} at t={self.time!r}, "
                f"x={self.position!r}, mode={self.mode:+d}")
