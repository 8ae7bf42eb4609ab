"""Exception hierarchy shared by every lossprobe subsystem."""

from __future__ import annotations


class LossprobeError(Exception):
    """Base class for all errors raised by lossprobe."""


class LocatedError(LossprobeError):
    """An error tied to a position in some source text."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None,
                 source: str | None = None):
        self.message = message
        self.line = line
        self.column = column
        self.source = source
        super().__init__(self._render())

    def _render(self) -> str:
        where = []
        if self.source:
            where.append(self.source)
        if self.line is not None:
            where.append(str(self.line))
            if self.column is not None:
                where.append(str(self.column))
        if where:
            return f"{':'.join(where)}: {self.message}"
        return self.message


class ELPSyntaxError(LocatedError):
    pass


class ModelError(LocatedError):
    """Malformed or referentially broken safety model."""


class SolverLimitError(LossprobeError):
    """The program exceeds the solver's (or the oracle's) size limit."""


class InconsistentCandidate(LossprobeError, ValueError):
    pass


class SimulationError(LossprobeError):
    """Simulation produced a non-finite state."""

    def __init__(self, message: str, last_good_index: int):
        self.last_good_index = last_good_index
        super().__init__(f"{message} (last good sample index {last_good_index})")


class PreconditionError(LossprobeError, ValueError):
    pass


class AxisInsensitiveError(LossprobeError):
    """Boundary refinement found no sign change of the margin along an axis."""
