"""Exception types shared across the package."""


class TeleograspError(Exception):
    """Base class for all package errors."""


class InvalidInputError(TeleograspError, ValueError):
    """An argument fails a documented precondition."""


class ModeViolationError(TeleograspError, RuntimeError):
    """A control operation was invoked in the wrong mode."""


class NoFeasibleGraspError(TeleograspError, RuntimeError):
    """Every finalist grasp candidate failed the reachability check."""


class TraceParseError(TeleograspError, ValueError):
    """A replay trace line failed to parse or violates trace semantics."""

    def __init__(self, line_number: int, message: str):
        super().__init__(f"trace line {line_number}: {message}")
        self.line_number = line_number
