"""Exception types shared across the package; the CLI maps them to exit codes."""


class ValidationError(ValueError):
    """Inputs violate an operation's preconditions."""


class NumericalError(RuntimeError):
    """A numerical procedure failed (eigensolver, degenerate integral, search ceiling)."""


class EigensolverError(NumericalError):
    pass


class DegenerateSignalError(NumericalError):
    pass


class CeilingExceededError(NumericalError):
    def __init__(self, message: str, trailing: list[tuple[float, float]] | None = None):
        super().__init__(message)
        self.trailing = trailing or []
