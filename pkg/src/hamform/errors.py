"""Exception hierarchy shared by all hamform modules."""


class HamformError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(HamformError, ValueError):
    """Raised when array shapes or phase-space dimensions do not match."""


class DomainError(HamformError, ValueError):
    """Raised when a state leaves the valid region of a system.

    Attributes:
        component: index of the offending coordinate, when known.
        state: the rejected coordinates.
    """

    def __init__(self, message, component=None, state=None):
        super().__init__(message)
        self.component = component
        self.state = state


class DegenerateGradientError(HamformError, ValueError):
    """Raised when |grad H| is too small to build a skew-gradient matrix."""


class PreconditionError(HamformError, ValueError):
    """Raised when an operation's mathematical precondition is violated."""


class ConvergenceError(HamformError, RuntimeError):
    """Raised when a Newton iteration fails to converge.

    Attributes:
        residual: infinity norm of the last residual.
        iterations: number of iterations performed.
    """

    def __init__(self, message, residual=float("nan"), iterations=0):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class ConfigurationError(HamformError, ValueError):
    """Raised when a system or run configuration is incomplete or invalid."""


class UnsupportedReductionError(HamformError, ValueError):
    """Raised when a Casimir cannot be eliminated in closed form."""


class NetworkSyntaxError(HamformError, ValueError):
    """Raised by the reaction DSL parser.

    Attributes:
        line: 1-based line number.
        column: 1-based column of the offending token.
        token: 1-based index of the offending token within its reaction.
    """

    def __init__(self, message, line=0, column=0, token=0):
        super().__init__(f"line {line}, column {column} (token {token}): {message}")
        self.line = line
        self.column = column
        self.token = token


class IntegrationError(HamformError, RuntimeError):
    """Raised when time stepping aborts; carries the partial trajectory.

    Attributes:
        trajectory: samples computed before the failure.
        cause: the underlying step error.
    """

    def __init__(self, message, trajectory=None, cause=None):
        super().__init__(message)
        self.trajectory = trajectory
        self.cause = cause
