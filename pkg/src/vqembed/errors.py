"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """Raised when arguments violate an operation's preconditions."""


class ResourceLimitError(RuntimeError):
    """Raised when a request exceeds a configured size cap."""


class DegenerateInputError(ValueError):
    """Raised when an input carries too little information to proceed."""


class UndefinedResultError(ArithmeticError):
    """Raised when a quantity is not defined for the given inputs."""


class DegenerateDualError(RuntimeError):
    """Raised when a dual certificate is too small to normalize."""
