"""Exception types shared across the package."""


class InputError(ValueError):
    """Malformed or inconsistent input (bad shapes, labels, file contents)."""


class NumericalError(ArithmeticError):
    """A numerical routine could not produce a trustworthy result."""
