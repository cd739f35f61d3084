"""Exception types raised across the package."""


class NodeValidationError(ValueError):
    """A node system violates an admissibility condition."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class PoleError(ArithmeticError):
    """Evaluation point coincides with a pole of a logarithmic derivative."""


class ResidualError(RuntimeError):
    """An interpolant failed its jet residual check."""


class ConfigError(ValueError):
    """Malformed or unknown configuration entries."""
