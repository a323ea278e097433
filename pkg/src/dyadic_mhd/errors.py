"""Exception types raised by the package."""


class ParameterError(ValueError):
    """A parameter lies outside its admissible domain."""


class ShapeError(ValueError):
    """State arrays do not match the model truncation."""


class VariantError(ValueError):
    """An operation was applied to an unsupported model variant."""


class HypothesisError(ParameterError):
    """A hypothesis needed by a constructive constant does not hold."""


class InfeasibleError(ParameterError):
    """Coefficient selection could not satisfy every parameter condition."""

    def __init__(self, message, condition_id=None):
        super().__init__(message)
        self.condition_id = condition_id


class NonFiniteError(ArithmeticError):
    """A computation produced NaN or infinity."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class InsufficientDataError(ValueError):
    """Too few trajectory samples for the requested diagnostic."""
