"""Exceptions shared across the package."""


class Cartan235Error(Exception):
    """Base class for all package-specific errors."""


class ExpressionSyntaxError(Cartan235Error):
    """Malformed expression text; carries the character position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class UnknownVariableError(Cartan235Error):
    """Expression references a name outside the declared variable list."""


class ZeroDenominatorError(Cartan235Error):
    """Division by the zero polynomial."""


class PoleError(Cartan235Error):
    """Evaluation or expansion point lies on a pole of the denominator."""


class OrderError(Cartan235Error):
    """A jet does not carry enough valid orders for the requested operation."""


class DegenerateFrameError(Cartan235Error):
    """Frame or coframe is singular at the working point."""


class GrowthVectorError(Cartan235Error):
    """Distribution does not have small growth vector (2,3,5) at the point."""


class TangencyError(Cartan235Error):
    """Characteristic derivation failed its tangency self-check."""


class ConventionError(Cartan235Error):
    """A structural self-check failed, signalling a sign/convention bug."""


class SpanError(Cartan235Error):
    """Supplied vector fields do not span the expected plane."""


class ModelError(Cartan235Error):
    """Invalid model description file."""
