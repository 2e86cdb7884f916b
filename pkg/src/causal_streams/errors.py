"""Exception hierarchy shared across the package."""


class CausalStreamsError(Exception):
    """Base class for all errors raised by this package."""


class DomainMismatchError(CausalStreamsError):
    """Operands belong to different coefficient domains."""


class UnsupportedOperationError(CausalStreamsError):
    """Arithmetic requested on a domain that does not support it."""


class NotInvertibleError(CausalStreamsError):
    """Inverse of zero, or of a stream with zero constant term."""


class CompositionError(CausalStreamsError):
    """Functional composition precondition violated (inner constant term nonzero)."""


class ArityMismatchError(CausalStreamsError):
    """Transformer applied to inputs of the wrong arity or domain."""


class LengthMismatchError(CausalStreamsError):
    """Prefix or prefix set has a length incompatible with the operation."""


class DelayMismatchError(CausalStreamsError):
    """Angelic/demonic composition of transformers with unequal declared delays."""


class NotStronglyCausalError(CausalStreamsError):
    """Operation requires a declared delay of at least one."""


class EmptyImageError(CausalStreamsError):
    """An abort-like empty branch set was encountered while solving.

    Carries the input prefix at which the image was empty.
    """

    def __init__(self, message, prefix=None):
        super().__init__(message)
        self.prefix = prefix


class NonEnumerableDomainError(CausalStreamsError):
    """Enumeration requested over a domain without finitely many values."""


class EmptySetError(CausalStreamsError):
    """Hausdorff distance of an empty prefix set is undefined."""


class ParseError(CausalStreamsError):
    """Syntax or name error in an equation-system source file."""

    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f"{line}:{column}: {message}"
        super().__init__(message)
        self.line = line
        self.column = column


class RejectedSystemError(CausalStreamsError):
    """Elaboration or solving attempted on a causality-rejected system."""


class BudgetExhaustedError(CausalStreamsError):
    """Exhaustive exploration hit its node budget before completing."""
