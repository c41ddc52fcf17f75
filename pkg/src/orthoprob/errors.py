"""Semantic exception hierarchy shared across the package."""

from __future__ import annotations


class OrthoProbError(Exception):
    """Base class for every error raised by this package."""


class HandleError(OrthoProbError, IndexError):
    """An element handle is not a valid index of the lattice."""


class NotALatticeError(OrthoProbError, ValueError):
    """The input order is not a (bounded) lattice.

    ``pair`` names the offending pair of elements when the failure is a
    missing or non-unique meet/join.
    """

    def __init__(self, message: str, pair: tuple[int, int] | None = None):
        super().__init__(message)
        self.pair = pair


class LawViolationError(OrthoProbError, ValueError):
    """An algebraic law required by an operation does not hold.

    ``report`` carries the failing law check when available.
    """

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


class PastingError(LawViolationError):
    """A pasted block diagram produced a structure failing a law."""


class DiagramError(OrthoProbError, ValueError):
    """A block diagram is malformed (e.g. two blocks share >= 2 atoms)."""


class FormatError(OrthoProbError, ValueError):
    """A text document is malformed; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DanglingLabelError(FormatError):
    """A label directive refers to a nonexistent element."""


class SizeCapError(OrthoProbError, ValueError):
    """A size parameter is outside the supported range."""


class ClosureOverflowError(SizeCapError):
    """A subspace closure exceeded its element cap before reaching a fixpoint."""


class MissingElementError(OrthoProbError, KeyError):
    """A state assignment does not cover every lattice element."""


class NormalizationError(OrthoProbError, ValueError):
    """Weights or values that must sum to one do not."""


class NoStateError(OrthoProbError, ValueError):
    """The lattice admits no probability state."""


class DimensionMismatchError(OrthoProbError, ValueError):
    """Operands live in different ambient dimensions."""


class BasisError(OrthoProbError, ValueError):
    """Vectors fail a unit-norm or orthonormality requirement."""


class IllConditionedError(OrthoProbError, ArithmeticError):
    """A numerical comparison fell into the ambiguous tolerance band."""


class DomainError(OrthoProbError, ValueError):
    """A grid-function domain is too small or a bracket cannot be formed."""


class PreconditionError(OrthoProbError, ValueError):
    """An operation was called on input violating its stated precondition."""
