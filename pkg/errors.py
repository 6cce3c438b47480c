"""Exception hierarchy shared by every module of the toolkit."""


class FractalCalculusError(RuntimeError):
    """Base class for every computation error the toolkit raises."""

    def __init__(self, message: str, *, operation: str | None = None):
        super().__init__(message)
        self.operation = operation

    @property
    def kind(self) -> str:
        return type(self).__name__


class PoleError(FractalCalculusError):
    """Gamma evaluated at zero or a negative integer."""


class DomainError(FractalCalculusError):
    """Argument outside the domain of an operation."""


class TruncationError(FractalCalculusError):
    """A series did not reach its tolerance within the term budget."""


class EvaluationError(FractalCalculusError):
    """A caller-supplied function failed or returned a non-finite value."""


class UnsupportedOrder(FractalCalculusError):
    """Finite-difference route asked for more applications than it supports."""


class DegenerateDataError(FractalCalculusError):
    """Too few usable samples for a fit."""


class NoWitnessError(FractalCalculusError):
    """No sign change found while locating a mean-value point."""


class OracleError(FractalCalculusError):
    """A mixed-derivative oracle failed."""


class StabilityError(FractalCalculusError):
    """An explicit scheme violated its stability bound or blew up."""


class ConfigError(FractalCalculusError):
    """Inconsistent parameters or grids."""


class ParseError(FractalCalculusError):
    """Expression text does not match the grammar."""

    def __init__(self, message: str, offset: int, expected: frozenset[str] = frozenset()):
        detail = f"{message} at offset {offset}"
        if expected:
            detail += f" (expected one of: {', '.join(sorted(expected))})"
        super().__init__(detail, operation="parse")
        self.offset = offset
        self.expected = expected


class UnsupportedForm(FractalCalculusError):
    """Expression outside the rule table (products, chains, bare variables)."""


class UnboundVariable(FractalCalculusError):
    """Expression evaluated without a binding for one of its variables."""


class UsageError(FractalCalculusError):
    """Command line that cannot be turned into a run."""


class IoError(FractalCalculusError):
    """Report could not be written."""


class DivergenceWarning(UserWarning):
    """A fractal sum depends on the partition and has no stage-independent limit."""
