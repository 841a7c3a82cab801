"""Exception types shared across the package."""


class ConcordantError(Exception):
    """Base class for all errors raised by this package."""


class CircuitError(ConcordantError, ValueError):
    """A circuit document or object failed validation.

    ``index`` names the offending gate (or init row) when known; ``line`` and
    ``column`` locate syntax errors in the source text.
    """

    def __init__(self, message, *, index=None, line=None, column=None, field=None):
        super().__init__(message)
        self.index = index
        self.line = line
        self.column = column
        self.field = field


class InvalidTargetError(ConcordantError, ValueError):
    """Qubit targets are equal or out of range."""


class StateError(ConcordantError, ValueError):
    """Per-qubit probabilities are malformed or violate a precondition."""


class ResourceLimitError(ConcordantError):
    """A brute-force routine was asked to exceed its size bound."""


class GenerationError(ConcordantError):
    """The generator could not produce a certified instance."""


class InconsistencyError(ConcordantError, RuntimeError):
    """An internal invariant failed; indicates a bug rather than bad input."""


class DiscordError(ConcordantError):
    """The gate at ``gate_index`` cannot be absorbed as a permutation plus a
    product basis change, i.e. the computation is not concordant there."""

    REASONS = (
        "no-product-eigenvector",
        "subspace-has-no-product-pair",
        "inconsistent-local-basis",
        "component-count-mismatch",
    )

    def __init__(self, gate_index, reason, detail=""):
        if reason not in self.REASONS:
            raise ValueError(f"unknown discord reason {reason!r}")
        msg = f"gate {gate_index}: {reason}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)
        self.gate_index = gate_index
        self.reason = reason
        self.detail = detail
