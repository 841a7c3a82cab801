"""Classical simulation of concordant quantum circuits."""

__version__ = "0.1.0"

from .affine import AffineMap, ProductState, canonicalize_state  # noqa: E402
from .circuit import Circuit, Gate, make_circuit, parse_circuit, serialize_circuit  # noqa: E402
from .converter import ConvertedProgram, convert  # noqa: E402
from .exceptions import (  # noqa: E402
    CircuitError,
    ConcordantError,
    DiscordError,
    GenerationError,
    InconsistencyError,
    ResourceLimitError,
)

__all__ = [
    "__version__",
    "AffineMap",
    "ProductState",
    "canonicalize_state",
    "Circuit",
    "Gate",
    "make_circuit",
    "parse_circuit",
    "serialize_circuit",
    "ConvertedProgram",
    "convert",
    "CircuitError",
    "ConcordantError",
    "DiscordError",
    "GenerationError",
    "InconsistencyError",
    "ResourceLimitError",
]
