"""Exception types shared across the package.

The CLI maps these onto its exit-code contract (parse=2, invariant=3,
capacity=4, predicate=5), so library code should raise the most specific
type that applies.
"""


class QTransportError(Exception):
    """Base class for all qtransport errors."""


class ProblemFormatError(QTransportError):
    """Problem file is not valid JSON or does not match the schema."""


class InvariantError(QTransportError, ValueError):
    """A domain invariant is violated (bad pmf, overflow risk, bad boundary, ...)."""


class CapacityError(QTransportError):
    """Requested statevector exceeds the configured qubit ceiling."""


class PredicateError(QTransportError):
    """Predicate is malformed or invalid for the target register."""
