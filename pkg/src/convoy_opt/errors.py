"""Exception hierarchy and checked 64-bit integer arithmetic.

All solver errors derive from :class:`ConvoyOptError` so callers (and the
CLI) can map failures to exit codes without string matching.
"""

from __future__ import annotations

I64_MIN = -(2**63)
I64_MAX = 2**63 - 1


class ConvoyOptError(Exception):
    """Base class for all errors raised by this package."""


class GraphConstructionError(ConvoyOptError):
    """A Digraph violates its structural invariants."""


class InvalidPathError(ConvoyOptError):
    """An arc sequence is not a valid path (unknown arc, broken incidence,
    repeated arc/node, or wrong endpoints)."""


class NotSeriesParallelError(ConvoyOptError):
    """The graph is not two-terminal series-parallel."""


class RoutingStructureError(ConvoyOptError):
    """A routing or convoy object is structurally malformed (distinct from
    a feasibility violation, which is reported, not raised)."""


class InfeasibleError(ConvoyOptError):
    """The instance admits no solution with the requested parameters
    (e.g. fewer than k arc-disjoint s-t paths exist)."""


class InsufficientFlowError(ConvoyOptError):
    """A flow over time does not carry enough value for the requested
    number of trains."""


class UnreachableSinkError(ConvoyOptError):
    """The sink cannot be reached from the source."""


class BudgetExceededError(ConvoyOptError):
    """An oracle was asked to search beyond its configured budget."""


class MaterializationCapError(ConvoyOptError):
    """Expanding a convoy would materialize more trains than the cap."""


class IntegerRangeError(ConvoyOptError):
    """A derived quantity left the signed 64-bit range."""


class PreconditionError(ConvoyOptError):
    """An operation was invoked outside its stated precondition."""


class InternalInvariantError(ConvoyOptError):
    """A post-step validation failed; signals an implementation bug."""


class SchemaError(ConvoyOptError):
    """A JSON document does not conform to the convoy-opt/1 schema."""


def checked_i64(value: int) -> int:
    """Return ``value`` unchanged if it fits a signed 64-bit integer.

    Python integers never wrap, so this is the single choke point that
    turns would-be overflow into a checked error.
    """
    if not (I64_MIN <= value <= I64_MAX):
        raise IntegerRangeError(f"value {value} outside signed 64-bit range")
    return value
