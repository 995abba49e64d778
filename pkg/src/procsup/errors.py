"""Exception taxonomy shared by every procsup module.

The split matters for the CLI: parameter/validation/parse problems map to
exit code 2, while a failed verification suite maps to exit code 3.
"""

from __future__ import annotations


class ProcsupError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(ProcsupError, ValueError):
    """An argument is outside a function's documented domain."""


class ValidationError(ProcsupError, ValueError):
    """A data structure violates one of its invariants."""


class CapacityError(ProcsupError, RuntimeError):
    """An exact (enumeration-based) routine was asked to exceed its size cap."""


class ParseError(ProcsupError, ValueError):
    """An on-disk artifact could not be decoded."""
