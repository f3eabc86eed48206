"""Exception types shared across the toolkit.

Programming-contract violations (bad shapes, out-of-range parameters) raise
plain ``ValueError``; these classes cover data and environment failures that
callers may want to handle individually.
"""

from __future__ import annotations


class BoostNEError(Exception):
    """Base class for all toolkit-specific errors."""


class ParseError(BoostNEError):
    """A text input (edge list, label file, embedding file) is malformed."""

    def __init__(self, message: str, line_number: int | None = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class DegenerateInputError(BoostNEError):
    """Input is structurally unusable (e.g. a graph with no edges)."""


class ZeroDegreeError(BoostNEError):
    """An operation requires strictly positive degrees and found a node without."""

    def __init__(self, message: str, nodes: tuple[str, ...] = ()):
        super().__init__(message)
        self.nodes = nodes


class ResourceLimitError(BoostNEError):
    """A dense allocation would exceed the configured node-count ceiling."""


class LabelMismatchError(BoostNEError):
    """Label data references node ids that the embedding does not contain."""

    def __init__(self, message: str, ids: tuple[str, ...] = ()):
        super().__init__(message)
        self.ids = ids
