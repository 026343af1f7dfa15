"""Shared exception hierarchy.

``DataError`` marks problems with user-supplied inputs (exit code 2 in the
CLI); plain ``ValueError``/``RuntimeError`` mark programming or numeric
failures.
"""


class DataError(ValueError):
    """Invalid input data (malformed files, unknown ids, bad configs)."""


class CorpusError(DataError):
    pass


class AnnotationError(DataError):
    pass


class GraphError(DataError):
    pass


class TrainingError(RuntimeError):
    """Non-finite loss or other unrecoverable numeric failure."""
