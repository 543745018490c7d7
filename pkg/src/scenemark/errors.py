"""Exception hierarchy shared by every pipeline stage."""

from __future__ import annotations


class PipelineError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(PipelineError):
    """Invalid configuration value or unusable image geometry."""


class ParseError(PipelineError):
    """Malformed input file (bad JSON, bad PGM header, ...).

    ``offset`` is the byte offset of the first unreadable token when the
    underlying parser can report one, else ``None``.
    """

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class ValidationError(PipelineError):
    """Well-formed input violating a schema or domain invariant.

    ``field`` names the offending field when known.
    """

    def __init__(self, message: str, field: str | None = None):
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message)
        self.field = field


class RenderError(PipelineError):
    """Image cannot host marks, or the bundled font is unusable."""
