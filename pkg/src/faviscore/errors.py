"""Exception hierarchy.

Every error raised on bad *data* derives from :class:`DataError`, which the
CLI maps to exit code 2. Errors carry whatever context is known at the raise
site (file, line, system pair, item id) and can be enriched on the way up via
:meth:`FaviError.with_context`.
"""

from __future__ import annotations


class FaviError(Exception):
    """Base class for all package errors."""

    def __init__(self, message: str, **context: object) -> None:
        super().__init__(message)
        self.message = message
        self.context: dict[str, object] = {k: v for k, v in context.items() if v is not None}

    def with_context(self, **context: object) -> "FaviError":
        for key, value in context.items():
            if value is not None:
                self.context.setdefault(key, value)
        return self

    def __str__(self) -> str:
        if not self.context:
            return self.message
        ctx = ", ".join(f"{k}={v}" for k, v in self.context.items())
        return f"{self.message} ({ctx})"


class DataError(FaviError):
    """Input data violates a contract."""


class EmptySetting(DataError):
    pass


class InvalidInput(DataError):
    pass


class InvalidScore(DataError):
    pass


class MissingScore(DataError):
    def __init__(self, message: str, item: str | None = None, system: str | None = None, **context: object) -> None:
        super().__init__(message, item=item, system=system, **context)
        self.item = item
        self.system = system


class InconsistentPairSet(DataError):
    pass


class DegenerateMarginal(DataError):
    def __init__(self, label: object, **context: object) -> None:
        super().__init__(f"no human ratings with label {label!s}; mixture column undefined", label=str(label), **context)
        self.label = label


class CyclicGraph(DataError):
    pass


class UnparseableResponse(DataError):
    pass


class TransportError(DataError):
    pass


class ParseError(DataError):
    def __init__(self, message: str, path: object = None, line: int | None = None, **context: object) -> None:
        super().__init__(message, file=path, line=line, **context)
        self.path = path
        self.line = line


class OrderingConflict(DataError):
    pass
