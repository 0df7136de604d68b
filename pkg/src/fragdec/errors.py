"""Exception types shared by every module."""

from __future__ import annotations


class FragdecError(Exception):
    """Base class for all errors raised by the toolkit."""


class ParseError(FragdecError):
    """Malformed textual input (regex, DFA file, formula, equation)."""

    def __init__(self, message: str, position: int | None = None, line: int | None = None):
        self.position = position
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if position is not None:
            where.append(f"position {position}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)


class AlphabetError(FragdecError):
    """Unknown letter, mismatched alphabets, or a non-enriched alphabet where one is required."""


class GuardExceeded(FragdecError):
    """A configurable size cap was hit; the check was not completed."""

    def __init__(self, what: str, size: int, cap: int, flag: str | None = None):
        self.what = what
        self.size = size
        self.cap = cap
        hint = f"; raise it with {flag}" if flag else ""
        super().__init__(f"{what} needs {size} but the cap is {cap}{hint}")


class AlgebraError(FragdecError):
    """Precondition on an algebraic object failed (non-idempotent, not closed, ...)."""
