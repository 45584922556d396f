"""Exception types shared across the package."""


class AlcsepError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(AlcsepError):
    """Malformed input text; `offset` is the byte offset of the problem."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class DialectError(AlcsepError):
    """Operation or input not available in the requested dialect."""


class BudgetError(AlcsepError):
    """A configured search/enumeration budget was exceeded.

    Budget overruns are reported, never silently converted into a verdict.
    """


class CertificationError(AlcsepError):
    """A constructed separator failed its own entailment/satisfiability check."""


class SoundnessError(AlcsepError):
    """An internal invariant that certifies output correctness was violated.

    This is a bug indicator, distinguished from ordinary errors so the
    pipeline never returns an unverified result quietly.
    """
