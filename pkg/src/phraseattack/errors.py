"""Exception types shared across the engine."""


class PhraseAttackError(Exception):
    """Base class for all errors raised by this package."""


class EmptyText(PhraseAttackError):
    """Tokenization input was empty or whitespace-only."""


class SpanOutOfRange(PhraseAttackError):
    """A span does not fit inside the sequence it indexes."""


class MalformedTree(PhraseAttackError):
    """Bracketed tree text is not a well-formed S-expression."""


class TokenMismatch(PhraseAttackError):
    """Tree leaves disagree with the token sequence they should cover."""


class BackendUnavailable(PhraseAttackError):
    """Transport-level failure talking to a model backend (retryable)."""


class ProtocolError(PhraseAttackError):
    """Backend answered, but the payload violates the wire contract."""


class UnknownLabel(PhraseAttackError):
    """A label id is not part of the task's label set."""


class IncompleteLikelihoods(PhraseAttackError):
    """Per-class likelihoods are missing a class required for the ratio."""


class EmptyCandidateSet(PhraseAttackError):
    """Selection was asked to pick from an empty candidate set."""


class ParseError(PhraseAttackError):
    """A dataset line could not be parsed.

    Carries the 1-based line number of the offending record.
    """

    def __init__(self, message: str, line_number: int | None = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number
