"""Exception hierarchy shared by every module."""


class LoopfreeError(Exception):
    """Base class for all library errors."""


class ValidationError(LoopfreeError, ValueError):
    """A model, query or sequence is not admissible."""


class InvalidPoi(ValidationError):
    pass


class LengthTooShort(ValidationError):
    pass


class NoPathPossible(ValidationError):
    pass


class CapExceeded(LoopfreeError):
    """The list Viterbi iterator hit its configured emission cap."""

    def __init__(self, cap):
        super().__init__(f"K cap of {cap} sequences exceeded")
        self.cap = cap


class TooLarge(LoopfreeError):
    pass


class Infeasible(LoopfreeError):
    pass


class EmptySequence(ValidationError):
    pass


class TooShort(ValidationError):
    pass


class ParseError(LoopfreeError, ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DuplicateTrajId(ParseError):
    pass


class EmptyDataset(ValidationError):
    pass
