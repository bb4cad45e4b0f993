"""Exception hierarchy shared by all semtraj modules."""


class SemtrajError(Exception):
    """Base class for every error raised by this package."""


class ParseError(SemtrajError, ValueError):
    """A recording could not be parsed.

    ``line`` is the 1-based line number of the offending record.
    """

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.reason = message


class MalformedRecord(ParseError):
    pass


class MissingHeader(ParseError):
    pass


class NonMonotonicTimestamp(ParseError):
    def __init__(self, object_id: str, line: int):
        super().__init__(f"non-increasing timestamp for object {object_id!r}", line)
        self.object_id = object_id


class NonFiniteValue(ParseError):
    def __init__(self, field: str, line: int):
        super().__init__(f"non-finite value in field {field!r}", line)
        self.field = field


class UnknownRecordKind(ParseError):
    pass


class MalformedTemplate(SemtrajError, ValueError):
    pass


class ConsecutiveDuplicateTokens(MalformedTemplate):
    pass


class EmptyInput(SemtrajError, ValueError):
    pass


class NoActions(SemtrajError, ValueError):
    pass


class UnknownObject(SemtrajError, KeyError):
    pass


class UnknownTarget(SemtrajError, KeyError):
    pass


class EmptyGroup(SemtrajError, ValueError):
    pass


class EmptyPath(SemtrajError, ValueError):
    pass


class InsufficientGroup(SemtrajError, ValueError):
    pass


class DegenerateInput(SemtrajError, ValueError):
    pass
