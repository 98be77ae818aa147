"""Exception hierarchy shared by every genconn module."""


class GenconnError(Exception):
    pass


class IncompatibleGroupError(GenconnError, ValueError):
    """Two operands live in different groups."""


class GroupoidError(GenconnError, ValueError):
    pass


class BrokenPathError(GroupoidError):
    """Consecutive letters of a raw word do not chain end to start."""


class UnknownGeneratorError(GroupoidError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class NonComposableError(GroupoidError):
    pass


class GraphMismatchError(GroupoidError):
    pass


class NotClosedError(GroupoidError):
    pass


class NoGeometryError(GenconnError, ValueError):
    pass


class UnsupportedGroupError(GenconnError, ValueError):
    pass


class UnsupportedExactError(GenconnError, ValueError):
    pass


class BudgetExceededError(GenconnError, ValueError):
    pass


class ParseError(GenconnError, ValueError):
    """Malformed input text; carries the origin and position when known."""

    def __init__(self, message, source=None, line=None, column=None):
        self.message = message
        self.source = source
        self.line = line
        self.column = column
        super().__init__(str(self))

    def __str__(self):
        where = self.source or "<input>"
        if self.line is not None:
            where += f":{self.line}"
            if self.column is not None:
                where += f":{self.column}"
        return f"{where}: {self.message}"
