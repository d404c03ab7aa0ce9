"""Exception hierarchy shared by all modules."""


class ProbiError(Exception):
    """Base class for all errors raised by probi."""

    kind = "error"

    def to_dict(self):
        return {"error": self.kind, "message": str(self)}


class InvalidInputError(ProbiError, ValueError):
    kind = "invalid_input"


class DimensionMismatchError(InvalidInputError):
    kind = "dimension_mismatch"


class InvalidProbabilityError(InvalidInputError):
    kind = "invalid_probability"


class EmptyInputError(ProbiError, ValueError):
    kind = "empty_input"


class EmptySupportError(EmptyInputError):
    kind = "empty_support"


class EmptyStreamError(EmptyInputError):
    kind = "empty_stream"


class DimensionTooLargeError(ProbiError, ValueError):
    kind = "dimension_too_large"


class CoincidentIterate(ProbiError, ArithmeticError):
    """A Weiszfeld iterate landed on a support point; the recurrence is undefined there."""

    kind = "coincident_iterate"

    def __init__(self, index):
        super().__init__(f"iterate coincides with support point {index}")
        self.index = index


class ParseError(InvalidInputError):
    kind = "parse_error"

    def __init__(self, message, path=None, line=None):
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}: "
        elif where:
            where += " "
        super().__init__(where + message)
        self.path = path
        self.line = line

    def to_dict(self):
        d = super().to_dict()
        if self.path is not None:
            d["path"] = str(self.path)
        if self.line is not None:
            d["line"] = self.line
        return d
