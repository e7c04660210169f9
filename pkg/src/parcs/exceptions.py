"""Exception hierarchy.

Every error the engine raises on bad user input derives from
:class:`ParcsError`; the command-line front end maps those to exit code 2.
"""


class ParcsError(Exception):
    """Base class for all user-facing errors."""


class InvalidParameter(ParcsError, ValueError):
    """A distribution parameter left its valid range."""


class NonBracketable(ParcsError):
    """A target mean cannot be reached inside the offset search bracket."""


class DegenerateSample(ParcsError):
    """Moment estimation over a constant sample."""


class CycleDetected(ParcsError):
    def __init__(self, cycle):
        self.cycle = tuple(cycle)
        super().__init__("cycle detected: " + " -> ".join(self.cycle + self.cycle[:1]))


class ShapeMismatch(ParcsError, ValueError):
    pass


class UnknownParent(ParcsError):
    pass


class UnknownNode(ParcsError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class DuplicateNode(ParcsError):
    pass


class PDLSyntaxError(ParcsError):
    """Syntax error in a graph description or guideline file."""

    def __init__(self, message, line=None, col=None, expected=None):
        self.line = line
        self.col = col
        self.expected = expected
        loc = ""
        if line is not None:
            loc = f"line {line}" + (f", col {col}" if col is not None else "") + ": "
        msg = loc + message
        if expected:
            msg += f" (expected {expected})"
        super().__init__(msg)


class UnknownParentInExpression(ParcsError):
    pass


class NonQuadraticTerm(ParcsError):
    pass


class EmptyChoiceList(ParcsError):
    pass


class InvalidRange(ParcsError, ValueError):
    pass


class MaskConflict(ParcsError):
    pass


class TraceMismatch(ParcsError):
    pass


class InvalidObservedSet(ParcsError, ValueError):
    pass
