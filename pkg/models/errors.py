# models/errors.py
"""
Error kinds raised by the library; the CLI maps them to exit statuses
"""


class QuasimorphismError(ValueError):
    """Base class for every library error"""

    kind = "error"

    def __init__(self, message: str, **context):
        super().__init__(message)
        self.context = context

    def to_dict(self):
        return {'kind': self.kind, 'message': str(self), 'context': self.context}


class DisconnectedError(QuasimorphismError):
    kind = "disconnected"


class TooLargeError(QuasimorphismError):
    kind = "too large"


class LeftTruncationError(QuasimorphismError):
    kind = "left-truncation"


class BudgetExceededError(QuasimorphismError):
    kind = "budget exceeded"


class DegeneratePairError(QuasimorphismError):
    kind = "degenerate pair"


class ScheduleError(QuasimorphismError):
    kind = "schedule violation"


class WordParseError(QuasimorphismError):
    kind = "parse error"
