class BlackjackError(Exception):
    """Base class for every error raised by bjlab."""


class InvalidConfiguration(BlackjackError, ValueError):
    pass


class ShoeExhausted(BlackjackError):
    pass


class InvalidHand(BlackjackError, ValueError):
    """Raised for empty hands, or for bust hands where a live hand is required."""


class IllegalAction(BlackjackError):
    pass


class InvalidBet(BlackjackError, ValueError):
    pass


class InvalidComparison(BlackjackError, ValueError):
    pass
