"""Exception hierarchy shared by every module."""


class PermDivError(Exception):
    """Base class for all errors raised by permdiv."""


class OutOfRange(PermDivError, ValueError):
    pass


class RowCollision(PermDivError, ValueError):
    pass


class ColCollision(PermDivError, ValueError):
    pass


class MismatchedGround(PermDivError, ValueError):
    pass


class EmptyInput(PermDivError, ValueError):
    pass


class EmptyFamily(EmptyInput):
    pass


class NotIntersecting(PermDivError, ValueError):
    pass


class NotSubfamily(PermDivError, ValueError):
    pass


class NotSpread(PermDivError, ValueError):
    pass


class ConstraintConflict(PermDivError, ValueError):
    pass


class PreconditionViolation(PermDivError, ValueError):
    pass


class TooLarge(PermDivError, ValueError):
    pass


class InternalMismatch(PermDivError, RuntimeError):
    """Two independent evaluators of the same quantity disagree."""
