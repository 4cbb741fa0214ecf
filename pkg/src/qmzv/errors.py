"""Exception types shared across the package."""


class QMZVError(Exception):
    pass


class RingMismatch(QMZVError):
    pass


class TruncationMismatch(QMZVError):
    pass


class DomainError(QMZVError, ValueError):
    pass


class FactorialNotInvertible(QMZVError, ZeroDivisionError):
    pass


class SpecViolation(QMZVError, ValueError):
    pass


class BasisViolation(QMZVError, ValueError):
    pass


class MissingEntry(QMZVError, KeyError):
    pass


class NonUnitConstant(QMZVError, ValueError):
    pass


class ParseError(QMZVError, ValueError):
    def __init__(self, message, text="", position=0):
        super().__init__(f"{message} at position {position}: {text!r}")
        self.text = text
        self.position = position


class UnknownCheck(QMZVError, KeyError):
    pass
