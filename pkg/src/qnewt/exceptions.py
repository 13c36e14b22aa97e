"""Exception hierarchy shared by all qnewt modules."""


class QNewtError(Exception):
    """Base class for every error raised by qnewt."""


class EmptySet(QNewtError, ValueError):
    pass


class InvalidRadii(QNewtError, ValueError):
    pass


class InsufficientData(QNewtError, ValueError):
    pass


class InfiniteConstant(QNewtError, ArithmeticError):
    """A Lipschitz ratio has a zero denominator but a nonzero numerator."""


class NormUnbounded(QNewtError, ArithmeticError):
    """A quasi-inverse ratio has a zero denominator but a nonzero numerator."""


class BUnbounded(QNewtError, ArithmeticError):
    """``H(x0)(x, y)`` vanishes on a pair of distinct points."""


class DimensionError(QNewtError, ValueError):
    pass


class SamplingError(QNewtError, RuntimeError):
    pass


class EmptySelection(QNewtError, RuntimeError):
    pass


class InverseMissing(QNewtError, RuntimeError):
    pass


class InvalidMajorant(QNewtError, ValueError):
    pass


class InvalidPoint(QNewtError, ValueError):
    pass


class OutOfRange(QNewtError, ValueError):
    pass


class ConfigError(QNewtError, ValueError):
    pass
