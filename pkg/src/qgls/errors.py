"""Exception hierarchy shared by all qgls modules."""


class QglsError(Exception):
    """Base class for every error raised by the toolkit."""


class DomainError(QglsError, ValueError):
    """An argument lies outside the set where the operation is defined."""


class PsiDomainError(DomainError):
    pass


class DomainMismatch(DomainError):
    pass


class EvaluationUnsupported(QglsError, TypeError):
    """Pointwise evaluation requested for a representation that has none."""


class QuadratureNoConvergence(QglsError, ArithmeticError):
    pass


class DivergentLogIntegral(QglsError, ArithmeticError):
    pass


class NormDivergent(QglsError, ArithmeticError):
    def __init__(self, p, message=None):
        self.p = p
        super().__init__(message or f"||f||_p is infinite at p={p!r}")


class TailIntegralDivergent(QglsError, ArithmeticError):
    pass


class InsufficientDecay(QglsError, ArithmeticError):
    pass


class ConditionViolated(QglsError, ValueError):
    """The contraction constant is too large for the requested certificate."""


class NonFiniteIterate(QglsError, ArithmeticError):
    pass


class DegenerateSample(QglsError, ValueError):
    pass


class BoundViolated(QglsError, ArithmeticError):
    """A supplied operator bound is broken by some member of the test corpus."""

    def __init__(self, message, *, function_index=None, p=None, ratio=None):
        super().__init__(message)
        self.function_index = function_index
        self.p = p
        self.ratio = ratio


class ConfigError(QglsError, ValueError):
    """Invalid configuration document; ``path`` locates the offending field."""

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")
