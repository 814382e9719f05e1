"""Exception types shared across forge."""


class ForgeError(Exception):
    """Base class for every error raised by forge."""


class DenominatorZero(ForgeError):
    def __init__(self, factor, point=None):
        self.factor = factor
        self.point = point
        super().__init__(f"denominator factor {factor} vanishes at {point}")


class ChartMismatch(ForgeError):
    pass


class SingularGauge(ForgeError):
    pass


class SingularMobius(ForgeError):
    pass


class DegenerateSubstitution(ForgeError):
    pass


class ParseError(ForgeError):
    pass


class NonGeneric(ForgeError):
    def __init__(self, reason):
        self.reason = reason
        super().__init__(f"non-generic line parameters: {reason}")


class CollidingPoles(ForgeError):
    pass


class HigherOrderPole(ForgeError):
    pass


class SingularConjugator(ForgeError):
    pass


class PolesTooClose(ForgeError):
    pass


class StepUnderflow(ForgeError):
    pass


class ToleranceNotMet(ForgeError):
    pass


class NoDiagonalizableGenerator(ForgeError):
    pass


class PoleCollision(ForgeError):
    pass


class DegreeDrop(ForgeError):
    pass


class SingularJacobian(ForgeError):
    pass


class LabelSwap(ForgeError):
    pass
