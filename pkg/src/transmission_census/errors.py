"""Exception hierarchy shared by the numerical modules and the CLI."""


class CensusError(Exception):
    """Base class for every error raised by this package."""


class ConditionError(CensusError):
    """The media violate a hypothesis required for the counting theory."""


class Condition14Violated(ConditionError):
    def __init__(self, product):
        super().__init__(
            f"condition (1.4) violated: c1*n1 == c2*n2 == {product!r}"
        )
        self.product = product


class NumericalError(CensusError):
    """A numerical procedure failed to produce a trustworthy result."""


class OrderOverflow(NumericalError):
    pass


class DomainOverflow(NumericalError):
    pass


class NonConvergent(NumericalError):
    pass


class ZeroOnContour(NumericalError):
    pass


class SplitDegenerate(NumericalError):
    pass


class TailNotEmpty(NumericalError):
    pass


class CountMismatch(NumericalError):
    """Localized zeros disagree with the winding count of their region."""


class OutsideEllipticZone(NumericalError):
    pass


class EllipticityFailure(NumericalError):
    pass
