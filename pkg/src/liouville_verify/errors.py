class DomainError(ValueError):
    """Input outside the domain where a formula or operation is defined."""


class ZeroDenominatorError(DomainError):
    def __init__(self, name, value=None):
        self.name = name
        self.value = value
        super().__init__(f"denominator {name} vanishes" + ("" if value is None else f" (value {value})"))


class GatingError(DomainError):
    """A precondition gate (B0 > 0, b2 = 0, ...) failed."""


class NoRootNearSeed(DomainError):
    def __init__(self, msg="no-root-near-seed"):
        super().__init__(msg)
