"""Exception types raised across the package."""


class ModelError(ValueError):
    """Base class for invalid inputs and infeasible model states."""


class InvalidSize(ModelError):
    pass


class InvalidAgent(ModelError):
    pass


class InvalidParameter(ModelError):
    pass


class NoInteriorOptimum(ModelError):
    pass


class NoClearing(ModelError):
    """Stock offered for sale is not smaller than the total stock."""


class NoDemand(ModelError):
    pass


class DivergentSolution(ModelError):
    pass


class EmptyInput(ModelError):
    pass


class ZeroTotal(ModelError):
    pass


class InsufficientTail(ModelError):
    pass
