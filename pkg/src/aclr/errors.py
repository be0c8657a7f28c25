"""Exception hierarchy. Everything raised on purpose derives from ACLRError."""


class ACLRError(Exception):
    pass


class InvalidSpecError(ACLRError, ValueError):
    """Chain definition is malformed (bad spin, length, site...)."""


class DimensionError(ACLRError, ValueError):
    """Hilbert space exceeds the dense-matrix budget."""


class ContractError(ACLRError, ValueError):
    """An input violates an operation's precondition (non-Hermitian, wrong shape...)."""


class DegeneracyError(ACLRError, ArithmeticError):
    """The revival linear system is singular or too badly conditioned.

    This can legitimately happen for free or integrable dynamics.
    """


class SymmetryError(ACLRError, ValueError):
    """Operator does not commute with the symmetry it is being resolved by."""


class FitError(ACLRError, ValueError):
    """Regression input is degenerate (constant or too short)."""
