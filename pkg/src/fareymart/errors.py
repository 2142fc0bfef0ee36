"""Exception types shared across the package."""


class DomainError(ValueError):
    """Argument lies outside the domain where the operation is defined."""


class CFLengthError(IndexError):
    """A finite continued fraction expansion ran out of partial quotients."""


class PreconditionError(ValueError):
    """An operation's stated precondition does not hold."""


class NotAdmissibleError(PreconditionError):
    """An enumeration prefix violates the admissibility conditions.

    ``index`` is the 1-based position of the offending entry and ``missing``
    the neighbor that should have appeared earlier (``None`` when the first
    entry is not zero).
    """

    def __init__(self, index, point, missing):
        self.index = index
        self.point = point
        self.missing = missing
        if missing is None:
            msg = f"entry {index} ({point}) must be 0/1"
        else:
            msg = f"entry {index} ({point}) appears before its neighbor {missing}"
        super().__init__(msg)
