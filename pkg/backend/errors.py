"""
Exception hierarchy for HexHeight
"""


class HexHeightError(Exception):
    """Root of all HexHeight errors"""


class InvalidTripleError(HexHeightError, ValueError):
    """Integer triple is not a positive-definite form (D <= 0, a <= 0 or c <= 0)"""


class NotNormalizedError(InvalidTripleError):
    """Triple violates 0 <= 2b <= a <= c where a normalized triple is required"""


class PreconditionError(HexHeightError, ValueError):
    """An operation was called outside its documented domain"""


class OracleViolationError(PreconditionError):
    """A conflict oracle marked more than nu later indices for one anchor"""


class TheoremCheckFailed(HexHeightError, AssertionError):
    """
    A theorem-backed inequality or identity did not hold.

    These checks cannot fail for a correct implementation, so this always
    signals a bug rather than bad input.
    """

    def __init__(self, check: str, detail: str = ""):
        self.check = check
        self.detail = detail
        super().__init__(f"{check} failed: {detail}" if detail else f"{check} failed")
