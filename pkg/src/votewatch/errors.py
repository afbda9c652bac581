"""Exception types shared across the package.

The CLI maps these onto process exit codes: :class:`InvalidInputError`
exits with 2, :class:`FeasibilityError` and :class:`BoundaryError`
with 3.
"""


class VotewatchError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(VotewatchError):
    """An argument or input file violates a documented precondition."""


class FeasibilityError(VotewatchError):
    """A (p0, p_prime) pair is impossible under the requested intervention case."""


class BoundaryError(VotewatchError):
    """A quantity is undefined at an exact decision boundary (e.g. a 50% share)."""
