"""Two-candidate voter model: opinions, interventions and vote-level simulation.

Opinions are encoded as integers: +1 for the first candidate, -1 for the
second.  An intervention is a pair of nonnegative weights applied to a
voter's opinion vector through an inner-product update; depending on the
weights it either leaves every opinion alone or flips the supporters of
exactly one candidate (it can never flip both sides, see
:func:`classify_intervention`).

Everything here is a pure function of its inputs, including the RNG seed,
so calls can run concurrently without coordination.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import InvalidInputError

FIRST = 1
SECOND = -1
#: Returned by :func:`majority` on an exact split.  Simulation protocols use
#: odd electorate sizes so this never occurs there.
TIE = 0


class InterventionCase(Enum):
    """What an intervention can do to an individual opinion."""

    NO_FLIP = "no_flip"
    FLIPS_FIRST = "flips_first"
    FLIPS_SECOND = "flips_second"


@dataclass(frozen=True)
class InterventionVector:
    """Weight pair applied to opinion vectors via the inner-product update."""

    first: float
    second: float

    def __post_init__(self) -> None:
        if self.first < 0 or self.second < 0:
            raise InvalidInputError(
                f"intervention weights must be nonnegative, got ({self.first}, {self.second})"
            )


@dataclass(frozen=True)
class VoteTally:
    """Final two-candidate count: ``first_votes`` out of ``n`` for candidate one."""

    n: int
    first_votes: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise InvalidInputError(f"voter count must be positive, got {self.n}")
        if not 0 <= self.first_votes <= self.n:
            raise InvalidInputError(
                f"first_votes={self.first_votes} outside [0, {self.n}]"
            )

    def proportion(self) -> float:
        return self.first_votes / self.n


def classify_intervention(v: InterventionVector) -> InterventionCase:
    """Determine which opinions the weight pair ``v`` flips.

    A selected opinion ``(1, 0)`` becomes ``(a^2 + 1, a*b)`` and ``(0, 1)``
    becomes ``(a*b, b^2 + 1)``; the updated opinion goes to whichever
    coordinate is larger, with ties staying put.  Flipping both sides would
    need ``a^2 + 1 < a*b`` and ``b^2 + 1 < a*b`` simultaneously, i.e.
    ``(a - b)^2 + 2 < 0``, which no real pair satisfies.
    """
    a, b = v.first, v.second
    ab = a * b
    flips_first = a * a + 1 < ab
    flips_second = b * b + 1 < ab
    if flips_first and flips_second:
        raise AssertionError(f"unreachable: ({a}, {b}) classified as flipping both")
    if flips_first:
        return InterventionCase.FLIPS_FIRST
    if flips_second:
        return InterventionCase.FLIPS_SECOND
    return InterventionCase.NO_FLIP


def post_intervention_prob(p0: float, pi0: float, case: InterventionCase) -> float:
    """First-candidate support after intervening on a ``pi0`` fraction of voters.

    With initial support ``p0``, a flip-first intervention removes the
    targeted first-candidate voters (``p0 * (1 - pi0)``) while a flip-second
    one converts the targeted second-candidate voters
    (``p0 + pi0 - p0 * pi0``).
    """
    if not 0.0 <= p0 <= 1.0:
        raise InvalidInputError(f"p0={p0} outside [0, 1]")
    if not 0.0 <= pi0 <= 1.0:
        raise InvalidInputError(f"pi0={pi0} outside [0, 1]")
    if case is InterventionCase.FLIPS_FIRST:
        return p0 * (1.0 - pi0)
    if case is InterventionCase.FLIPS_SECOND:
        return p0 + pi0 - p0 * pi0
    return p0


def majority(tally: VoteTally) -> int:
    """+1 if the first candidate got strictly more votes, -1 if fewer, TIE if equal."""
    second_votes = tally.n - tally.first_votes
    if tally.first_votes > second_votes:
        return FIRST
    if tally.first_votes < second_votes:
        return SECOND
    return TIE


def simulate_votes(p: float, n: int, seed) -> VoteTally:
    """Draw a final tally with iid voters supporting candidate one w.p. ``p``.

    ``seed`` may be anything :func:`numpy.random.default_rng` accepts,
    including an existing Generator (handy for threading one RNG through a
    replication loop).
    """
    if not 0.0 <= p <= 1.0:
        raise InvalidInputError(f"p={p} outside [0, 1]")
    if n < 1:
        raise InvalidInputError(f"n must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    return VoteTally(n=n, first_votes=int(rng.binomial(n, p)))


def sample_opinions(p: float, n: int, seed) -> np.ndarray:
    """Draw an opinion vector of length ``n``: +1 w.p. ``p``, else -1."""
    if not 0.0 <= p <= 1.0:
        raise InvalidInputError(f"p={p} outside [0, 1]")
    if n < 1:
        raise InvalidInputError(f"n must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    return np.where(rng.random(n) < p, FIRST, SECOND).astype(np.int8)


def tally_opinions(opinions: np.ndarray) -> VoteTally:
    """Count an opinion vector into a :class:`VoteTally`."""
    arr = np.asarray(opinions)
    return VoteTally(n=arr.size, first_votes=int(np.count_nonzero(arr == FIRST)))


def apply_intervention(
    opinions: np.ndarray, v: InterventionVector, pi0: float, seed
) -> np.ndarray:
    """Independently target each voter w.p. ``pi0`` and apply ``v`` to the targets.

    Only the sign of the updated opinion is observable, so the inner-product
    update is evaluated once through :func:`classify_intervention` rather
    than per voter.  The input array is not modified.
    """
    if not 0.0 <= pi0 <= 1.0:
        raise InvalidInputError(f"pi0={pi0} outside [0, 1]")
    arr = np.asarray(opinions)
    case = classify_intervention(v)
    rng = np.random.default_rng(seed)
    selected = rng.random(arr.size) < pi0
    out = arr.copy()
    if case is InterventionCase.FLIPS_FIRST:
        out[selected & (arr == FIRST)] = SECOND
    elif case is InterventionCase.FLIPS_SECOND:
        out[selected & (arr == SECOND)] = FIRST
    return out
