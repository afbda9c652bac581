"""Interval tests for majority-flipping interference in two-candidate races.

The decision quantity is the probability that the majority survived the
suspected intervention, evaluated over a confidence rectangle for the
(pre, post) support shares.  The rectangle pairs a Wald interval for the
final share with either an exit-poll interval for the initial share or a
delta-method interval around the cost-prior estimate.  The test statistic
is the supremum of the match probability over the rectangle; the null
("no significant interference") is rejected when even that supremum falls
below the critical value ``tau_c``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from .cost import CostFunction, expected_initial_share, expected_initial_share_deriv
from .data import ElectionRecord, ExitPollRecord
from .errors import InvalidInputError
from .gaussian import _same_sign_core, moments, same_sign_prob
from .voter import InterventionCase

DEFAULT_ALPHA = 0.05
DEFAULT_TAU_C = 0.5
DEFAULT_GRID = 64
_EDGE = 1e-9


def split_level(alpha: float) -> float:
    """Per-interval level beta with (1 - beta)^2 = 1 - alpha.

    Both rectangle sides hold marginally with probability 1 - beta, so the
    rectangle covers jointly with at least 1 - alpha.
    """
    if not 0.0 < alpha < 1.0:
        raise InvalidInputError(f"alpha={alpha} outside (0, 1)")
    return 1.0 - math.sqrt(1.0 - alpha)


def ci_half_width(p_hat: float, n: int, alpha: float) -> float:
    """Wald half-width for a binomial share at the split level.

    ``sqrt(p_hat (1 - p_hat) / n)`` times the upper beta/2 normal quantile,
    with beta from :func:`split_level`.
    """
    if not 0.0 < p_hat < 1.0:
        raise InvalidInputError(f"p_hat={p_hat} outside (0, 1)")
    if n < 1:
        raise InvalidInputError(f"n must be >= 1, got {n}")
    z = norm.isf(split_level(alpha) / 2.0)
    return math.sqrt(p_hat * (1.0 - p_hat) / n) * z


@dataclass(frozen=True)
class ConfidenceRectangle:
    """Product of a final-share interval and an initial-share interval.

    Intervals are clipped into (1e-9, 1 - 1e-9); a zero-width side is
    permitted so single points can be bounded too.
    """

    p_prime_interval: tuple[float, float]
    p0_interval: tuple[float, float]
    alpha: float = DEFAULT_ALPHA
    beta: float = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "beta", split_level(self.alpha))
        for name in ("p_prime_interval", "p0_interval"):
            lo, hi = getattr(self, name)
            lo = min(max(lo, _EDGE), 1.0 - _EDGE)
            hi = min(max(hi, _EDGE), 1.0 - _EDGE)
            if lo > hi:
                raise InvalidInputError(f"{name} is empty after clipping: ({lo}, {hi})")
            object.__setattr__(self, name, (lo, hi))


@dataclass(frozen=True)
class Diagnostics:
    """How a test's extremization was carried out."""

    p_prime_interval: tuple[float, float]
    p0_interval: tuple[float, float]
    grid: int
    feasibility_clipped: bool


@dataclass(frozen=True)
class TestResult:
    """Outcome of one interference test.

    ``statistic`` is the supremum of the match probability over the
    rectangle and ``lower`` its infimum; the null is rejected when the
    statistic falls below ``tau_c``.
    """

    statistic: float
    lower: float
    tau_c: float
    alpha: float
    case: InterventionCase
    diagnostics: Diagnostics

    @property
    def reject(self) -> bool:
        return self.statistic < self.tau_c

    @property
    def decision(self) -> str:
        return "reject" if self.reject else "retain"


def majority_match_prob(
    p0: float, p_prime: float, n: int, case: InterventionCase
) -> float:
    """Probability that pre- and post-intervention majorities agree."""
    return same_sign_prob(moments(p0, p_prime, case, n=n))


def majority_match_prob_from_rate(
    pi0: float, p_prime: float, n: int, case: InterventionCase
) -> float:
    """Same as :func:`majority_match_prob`, parameterized by the targeted rate.

    Recovers the initial share from ``p_prime`` and the rate: dividing out
    the removed supporters for a flip-first intervention, or subtracting
    the converted ones for flip-second.
    """
    if not 0.0 <= pi0 < 1.0:
        raise InvalidInputError(f"pi0={pi0} outside [0, 1)")
    if not 0.0 < p_prime < 1.0:
        raise InvalidInputError(f"p_prime={p_prime} outside (0, 1)")
    if pi0 == 0.0:
        p0 = p_prime
    elif case is InterventionCase.FLIPS_FIRST:
        p0 = p_prime / (1.0 - pi0)
    elif case is InterventionCase.FLIPS_SECOND:
        p0 = (p_prime - pi0) / (1.0 - pi0)
    else:
        raise InvalidInputError("rate parameterization needs a flipping case")
    if not 0.0 < p0 < 1.0:
        raise InvalidInputError(
            f"recovered initial share {p0} outside (0, 1) for pi0={pi0}, p_prime={p_prime}"
        )
    return majority_match_prob(p0, p_prime, n, case)


def _match_prob_many(p0, p_prime, n, case):
    """Vectorized match probability on share arrays.

    The correlation is clipped into [-1, 1]: on the feasible set it only
    exceeds 1 by float noise, and fallback evaluations of infeasible points
    are defined to use the clamped (comonotone) value.
    """
    q = np.asarray(p0, float)
    p = np.asarray(p_prime, float)
    mu1 = 2.0 * q - 1.0
    mu2 = 2.0 * p - 1.0
    var1 = 4.0 * q * (1.0 - q)
    var2 = 4.0 * p * (1.0 - p)
    if case is InterventionCase.FLIPS_FIRST:
        off = 4.0 * p * (1.0 - q)
    else:
        off = 4.0 * q * (1.0 - p)
    rho = np.clip(off / np.sqrt(var1 * var2), -1.0, 1.0)
    return _same_sign_core(mu1, mu2, np.sqrt(var1 / n), np.sqrt(var2 / n), rho)


def _feasible(p_prime, p0, case) -> bool:
    if case is InterventionCase.FLIPS_FIRST:
        return p_prime <= p0
    return p_prime >= p0


def _extremize(
    rect: ConfidenceRectangle, n: int, case: InterventionCase, grid: int
) -> tuple[float, float, bool]:
    """Grid-plus-refinement extremization; returns (inf, sup, fallback_used)."""
    plo, phi = rect.p_prime_interval
    qlo, qhi = rect.p0_interval
    pvals = np.linspace(plo, phi, grid)
    qvals = np.linspace(qlo, qhi, grid)
    pg, qg = np.meshgrid(pvals, qvals)
    pg, qg = pg.ravel(), qg.ravel()

    if case is InterventionCase.FLIPS_FIRST:
        mask = pg <= qg
    else:
        mask = pg >= qg

    fallback = not mask.any()
    if fallback:
        # Whole rectangle sits on the wrong side of the diagonal: evaluate it
        # anyway with the correlation clamped, and flag the result.
        points_p, points_q = pg, qg
    else:
        points_p, points_q = pg[mask], qg[mask]
        # Where the diagonal crosses the rectangle the match probability
        # peaks (the two shares coincide); include it explicitly.
        dlo, dhi = max(plo, qlo), min(phi, qhi)
        if dlo <= dhi:
            diag = np.linspace(dlo, dhi, grid)
            points_p = np.concatenate([points_p, diag])
            points_q = np.concatenate([points_q, diag])

    values = _match_prob_many(points_q, points_p, n, case)

    def refine(find_max: bool) -> float:
        # Two rounds of 3x3 neighborhood search at halved spacing around the
        # running extremum; candidates outside the feasible region are dropped.
        sign = 1.0 if find_max else -1.0
        idx = int(np.argmax(sign * values))
        best_val = float(values[idx])
        best_p, best_q = float(points_p[idx]), float(points_q[idx])
        dp = (phi - plo) / max(grid - 1, 1)
        dq = (qhi - qlo) / max(grid - 1, 1)
        for _ in range(2):
            dp, dq = dp / 2.0, dq / 2.0
            cand = [
                (min(max(best_p + ip * dp, plo), phi), min(max(best_q + iq * dq, qlo), qhi))
                for ip in (-1, 0, 1)
                for iq in (-1, 0, 1)
            ]
            cand = [pq for pq in cand if fallback or _feasible(pq[0], pq[1], case)]
            if not cand:
                continue
            cp = np.array([pq[0] for pq in cand])
            cq = np.array([pq[1] for pq in cand])
            vals = _match_prob_many(cq, cp, n, case)
            pick = int(np.argmax(sign * vals))
            if sign * vals[pick] > sign * best_val:
                best_val = float(vals[pick])
                best_p, best_q = float(cp[pick]), float(cq[pick])
        return best_val

    return refine(find_max=False), refine(find_max=True), fallback


def match_prob_bounds(
    rect: ConfidenceRectangle,
    n: int,
    case: InterventionCase,
    grid: int = DEFAULT_GRID,
) -> tuple[float, float]:
    """Infimum and supremum of the match probability over the rectangle.

    The rectangle is intersected with the feasible half-plane of the case;
    an empty intersection falls back to the full rectangle with clamped
    correlation.  64x64 grid with corner points plus two rounds of local
    halving keeps the bounds stable to ~1e-4 under grid doubling.
    """
    if n < 1:
        raise InvalidInputError(f"n must be >= 1, got {n}")
    if grid < 2:
        raise InvalidInputError(f"grid must be >= 2, got {grid}")
    m, big, _ = _extremize(rect, n, case, grid)
    return m, big


def _oriented_shares(final: ElectionRecord, poll_share: float | None):
    """Relabel so the final-result loser is the first candidate."""
    if final.first_share == 0.5:
        raise InvalidInputError(f"{final.region}: tied final result; no loser to test")
    if final.first_share < 0.5:
        return final.first_share, poll_share
    return 1.0 - final.first_share, None if poll_share is None else 1.0 - poll_share


def run_test_exit_poll(
    final: ElectionRecord,
    poll: ExitPollRecord,
    alpha: float = DEFAULT_ALPHA,
    tau_c: float = DEFAULT_TAU_C,
    grid: int = DEFAULT_GRID,
) -> TestResult:
    """Test for majority-flipping interference using an exit poll.

    The final-result loser becomes the first candidate, the poll supplies
    the initial-share interval, and the final tally the final-share
    interval.  A poll that favors that candidate less than the final
    result does implies support was added rather than removed, switching
    the covariance to the flip-second form.
    """
    if final.region != poll.region:
        raise InvalidInputError(
            f"records refer to different regions: {final.region!r} vs {poll.region!r}"
        )
    if poll.k > final.n:
        raise InvalidInputError(
            f"{final.region}: poll size {poll.k} exceeds electorate {final.n}"
        )
    if not 0.0 < tau_c < 1.0:
        raise InvalidInputError(f"tau_c={tau_c} outside (0, 1)")
    pp_hat, pk_hat = _oriented_shares(final, poll.first_share)
    case = (
        InterventionCase.FLIPS_FIRST
        if pk_hat >= pp_hat
        else InterventionCase.FLIPS_SECOND
    )
    gn = ci_half_width(pp_hat, final.n, alpha)
    gk = ci_half_width(pk_hat, poll.k, alpha)
    rect = ConfidenceRectangle(
        p_prime_interval=(pp_hat - gn, pp_hat + gn),
        p0_interval=(pk_hat - gk, pk_hat + gk),
        alpha=alpha,
    )
    m, big, clipped = _extremize(rect, final.n, case, grid)
    return TestResult(
        statistic=big,
        lower=m,
        tau_c=tau_c,
        alpha=alpha,
        case=case,
        diagnostics=Diagnostics(rect.p_prime_interval, rect.p0_interval, grid, clipped),
    )


def run_test_cost(
    final: ElectionRecord,
    c: CostFunction,
    alpha: float = DEFAULT_ALPHA,
    tau_c: float = DEFAULT_TAU_C,
    grid: int = DEFAULT_GRID,
) -> TestResult:
    """Test for majority-flipping interference using a cost prior only.

    The initial-share interval is the delta-method band around the
    cost-implied estimate of the loser's pre-intervention support.  Since
    that estimate never falls below the observed share, the flip-first
    covariance applies.
    """
    if not 0.0 < tau_c < 1.0:
        raise InvalidInputError(f"tau_c={tau_c} outside (0, 1)")
    pp_hat, _ = _oriented_shares(final, None)
    estimate = expected_initial_share(c, pp_hat)
    slope = abs(expected_initial_share_deriv(c, pp_hat))
    gn = ci_half_width(pp_hat, final.n, alpha)
    rect = ConfidenceRectangle(
        p_prime_interval=(pp_hat - gn, pp_hat + gn),
        p0_interval=(estimate - slope * gn, estimate + slope * gn),
        alpha=alpha,
    )
    case = InterventionCase.FLIPS_FIRST
    m, big, clipped = _extremize(rect, final.n, case, grid)
    return TestResult(
        statistic=big,
        lower=m,
        tau_c=tau_c,
        alpha=alpha,
        case=case,
        diagnostics=Diagnostics(rect.p_prime_interval, rect.p0_interval, grid, clipped),
    )
