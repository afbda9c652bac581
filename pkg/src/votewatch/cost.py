"""Cost priors on the intervened fraction of voters and the implied support.

A cost function is a density on [0, 1] describing how plausible it is that
a given fraction of voters was tampered with; steep densities make
large-scale tampering expensive.  Two parametric families are supported:
an exponential truncated to the unit interval and Beta(1, b).  From such a
prior, :func:`expected_initial_share` recovers the expected pre-intervention
support of a candidate given that candidate's observed final share.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import bisect, brentq

from .errors import InvalidInputError

_QUAD_OPTS = {"epsabs": 1e-10, "epsrel": 1e-10, "limit": 200}


@dataclass(frozen=True)
class CostFunction:
    """Parametric density on [0, 1] for the tampered-voter fraction.

    ``family`` is ``"texp"`` (exponential with the given rate, truncated and
    renormalized to [0, 1]) or ``"beta"`` (Beta with first shape fixed at 1
    and second shape equal to ``param``).
    """

    family: str
    param: float

    def __post_init__(self) -> None:
        if self.family not in ("texp", "beta"):
            raise InvalidInputError(f"unknown cost family {self.family!r}")
        if not self.param > 0:
            raise InvalidInputError(f"cost parameter must be > 0, got {self.param}")

    @classmethod
    def truncated_exponential(cls, rate: float) -> "CostFunction":
        return cls("texp", float(rate))

    @classmethod
    def beta(cls, shape: float) -> "CostFunction":
        return cls("beta", float(shape))

    @classmethod
    def parse(cls, spec: str) -> "CostFunction":
        """Build from a ``family:parameter`` string such as ``texp:30``."""
        family, sep, param = spec.partition(":")
        if not sep:
            raise InvalidInputError(
                f"cost spec {spec!r} must look like 'texp:30' or 'beta:30'"
            )
        try:
            value = float(param)
        except ValueError:
            raise InvalidInputError(f"cost parameter {param!r} is not a number") from None
        return cls(family, value)

    @property
    def label(self) -> str:
        return f"{self.family}:{self.param:g}"

    def pdf(self, x):
        """Density at ``x`` (scalar or array); zero outside [0, 1]."""
        x = np.asarray(x, dtype=float)
        inside = (x >= 0.0) & (x <= 1.0)
        xc = np.where(inside, x, 0.0)
        if self.family == "texp":
            lam = self.param
            vals = lam * np.exp(-lam * xc) / -np.expm1(-lam)
        else:
            vals = self.param * np.power(1.0 - xc, self.param - 1.0)
        out = np.where(inside, vals, 0.0)
        return out if out.ndim else float(out)

    def cdf(self, x):
        """Distribution function at ``x``; clamps to 0 and 1 outside the support."""
        x = np.asarray(x, dtype=float)
        xc = np.clip(x, 0.0, 1.0)
        if self.family == "texp":
            lam = self.param
            out = np.expm1(-lam * xc) / np.expm1(-lam)
        else:
            out = -np.expm1(self.param * np.log1p(-xc))
        out = np.clip(out, 0.0, 1.0)
        return out if out.ndim else float(out)

    def sample(self, rng: np.random.Generator, size=None):
        """Inverse-cdf draw(s) using the supplied generator."""
        u = rng.random(size)
        if self.family == "texp":
            lam = self.param
            return -np.log1p(u * np.expm1(-lam)) / lam
        return 1.0 - np.power(1.0 - u, 1.0 / self.param)


def expected_initial_share(c: CostFunction, p_prime: float) -> float:
    """Expected pre-intervention support given final support ``p_prime``.

    Equals ``p' / H(1 - p') * integral_0^{1-p'} h(t) / (1 - t) dt``; the
    integrand is smooth on the integration range since ``p_prime > 0`` keeps
    the pole at 1 outside it.  Always at least ``p_prime``.
    """
    if not 0.0 < p_prime < 1.0:
        raise InvalidInputError(f"p_prime={p_prime} outside (0, 1)")
    upper = 1.0 - p_prime
    integral, _ = quad(lambda t: float(c.pdf(t)) / (1.0 - t), 0.0, upper, **_QUAD_OPTS)
    return p_prime * integral / float(c.cdf(upper))


def expected_initial_share_deriv(c: CostFunction, p_prime: float) -> float:
    """Central finite difference of :func:`expected_initial_share`."""
    step = max(1e-6, 1e-4 * p_prime * (1.0 - p_prime))
    if p_prime - step <= 0.0 or p_prime + step >= 1.0:
        raise InvalidInputError(
            f"p_prime={p_prime} too close to the boundary for step {step}"
        )
    hi = expected_initial_share(c, p_prime + step)
    lo = expected_initial_share(c, p_prime - step)
    return (hi - lo) / (2.0 * step)


def intervention_rate_residual(c: CostFunction, pi0: float, p_prime: float) -> float:
    """How far ``pi0`` is from being the cost-implied intervention rate.

    Evaluates ``integral_0^{1-p'} (pi0 - t) / (1 - t) h(t) dt``, which is
    zero exactly when ``pi0`` ties the prior to the observed final share.
    Continuous and increasing in ``pi0``.
    """
    upper = 1.0 - p_prime
    if upper <= 0.0:
        return 0.0
    integral, _ = quad(
        lambda t: (pi0 - t) / (1.0 - t) * float(c.pdf(t)), 0.0, upper, **_QUAD_OPTS
    )
    return integral


def consistent_intervention_rate(c: CostFunction, p_prime: float) -> float:
    """Root of :func:`intervention_rate_residual` in [0, 1 - p_prime], by bisection.

    The residual is negative at 0 and positive at ``1 - p_prime``, so a
    unique root exists.
    """
    if not 0.0 < p_prime < 1.0:
        raise InvalidInputError(f"p_prime={p_prime} outside (0, 1)")
    upper = 1.0 - p_prime
    return float(
        bisect(
            lambda r: intervention_rate_residual(c, r, p_prime), 0.0, upper, xtol=1e-12
        )
    )


def final_share_for_initial(c: CostFunction, p0: float) -> float:
    """Final share whose cost-implied initial-share estimate equals ``p0``.

    Inverts :func:`expected_initial_share`, which is continuous, strictly
    increasing and never below the identity, so the solution lies in
    ``(0, p0]``.  Together with the rate ``1 - p_prime / p0`` this yields a
    triple at which :func:`intervention_rate_residual` vanishes.
    """
    if not 0.0 < p0 < 1.0:
        raise InvalidInputError(f"p0={p0} outside (0, 1)")
    lo = min(1e-6, p0 / 2.0)
    return float(
        brentq(lambda pp: expected_initial_share(c, pp) - p0, lo, p0, xtol=1e-13)
    )
