"""Bivariate-normal same-sign probabilities for the majority-change law.

The probability that the pre- and post-intervention majorities agree is,
for large electorates, the probability that both components of a
``N2(mu, sigma / n)`` vector share a sign.  :func:`moments` builds the
``(mu, sigma)`` pair implied by the support shares before and after an
intervention, and :func:`same_sign_prob` evaluates the probability with a
deterministic single-integral quadrature (absolute error well below 1e-7).
A seeded Monte Carlo estimator is provided as an independent check.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr

from .errors import BoundaryError, FeasibilityError, InvalidInputError
from .voter import InterventionCase

# Correlations beyond this are treated as perfectly (anti)monotone; the
# quadrature loses accuracy as |rho| -> 1 while the closed form is exact.
_COMONOTONE_EPS = 1e-9
_RHO_SLACK = 1e-9

# 20-point Gauss-Legendre rule (positive half of the symmetric abscissas).
_GL_X = np.array(
    [
        0.9931285991850949,
        0.9639719272779138,
        0.9122344282513259,
        0.8391169718222188,
        0.7463319064601508,
        0.6360536807265150,
        0.5108670019508271,
        0.3737060887154196,
        0.2277858511416451,
        0.0765265211334973,
    ]
)
_GL_W = np.array(
    [
        0.0176140071391521,
        0.0406014298003869,
        0.0626720483341091,
        0.0832767415767048,
        0.1019301198172404,
        0.1181945319615184,
        0.1316886384491766,
        0.1420961093183821,
        0.1491729864726037,
        0.1527533871307259,
    ]
)
_NODES = np.concatenate([1.0 - _GL_X, 1.0 + _GL_X])
_WEIGHTS = np.concatenate([_GL_W, _GL_W])
_TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class GaussianPair:
    """Mean vector and covariance (before division by ``n``) of the CLT limit."""

    mu: np.ndarray
    sigma: np.ndarray
    n: int = 1
    rho: float = field(init=False)

    def __post_init__(self) -> None:
        mu = np.asarray(self.mu, dtype=float).reshape(2)
        sigma = np.asarray(self.sigma, dtype=float).reshape(2, 2)
        if abs(sigma[0, 1] - sigma[1, 0]) > 1e-12 * (1.0 + abs(sigma[0, 1])):
            raise InvalidInputError("sigma must be symmetric")
        if sigma[0, 0] < 0 or sigma[1, 1] < 0:
            raise InvalidInputError("sigma diagonal must be nonnegative")
        if self.n < 1:
            raise InvalidInputError(f"n must be >= 1, got {self.n}")
        denom = np.sqrt(sigma[0, 0] * sigma[1, 1])
        if denom > 0:
            raw = sigma[0, 1] / denom
            if abs(raw) > 1.0 + _RHO_SLACK:
                raise InvalidInputError(
                    f"implied correlation {raw} outside [-1, 1]; infeasible covariance"
                )
            rho = float(np.clip(raw, -1.0, 1.0))
        else:
            rho = 0.0
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "rho", rho)


def moments(
    p0: float, p_prime: float, case: InterventionCase, n: int = 1
) -> GaussianPair:
    """CLT mean/covariance of the joint (pre, post) standardized vote sums.

    The covariance off-diagonal depends on which side the intervention can
    flip: removing first-candidate voters couples the sums through the
    surviving supporters, adding them couples through the original ones.
    The pair is only defined when the shares are orientated consistently
    with the case (support can only drop under a flip-first intervention).
    """
    for name, val in (("p0", p0), ("p_prime", p_prime)):
        if not 0.0 < val < 1.0:
            raise InvalidInputError(f"{name}={val} outside (0, 1)")
    if case is InterventionCase.FLIPS_FIRST:
        if p_prime > p0:
            raise FeasibilityError(
                f"p_prime={p_prime} > p0={p0} is impossible when the intervention "
                "removes first-candidate support"
            )
        off = 4.0 * p_prime * (1.0 - p0)
    elif case is InterventionCase.FLIPS_SECOND:
        if p_prime < p0:
            raise FeasibilityError(
                f"p_prime={p_prime} < p0={p0} is impossible when the intervention "
                "adds first-candidate support"
            )
        off = 4.0 * p0 * (1.0 - p_prime)
    else:
        raise InvalidInputError("moments are defined only for the flipping cases")
    mu = np.array([2.0 * p0 - 1.0, 2.0 * p_prime - 1.0])
    sigma = np.array(
        [
            [4.0 * p0 * (1.0 - p0), off],
            [off, 4.0 * p_prime * (1.0 - p_prime)],
        ]
    )
    return GaussianPair(mu=mu, sigma=sigma, n=n)


def _bvn_upper(h, k, r):
    """P(X > h, Y > k) for a standard bivariate normal pair, vectorized.

    Single-integral reduction with a fixed 20-node Gauss-Legendre rule; the
    near-singular tail (0.925 < |r| < 1) uses the transformed integrand.
    Requires |r| < 1; callers route perfectly correlated pairs elsewhere.
    """
    h, k, r = np.broadcast_arrays(
        np.asarray(h, float), np.asarray(k, float), np.asarray(r, float)
    )
    shape = h.shape
    h, k, r = h.ravel().copy(), k.ravel().copy(), r.ravel().copy()
    out = np.empty_like(h)

    mild = np.abs(r) <= 0.925
    if np.any(mild):
        hh, kk, rr = h[mild], k[mild], r[mild]
        hk = hh * kk
        hs = 0.5 * (hh * hh + kk * kk)
        asr = 0.5 * np.arcsin(rr)
        sn = np.sin(asr[:, None] * _NODES[None, :])
        integrand = np.exp((sn * hk[:, None] - hs[:, None]) / (1.0 - sn * sn))
        out[mild] = integrand @ _WEIGHTS * asr / _TWO_PI + ndtr(-hh) * ndtr(-kk)

    steep = ~mild
    if np.any(steep):
        hh, kk, rr = h[steep], k[steep], r[steep]
        neg = rr < 0
        kk = np.where(neg, -kk, kk)
        hk = hh * kk  # equals -(h k) on the flipped entries

        ass = (1.0 - rr) * (1.0 + rr)
        a = np.sqrt(ass)
        bs = (hh - kk) ** 2
        c = (4.0 - hk) / 8.0
        d = (12.0 - hk) / 80.0
        asr1 = -0.5 * (bs / ass + hk)
        bvn = np.where(
            asr1 > -100.0,
            a * np.exp(asr1) * (1.0 - c * (bs - ass) * (1.0 - d * bs) / 3.0 + c * d * ass * ass),
            0.0,
        )
        b = np.sqrt(bs)
        # Arguments are clamped before exp so the branches masked out by the
        # where() cannot overflow eagerly.
        bvn -= np.where(
            hk > -100.0,
            np.exp(-0.5 * np.maximum(hk, -100.0))
            * np.sqrt(_TWO_PI)
            * ndtr(-b / a)
            * b
            * (1.0 - c * bs * (1.0 - d * bs) / 3.0),
            0.0,
        )
        a2 = 0.5 * a
        xs = (a2[:, None] * _NODES[None, :]) ** 2
        asr2 = -0.5 * (bs[:, None] / xs + hk[:, None])
        sp = 1.0 + c[:, None] * xs * (1.0 + 5.0 * d[:, None] * xs)
        rs = np.sqrt(1.0 - xs)
        ep = np.exp(np.minimum(-0.5 * hk[:, None] * xs / (1.0 + rs) ** 2, 700.0)) / rs
        node_sum = (np.where(asr2 > -100.0, np.exp(np.minimum(asr2, 0.0)), 0.0) * (sp - ep)) @ _WEIGHTS
        bvn = (a2 * node_sum - bvn) / _TWO_PI

        pos = ~neg
        bvn = np.where(pos, bvn + ndtr(-np.maximum(hh, kk)), bvn)
        swap = neg & (hh < kk)
        tail = np.where(hh < 0, ndtr(kk) - ndtr(hh), ndtr(-hh) - ndtr(-kk))
        bvn = np.where(neg, np.where(swap, tail - bvn, -bvn), bvn)
        out[steep] = bvn

    return np.clip(out, 0.0, 1.0).reshape(shape)


def _same_sign_core(mu1, mu2, s1, s2, rho):
    """Vectorized P(sign match) for N(mu1, s1^2), N(mu2, s2^2) with corr rho.

    Positive standard deviations required.  Perfectly correlated entries use
    the closed form along the support line.
    """
    mu1, mu2, s1, s2, rho = np.broadcast_arrays(
        *(np.asarray(x, float) for x in (mu1, mu2, s1, s2, rho))
    )
    shape = mu1.shape
    mu1, mu2, s1, s2, rho = (x.ravel() for x in (mu1, mu2, s1, s2, rho))
    out = np.empty_like(mu1)

    co = rho > 1.0 - _COMONOTONE_EPS
    if np.any(co):
        # Z2 > 0 exactly when Z1 > mu1 - (s1/s2) mu2 on the support line.
        cut = mu1[co] - s1[co] / s2[co] * mu2[co]
        both_pos = ndtr((mu1[co] - np.maximum(cut, 0.0)) / s1[co])
        both_neg = ndtr((np.minimum(cut, 0.0) - mu1[co]) / s1[co])
        out[co] = both_pos + both_neg

    anti = rho < -(1.0 - _COMONOTONE_EPS)
    if np.any(anti):
        # Z2 > 0 exactly when Z1 < mu1 + (s1/s2) mu2.
        cut = mu1[anti] + s1[anti] / s2[anti] * mu2[anti]
        z0 = (0.0 - mu1[anti]) / s1[anti]
        zc = (cut - mu1[anti]) / s1[anti]
        both_pos = np.maximum(ndtr(zc) - ndtr(z0), 0.0)
        both_neg = np.maximum(ndtr(z0) - ndtr(zc), 0.0)
        out[anti] = both_pos + both_neg

    rest = ~(co | anti)
    if np.any(rest):
        a = mu1[rest] / s1[rest]
        b = mu2[rest] / s2[rest]
        r = rho[rest]
        out[rest] = _bvn_upper(-a, -b, r) + _bvn_upper(a, b, r)

    return out.reshape(shape)


def same_sign_prob(g: GaussianPair) -> float:
    """Probability that both components of ``N2(mu, sigma / n)`` share a sign.

    Deterministic; exact-zero coordinates carry no mass for a nondegenerate
    covariance.  A zero diagonal entry pins that component at its mean, in
    which case the answer reduces to a univariate tail.
    """
    s1 = float(np.sqrt(g.sigma[0, 0] / g.n))
    s2 = float(np.sqrt(g.sigma[1, 1] / g.n))
    mu1, mu2 = float(g.mu[0]), float(g.mu[1])
    if s1 == 0.0 or s2 == 0.0:
        if s1 == 0.0 and s2 == 0.0:
            return float(mu1 * mu2 > 0)
        fixed, free_mu, free_s = (mu1, mu2, s2) if s1 == 0.0 else (mu2, mu1, s1)
        if fixed == 0.0:
            return 0.0
        return float(ndtr(np.sign(fixed) * free_mu / free_s))
    return float(_same_sign_core(mu1, mu2, s1, s2, g.rho))


def mc_same_sign_oracle(g: GaussianPair, reps: int, seed) -> tuple[float, float]:
    """Monte Carlo estimate of :func:`same_sign_prob` with its standard error.

    Samples via the explicit two-dimensional factorization
    ``z2 = mu2 + s2 (rho u + sqrt(1 - rho^2) v)``, which stays valid at
    |rho| = 1.  Deterministic given ``seed``.
    """
    if reps < 1000:
        raise InvalidInputError(f"reps must be >= 1000, got {reps}")
    rng = np.random.default_rng(seed)
    s1 = np.sqrt(g.sigma[0, 0] / g.n)
    s2 = np.sqrt(g.sigma[1, 1] / g.n)
    u = rng.standard_normal(reps)
    v = rng.standard_normal(reps)
    z1 = g.mu[0] + s1 * u
    z2 = g.mu[1] + s2 * (g.rho * u + np.sqrt(max(0.0, 1.0 - g.rho**2)) * v)
    hits = np.count_nonzero((z1 > 0) & (z2 > 0)) + np.count_nonzero((z1 < 0) & (z2 < 0))
    est = hits / reps
    return est, float(np.sqrt(est * (1.0 - est) / reps))


def asymptotic_sign_class(p0: float, p_prime: float) -> int:
    """Infinite-electorate limit of the sign-match probability: 1 or 0.

    The limit is 1 when both shares sit on the same side of one half and 0
    when they straddle it; at exactly one half the limit does not exist.
    """
    for name, val in (("p0", p0), ("p_prime", p_prime)):
        if not 0.0 < val < 1.0:
            raise InvalidInputError(f"{name}={val} outside (0, 1)")
        if val == 0.5:
            raise BoundaryError(f"{name} is exactly 0.5; the limit is undefined")
    return int((2.0 * p0 - 1.0) * (2.0 * p_prime - 1.0) > 0)
