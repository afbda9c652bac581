"""Monte Carlo experiments measuring the tests' false-positive rate and power.

Two protocols, desk-scaled by default (reps=100, n=50,000) with full-scale
settings one flag away:

* protocol "a" exercises the cost-prior test: each replication draws an
  initial share, draws a tampered fraction from the *true* cost prior,
  derives the final share, simulates a tally, and tests it with the
  *assumed* cost prior.  Matched priors measure the honest error rates;
  mismatched ones measure robustness.
* protocol "b" exercises the exit-poll test on a grid of (initial share,
  final share, electorate, poll size) cells with independent binomial
  draws for poll and tally.

Replications are labeled H0/H1 from the exact match probability at the
true shares, so empirical type-1 error and power aggregate within the
right class.  Everything is reproducible: the master seed is split per
replication, and result tables come out in canonical order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pandas as pd

from .cost import CostFunction, final_share_for_initial, intervention_rate_residual
from .data import ElectionRecord, ExitPollRecord
from .errors import InvalidInputError
from .testing import majority_match_prob, run_test_cost, run_test_exit_poll
from .voter import InterventionCase, simulate_votes

_CELL_COLUMNS_A = ["protocol", "n", "true_cost", "assumed_cost", "alpha", "tau_c"]
_CELL_COLUMNS_B = ["protocol", "n", "k", "p0", "p_prime", "alpha", "tau_c"]


@dataclass(frozen=True)
class SimConfig:
    """One simulation run; see the module docstring for the two protocols."""

    protocol: str
    reps: int
    n: int
    seed: int
    alpha: float = 0.05
    tau_c: float = 0.5
    # protocol "a"
    true_cost: CostFunction | None = None
    assumed_cost: CostFunction | None = None
    p0_range: tuple[float, float] = (0.45, 0.55)
    # protocol "b"
    k: int | None = None
    p0_values: tuple[float, ...] = ()
    p_prime_values: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.protocol not in ("a", "b"):
            raise InvalidInputError(f"protocol must be 'a' or 'b', got {self.protocol!r}")
        if self.reps < 1:
            raise InvalidInputError(f"reps must be >= 1, got {self.reps}")
        if self.n < 2:
            raise InvalidInputError(f"n must be >= 2, got {self.n}")
        if self.protocol == "a":
            if self.true_cost is None or self.assumed_cost is None:
                raise InvalidInputError("protocol 'a' needs true_cost and assumed_cost")
            lo, hi = self.p0_range
            if not (0.0 < lo <= hi < 1.0):
                raise InvalidInputError(f"p0_range {self.p0_range} outside (0, 1)")
        else:
            if self.k is None:
                raise InvalidInputError("protocol 'b' needs an exit-poll size k")
            if not 1 <= self.k <= self.n:
                raise InvalidInputError(f"k={self.k} outside [1, n={self.n}]")
            if not self.p0_values or not self.p_prime_values:
                raise InvalidInputError("protocol 'b' needs p0_values and p_prime_values")
            for v in (*self.p0_values, *self.p_prime_values):
                if not 0.0 < v < 1.0:
                    raise InvalidInputError(f"share {v} outside (0, 1)")


def _odd(n: int) -> int:
    # Odd electorate rules out exact ties in simulated tallies.
    return n if n % 2 == 1 else n + 1


@dataclass(frozen=True)
class SimResultRow:
    """One replication: configuration echo, ground truth, and the decision."""

    protocol: str
    replication: int
    n: int
    k: int | None
    p0: float
    pi0: float | None
    p_prime: float
    residual: float | None
    true_cost: str | None
    assumed_cost: str | None
    alpha: float
    tau_c: float
    eta_true: float
    truth: str
    statistic: float
    reject: bool


def _truth_label(p0: float, p_prime: float, n: int, tau_c: float) -> tuple[float, str]:
    case = (
        InterventionCase.FLIPS_FIRST
        if p_prime <= p0
        else InterventionCase.FLIPS_SECOND
    )
    eta_true = majority_match_prob(p0, p_prime, n, case)
    return eta_true, ("H0" if eta_true >= tau_c else "H1")


def run_sim_a(cfg: SimConfig) -> pd.DataFrame:
    """Cost-prior protocol; returns one tidy row per replication.

    Each replication draws the initial share and derives the final share
    (and targeted rate) that make the true cost prior exactly consistent
    with it, i.e. the rate residual vanishes and the prior-implied estimate
    of the initial share recovers it.  The recorded residual verifies the
    construction replication by replication.
    """
    if cfg.protocol != "a":
        raise InvalidInputError(f"run_sim_a needs protocol 'a', got {cfg.protocol!r}")
    n = _odd(cfg.n)
    lo, hi = cfg.p0_range
    rows = []
    for rep, child in enumerate(np.random.SeedSequence(cfg.seed).spawn(cfg.reps)):
        rng = np.random.default_rng(child)
        p0 = float(rng.uniform(lo, hi))
        p_prime = final_share_for_initial(cfg.true_cost, p0)
        pi0 = 1.0 - p_prime / p0
        residual = intervention_rate_residual(cfg.true_cost, pi0, p_prime)
        tally = simulate_votes(p_prime, n, rng)
        record = ElectionRecord(
            region=f"rep-{rep:05d}",
            n=n,
            first_name="first",
            second_name="second",
            first_share=tally.proportion(),
        )
        result = run_test_cost(record, cfg.assumed_cost, alpha=cfg.alpha, tau_c=cfg.tau_c)
        eta_true, truth = _truth_label(p0, p_prime, n, cfg.tau_c)
        rows.append(
            SimResultRow(
                protocol="a",
                replication=rep,
                n=n,
                k=None,
                p0=p0,
                pi0=pi0,
                p_prime=p_prime,
                residual=residual,
                true_cost=cfg.true_cost.label,
                assumed_cost=cfg.assumed_cost.label,
                alpha=cfg.alpha,
                tau_c=cfg.tau_c,
                eta_true=eta_true,
                truth=truth,
                statistic=result.statistic,
                reject=result.reject,
            )
        )
    return pd.DataFrame(rows)


def run_sim_b(cfg: SimConfig) -> pd.DataFrame:
    """Exit-poll protocol over the configured share grid."""
    if cfg.protocol != "b":
        raise InvalidInputError(f"run_sim_b needs protocol 'b', got {cfg.protocol!r}")
    n = _odd(cfg.n)
    cells = [(p0, pp) for p0 in cfg.p0_values for pp in cfg.p_prime_values]
    rows = []
    cell_seeds = np.random.SeedSequence(cfg.seed).spawn(len(cells))
    for (p0, p_prime), cell_seed in zip(cells, cell_seeds):
        eta_true, truth = _truth_label(p0, p_prime, n, cfg.tau_c)
        for rep, child in enumerate(cell_seed.spawn(cfg.reps)):
            rng = np.random.default_rng(child)
            poll_hits = int(rng.binomial(cfg.k, p0))
            tally = simulate_votes(p_prime, n, rng)
            record = ElectionRecord(
                region=f"cell-{p0:g}-{p_prime:g}",
                n=n,
                first_name="first",
                second_name="second",
                first_share=tally.proportion(),
            )
            poll = ExitPollRecord(
                region=record.region, k=cfg.k, first_share=poll_hits / cfg.k
            )
            result = run_test_exit_poll(record, poll, alpha=cfg.alpha, tau_c=cfg.tau_c)
            rows.append(
                SimResultRow(
                    protocol="b",
                    replication=rep,
                    n=n,
                    k=cfg.k,
                    p0=p0,
                    pi0=None,
                    p_prime=p_prime,
                    residual=None,
                    true_cost=None,
                    assumed_cost=None,
                    alpha=cfg.alpha,
                    tau_c=cfg.tau_c,
                    eta_true=eta_true,
                    truth=truth,
                    statistic=result.statistic,
                    reject=result.reject,
                )
            )
    return pd.DataFrame(rows)


def _rate(hits: int, total: int) -> tuple[float, float]:
    if total == 0:
        return float("nan"), float("nan")
    rate = hits / total
    return rate, float(np.sqrt(rate * (1.0 - rate) / total))


def summarize(rows: pd.DataFrame) -> pd.DataFrame:
    """Per-cell type-1 error and power with binomial standard errors.

    Type-1 error is the rejection rate among H0-labeled replications, power
    the rate among H1-labeled ones; a cell with no replications of a class
    reports NaN for that class.
    """
    if rows is None or len(rows) == 0:
        raise InvalidInputError("no rows to summarize")
    out = []
    for protocol, chunk in rows.groupby("protocol", sort=True):
        cell_cols = _CELL_COLUMNS_A if protocol == "a" else _CELL_COLUMNS_B
        for key, cell in chunk.groupby(cell_cols, sort=True):
            h0 = cell[cell["truth"] == "H0"]
            h1 = cell[cell["truth"] == "H1"]
            type1, se_type1 = _rate(int(h0["reject"].sum()), len(h0))
            power, se_power = _rate(int(h1["reject"].sum()), len(h1))
            entry = dict(zip(cell_cols, key))
            entry.update(
                reps=len(cell),
                n_h0=len(h0),
                n_h1=len(h1),
                type1_error=type1,
                se_type1=se_type1,
                power=power,
                se_power=se_power,
            )
            out.append(entry)
    return pd.DataFrame(out)
