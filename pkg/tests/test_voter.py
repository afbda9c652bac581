"""Voter model: intervention algebra, majorities, and vote simulation."""

import numpy as np
import pytest

from votewatch import (
    FIRST,
    SECOND,
    TIE,
    InterventionCase,
    InterventionVector,
    InvalidInputError,
    VoteTally,
    apply_intervention,
    classify_intervention,
    majority,
    post_intervention_prob,
    sample_opinions,
    simulate_votes,
    tally_opinions,
)


class TestClassifyIntervention:
    @pytest.mark.parametrize(
        "first,second,expected",
        [
            (1.0, 1.0, InterventionCase.NO_FLIP),
            (0.1, 20.0, InterventionCase.FLIPS_FIRST),
            (20.0, 0.1, InterventionCase.FLIPS_SECOND),
            (0.0, 0.0, InterventionCase.NO_FLIP),
            (0.0, 100.0, InterventionCase.NO_FLIP),  # a*b = 0 <= 1
        ],
    )
    def test_cases(self, first, second, expected):
        assert classify_intervention(InterventionVector(first, second)) is expected

    def test_equality_boundary_does_not_flip(self):
        # a^2 + 1 == a*b exactly: weights (1, 2).
        assert (
            classify_intervention(InterventionVector(1.0, 2.0))
            is InterventionCase.NO_FLIP
        )

    def test_negative_weight_rejected(self):
        with pytest.raises(InvalidInputError):
            InterventionVector(-0.5, 1.0)

    def test_never_flips_both(self):
        # (a - b)^2 + 2 < 0 has no real solution, so a weight pair flipping
        # both sides cannot exist; hammer the classifier over the square.
        rng = np.random.default_rng(42)
        pairs = rng.uniform(0.0, 100.0, size=(100_000, 2))
        seen = set()
        for a, b in pairs:
            seen.add(classify_intervention(InterventionVector(a, b)))
        assert seen <= {
            InterventionCase.NO_FLIP,
            InterventionCase.FLIPS_FIRST,
            InterventionCase.FLIPS_SECOND,
        }


class TestPostInterventionProb:
    def test_examples(self):
        assert post_intervention_prob(0.6, 0.2, InterventionCase.FLIPS_FIRST) == pytest.approx(0.48)
        assert post_intervention_prob(0.6, 0.0, InterventionCase.FLIPS_SECOND) == pytest.approx(0.6)
        assert post_intervention_prob(0.5, 1.0, InterventionCase.FLIPS_SECOND) == pytest.approx(1.0)
        assert post_intervention_prob(0.7, 0.9, InterventionCase.NO_FLIP) == pytest.approx(0.7)

    @pytest.mark.parametrize("bad", [(-0.1, 0.5), (1.1, 0.5), (0.5, -0.1), (0.5, 1.5)])
    def test_range_validation(self, bad):
        with pytest.raises(InvalidInputError):
            post_intervention_prob(bad[0], bad[1], InterventionCase.FLIPS_FIRST)

    def test_monotone_in_rate(self):
        rates = np.linspace(0.0, 1.0, 21)
        removed = [post_intervention_prob(0.6, r, InterventionCase.FLIPS_FIRST) for r in rates]
        added = [post_intervention_prob(0.6, r, InterventionCase.FLIPS_SECOND) for r in rates]
        assert all(a >= b for a, b in zip(removed, removed[1:]))
        assert all(a <= b for a, b in zip(added, added[1:]))

    def test_result_in_unit_interval(self):
        rng = np.random.default_rng(3)
        for _ in range(500):
            p0, pi0 = rng.random(2)
            for case in InterventionCase:
                assert 0.0 <= post_intervention_prob(p0, pi0, case) <= 1.0


class TestMajority:
    def test_examples(self):
        assert majority(VoteTally(5, 3)) == FIRST
        assert majority(VoteTally(5, 2)) == SECOND
        assert majority(VoteTally(4, 2)) == TIE

    def test_matches_sign_of_centered_proportion(self):
        rng = np.random.default_rng(4)
        for _ in range(300):
            n = int(rng.integers(1, 1000))
            votes = int(rng.integers(0, n + 1))
            tally = VoteTally(n, votes)
            m = majority(tally)
            if m != TIE:
                assert m == np.sign(2.0 * tally.proportion() - 1.0)

    def test_tally_validation(self):
        with pytest.raises(InvalidInputError):
            VoteTally(0, 0)
        with pytest.raises(InvalidInputError):
            VoteTally(10, 11)
        with pytest.raises(InvalidInputError):
            VoteTally(10, -1)


class TestSimulateVotes:
    def test_degenerate_probabilities(self):
        assert simulate_votes(1.0, 100, seed=1).first_votes == 100
        assert simulate_votes(0.0, 100, seed=1).first_votes == 0

    def test_zero_voters_rejected(self):
        with pytest.raises(InvalidInputError):
            simulate_votes(0.5, 0, seed=1)

    def test_deterministic_given_seed(self):
        assert simulate_votes(0.37, 5000, seed=99) == simulate_votes(0.37, 5000, seed=99)

    def test_concentration_against_coin_flip_loop(self):
        # Binomial draw and an explicit per-voter coin-flip loop must both
        # concentrate at p; 0.002 is ~4 binomial sd at n=1e6.
        n = 1_000_000
        tally = simulate_votes(0.5, n, seed=7)
        assert abs(tally.proportion() - 0.5) < 0.002
        flips = (np.random.default_rng(8).random(n) < 0.5).sum()
        assert abs(flips / n - 0.5) < 0.002
        assert abs(tally.proportion() - flips / n) < 0.004


class TestOpinions:
    def test_sample_values_and_rate(self):
        ops = sample_opinions(0.7, 200_000, seed=5)
        assert set(np.unique(ops)) <= {FIRST, SECOND}
        share = np.count_nonzero(ops == FIRST) / ops.size
        assert abs(share - 0.7) < 4 * np.sqrt(0.7 * 0.3 / ops.size)

    def test_tally_opinions(self):
        ops = np.array([FIRST, FIRST, SECOND], dtype=np.int8)
        assert tally_opinions(ops) == VoteTally(3, 2)


class TestApplyIntervention:
    def test_no_flip_leaves_everything(self):
        ops = sample_opinions(0.5, 1000, seed=11)
        out = apply_intervention(ops, InterventionVector(1.0, 1.0), 1.0, seed=12)
        assert np.array_equal(out, ops)

    def test_certain_flip_first(self):
        ops = np.full(500, FIRST, dtype=np.int8)
        out = apply_intervention(ops, InterventionVector(0.1, 20.0), 1.0, seed=13)
        assert np.all(out == SECOND)

    def test_partial_flip_rate_and_untouched_side(self):
        n = 100_000
        ops = sample_opinions(0.6, n, seed=14)
        out = apply_intervention(ops, InterventionVector(0.1, 20.0), 0.3, seed=15)
        firsts = ops == FIRST
        flipped = np.count_nonzero(firsts & (out == SECOND))
        rate = flipped / np.count_nonzero(firsts)
        assert abs(rate - 0.3) < 3 * np.sqrt(0.3 * 0.7 / np.count_nonzero(firsts))
        assert np.array_equal(out[~firsts], ops[~firsts])

    def test_input_not_modified(self):
        ops = sample_opinions(0.5, 100, seed=16)
        before = ops.copy()
        apply_intervention(ops, InterventionVector(0.1, 20.0), 0.5, seed=17)
        assert np.array_equal(ops, before)

    def test_composition_matches_post_intervention_prob(self):
        # Empirical share after intervening on simulated opinions converges
        # to the closed-form post-intervention probability.
        n = 100_000
        p0, pi0 = 0.6, 0.25
        ops = sample_opinions(p0, n, seed=18)
        out = apply_intervention(ops, InterventionVector(0.1, 20.0), pi0, seed=19)
        p_prime = post_intervention_prob(p0, pi0, InterventionCase.FLIPS_FIRST)
        share = np.count_nonzero(out == FIRST) / n
        assert abs(share - p_prime) < 4 * np.sqrt(p_prime * (1 - p_prime) / n)
