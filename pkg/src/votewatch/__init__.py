"""Statistical detection of majority-flipping interference in two-candidate elections."""

__version__ = "0.1.0"

from .cost import (
    CostFunction,
    consistent_intervention_rate,
    expected_initial_share,
    expected_initial_share_deriv,
    intervention_rate_residual,
)
from .data import ElectionRecord, ExitPollRecord, ingest, load_dataset
from .errors import (
    BoundaryError,
    FeasibilityError,
    InvalidInputError,
    VotewatchError,
)
from .gaussian import (
    GaussianPair,
    asymptotic_sign_class,
    mc_same_sign_oracle,
    moments,
    same_sign_prob,
)
from .simlab import SimConfig, run_sim_a, run_sim_b, summarize
from .testing import (
    ConfidenceRectangle,
    TestResult,
    ci_half_width,
    majority_match_prob,
    majority_match_prob_from_rate,
    match_prob_bounds,
    run_test_cost,
    run_test_exit_poll,
    split_level,
)
from .voter import (
    FIRST,
    SECOND,
    TIE,
    InterventionCase,
    InterventionVector,
    VoteTally,
    apply_intervention,
    classify_intervention,
    majority,
    post_intervention_prob,
    sample_opinions,
    simulate_votes,
    tally_opinions,
)

__all__ = [
    "__version__",
    "BoundaryError",
    "ConfidenceRectangle",
    "CostFunction",
    "ElectionRecord",
    "ExitPollRecord",
    "FIRST",
    "FeasibilityError",
    "GaussianPair",
    "InterventionCase",
    "InterventionVector",
    "InvalidInputError",
    "SECOND",
    "SimConfig",
    "TIE",
    "TestResult",
    "VoteTally",
    "VotewatchError",
    "apply_intervention",
    "asymptotic_sign_class",
    "ci_half_width",
    "classify_intervention",
    "consistent_intervention_rate",
    "expected_initial_share",
    "expected_initial_share_deriv",
    "ingest",
    "intervention_rate_residual",
    "load_dataset",
    "majority",
    "majority_match_prob",
    "majority_match_prob_from_rate",
    "match_prob_bounds",
    "mc_same_sign_oracle",
    "moments",
    "post_intervention_prob",
    "run_sim_a",
    "run_sim_b",
    "run_test_cost",
    "run_test_exit_poll",
    "same_sign_prob",
    "sample_opinions",
    "simulate_votes",
    "split_level",
    "summarize",
    "tally_opinions",
]
