"""First-passage laws for integer random walks whose upward jumps lie in {1, 2}."""

__version__ = "0.1.0"

from .analytic import (  # noqa: E402
    RootPair,
    SolverConfig,
    alpha,
    lambda_minus,
    lambda_pair,
    lambda_pair_discrete,
    lambda_plus,
    phi,
    phi_zero,
    psi,
    psi_mean,
    script_l,
    theta,
)
from .errors import HypothesisError, LawError, PassageKitError, SolverError  # noqa: E402
from .measure import (  # noqa: E402
    HypothesisReport,
    JumpLaw,
    Verdict,
    check_hypotheses,
    geometric_down,
    load_jump_law,
    normalize_walk,
    parse_jump_law,
    serialize_jump_law,
)
from .passage import (  # noqa: E402
    OvershootLaw,
    Regime,
    classify_regime,
    classify_regime_discrete,
    crossover_diagnostic,
    expected_passage_time,
    expected_passage_time_discrete,
    laplace_first_passage,
    overshoot_law,
    overshoot_law_discrete,
    overshoot_ratio,
    overshoot_ratio_limit,
    pgf_first_passage_discrete,
)
