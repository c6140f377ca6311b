"""Paired-service queue and paired branching, reduced to first passage.

Two servers take customers two at a time.  If ``S_n`` counts the arrivals
during the first ``n`` services, the queue length after service ``n`` is
``P_n = k + S_n - 2n`` until the servers first idle, i.e. until
``P_n <= 1``.  Writing ``W_n = 2n - S_n`` (a walk with steps ``2 - X_i``),
the busy period is the first passage of ``W`` above level ``k - 1``, and
the customers left at that moment are ``k - W_T = 1 - overshoot``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

from .analytic import DEFAULT_CONFIG, SolverConfig
from .errors import HypothesisError, LawError
from .measure import (
    RENORM_TOL,
    SUM_TOL,
    JumpLaw,
    Verdict,
    atoms_from_document,
    check_hypotheses,
    read_document,
)
from .oracle import dp_pgf, mc_first_passage
from .passage import (
    OvershootLaw,
    Regime,
    classify_regime_discrete,
    expected_passage_time_discrete,
    overshoot_law_discrete,
    pgf_first_passage_discrete,
)

_CLOSED_FORM = (Verdict.NEARLY_RIGHT_CONTINUOUS, Verdict.SKIP_FREE)


@dataclass(frozen=True)
class ServiceArrivalLaw:
    """Distribution of the number of arrivals during one service."""

    atoms: tuple

    def __post_init__(self):
        raw = self.atoms.items() if isinstance(self.atoms, Mapping) else self.atoms
        merged = {}
        for m, p in raw:
            if isinstance(m, bool) or not isinstance(m, int) or m < 0:
                raise LawError(f"arrival count {m!r} must be a nonnegative integer")
            p = float(p)
            if not math.isfinite(p) or p < 0:
                raise LawError(f"mass at {m} must be finite and nonnegative")
            if p > 0:
                merged[m] = merged.get(m, 0.0) + p
        total = math.fsum(merged.values())
        if not merged or abs(total - 1.0) > SUM_TOL:
            raise LawError(f"arrival masses sum to {total!r}, not 1")
        if abs(total - 1.0) > RENORM_TOL:
            merged = {m: p / total for m, p in merged.items()}
        object.__setattr__(self, "atoms", tuple(sorted(merged.items())))

    def mass(self, m: int) -> float:
        return dict(self.atoms).get(m, 0.0)

    @property
    def mean(self) -> float:
        return math.fsum(m * p for m, p in self.atoms)


def load_arrival_law(path) -> ServiceArrivalLaw:
    atoms, _ = atoms_from_document(read_document(path))
    return ServiceArrivalLaw(atoms)


def terminal_queue(overshoot: int) -> int:
    """Customers left when the busy period ends, given the walk's overshoot."""
    return 1 - overshoot


@dataclass(frozen=True)
class BusyPeriodQuery:
    k: int
    derived_walk: JumpLaw


def _check_k(k):
    if isinstance(k, bool) or not isinstance(k, int) or k < 2:
        raise ValueError(f"the queue starts with k >= 2 customers, got {k!r}")


def busy_period_query(F: ServiceArrivalLaw, k: int) -> BusyPeriodQuery:
    _check_k(k)
    if F.mass(0) + F.mass(1) == 0.0:
        raise HypothesisError("with at least two arrivals per service the queue never idles")
    return BusyPeriodQuery(k, JumpLaw({2 - m: p for m, p in F.atoms}))


def _never_idles(F: ServiceArrivalLaw) -> bool:
    return F.mass(0) + F.mass(1) == 0.0


def busy_period(F: ServiceArrivalLaw, k: int, gamma: float = 1.0,
                cfg: SolverConfig = DEFAULT_CONFIG) -> float:
    """``E[gamma**(-T_k); T_k < inf]`` for the number of services ``T_k`` in the first busy period.

    At ``gamma = 1`` this is the probability that the servers ever idle.
    Laws whose derived walk lives on the even lattice go through the DP
    oracle for ``gamma > 1`` and through the halved (skip-free) walk at
    ``gamma = 1``.
    """
    _check_k(k)
    if gamma < 1:
        raise ValueError(f"gamma must be >= 1, got {gamma}")
    if _never_idles(F):
        return 0.0
    query = busy_period_query(F, k)
    walk, level = query.derived_walk, k - 1
    if check_hypotheses(walk).verdict in _CLOSED_FORM:
        return pgf_first_passage_discrete(walk, gamma, level, cfg)
    if gamma > 1:
        return dp_pgf(walk, gamma, level)[0]
    # even lattice at gamma = 1: the halved walk is skip-free, level ceil((k-1)/2)
    return pgf_first_passage_discrete(_halved(walk), 1.0, -(-level // 2), cfg)


@dataclass(frozen=True)
class IdleTypeReport:
    """How the first busy period ends.

    ``one_rests``: one customer is left, so one server works and one rests.
    ``both_rest``: the queue is empty.
    """

    one_rests: float
    both_rest: float
    never_idle: float
    k: int
    method: str
    overshoot: OvershootLaw | None = None
    stderr: float | None = None


def idle_type_probabilities(F: ServiceArrivalLaw, k: int, fallback_paths: int | None = None,
                            seed: int = 0, cfg: SolverConfig = DEFAULT_CONFIG) -> IdleTypeReport:
    """Probabilities of ending the busy period with one or zero customers.

    Needs a derived walk with a closed form.  Otherwise, if
    ``fallback_paths`` is given, the answer is simulated; if not, a
    :class:`HypothesisError` is raised.
    """
    query = busy_period_query(F, k)
    walk, level = query.derived_walk, k - 1
    verdict = check_hypotheses(walk).verdict
    by_terminal = {}
    if verdict in _CLOSED_FORM:
        law = overshoot_law_discrete(walk, level, cfg=cfg)
        by_terminal[terminal_queue(0)] = law.p0
        by_terminal[terminal_queue(1)] = law.p1
        return IdleTypeReport(by_terminal[1], by_terminal[0], law.defect, k, "closed-form", law)
    if fallback_paths is None:
        raise HypothesisError(
            f"derived walk is {verdict.value}; pass fallback_paths to simulate instead"
        )
    est = mc_first_passage(walk, level, fallback_paths, seed, max_steps=100_000)
    by_terminal[terminal_queue(0)] = est.p0.mean
    by_terminal[terminal_queue(1)] = est.p1.mean
    return IdleTypeReport(by_terminal[1], by_terminal[0], est.defect.mean, k, "monte-carlo",
                          stderr=est.p0.stderr)


@dataclass(frozen=True)
class BranchingReport:
    """Total progeny of paired Galton-Watson reproduction started from ``k`` individuals.

    ``generating_value`` is the transform of the number of reproducing pairs
    ``T_k``; the progeny is reported as exactly ``2 T_k``.
    """

    k: int
    gamma: float
    generating_value: float
    regime: Regime
    extinct_almost_surely: bool
    finite_mean: bool
    expected_pairs: float
    expected_progeny: float


def _halved(walk: JumpLaw) -> JumpLaw:
    return JumpLaw({k // 2: p for k, p in walk.atoms})


def branching_total_progeny(F: ServiceArrivalLaw, k: int, gamma: float = 1.0,
                            cfg: SolverConfig = DEFAULT_CONFIG) -> BranchingReport:
    value = busy_period(F, k, gamma, cfg)
    if _never_idles(F):
        regime = Regime.DRIFTS_DOWN if F.mean > 2 else Regime.OSCILLATES
        return BranchingReport(k, gamma, value, regime, False, False, math.inf, math.inf)
    walk = busy_period_query(F, k).derived_walk
    regime = classify_regime_discrete(walk)
    extinct = regime is not Regime.DRIFTS_DOWN
    finite = regime is Regime.DRIFTS_UP
    if not finite:
        pairs = math.inf
    elif check_hypotheses(walk).verdict in _CLOSED_FORM:
        pairs = expected_passage_time_discrete(walk, k - 1, cfg=cfg)
    else:
        # support on the even lattice: halve it and pass level ceil((k-1)/2) without overshoot
        pairs = expected_passage_time_discrete(_halved(walk), -(-(k - 1) // 2), cfg=cfg)
    return BranchingReport(k, gamma, value, regime, extinct, finite, pairs, 2.0 * pairs)
