"""Closed-form first-passage laws for walks with upward jumps in {1, 2}.

Everything here is expressed through the root pair ``(lp, lm)`` of
:mod:`passage_kit.analytic`.  With ``D_m = (lp**m - lm**m) / (lp - lm)``:

* ``P(overshoot 0 at level n) = D_{n+1}``
* ``P(overshoot 1 at level n) = -lp * lm * D_n``
* the transform of ``T_n`` is their sum.

Continuous-time functions take the killing rate ``q`` of the compound
Poisson embedding; their discrete-time twins take ``gamma >= 1`` and act on
the step law of the walk directly (an atom at 0 is allowed there).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .analytic import (
    DEFAULT_CONFIG,
    ZERO_MEAN_TOL,
    SolverConfig,
    alpha,
    lambda_pair,
    lambda_pair_discrete,
    phi,
    phi_zero,
    psi_mean,
    theta_prime,
)
from .errors import HypothesisError
from .measure import JumpLaw, Verdict, check_hypotheses, normalize_walk

#: Step of the one-sided finite-difference estimate of ``E[T_n]``.
FD_STEP = 1e-5


class Regime(str, enum.Enum):
    DRIFTS_UP = "DriftsUp"
    OSCILLATES = "Oscillates"
    DRIFTS_DOWN = "DriftsDown"


@dataclass(frozen=True)
class OvershootLaw:
    """Law of the overshoot ``X(T_n) - n`` on {0, 1} at one level.

    ``defect`` is ``1 - p0 - p1``.  At ``q = 0`` (``gamma = 1``) it is the
    probability of never passing the level; for ``q > 0`` it also contains
    the mass killed by the exponential clock, so it reads "killed or never".
    """

    p0: float
    p1: float
    defect: float
    level: int
    query: float
    discrete: bool = False

    @property
    def total(self) -> float:
        return self.p0 + self.p1


@dataclass(frozen=True)
class CrossoverReport:
    ratios: tuple
    first_below_one: int | None
    limit: float


# -- formula helpers ---------------------------------------------------------------
def _diff_quotient(a: float, b: float, m: int) -> float:
    """``(a**m - b**m) / (a - b)``, summed term by term when ``a ~ b``."""
    if m == 0:
        return 0.0
    if abs(a - b) < 1e-8:
        return math.fsum(a**i * b ** (m - 1 - i) for i in range(m))
    return (a**m - b**m) / (a - b)


def _overshoot_probs(pair, n: int) -> tuple[float, float]:
    lp, lm = pair.lambda_plus, pair.lambda_minus
    return _diff_quotient(lp, lm, n + 1), -lp * lm * _diff_quotient(lp, lm, n)


def _overshoot_ratio(pair, n: int) -> float:
    # p1 / p0 with lambda_plus**n scaled out, so deep levels do not underflow
    r = pair.lambda_minus / pair.lambda_plus
    return -pair.lambda_minus * (1.0 - r**n) / (1.0 - r ** (n + 1))


def _passage_transform(pair, n: int) -> float:
    lp, lm = pair.lambda_plus, pair.lambda_minus
    d = lp - lm
    return (1.0 - lm) / d * lp ** (n + 1) - (1.0 - lp) / d * lm ** (n + 1)


def _check_level(n):
    if isinstance(n, bool) or not isinstance(n, int) or n < 0:
        raise ValueError(f"level must be a nonnegative integer, got {n!r}")


def _check_q(q):
    if not q >= 0:
        raise ValueError(f"q must be nonnegative, got {q}")


def _check_gamma(gamma):
    if not gamma >= 1:
        raise ValueError(f"gamma must be >= 1, got {gamma}")


def _verdict(law: JumpLaw, allowed=(Verdict.NEARLY_RIGHT_CONTINUOUS, Verdict.SKIP_FREE)) -> Verdict:
    verdict = check_hypotheses(law).verdict
    if verdict not in allowed:
        raise HypothesisError(f"law is {verdict.value}; no closed form for this support")
    return verdict


def _make_law(p0, p1, level, query, discrete, certain=False) -> OvershootLaw:
    defect = 0.0 if certain else min(1.0, max(0.0, 1.0 - p0 - p1))
    return OvershootLaw(p0, p1, defect, level, query, discrete)


# -- continuous time ---------------------------------------------------------------
def laplace_first_passage(law: JumpLaw, q: float, n: int, cfg: SolverConfig = DEFAULT_CONFIG) -> float:
    """``E[exp(-q T_n); T_n < inf]`` for the compound Poisson process with jump law ``law``."""
    _check_level(n)
    _check_q(q)
    verdict = _verdict(law)
    if n == 0:
        return 1.0
    q = q / law.time_scale
    if verdict is Verdict.SKIP_FREE:
        return math.exp(-phi(law, q, cfg) * n)
    if q == 0 and phi_zero(law, cfg) == 0.0:
        return 1.0
    return _passage_transform(lambda_pair(law, q, cfg), n)


def overshoot_law(law: JumpLaw, q: float, n: int, cfg: SolverConfig = DEFAULT_CONFIG) -> OvershootLaw:
    """``(E[exp(-q T_n); overshoot = i])`` for ``i`` in {0, 1}."""
    _check_level(n)
    _check_q(q)
    verdict = _verdict(law)
    if n == 0:
        return OvershootLaw(1.0, 0.0, 0.0, 0, q)
    qe = q / law.time_scale
    if verdict is Verdict.SKIP_FREE:
        p0 = math.exp(-phi(law, qe, cfg) * n)
        return _make_law(p0, 0.0, n, q, False, certain=p0 == 1.0)
    pair = lambda_pair(law, qe, cfg)
    p0, p1 = _overshoot_probs(pair, n)
    return _make_law(p0, p1, n, q, False, certain=pair.lambda_plus == 1.0)


def overshoot_ratio_limit(law: JumpLaw, cfg: SolverConfig = DEFAULT_CONFIG) -> float:
    """Limit of ``P(overshoot 1) / P(overshoot 0)`` as the level grows; equals ``-lambda_minus(0)``."""
    _verdict(law, (Verdict.NEARLY_RIGHT_CONTINUOUS,))
    return -lambda_pair(law, 0.0, cfg).lambda_minus


def overshoot_ratio(law: JumpLaw, n: int, q: float = 0.0, cfg: SolverConfig = DEFAULT_CONFIG) -> float:
    """``p_n^1(q) / p_n^0(q)``, computed without forming either mass."""
    _check_level(n)
    _check_q(q)
    _verdict(law, (Verdict.NEARLY_RIGHT_CONTINUOUS,))
    return _overshoot_ratio(lambda_pair(law, q / law.time_scale, cfg), n)


def crossover_diagnostic(law: JumpLaw, n_max: int = 50, cfg: SolverConfig = DEFAULT_CONFIG) -> CrossoverReport:
    """Ratios ``p1 / p0`` at levels ``1..n_max`` and the first level where it drops below 1."""
    _verdict(law, (Verdict.NEARLY_RIGHT_CONTINUOUS,))
    pair = lambda_pair(law, 0.0, cfg)
    ratios, first = [], None
    for n in range(1, n_max + 1):
        r = _overshoot_ratio(pair, n)
        ratios.append((n, r))
        if first is None and r < 1.0:
            first = n
    return CrossoverReport(tuple(ratios), first, -pair.lambda_minus)


def classify_regime(law: JumpLaw) -> Regime:
    mean = psi_mean(law)
    if mean > ZERO_MEAN_TOL:
        return Regime.DRIFTS_UP
    if mean < -ZERO_MEAN_TOL:
        return Regime.DRIFTS_DOWN
    return Regime.OSCILLATES


def _d_partials(a: float, b: float, m: int) -> tuple[float, float]:
    """Partial derivatives of ``D_m(a, b) = sum_{i<m} a**i b**(m-1-i)``."""
    da = math.fsum(i * a ** (i - 1) * b ** (m - 1 - i) for i in range(1, m))
    db = math.fsum((m - 1 - i) * a**i * b ** (m - 2 - i) for i in range(m - 1))
    return da, db


def _expected_time_unit(law: JumpLaw, n: int, method: str, cfg: SolverConfig) -> float:
    # unit jump rate; the caller rescales
    if classify_regime(law) is not Regime.DRIFTS_UP:
        return math.inf
    if n == 0:
        return 0.0
    verdict = _verdict(law)
    mean = psi_mean(law)
    if verdict is Verdict.SKIP_FREE:
        return n / mean
    if method == "finite-difference":
        unit = JumpLaw(law.atoms)
        f0 = laplace_first_passage(unit, 0.0, n, cfg)
        f1 = laplace_first_passage(unit, FD_STEP, n, cfg)
        f2 = laplace_first_passage(unit, 2 * FD_STEP, n, cfg)
        return -(-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * FD_STEP)
    if method != "analytic":
        raise ValueError(f"unknown method {method!r}")
    pair = lambda_pair(law, 0.0, cfg)
    lm = pair.lambda_minus
    if n == 1:
        return (1.0 - lm) / mean
    a, b = 1.0, lm
    da_dq = -1.0 / mean
    x = 1.0 / lm
    db_dq = -1.0 / (x * x * theta_prime(law, x))
    dn = _diff_quotient(a, b, n)
    a1, b1 = _d_partials(a, b, n + 1)
    a0, b0 = _d_partials(a, b, n)
    dp_da = a1 - b * dn - a * b * a0
    dp_db = b1 - a * dn - a * b * b0
    return -(dp_da * da_dq + dp_db * db_dq)


def expected_passage_time(law: JumpLaw, n: int, method: str = "analytic",
                          cfg: SolverConfig = DEFAULT_CONFIG) -> float:
    """``E[T_n]``; infinite unless the process drifts up.

    ``method="analytic"`` differentiates the transform in ``q`` exactly
    through the derivatives of the roots at 0;
    ``method="finite-difference"`` uses a one-sided three-point rule with
    step :data:`FD_STEP`.
    """
    _check_level(n)
    return _expected_time_unit(law, n, method, cfg) / law.time_scale


# -- discrete time ----------------------------------------------------------------
def pgf_first_passage_discrete(walk: JumpLaw, gamma: float, n: int,
                               cfg: SolverConfig = DEFAULT_CONFIG) -> float:
    """``E[gamma**(-T_n); T_n < inf]`` for the walk with step law ``walk``."""
    _check_level(n)
    _check_gamma(gamma)
    verdict = _verdict(walk)
    if n == 0:
        return 1.0
    if verdict is Verdict.SKIP_FREE:
        return alpha(walk, gamma, cfg) ** n
    if gamma == 1 and walk.mean >= -ZERO_MEAN_TOL:
        return 1.0
    return _passage_transform(lambda_pair_discrete(walk, gamma, cfg), n)


def overshoot_law_discrete(walk: JumpLaw, n: int, gamma: float = 1.0,
                           cfg: SolverConfig = DEFAULT_CONFIG) -> OvershootLaw:
    _check_level(n)
    _check_gamma(gamma)
    verdict = _verdict(walk)
    if n == 0:
        return OvershootLaw(1.0, 0.0, 0.0, 0, gamma, True)
    if verdict is Verdict.SKIP_FREE:
        p0 = alpha(walk, gamma, cfg) ** n
        return _make_law(p0, 0.0, n, gamma, True, certain=p0 == 1.0)
    pair = lambda_pair_discrete(walk, gamma, cfg)
    p0, p1 = _overshoot_probs(pair, n)
    return _make_law(p0, p1, n, gamma, True, certain=pair.lambda_plus == 1.0)


def classify_regime_discrete(walk: JumpLaw) -> Regime:
    """Regime from the sign of ``script_l'(1-) = -mean``."""
    slope = -walk.mean
    if slope < -ZERO_MEAN_TOL:
        return Regime.DRIFTS_UP
    if slope > ZERO_MEAN_TOL:
        return Regime.DRIFTS_DOWN
    return Regime.OSCILLATES


def expected_passage_time_discrete(walk: JumpLaw, n: int, method: str = "analytic",
                                   cfg: SolverConfig = DEFAULT_CONFIG) -> float:
    """Expected number of steps to pass level ``n``.

    Holding steps (the atom at 0) stretch every move by ``1 / (1 - p_0)``.
    """
    _check_level(n)
    law, rate = normalize_walk(walk)
    return _expected_time_unit(JumpLaw(law.atoms), n, method, cfg) / rate
