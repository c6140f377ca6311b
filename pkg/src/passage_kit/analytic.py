"""Exponents of a lattice jump law and the roots that drive first passage.

Three transforms of a law ``p`` are used:

* ``psi(beta) = sum p_n (exp(beta n) - 1)``, the Laplace exponent;
* ``theta(beta) = sum p_n (beta**n - 1)`` for ``|beta| >= 1``, the same
  exponent written on the power scale, so ``theta(exp(b)) == psi(b)``;
* ``script_l(beta) = sum p_i beta**(-i)`` for ``0 < |beta| <= 1``, the
  discrete-time transform of a walk's step law.

For a law whose upward jumps lie in {1, 2}, ``theta - q`` has exactly one
zero on each of ``(1, inf)`` and ``(-inf, -1)``; their reciprocals form the
:class:`RootPair` ``(lambda_plus, lambda_minus)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from scipy.optimize import brentq

from .errors import HypothesisError, SolverError
from .measure import JumpLaw, Verdict, check_hypotheses

#: ``|mean| <= ZERO_MEAN_TOL`` counts as a driftless (oscillating) law.
ZERO_MEAN_TOL = 1e-12
#: Residual tolerance (scaled by ``max(1, |query|)``) accepted at a root.
RESIDUAL_TOL = 1e-10
#: Offset of the right end of the negative bracket from -1.
NEG_BRACKET_EPS = 1e-6


@dataclass(frozen=True)
class SolverConfig:
    rel_tol: float = 1e-12
    max_iter: int = 200
    bracket_growth: float = 2.0

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError(f"rel_tol must be positive, got {self.rel_tol}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")
        if not self.bracket_growth > 1:
            raise ValueError(f"bracket_growth must exceed 1, got {self.bracket_growth}")


DEFAULT_CONFIG = SolverConfig()


@dataclass(frozen=True)
class RootPair:
    """Reciprocal roots answering one query (``q`` or ``gamma``).

    Always ``-lambda_plus < lambda_minus < 0 < lambda_plus <= 1``.
    """

    lambda_plus: float
    lambda_minus: float
    query: float

    def __post_init__(self):
        lp, lm = self.lambda_plus, self.lambda_minus
        if not (-lp < lm < 0.0 < lp <= 1.0):
            raise SolverError(f"root ordering violated: lambda_plus={lp!r}, lambda_minus={lm!r}")


# -- exponents -----------------------------------------------------------------
def psi(law: JumpLaw, beta: float) -> float:
    if beta < 0:
        raise ValueError(f"psi is evaluated on beta >= 0, got {beta}")
    return math.fsum(p * math.expm1(beta * n) for n, p in law.atoms)


def psi_prime(law: JumpLaw, beta: float) -> float:
    return math.fsum(n * p * math.exp(beta * n) for n, p in law.atoms)


def psi_mean(law: JumpLaw) -> float:
    """Right derivative of ``psi`` at 0, i.e. the mean jump."""
    return law.mean


def theta(law: JumpLaw, beta: float) -> float:
    if not abs(beta) >= 1.0:
        raise ValueError(f"theta is defined for |beta| >= 1, got {beta}")
    return math.fsum(p * (beta**n - 1.0) for n, p in law.atoms)


def theta_prime(law: JumpLaw, beta: float) -> float:
    return math.fsum(n * p * beta ** (n - 1) for n, p in law.atoms)


def script_l(walk: JumpLaw, beta: float) -> float:
    if beta == 0 or abs(beta) > 1.0:
        raise ValueError(f"script_l is defined for 0 < |beta| <= 1, got {beta}")
    return math.fsum(p * beta ** (-i) for i, p in walk.atoms)


def _chord_slope(walk: JumpLaw, beta: float) -> float:
    """``(script_l(beta) - 1) / (beta - 1)`` without cancellation near 1.

    Uses ``(beta**-i - 1) / (beta - 1)`` expanded as a geometric sum, so the
    value at ``beta = 1`` is the left derivative ``-mean``.
    """
    total = []
    for i, p in walk.atoms:
        if i < 0:
            total.append(p * sum(beta**j for j in range(-i)))
        elif i > 0:
            total.append(-p * sum(beta**j for j in range(i)) / beta**i)
    return math.fsum(total)


# -- root finding ----------------------------------------------------------------
def _solve(f, a, b, cfg: SolverConfig, what: str) -> float:
    try:
        x, info = brentq(
            f, a, b, xtol=1e-300, rtol=cfg.rel_tol, maxiter=cfg.max_iter,
            full_output=True, disp=False,
        )
    except ValueError as exc:
        raise SolverError(f"{what}: bracket [{a}, {b}] rejected ({exc})") from None
    if not info.converged:
        raise SolverError(f"{what}: no convergence in {cfg.max_iter} iterations ({info.flag})")
    return x


def _check_residual(value: float, target: float, what: str):
    if abs(value - target) > RESIDUAL_TOL * max(1.0, abs(target)):
        raise SolverError(f"{what}: residual {value - target:.3e} exceeds tolerance")


def _require_nearly_right_continuous(law: JumpLaw):
    verdict = check_hypotheses(law).verdict
    if verdict is not Verdict.NEARLY_RIGHT_CONTINUOUS:
        raise HypothesisError(f"law is {verdict.value}, expected NearlyRightContinuous")


def phi_zero(law: JumpLaw, cfg: SolverConfig = DEFAULT_CONFIG) -> float:
    """Largest zero of ``psi``.

    Zero unless the law drifts down.  In that case the root is found from
    ``psi(beta) / beta``, which is increasing (``psi`` is convex with
    ``psi(0) = 0``) and starts at the negative mean, so ``[0, B]`` is a
    valid bracket as soon as ``psi(B) > 0``.
    """
    mean = psi_mean(law)
    if mean >= -ZERO_MEAN_TOL:
        return 0.0

    def slope(b):
        return mean if b == 0.0 else psi(law, b) / b

    hi = 1.0
    for _ in range(cfg.max_iter):
        if psi(law, hi) > 0.0:
            break
        hi *= cfg.bracket_growth
    else:
        raise SolverError("phi_zero: upper bracket not found")
    return _solve(slope, 0.0, hi, cfg, "phi_zero")


def phi(law: JumpLaw, q: float, cfg: SolverConfig = DEFAULT_CONFIG) -> float:
    """Right inverse of ``psi``: the unique ``beta >= phi_zero`` with ``psi(beta) = q``."""
    if q < 0:
        raise ValueError(f"q must be nonnegative, got {q}")
    base = phi_zero(law, cfg)
    if q == 0 or psi(law, base) >= q:
        # q below the rounding noise of psi at its zero
        return base
    hi = max(1.0, base * cfg.bracket_growth)
    for _ in range(cfg.max_iter):
        if psi(law, hi) > q:
            break
        hi *= cfg.bracket_growth
    else:
        raise SolverError(f"phi({q}): upper bracket not found")
    return _solve(lambda b: psi(law, b) - q, base, hi, cfg, f"phi({q})")


def lambda_plus(law: JumpLaw, q: float, cfg: SolverConfig = DEFAULT_CONFIG) -> float:
    """``exp(-phi(q))``, the reciprocal of the zero of ``theta - q`` on ``[1, inf)``."""
    b = phi(law, q, cfg)
    if b == 0.0:
        return 1.0
    _check_residual(theta(law, math.exp(b)), q, f"lambda_plus({q})")
    return math.exp(-b)


def lambda_minus(law: JumpLaw, q: float, cfg: SolverConfig = DEFAULT_CONFIG) -> float:
    """Reciprocal of the unique zero of ``theta - q`` on ``(-inf, -1)``.

    ``theta(-1) < 0`` whenever the law has an odd atom and ``theta`` tends to
    ``+inf`` at ``-inf``, so the bracket ``[-B, -1 - eps]`` is grown
    leftwards until ``theta(-B) >= q``.
    """
    _require_nearly_right_continuous(law)
    if q < 0:
        raise ValueError(f"q must be nonnegative, got {q}")
    f = lambda x: theta(law, x) - q  # noqa: E731
    eps = NEG_BRACKET_EPS
    while f(-1.0 - eps) >= 0.0:
        eps /= 2.0
        if eps < 1e-15:
            raise SolverError(f"lambda_minus({q}): no sign change next to -1")
    lo = -cfg.bracket_growth
    for _ in range(cfg.max_iter):
        if f(lo) >= 0.0:
            break
        lo *= cfg.bracket_growth
    else:
        raise SolverError(f"lambda_minus({q}): left bracket not found")
    x = _solve(f, lo, -1.0 - eps, cfg, f"lambda_minus({q})")
    _check_residual(theta(law, x), q, f"lambda_minus({q})")
    return 1.0 / x


@lru_cache(maxsize=4096)
def lambda_pair(law: JumpLaw, q: float, cfg: SolverConfig = DEFAULT_CONFIG) -> RootPair:
    return RootPair(lambda_plus(law, q, cfg), lambda_minus(law, q, cfg), q)


# -- discrete time ----------------------------------------------------------------
def alpha(walk: JumpLaw, gamma: float, cfg: SolverConfig = DEFAULT_CONFIG) -> float:
    """Zero of ``script_l - gamma`` on ``(0, 1]`` (the smaller one when ``gamma == 1``)."""
    if gamma < 1:
        raise ValueError(f"gamma must be >= 1, got {gamma}")
    if gamma == 1:
        # script_l has a zero of script_l - 1 at 1; the other one lies below 1 only on downward drift
        if walk.mean >= -ZERO_MEAN_TOL:
            return 1.0
        f = lambda b: _chord_slope(walk, b)  # noqa: E731
    else:
        f = lambda b: script_l(walk, b) - gamma  # noqa: E731
    # f(1) has the sign opposite to f near 0+; search for the sign flip going down
    sign_at_one = math.copysign(1.0, f(1.0))
    lo = 0.5
    for _ in range(cfg.max_iter):
        if f(lo) * sign_at_one < 0.0:
            break
        lo /= cfg.bracket_growth
    else:
        raise SolverError(f"alpha({gamma}): lower bracket not found")
    root = _solve(f, lo, 1.0, cfg, f"alpha({gamma})")
    _check_residual(script_l(walk, root), gamma, f"alpha({gamma})")
    return root


def _negative_root_discrete(walk: JumpLaw, gamma: float, cfg: SolverConfig) -> float:
    f = lambda b: script_l(walk, b) - gamma  # noqa: E731
    hi = -0.5
    for _ in range(cfg.max_iter):
        if f(hi) > 0.0:
            break
        hi /= cfg.bracket_growth
    else:
        raise SolverError(f"negative root({gamma}): bracket not found")
    root = _solve(f, -1.0, hi, cfg, f"negative root({gamma})")
    _check_residual(script_l(walk, root), gamma, f"negative root({gamma})")
    return root


@lru_cache(maxsize=4096)
def lambda_pair_discrete(walk: JumpLaw, gamma: float, cfg: SolverConfig = DEFAULT_CONFIG) -> RootPair:
    """Zeros of ``script_l - gamma`` on ``(0, 1]`` and ``(-1, 0)`` for a walk's step law."""
    _require_nearly_right_continuous(walk)
    return RootPair(alpha(walk, gamma, cfg), _negative_root_discrete(walk, gamma, cfg), gamma)
