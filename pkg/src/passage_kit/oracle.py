"""Independent ground truth for the closed forms.

``dp_*`` functions push the exact law of a discrete-time walk forward one
step at a time and collect the mass that first lands at or above the target
level.  :func:`mc_first_passage` simulates paths; every path draws its
uniforms from a counter-based stream keyed by ``(seed, path index)``, so the
estimate does not depend on how paths are split across threads.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import HypothesisError
from .measure import JumpLaw

#: Hard cap on the dense state vector of the DP.
MAX_STATES = 50_000_000
#: Paths per simulation chunk (fixed, so results do not depend on threading).
CHUNK = 1 << 16


@dataclass(frozen=True)
class DPResult:
    """Absorbed mass by step and overshoot.

    ``absorbed[k, i]`` is the probability that the walk first reaches the
    level at step ``k`` with overshoot ``i``.
    """

    absorbed: np.ndarray
    residual_active: float
    lost: float
    horizon: int

    @property
    def p0(self) -> float:
        return math.fsum(self.absorbed[:, 0])

    @property
    def p1(self) -> float:
        return math.fsum(self.absorbed[:, 1])

    @property
    def total(self) -> float:
        return math.fsum(self.absorbed.ravel()) + self.residual_active + self.lost


@dataclass(frozen=True)
class DPSummary:
    """Discounted absorbed mass ``sum_k gamma**(-k) absorbed[k, i]``."""

    p0: float
    p1: float
    residual_active: float
    lost: float
    steps: int
    error_bound: float

    @property
    def value(self) -> float:
        return self.p0 + self.p1


def _kernel(walk: JumpLaw):
    if walk.max_jump > 2:
        raise HypothesisError("the DP oracle needs upward jumps of at most 2")
    lo = min(walk.min_jump, 0)
    kern = np.zeros(walk.max_jump - lo + 1)
    for k, p in walk.atoms:
        kern[k - lo] = p
    return kern, lo


def _dp_steps(walk: JumpLaw, n: int, floor: int | None):
    """Yield ``(absorbed0, absorbed1, active_mass, lost_this_step)`` for steps 1, 2, ..."""
    kern, jmin = _kernel(walk)
    lo = 0  # level of mass[0]
    mass = np.ones(1)
    while True:
        if mass.size == 0:
            yield 0.0, 0.0, 0.0, 0.0
            continue
        new = np.convolve(mass, kern)
        new_lo = lo + jmin
        top = n - new_lo  # index of level n
        a0 = new[top] if 0 <= top < new.size else 0.0
        a1 = new[top + 1] if 0 <= top + 1 < new.size else 0.0
        mass = new[:max(top, 0)]
        lo = new_lo
        lost = 0.0
        if floor is not None and lo < floor:
            cut = min(floor - lo, mass.size)
            lost = math.fsum(mass[:cut])
            mass = mass[cut:]
            lo += cut
        # exact zeros at the bottom carry no information
        nz = np.flatnonzero(mass)
        if nz.size and nz[0] > 0:
            mass = mass[nz[0]:]
            lo += int(nz[0])
        elif nz.size == 0:
            mass = mass[:0]
        if mass.size > MAX_STATES:
            raise MemoryError("DP state vector exceeds MAX_STATES")
        yield float(a0), float(a1), float(mass.sum()), lost


def dp_first_passage(walk: JumpLaw, n: int, horizon: int, floor: int | None = None) -> DPResult:
    """Exact law of ``(T_n, overshoot)`` up to ``horizon`` steps.

    With ``floor`` set, mass that falls below that level is dropped and
    reported as ``lost``; without it the computation is exact.
    """
    if n < 0 or horizon < 0:
        raise ValueError("level and horizon must be nonnegative")
    absorbed = np.zeros((horizon + 1, 2))
    if n == 0:
        absorbed[0, 0] = 1.0
        return DPResult(absorbed, 0.0, 0.0, horizon)
    active, lost = 1.0, 0.0
    for k, (a0, a1, act, lst) in zip(range(1, horizon + 1), _dp_steps(walk, n, floor)):
        absorbed[k] = a0, a1
        active = act
        lost += lst
    return DPResult(absorbed, active, lost, horizon)


def dp_absorption(walk: JumpLaw, n: int, gamma: float = 1.0, tol: float = 1e-12,
                  floor: int | None = None, max_horizon: int = 1_000_000) -> DPSummary:
    """Discounted overshoot masses, iterated until the discounted active mass is below ``tol``.

    The returned ``error_bound`` is ``gamma**(-K)`` times the mass still
    active after the last step ``K`` (plus any mass lost below ``floor``,
    which is not bounded by this routine).
    """
    if gamma < 1:
        raise ValueError(f"gamma must be >= 1, got {gamma}")
    if n == 0:
        return DPSummary(1.0, 0.0, 0.0, 0.0, 0, 0.0)
    s0, s1, lost = [], [], 0.0
    weight, active, steps = 1.0, 1.0, 0
    for a0, a1, act, lst in _dp_steps(walk, n, floor):
        steps += 1
        weight /= gamma
        s0.append(weight * a0)
        s1.append(weight * a1)
        active, lost = act, lost + weight * lst
        if weight * active <= tol or steps >= max_horizon:
            break
    return DPSummary(math.fsum(s0), math.fsum(s1), active, lost, steps, weight * active)


def dp_pgf(walk: JumpLaw, gamma: float, n: int, tol: float = 1e-12) -> tuple[float, float]:
    """``E[gamma**(-T_n); T_n < inf]`` by exact DP truncated at ``gamma**(-K) <= tol``."""
    if not gamma > 1:
        raise ValueError("dp_pgf needs gamma > 1; use dp_absorption for gamma == 1")
    if n == 0:
        return 1.0, 0.0
    horizon = math.ceil(math.log(1.0 / tol) / math.log(gamma))
    res = dp_absorption(walk, n, gamma, tol=0.0, max_horizon=horizon)
    return res.value, res.error_bound


# -- Monte Carlo ---------------------------------------------------------------------
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def _mix64(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def path_keys(seed: int, paths: np.ndarray) -> np.ndarray:
    """Stream key of each path: a mix of the seed and the path index."""
    s = _mix64(np.array([seed % 2**64], dtype=np.uint64))
    return _mix64(s ^ _mix64((paths.astype(np.uint64) + np.uint64(1)) * _GOLDEN))


def path_uniforms(keys: np.ndarray, step: int) -> np.ndarray:
    """Uniform draw number ``step`` of each keyed stream (SplitMix64 output)."""
    offset = np.uint64((step + 1) * int(_GOLDEN) % 2**64)
    z = _mix64(keys + offset)
    return (z >> np.uint64(11)).astype(np.float64) * 2.0**-53


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    paths: int
    seed: int


@dataclass(frozen=True)
class McFirstPassage:
    """Simulated overshoot frequencies and the mean passage time of the paths that passed."""

    p0: McEstimate
    p1: McEstimate
    mean_T: McEstimate
    defect: McEstimate


def _simulate_chunk(jumps, cdf, n, seed, start, count, max_steps):
    ids = np.arange(start, start + count, dtype=np.uint64)
    keys = path_keys(seed, ids)
    pos = np.zeros(count, dtype=np.int64)
    c0 = c1 = s = s2 = 0
    if n == 0:
        return count, 0, 0, 0
    for t in range(max_steps):
        u = path_uniforms(keys, t)
        idx = np.minimum(np.searchsorted(cdf, u, side="right"), len(jumps) - 1)
        pos += jumps[idx]
        hit = pos >= n
        if hit.any():
            over = pos[hit] - n
            k0 = int(np.count_nonzero(over == 0))
            k = int(over.size)
            c0 += k0
            c1 += k - k0
            s += k * (t + 1)
            s2 += k * (t + 1) ** 2
            keep = ~hit
            keys, pos = keys[keep], pos[keep]
            if pos.size == 0:
                break
    return c0, c1, s, s2


def _binomial(count: int, paths: int, seed: int) -> McEstimate:
    p = count / paths
    return McEstimate(p, math.sqrt(p * (1.0 - p) / paths), paths, seed)


def mc_first_passage(walk: JumpLaw, n: int, paths: int, seed: int, max_steps: int = 1_000_000,
                     threads: int | None = None) -> McFirstPassage:
    """Simulate ``paths`` walks until they reach level ``n`` or run out of steps.

    Paths still below the level after ``max_steps`` steps count as never
    passing, which biases the defect upwards for slowly passing walks.
    ``mean_T`` averages over the paths that passed.
    """
    if paths < 1:
        raise ValueError("paths must be >= 1")
    if walk.max_jump > 2:
        raise HypothesisError("simulated overshoots are tracked for upward jumps of at most 2")
    jumps = walk.jumps
    cdf = np.cumsum(walk.masses)
    starts = list(range(0, paths, CHUNK))
    work = [(jumps, cdf, n, seed, st, min(CHUNK, paths - st), max_steps) for st in starts]
    threads = max(1, threads or os.cpu_count() or 1)
    if threads == 1 or len(work) == 1:
        parts = [_simulate_chunk(*w) for w in work]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda w: _simulate_chunk(*w), work))
    c0 = sum(p[0] for p in parts)
    c1 = sum(p[1] for p in parts)
    s = sum(p[2] for p in parts)
    s2 = sum(p[3] for p in parts)
    m = c0 + c1
    if m == 0:
        mean_t = McEstimate(math.nan, math.nan, 0, seed)
    elif m == 1:
        mean_t = McEstimate(float(s), math.nan, 1, seed)
    else:
        var = (m * s2 - s * s) / (m * (m - 1))
        mean_t = McEstimate(s / m, math.sqrt(max(var, 0.0) / m), m, seed)
    return McFirstPassage(
        _binomial(c0, paths, seed), _binomial(c1, paths, seed), mean_t,
        _binomial(paths - m, paths, seed),
    )
