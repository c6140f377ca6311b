"""Integer jump laws: construction, validation, file I/O and hypothesis checks.

A :class:`JumpLaw` is used in two roles.  As the (unit mass) Levy measure of a
compound Poisson process it never carries an atom at zero; as the step law of
a discrete-time random walk it may.  :func:`normalize_walk` converts the
second form into the first.
"""
from __future__ import annotations

import enum
import json
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

from .errors import LawError

#: Absolute tolerance on the total mass of file inputs.
SUM_TOL = 1e-9
#: Masses below this are treated as absent atoms.
MIN_MASS = 1e-15
#: Laws whose mass is off by more than this are rescaled to exactly one.
RENORM_TOL = 1e-12
#: Mass left in the tail of a truncated countable family.
TAIL_MASS = 1e-14

_INT_KEY = re.compile(r"^\s*[+-]?\d+\s*$")


@dataclass(frozen=True)
class JumpLaw:
    """Probability mass function on the integers.

    Parameters
    ----------
    atoms : mapping or iterable of pairs
        Jump size ``n`` to mass ``p_n``.  Stored as a tuple of ``(n, p_n)``
        sorted by ``n``.
    time_scale : float
        Rate of the compound Poisson embedding (the total mass of the Levy
        measure).  Continuous-time transforms divide ``q`` by it.
    """

    atoms: tuple
    time_scale: float = 1.0

    def __post_init__(self):
        raw = self.atoms.items() if isinstance(self.atoms, Mapping) else self.atoms
        merged: dict[int, float] = {}
        for key, mass in raw:
            if isinstance(key, bool) or not isinstance(key, (int, np.integer)):
                raise LawError(f"atom key {key!r} is not an integer")
            if isinstance(mass, bool):
                raise LawError(f"mass {mass!r} at {key} is not a number")
            mass = float(mass)
            if not math.isfinite(mass) or mass < 0.0:
                raise LawError(f"mass at {key} must be finite and nonnegative, got {mass}")
            if mass < MIN_MASS:
                continue
            merged[int(key)] = merged.get(int(key), 0.0) + mass
        if not merged:
            raise LawError("jump law has no atoms")
        total = math.fsum(merged.values())
        if abs(total - 1.0) > SUM_TOL:
            raise LawError(f"masses sum to {total!r}, not 1 within {SUM_TOL}")
        if abs(total - 1.0) > RENORM_TOL:
            merged = {n: p / total for n, p in merged.items()}
        if max(merged) <= 0:
            raise LawError("jump law must charge at least one strictly positive jump")
        ts = float(self.time_scale)
        if not (math.isfinite(ts) and ts > 0.0):
            raise LawError(f"time_scale must be positive, got {self.time_scale!r}")
        object.__setattr__(self, "atoms", tuple(sorted(merged.items())))
        object.__setattr__(self, "time_scale", ts)

    # -- accessors ---------------------------------------------------------
    def mass(self, n: int) -> float:
        for k, p in self.atoms:
            if k == n:
                return p
        return 0.0

    def as_dict(self) -> dict[int, float]:
        return dict(self.atoms)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(k for k, _ in self.atoms)

    @property
    def jumps(self) -> np.ndarray:
        return np.array([k for k, _ in self.atoms], dtype=np.int64)

    @property
    def masses(self) -> np.ndarray:
        return np.array([p for _, p in self.atoms], dtype=float)

    @property
    def max_jump(self) -> int:
        return self.atoms[-1][0]

    @property
    def min_jump(self) -> int:
        return self.atoms[0][0]

    @property
    def mean(self) -> float:
        return math.fsum(k * p for k, p in self.atoms)

    def __len__(self):
        return len(self.atoms)


class Verdict(str, enum.Enum):
    NEARLY_RIGHT_CONTINUOUS = "NearlyRightContinuous"
    SKIP_FREE = "SkipFree"
    SKIP_FREE_ON_DOUBLE_LATTICE = "SkipFreeOnDoubleLattice"
    UNSUPPORTED = "Unsupported"


@dataclass(frozen=True)
class HypothesisReport:
    upward_support_ok: bool
    has_two_jump: bool
    has_odd_atom: bool
    has_zero_atom: bool
    verdict: Verdict

    @property
    def nearly_right_continuous(self) -> bool:
        return self.verdict is Verdict.NEARLY_RIGHT_CONTINUOUS


def check_hypotheses(law: JumpLaw) -> HypothesisReport:
    """Classify ``law`` against the assumptions of the first-passage formulas.

    The zero atom (a holding step of a discrete-time walk) is ignored for the
    support conditions; it only sets ``has_zero_atom``.
    """
    moving = [k for k in law.support if k != 0]
    upward_ok = all(k in (1, 2) for k in moving if k > 0)
    has_two = 2 in moving
    has_odd = any(k % 2 for k in moving)
    if not upward_ok:
        verdict = Verdict.UNSUPPORTED
    elif not has_two:
        verdict = Verdict.SKIP_FREE
    elif has_odd:
        verdict = Verdict.NEARLY_RIGHT_CONTINUOUS
    else:
        verdict = Verdict.SKIP_FREE_ON_DOUBLE_LATTICE
    return HypothesisReport(upward_ok, has_two, has_odd, 0 in law.support, verdict)


def normalize_walk(walk: JumpLaw) -> tuple[JumpLaw, float]:
    """Remove the zero atom of a walk's step law.

    Returns the law ``p_n / (1 - p_0)`` on the nonzero jumps together with
    the jump rate ``1 - p_0``.  Laws without a zero atom come back unchanged
    with rate 1.
    """
    p0 = walk.mass(0)
    if p0 == 0.0:
        return walk, 1.0
    rate = 1.0 - p0
    if rate <= MIN_MASS:
        raise LawError("walk never moves (all mass at 0)")
    rest = {k: p / rate for k, p in walk.atoms if k != 0}
    return JumpLaw(rest, time_scale=walk.time_scale), rate


def geometric_down(up: Mapping[int, float], ratio: float, tail: float = TAIL_MASS) -> JumpLaw:
    """Law with the given upward atoms and geometric downward jumps.

    The remaining mass ``d = 1 - sum(up)`` is put on ``-j`` with weight
    ``d (1 - ratio) ratio**(j - 1)`` for ``j >= 1``.  The series is cut once
    the neglected tail drops below ``tail`` and that tail is added to the
    last retained atom, so the result is an exact probability law.
    """
    if not 0.0 <= ratio < 1.0:
        raise LawError(f"geometric ratio must lie in [0, 1), got {ratio}")
    atoms = {int(k): float(p) for k, p in up.items()}
    if any(k <= 0 for k in atoms):
        raise LawError("upward atoms must have positive keys")
    down = 1.0 - math.fsum(atoms.values())
    if down <= 0.0:
        raise LawError("upward atoms leave no mass for downward jumps")
    j, weight, remaining = 1, down * (1.0 - ratio), down
    while True:
        atoms[-j] = weight
        remaining -= weight
        if remaining < tail or ratio == 0.0:
            atoms[-j] += max(remaining, 0.0)
            break
        j += 1
        weight *= ratio
    return JumpLaw(atoms)


# -- serialization -----------------------------------------------------------
def _parse_key(key) -> int:
    if isinstance(key, str) and _INT_KEY.match(key):
        return int(key)
    raise LawError(f"atom key {key!r} is not an integer")


def _parse_mass(value, key) -> float:
    if isinstance(value, bool):
        raise LawError(f"mass for {key!r} is not a number")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            return float(value)
        except ValueError:
            pass
    raise LawError(f"mass for {key!r} is not a number: {value!r}")


def atoms_from_document(doc) -> tuple[dict[int, float], float]:
    """Decode ``{"atoms": {...}, "time_scale": ...}`` or a bare atom mapping."""
    if not isinstance(doc, dict):
        raise LawError("law document must be a mapping")
    if "atoms" in doc:
        atoms, time_scale = doc["atoms"], doc.get("time_scale", 1.0)
        if not isinstance(atoms, dict):
            raise LawError('"atoms" must be a mapping')
    else:
        atoms, time_scale = doc, 1.0
    parsed = {}
    for key, value in atoms.items():
        mass = _parse_mass(value, key)
        if mass < 0.0:
            raise LawError(f"negative mass {mass} at {key!r}")
        parsed[_parse_key(key)] = mass
    return parsed, _parse_mass(time_scale, "time_scale")


def law_from_document(doc) -> JumpLaw:
    atoms, time_scale = atoms_from_document(doc)
    return JumpLaw(atoms, time_scale=time_scale)


def decode_document(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise LawError(f"malformed law document: {exc}") from None


def read_document(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise LawError(f"cannot read {path}: {exc.strerror}") from None
    return decode_document(text)


def parse_jump_law(text: str) -> JumpLaw:
    return law_from_document(decode_document(text))


def law_to_document(law: JumpLaw) -> dict:
    return {"atoms": {str(k): p for k, p in law.atoms}, "time_scale": law.time_scale}


def serialize_jump_law(law: JumpLaw) -> str:
    return json.dumps(law_to_document(law))


def load_jump_law(path) -> JumpLaw:
    return law_from_document(read_document(path))
