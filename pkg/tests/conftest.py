import numpy as np
import pytest

from passage_kit.measure import JumpLaw

FIVE_ATOM = {2: 0.05, 1: 0.35, -1: 0.4, -2: 0.05, -3: 0.15}
GOLDEN = {2: 0.5, -1: 0.5}
SQRT5 = 5**0.5
GOLDEN_LM0 = (1 - SQRT5) / 2

ACCEPTANCE_LINES = []


def random_atoms(rng):
    """Upward atoms on {1, 2} with p2 > 0 and 1-5 downward atoms including an odd one."""
    ups = [2] + ([1] if rng.random() < 0.5 else [])
    while True:
        k = int(rng.integers(1, 6))
        downs = sorted(int(-d) for d in rng.choice(np.arange(1, 7), size=k, replace=False))
        if any(d % 2 for d in ups + downs):
            break
    keys = ups + downs
    w = rng.dirichlet(np.ones(len(keys))) * 0.9 + 0.1 / len(keys)
    w = w / w.sum()
    atoms = dict(zip(keys, w.tolist()))
    return atoms


def random_laws(count, seed, min_abs_mean=0.0):
    rng = np.random.default_rng(seed)
    laws = []
    while len(laws) < count:
        law = JumpLaw(random_atoms(rng))
        if abs(law.mean) >= min_abs_mean:
            laws.append(law)
    return laws


@pytest.fixture
def five_atom():
    return JumpLaw(FIVE_ATOM)


@pytest.fixture
def golden():
    return JumpLaw(GOLDEN)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
