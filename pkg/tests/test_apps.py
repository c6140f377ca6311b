import math

import pytest

from passage_kit.apps import (
    ServiceArrivalLaw,
    branching_total_progeny,
    busy_period,
    busy_period_query,
    idle_type_probabilities,
    load_arrival_law,
    terminal_queue,
)
from passage_kit.errors import HypothesisError, LawError
from passage_kit.oracle import dp_first_passage, dp_pgf
from passage_kit.passage import Regime, overshoot_law_discrete

from conftest import GOLDEN_LM0
from oracles import queue_dp, queue_mc

GOLDEN_QUEUE = {0: 0.5, 3: 0.5}
DELTA0 = ServiceArrivalLaw({0: 1.0})
# frozen from the direct queue DP (tests/oracles.py)
QUEUE_DP_K3_G15 = (0.40373334128613086, 0.36184427528454893, 0.04188906600158192)


def test_arrival_law_validation():
    for bad in ({-1: 1.0}, {0: 0.5}, {0: 1.5, 1: -0.5}, {0.5: 1.0}):
        with pytest.raises(LawError):
            ServiceArrivalLaw(bad)
    assert ServiceArrivalLaw({2: 0.25, 0: 0.75}).mean == 0.5


def test_load_arrival_law():
    law = load_arrival_law("data/queue_golden.json")
    assert law.atoms == ((0, 0.5), (3, 0.5))


def test_derived_walk_atoms():
    q = busy_period_query(ServiceArrivalLaw({0: 0.1, 1: 0.2, 2: 0.3, 5: 0.4}), 3)
    assert q.derived_walk.as_dict() == {2: 0.1, 1: 0.2, 0: 0.3, -3: 0.4}


def test_terminal_queue_map():
    assert terminal_queue(0) == 1
    assert terminal_queue(1) == 0


@pytest.mark.parametrize("k", [1, 0, -3, 2.5])
def test_k_must_be_at_least_two(k):
    F = ServiceArrivalLaw(GOLDEN_QUEUE)
    with pytest.raises(ValueError):
        busy_period(F, k)
    with pytest.raises(ValueError):
        idle_type_probabilities(F, k)


def test_drain_without_arrivals():
    assert busy_period(DELTA0, 7) == 1.0
    # three double services empty a queue of seven down to one customer
    assert busy_period(DELTA0, 7, gamma=2.0) == pytest.approx(2.0**-3, abs=1e-12)


def test_heavy_arrivals_defective():
    F = ServiceArrivalLaw({0: 0.25, 1: 0.25, 4: 0.25, 5: 0.25})
    assert F.mean == 2.5
    value = busy_period(F, 4)
    assert value < 1
    ended = sum(queue_mc(dict(F.atoms), 4, 100_000, seed=4, max_steps=400))
    p = ended / 100_000
    assert abs(p - value) <= 3 * math.sqrt(p * (1 - p) / 100_000)


def test_golden_queue_matches_dp():
    F = ServiceArrivalLaw(GOLDEN_QUEUE)
    v = busy_period(F, 3, gamma=1.5)
    assert v == pytest.approx(QUEUE_DP_K3_G15[0], abs=1e-8)
    walk = busy_period_query(F, 3).derived_walk
    assert v == pytest.approx(dp_pgf(walk, 1.5, 2)[0], abs=1e-8)


@pytest.mark.parametrize("arrivals", [
    GOLDEN_QUEUE,
    {0: 0.3, 1: 0.1, 3: 0.6},
    {0: 0.2, 1: 0.3, 2: 0.1, 4: 0.4},
    {0: 0.6, 4: 0.4},
])
@pytest.mark.parametrize("gamma", [1.1, 1.5, 3.0])
def test_walk_mapping_matches_queue_dp(arrivals, gamma):
    F = ServiceArrivalLaw(arrivals)
    for k in range(2, 7):
        assert busy_period(F, k, gamma) == pytest.approx(queue_dp(arrivals, k, gamma)[0], abs=1e-8)


def test_never_idles():
    F = ServiceArrivalLaw({2: 0.5, 3: 0.5})
    assert busy_period(F, 3) == 0.0
    rep = branching_total_progeny(F, 3)
    assert not rep.extinct_almost_surely and rep.expected_progeny == math.inf


# -- idle types --------------------------------------------------------------------------
def test_idle_types_level_one_golden():
    rep = idle_type_probabilities(ServiceArrivalLaw(GOLDEN_QUEUE), 2)
    assert rep.both_rest == pytest.approx(-GOLDEN_LM0, abs=1e-10)
    assert rep.one_rests == pytest.approx(1 + GOLDEN_LM0, abs=1e-10)
    assert rep.method == "closed-form"


@pytest.mark.parametrize("gamma", [1.2, 2.0])
def test_idle_types_match_queue_dp(gamma):
    F = ServiceArrivalLaw(GOLDEN_QUEUE)
    for k in range(2, 7):
        o = overshoot_law_discrete(busy_period_query(F, k).derived_walk, k - 1, gamma)
        _, ends1, ends0 = queue_dp(GOLDEN_QUEUE, k, gamma)
        assert o.p0 == pytest.approx(ends1, abs=1e-8)
        assert o.p1 == pytest.approx(ends0, abs=1e-8)


def test_idle_types_orientation_at_large_k():
    F = ServiceArrivalLaw(GOLDEN_QUEUE)
    rep = idle_type_probabilities(F, 40)
    assert rep.both_rest / rep.one_rests == pytest.approx(-GOLDEN_LM0, abs=1e-8)
    ones, zeros = queue_mc(GOLDEN_QUEUE, 40, 200_000, seed=8)
    # the directly simulated queue agrees: ending with one customer dominates
    assert ones > zeros
    assert zeros / ones == pytest.approx(-GOLDEN_LM0, abs=0.02)


def test_idle_types_fallback_for_even_lattice():
    F = ServiceArrivalLaw({0: 0.6, 4: 0.4})
    with pytest.raises(HypothesisError):
        idle_type_probabilities(F, 4)
    rep = idle_type_probabilities(F, 4, fallback_paths=20_000, seed=1)
    assert rep.method == "monte-carlo"
    # even arrivals keep the queue even, so it always empties completely
    assert rep.both_rest == 1.0 and rep.one_rests == 0.0


# -- branching ---------------------------------------------------------------------------
def test_branching_no_offspring():
    rep = branching_total_progeny(DELTA0, 4)
    assert rep.expected_pairs == 2.0
    assert rep.expected_progeny == 4.0
    assert rep.extinct_almost_surely and rep.finite_mean


def test_branching_subcritical():
    rep = branching_total_progeny(ServiceArrivalLaw({0: 0.3, 1: 0.1, 3: 0.6}), 5)
    assert rep.regime is Regime.DRIFTS_UP
    assert rep.extinct_almost_surely and rep.finite_mean
    assert math.isfinite(rep.expected_pairs)


@pytest.mark.parametrize("arrivals", [{0: 0.25, 1: 0.25, 3: 0.25, 4: 0.25}, {0: 0.5, 4: 0.5}])
def test_branching_critical(arrivals):
    rep = branching_total_progeny(ServiceArrivalLaw(arrivals), 3)
    assert rep.regime is Regime.OSCILLATES
    assert rep.extinct_almost_surely and not rep.finite_mean
    assert rep.generating_value == pytest.approx(1.0, abs=1e-12)


def test_branching_mean_pairs_against_dp():
    F = ServiceArrivalLaw({0: 0.5, 1: 0.1, 3: 0.4})
    rep = branching_total_progeny(F, 3)
    res = dp_first_passage(busy_period_query(F, 3).derived_walk, 2, 1500)
    assert res.residual_active < 1e-15
    mean = math.fsum(k * (a + b) for k, (a, b) in enumerate(res.absorbed))
    assert rep.expected_pairs == pytest.approx(mean, rel=1e-10)


def test_branching_extinction_frequencies_separate():
    sub, sup = {0: 0.3, 1: 0.1, 3: 0.6}, {0: 0.3, 3: 0.7}
    paths = 100_000
    freq_sub = sum(queue_mc(sub, 5, paths, seed=1, max_steps=3000)) / paths
    freq_sup = sum(queue_mc(sup, 5, paths, seed=2, max_steps=3000)) / paths
    rep_sub = branching_total_progeny(ServiceArrivalLaw(sub), 5)
    rep_sup = branching_total_progeny(ServiceArrivalLaw(sup), 5)
    assert rep_sub.extinct_almost_surely and freq_sub > 0.99
    assert not rep_sup.extinct_almost_surely
    se = math.sqrt(freq_sup * (1 - freq_sup) / paths)
    assert abs(freq_sup - rep_sup.generating_value) <= 3 * se
    assert freq_sup < 0.8
