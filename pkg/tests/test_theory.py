import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from disagreement.core import RejectedInput, TrainingTrace, seeded_rng
from disagreement.datagen import BasisDistribution
from disagreement.theory import (
    BoundInputs, MarkovChain3, OracleReport, check_bound, check_floor_scaling, check_occupancy,
    check_stationarity, count_updates, lemma1_stuck_fraction, lemma2_error_floor, lemma2_stationary,
    lemma2_transition, run_stuck_coordinate_trial, simulate_coordinate_occupancy, stuck_mask,
    theorem1_bound,
)

import frozen
from oracles import ref_stationary_eig


@pytest.mark.parametrize("K,mu,wsq,expected", frozen.BOUND_CASES)
def test_bound_values(K, mu, wsq, expected):
    assert theorem1_bound(BoundInputs(K, mu, wsq)) == pytest.approx(expected, rel=1e-15)


def test_bound_noise_ratio():
    assert theorem1_bound(BoundInputs(0.7, 0.25, 20)) == pytest.approx(4 * theorem1_bound(BoundInputs(0.7, 0.0, 20)))


@pytest.mark.parametrize("kw", [dict(K=0, mu=0.5, w_star_norm_sq=1), dict(K=-1, mu=0, w_star_norm_sq=1),
                                dict(K=0, mu=0, w_star_norm_sq=0.5)])
def test_bound_inputs_rejected(kw):
    with pytest.raises(RejectedInput):
        BoundInputs(**kw)


def test_count_updates():
    assert count_updates(TrainingTrace(1)) == 0
    flags = [True, False, True, False, False]
    assert count_updates(TrainingTrace(1, flags, flags, [np.nan] * 5)) == 2
    none = [False] * 4
    assert count_updates(TrainingTrace(1, none, none, [np.nan] * 4)) == 0


def test_transition_noiseless():
    assert lemma2_transition(0.0).P.tolist() == [[0, 1, 0], [0, 0, 1], [0, 0, 1]]


def test_transition_mu_02():
    P = lemma2_transition(0.2).P
    np.testing.assert_allclose(P, [[0.2, 0.8, 0], [0.2, 0, 0.8], [0, 0.2, 0.8]], atol=1e-15)
    np.testing.assert_allclose(P.sum(axis=1), 1.0, atol=1e-15)


@pytest.mark.parametrize("mu", [0.5, -0.01, 0.9])
def test_transition_domain(mu):
    with pytest.raises(RejectedInput):
        lemma2_transition(mu)


def test_chain_validation():
    with pytest.raises(RejectedInput):
        MarkovChain3(0.1, np.eye(3) * 0.5)
    with pytest.raises(RejectedInput):
        MarkovChain3(0.1, [[1.5, -0.5, 0], [0, 1, 0], [0, 0, 1]])


def test_stationary_values():
    assert lemma2_stationary(lemma2_transition(0.0)).tolist() == [0.0, 0.0, 1.0]
    pi = lemma2_stationary(lemma2_transition(0.2))
    np.testing.assert_allclose(pi, frozen.PI_MU_02, atol=1e-15)
    np.testing.assert_allclose(pi, frozen.PI_MU_02_ROUNDED, atol=5e-7)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.0, 0.4999))
def test_stationary_fixed_point(mu):
    chain = lemma2_transition(mu)
    pi = lemma2_stationary(chain)
    assert np.abs(pi @ chain.P - pi).max() <= 1e-12
    assert abs(pi.sum() - 1) <= 1e-12


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, 0.49))
def test_stationary_matches_eigenvector(mu):
    chain = lemma2_transition(mu)
    np.testing.assert_allclose(lemma2_stationary(chain), ref_stationary_eig(chain.P), atol=1e-10)


def test_error_floor_value():
    assert lemma2_error_floor(0.2) == pytest.approx(frozen.FLOOR_MU_02, rel=1e-14)
    assert round(lemma2_error_floor(0.2), 6) == frozen.FLOOR_MU_02_ROUNDED


def test_error_floor_cubic_limit():
    ratios = [lemma2_error_floor(m) / m**3 for m in (1e-2, 1e-3, 1e-4)]
    assert abs(ratios[-1] - 1) < abs(ratios[0] - 1)
    assert ratios[-1] == pytest.approx(1.0, abs=1e-3)


@pytest.mark.parametrize("mu", [0.0, 0.5])
def test_error_floor_domain(mu):
    with pytest.raises(RejectedInput):
        lemma2_error_floor(mu)


def test_stuck_fraction_examples():
    ws = np.ones(4)
    assert lemma1_stuck_fraction(-ws, -ws, ws) == 1.0
    w = np.array([1.0, -2.0, 3.0, -0.5])
    assert lemma1_stuck_fraction(w, -w, ws) == 0.0
    assert lemma1_stuck_fraction([-1, 1, -1, 1], [-1, -1, -1, 1], ws) == 0.5
    with pytest.raises(RejectedInput):
        stuck_mask(np.ones(3), np.ones(4), np.ones(3))


def test_stuck_trial_dominance():
    for seed in range(5):
        t = run_stuck_coordinate_trial(32, 3000, seed)
        assert t["stuck_kept_sign"]
        assert t["final_error"] >= t["stuck_fraction"]


def test_gated_fixes_unstuck_coordinates_noiseless():
    # with mu = 0 and enough steps every non-stuck coordinate ends correct
    t = run_stuck_coordinate_trial(16, 20000, 3)
    assert t["final_error"] == pytest.approx(t["stuck_fraction"])


def test_occupancy_matches_chain_short():
    occ = simulate_coordinate_occupancy(0.2, 8, 200_000, 1)
    pi = lemma2_stationary(lemma2_transition(0.2))
    assert np.abs(occ - pi).sum() <= 0.03


def test_occupancy_noiseless_ends_positive():
    occ = simulate_coordinate_occupancy(0.0, 4, 10_000, 0)
    assert occ[2] > 0.99 and occ[0] == 0.0


def test_oracle_report_json_shape():
    r = check_floor_scaling()
    d = json.loads(r.to_json())
    assert set(d) >= {"quantity", "parameters", "theoretical", "empirical", "pass"}
    assert d["pass"] is True
    assert all(6 <= v <= 10 for v in d["empirical"].values())


def test_stationarity_report():
    r = check_stationarity(100, 0)
    assert r.passed and r.empirical <= 1e-12


def test_bound_check_small():
    r = check_bound(0.1, d=10, repeats=5, iters=5000, seed=1)
    assert isinstance(r, OracleReport) and r.passed
    assert r.empirical <= r.theoretical


def test_bound_check_identical_init_zero():
    r = check_bound(0.25, d=10, repeats=3, iters=2000, identical_init=True)
    assert r.empirical == 0.0 and r.passed
