import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from disagreement.core import (
    LabeledExample, LinearModel, NoiseSpec, RejectedInput, TrainingTrace,
    child_rngs, predict, seeded_rng, sign, signs, stack_examples,
)

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


@pytest.mark.parametrize("v,expected", [(3.5, 1), (-0.2, -1), (0.0, 1), (-0.0, 1)])
def test_sign(v, expected):
    assert sign(v) == expected


def test_signs_vectorised_matches_scalar():
    v = np.array([-2.0, 0.0, 1e-300, -1e-300, 7.0])
    assert signs(v).tolist() == [sign(x) for x in v]
    assert signs(v).dtype == np.int8


@pytest.mark.parametrize("w,x,expected", [
    ((1, -1), (1, 0), 1),
    ((1, -1), (0, 1), -1),
    ((0, 0), (1, 1), 1),
])
def test_predict_examples(w, x, expected):
    assert predict(LinearModel(np.array(w, float)), np.array(x, float)) == expected


def test_predict_dimension_mismatch():
    with pytest.raises(RejectedInput):
        predict(LinearModel(np.ones(2)), np.ones(3))


@settings(max_examples=200, deadline=None)
@given(arrays(np.float64, 5, elements=finite), arrays(np.float64, 5, elements=finite),
       st.floats(1e-3, 1e3))
def test_predict_scale_invariant(w, x, c):
    m = LinearModel(w)
    assert predict(LinearModel(c * w), x) == predict(m, x)


@settings(max_examples=200, deadline=None)
@given(arrays(np.float64, 4, elements=finite), arrays(np.float64, 4, elements=finite))
def test_predict_odd_off_boundary(w, x):
    m = LinearModel(w)
    if float(w @ x) != 0.0:
        assert predict(m, x) == -predict(m, -x)


def test_labeled_example_validation():
    LabeledExample(np.zeros(3), -1)
    with pytest.raises(RejectedInput):
        LabeledExample(np.zeros(3), 0)
    with pytest.raises(RejectedInput):
        LabeledExample(np.array([1.0, np.nan]), 1)
    with pytest.raises(RejectedInput):
        LabeledExample(np.array([np.inf]), 1)


def test_labeled_example_is_immutable():
    ex = LabeledExample(np.array([1.0, 2.0]), 1)
    with pytest.raises(ValueError):
        ex.x[0] = 5.0


def test_linear_model_invariants():
    m = LinearModel(np.array([1.0, 2.0]))
    assert m.dim == 2
    with pytest.raises(RejectedInput):
        LinearModel(np.array([np.nan]))
    with pytest.raises(RejectedInput):
        LinearModel(np.zeros(0))
    assert LinearModel.zeros(4).w.tolist() == [0.0] * 4


@pytest.mark.parametrize("mu", [0.0, 0.1, 0.4999])
def test_noise_spec_accepts(mu):
    NoiseSpec(mu, seed=2**64 - 1)


@pytest.mark.parametrize("mu", [-0.1, 0.5, 0.7])
def test_noise_spec_rejects(mu):
    with pytest.raises(RejectedInput):
        NoiseSpec(mu)


def test_seeded_rng_determinism():
    a = seeded_rng(42).random(100)
    b = seeded_rng(42).random(100)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, seeded_rng(43).random(100))
    seeded_rng(0).random(3)
    assert isinstance(seeded_rng(1).bit_generator, np.random.PCG64)


def test_seeded_rng_frozen_stream():
    # PCG64 is stable across numpy releases; pin the first draws
    got = seeded_rng(42).integers(0, 2**32, size=3).tolist()
    assert got == np.random.Generator(np.random.PCG64(42)).integers(0, 2**32, size=3).tolist()
    assert seeded_rng(42).random() == pytest.approx(0.7739560485559633, abs=0)


def test_seed_range():
    seeded_rng(2**64 - 1)
    with pytest.raises(RejectedInput):
        seeded_rng(-1)
    with pytest.raises(RejectedInput):
        seeded_rng(2**64)


def test_child_rngs_independent_and_reproducible():
    a = [g.random(5) for g in child_rngs(7, 3)]
    b = [g.random(5) for g in child_rngs(7, 3)]
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    assert not np.array_equal(a[0], a[1])


def test_stack_examples():
    X, y = stack_examples([LabeledExample(np.ones(2), 1), LabeledExample(np.zeros(2), -1)])
    assert X.shape == (2, 2) and y.tolist() == [1, -1]
    with pytest.raises(RejectedInput):
        stack_examples([])
    with pytest.raises(RejectedInput):
        stack_examples([LabeledExample(np.ones(2), 1), LabeledExample(np.ones(3), 1)])


def test_trace_records_and_counts():
    tr = TrainingTrace(2, [True, False, True, True], [True, False, False, True],
                       [np.nan, 0.5, np.nan, 0.75])
    recs = list(tr.records())
    assert [r.update_count_so_far for r in recs] == [1, 1, 1, 2]
    assert recs[1].test_accuracy == 0.5 and recs[0].test_accuracy is None
    its, acc = tr.eval_points()
    assert its.tolist() == [2, 4] and acc.tolist() == [0.5, 0.75]
    assert tr.total_updates == 2


@settings(max_examples=100, deadline=None)
@given(st.lists(st.booleans(), min_size=0, max_size=60))
def test_trace_count_monotone_unit_steps(flags):
    tr = TrainingTrace(1, flags, flags, [np.nan] * len(flags))
    counts = tr.update_counts
    steps = np.diff(np.concatenate([[0], counts]))
    assert np.all((steps == 0) | (steps == 1))


def test_trace_rejects_ragged_columns():
    with pytest.raises(RejectedInput):
        TrainingTrace(1, [True], [True, False], [np.nan])
    with pytest.raises(RejectedInput):
        TrainingTrace(0)
