import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from disagreement.core import LabeledExample, NoiseSpec, RejectedInput, seeded_rng
from disagreement.datagen import (
    BasisDistribution, DatasetStream, DistributionStream, MarginDistribution, SamplingError,
    flip_labels, flip_noise, random_sign_vector, random_w_star, read_dataset_csv, sample_basis,
    sample_margin, uniform_ball, write_dataset_csv,
)


def test_uniform_ball_radius_law():
    # P(|x| <= r) = r^d for the uniform ball
    X = uniform_ball(100_000, 3, seeded_rng(0))
    r = np.linalg.norm(X, axis=1)
    assert r.max() <= 1.0
    assert np.mean(r <= 0.5) == pytest.approx(0.125, abs=0.005)


def test_margin_invariants_10k():
    dist = MarginDistribution(np.array([1000.0, 0.0]))
    X, y = dist.sample_arrays(10_000, seeded_rng(1))
    assert np.all(np.linalg.norm(X, axis=1) <= 1 + 1e-12)
    assert np.all(np.abs(X[:, 0]) >= 0.001)
    assert np.array_equal(y, np.where(X[:, 0] >= 0, 1, -1))
    assert np.all(y * (X @ dist.w_star) >= 1.0)


def test_margin_invariant_high_dim():
    dist = MarginDistribution(random_w_star(100, 1e3, seeded_rng(2)))
    X, y = dist.sample_arrays(10_000, seeded_rng(3))
    assert np.all(np.linalg.norm(X, axis=1) <= 1 + 1e-12)
    assert np.all(y * (X @ dist.w_star) >= 1.0)


def test_margin_d1_forces_unit_points():
    dist = MarginDistribution(np.array([1.0]))
    rng = seeded_rng(4)
    for _ in range(50):
        ex = sample_margin(dist, rng)
        assert abs(ex.x[0]) == pytest.approx(1.0) and ex.y == (1 if ex.x[0] > 0 else -1)


def test_margin_boundary_case_any_dim():
    w = random_w_star(6, 1.0, seeded_rng(1))
    X, y = MarginDistribution(w).sample_arrays(100, seeded_rng(2))
    np.testing.assert_allclose(np.abs(X @ w), 1.0)
    assert set(y.tolist()) == {-1, 1}


def test_margin_rejects_short_w_star():
    with pytest.raises(RejectedInput):
        MarginDistribution(np.array([0.5, 0.5]))


def test_margin_rejection_cap():
    # |w*| = 1.05 in d = 50: the acceptance band has essentially no mass
    dist = MarginDistribution(random_w_star(50, 1.05, seeded_rng(0)))
    with pytest.raises(SamplingError, match="negligible mass"):
        dist.sample_arrays(1, seeded_rng(5))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 12), st.floats(1.0, 1e4), st.integers(0, 2**32 - 1))
def test_margin_property(d, norm, seed):
    rng = seeded_rng(seed)
    dist = MarginDistribution(random_w_star(d, max(norm, 3.0 * np.sqrt(d)), rng))
    X, y = dist.sample_arrays(200, rng)
    assert np.all(np.linalg.norm(X, axis=1) <= 1 + 1e-12)
    assert np.all(y * (X @ dist.w_star) >= 1.0)


def test_basis_single_outcome():
    dist = BasisDistribution(np.array([1.0]))
    rng = seeded_rng(0)
    for _ in range(10):
        ex = sample_basis(dist, rng)
        assert ex.x.tolist() == [1.0] and ex.y == 1


def test_basis_uniformity():
    dist = BasisDistribution(np.array([1.0, -1.0, 1.0, 1.0]))
    X, _ = dist.sample_arrays(100_000, seeded_rng(6))
    freq = X.sum(axis=0) / len(X)
    assert np.all(np.abs(freq - 0.25) <= 0.01)
    assert np.all(X.sum(axis=1) == 1.0)


def test_basis_label_readout():
    dist = BasisDistribution(np.array([-1.0, 1.0]))
    X, y = dist.sample_arrays(200, seeded_rng(7))
    assert np.all(y[X[:, 0] == 1] == -1) and np.all(y[X[:, 1] == 1] == 1)


def test_basis_error_is_exact():
    dist = BasisDistribution(np.array([1.0, 1.0, -1.0, -1.0]))
    assert dist.error(np.array([1.0, -1.0, -1.0, 2.0])) == 0.5
    assert dist.error(np.array([0.0, 0.0, 0.0, 0.0])) == 0.5  # sign(0) = +1
    with pytest.raises(RejectedInput):
        BasisDistribution(np.array([1.0, 0.5]))


def test_flip_noise_mu_zero():
    ex = LabeledExample(np.array([0.3, -0.2]), 1)
    rng = seeded_rng(0)
    assert all(flip_noise(ex, NoiseSpec(0.0), rng).y == 1 for _ in range(200))


def test_flip_rate_and_x_preserved():
    rng = seeded_rng(8)
    X = rng.standard_normal((100_000, 2))
    y = np.where(rng.random(100_000) < 0.5, -1, 1).astype(np.int8)
    noisy = flip_labels(y, 0.4, seeded_rng(9))
    assert np.mean(noisy != y) == pytest.approx(0.4, abs=0.01)
    ex = LabeledExample(X[0], 1)
    out = flip_noise(ex, NoiseSpec(0.4), rng)
    assert out.x.tobytes() == ex.x.tobytes()


def test_flip_independent_of_label():
    y = np.where(seeded_rng(10).random(100_000) < 0.3, -1, 1).astype(np.int8)
    flipped = flip_labels(y, 0.4, seeded_rng(11)) != y
    assert abs(flipped[y == 1].mean() - flipped[y == -1].mean()) <= 0.02


def test_flip_determinism():
    y = np.ones(1000, dtype=np.int8)
    assert np.array_equal(flip_labels(y, 0.3, seeded_rng(5)), flip_labels(y, 0.3, seeded_rng(5)))


def test_clean_stream_separable_with_margin():
    rng = seeded_rng(12)
    dist = MarginDistribution(random_w_star(10, 50.0, rng))
    X, y = DistributionStream(dist, 0.0, rng).next_batch(5000)
    assert np.all(y * (X @ dist.w_star) >= 1.0)


def test_stream_batches_and_range_check():
    rng = seeded_rng(13)
    s = DistributionStream(BasisDistribution(random_sign_vector(5, rng)), 0.2, rng, chunk=7)
    for b in (1, 3, 10, 2):
        X, y = s.next_batch(b)
        assert X.shape == (b, 5) and y.shape == (b,)
    with pytest.raises(RejectedInput):
        DistributionStream(s.dist, 0.5, rng)


def test_dataset_stream_samples_rows():
    X = np.arange(20.0).reshape(10, 2)
    y = np.arange(10)
    s = DatasetStream(X, y, seeded_rng(0), chunk=4)
    for _ in range(10):
        Xb, yb = s.next_batch(3)
        assert np.array_equal(Xb, X[yb])
    with pytest.raises(RejectedInput):
        DatasetStream(np.zeros((0, 2)), np.zeros(0), seeded_rng(0))


def test_dataset_csv_roundtrip(tmp_path):
    rng = seeded_rng(14)
    dist = MarginDistribution(random_w_star(4, 20.0, rng))
    X, y = dist.sample_arrays(50, rng)
    path = tmp_path / "data.csv"
    write_dataset_csv(path, X, y)
    assert path.read_text().splitlines()[0] == "x0,x1,x2,x3,label"
    X2, y2 = read_dataset_csv(path)
    assert X2.tobytes() == X.tobytes() and np.array_equal(y2, y)
