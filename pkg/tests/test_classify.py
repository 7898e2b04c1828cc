import numpy as np
import pytest
from scipy.stats import norm

from mbore.classify import (
    GbtConfig,
    MlpConfig,
    TrainingError,
    fit,
    from_json,
    log_loss,
    predict_proba,
)


@pytest.fixture(scope="module")
def blobs():
    rng = np.random.default_rng(3)
    a = rng.normal([0.25, 0.25], 0.05, size=(20, 2))
    b = rng.normal([0.75, 0.75], 0.05, size=(20, 2))
    X = np.clip(np.vstack([a, b]), 0, 1)
    z = np.r_[np.ones(20), np.zeros(20)]
    return X, z


@pytest.fixture(scope="module")
def gbt_blobs(blobs):
    X, z = blobs
    return fit("GBT", X, z, GbtConfig(n_rounds=50), seed=0)


class TestLogLoss:
    def test_near_perfect(self):
        assert log_loss([1], [1 - 1e-9]) == pytest.approx(1e-9, rel=1e-6)

    def test_coin_flip(self):
        assert log_loss([1, 0], [0.5, 0.5]) == pytest.approx(np.log(2))
        assert log_loss([0], [0.5]) == pytest.approx(0.6931, abs=1e-4)

    @pytest.mark.parametrize("p", [0.0, 1.0, 1.5])
    def test_domain(self, p):
        with pytest.raises(ValueError):
            log_loss([1], [p])


class TestGbt:
    def test_separable_accuracy(self, blobs, gbt_blobs):
        X, z = blobs
        pred = gbt_blobs.predict_proba(X) > 0.5
        assert np.mean(pred == z) == 1.0

    def test_confident_inside_blobs(self, gbt_blobs):
        assert predict_proba(gbt_blobs, [0.25, 0.25]) >= 0.9
        assert predict_proba(gbt_blobs, [0.75, 0.75]) <= 0.1

    def test_zero_rounds_is_base_rate(self):
        X = np.random.default_rng(0).random((10, 3))
        z = np.array([1, 1, 1, 0, 0, 0, 0, 0, 0, 0])
        m = fit("GBT", X, z, GbtConfig(n_rounds=0))
        np.testing.assert_allclose(m.predict_proba(X), 0.3)

    def test_single_class_rejected(self):
        with pytest.raises(TrainingError):
            fit("GBT", np.random.rand(5, 2), np.ones(5))

    def test_nan_rejected(self):
        X = np.random.rand(5, 2)
        X[0, 0] = np.nan
        with pytest.raises(ValueError):
            fit("GBT", X, [0, 1, 0, 1, 0])

    def test_deterministic(self, blobs):
        X, z = blobs
        a = fit("GBT", X, z, seed=4).predict_proba(X)
        b = fit("GBT", X, z, seed=4).predict_proba(X)
        np.testing.assert_array_equal(a, b)

    def test_row_permutation_invariant(self):
        rng = np.random.default_rng(1)
        X = rng.random((60, 4))
        z = (X[:, 0] + X[:, 1] ** 2 < 0.8).astype(int)
        Q = rng.random((100, 4))
        a = fit("GBT", X, z).predict_proba(Q)
        perm = rng.permutation(60)
        b = fit("GBT", X[perm], z[perm]).predict_proba(Q)
        np.testing.assert_array_equal(a, b)

    def test_monotone_training_loss(self):
        rng = np.random.default_rng(2)
        X = rng.random((80, 3))
        z = (np.sin(6 * X[:, 0]) + X[:, 1] > 0.7).astype(int)
        trace = fit("GBT", X, z).train_loss_trace
        assert len(trace) == 101
        assert np.all(trace[10:] <= trace[:-10] + 1e-6)
        assert trace[-1] <= trace[0]

    def test_dimension_mismatch(self, gbt_blobs):
        with pytest.raises(ValueError):
            gbt_blobs.predict_proba(np.zeros((1, 3)))

    def test_probabilities_clamped(self, gbt_blobs):
        p = gbt_blobs.predict_proba(np.random.default_rng(0).random((500, 2)))
        assert p.min() >= 1e-6 and p.max() <= 1 - 1e-6

    def test_json_round_trip(self, gbt_blobs):
        Q = np.random.default_rng(9).random((200, 2))
        clone = from_json(gbt_blobs.to_json())
        np.testing.assert_array_equal(clone.predict_proba(Q), gbt_blobs.predict_proba(Q))
        np.testing.assert_array_equal(clone.train_loss_trace, gbt_blobs.train_loss_trace)


class TestMlp:
    def test_bayes_posterior(self):
        rng = np.random.default_rng(0)
        n = 2000
        z = rng.integers(0, 2, n)
        x = np.where(z == 1, rng.normal(0.4, 0.1, n), rng.normal(0.6, 0.1, n))
        keep = (x >= 0) & (x <= 1)
        model = fit("MLP", x[keep, None], z[keep], seed=0)
        grid = np.linspace(0.2, 0.8, 61)
        l1, l0 = norm.pdf(grid, 0.4, 0.1), norm.pdf(grid, 0.6, 0.1)
        bayes = l1 * z[keep].mean() / (l1 * z[keep].mean() + l0 * (1 - z[keep].mean()))
        assert np.mean(np.abs(model.predict_proba(grid[:, None]) - bayes)) < 0.1

    def test_separable(self, blobs):
        X, z = blobs
        m = fit("MLP", X, z, MlpConfig(epochs=1500, step_size=1e-2), seed=1)
        assert np.mean((m.predict_proba(X) > 0.5) == z) == 1.0
        assert m.train_loss_trace[-1] < m.train_loss_trace[0]

    def test_deterministic_and_round_trip(self, blobs):
        X, z = blobs
        cfg = MlpConfig(epochs=50)
        a = fit("MLP", X, z, cfg, seed=7)
        b = fit("MLP", X, z, cfg, seed=7)
        np.testing.assert_array_equal(a.predict_proba(X), b.predict_proba(X))
        np.testing.assert_array_equal(from_json(a.to_json()).predict_proba(X), a.predict_proba(X))

    def test_minibatch(self, blobs):
        X, z = blobs
        m = fit("MLP", X, z, MlpConfig(epochs=20, batch_size=8), seed=0)
        assert np.all((m.predict_proba(X) > 0) & (m.predict_proba(X) < 1))

    def test_bad_config(self):
        with pytest.raises(ValueError):
            MlpConfig(layers=())
        with pytest.raises(ValueError):
            MlpConfig(step_size=0)


def test_unknown_kind():
    with pytest.raises(ValueError):
        fit("SVM", np.random.rand(4, 2), [0, 1, 0, 1])
