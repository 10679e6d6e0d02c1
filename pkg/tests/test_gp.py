import math

import numpy as np
import pytest

from conducta.gp import (
    GpError,
    Hyperparams,
    dump_model,
    fit,
    kernel,
    kernel_matrix,
    load_model,
    log_marginal_likelihood,
    predict,
    sample_posterior_functions,
)

HP = Hyperparams(lengthscale=1.0, signal_var=1.0, noise_var=0.0)


def dense_predict(X, y, hp, Xs):
    """Reference prediction through an explicit inverse; test-only oracle."""
    K = kernel_matrix(X, X, hp) + hp.noise_var * np.eye(len(X))
    Kinv = np.linalg.inv(K)
    Ks = kernel_matrix(X, Xs, hp)
    Kss = kernel_matrix(Xs, Xs, hp)
    mean = Ks.T @ Kinv @ y
    cov = Kss - Ks.T @ Kinv @ Ks
    return mean, cov


def dense_lml(X, y, hp):
    K = kernel_matrix(X, X, hp) + hp.noise_var * np.eye(len(X))
    sign, logdet = np.linalg.slogdet(K)
    assert sign > 0
    return float(-0.5 * y @ np.linalg.inv(K) @ y - 0.5 * logdet - 0.5 * len(y) * math.log(2 * math.pi))


def random_instance(rng, n_max=50, dim=3, noise=0.1):
    n = int(rng.integers(2, n_max + 1))
    X = rng.normal(size=(n, dim)) * 2.0
    y = rng.normal(size=n)
    hp = Hyperparams(
        lengthscale=float(rng.uniform(0.5, 2.0)),
        signal_var=float(rng.uniform(0.5, 2.0)),
        noise_var=noise,
    )
    return X, y, hp


class TestKernel:
    def test_same_point(self):
        hp = Hyperparams(lengthscale=0.7, signal_var=2.5, noise_var=0.0)
        assert kernel([1.0, 2.0], [1.0, 2.0], hp) == 2.5

    def test_unit_distance(self):
        assert kernel([0.0], [1.0], HP) == pytest.approx(math.exp(-0.5), abs=1e-15)

    def test_far_apart_vanishes(self):
        assert kernel([0.0], [1e4], HP) == 0.0

    def test_matrix_symmetry_and_psd(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            X, _, hp = random_instance(rng, n_max=30)
            K = kernel_matrix(X, X, hp)
            assert np.max(np.abs(K - K.T)) < 1e-12
            eigs = np.linalg.eigvalsh(K)
            assert eigs[0] >= -1e-8 * np.trace(K) / len(X)

    def test_invalid_hyperparams(self):
        with pytest.raises(GpError):
            Hyperparams(lengthscale=-1.0, signal_var=1.0, noise_var=0.0).validate()
        with pytest.raises(GpError):
            Hyperparams(lengthscale=1.0, signal_var=0.0, noise_var=0.0).validate()


class TestFit:
    def test_single_point(self):
        model = fit([[0.0]], [1.0], HP)
        assert model.L.tolist() == [[1.0]]
        assert model.alpha_vec.tolist() == [1.0]

    def test_cholesky_reconstructs_kernel(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            X, y, hp = random_instance(rng, n_max=40)
            model = fit(X, y, hp)
            if model.jitter:
                continue
            K = kernel_matrix(X, X, hp) + hp.noise_var * np.eye(len(X))
            err = np.linalg.norm(model.L @ model.L.T - K) / np.linalg.norm(K)
            assert err < 1e-8

    def test_duplicate_inputs_noiseless_need_jitter(self):
        # rank-deficient K: the factorization only goes through via jitter
        X = np.zeros((2, 1))
        model = fit(X, [0.0, 1.0], HP)
        assert model.jitter > 0

    def test_indefinite_matrix_errors_with_eigenvalue(self):
        from conducta.gp import _chol_with_jitter

        bad = np.array([[1.0, 2.0], [2.0, 1.0]])  # eigenvalues -1 and 3
        with pytest.raises(GpError, match="eigenvalue"):
            _chol_with_jitter(bad)

    def test_duplicate_inputs_with_noise_ok(self):
        X = np.zeros((2, 1))
        hp = Hyperparams(lengthscale=1.0, signal_var=1.0, noise_var=0.1)
        model = fit(X, [0.0, 1.0], hp)
        assert model.n_train == 2 and model.jitter == 0.0

    def test_shape_mismatch(self):
        with pytest.raises(GpError, match="rows"):
            fit(np.zeros((3, 1)), [0.0, 1.0], HP)


class TestPredict:
    def test_interpolates_training_points(self):
        rng = np.random.default_rng(8)
        for _ in range(10):
            X, y, hp = random_instance(rng, n_max=20, noise=0.0)
            model = fit(X, y, hp)
            pred = predict(model, X)
            assert np.max(np.abs(pred.mean - y)) < 1e-6
            assert np.max(pred.var) < 1e-6

    def test_prior_reversion_far_away(self):
        model = fit([[0.0]], [3.0], HP)
        pred = predict(model, [[1e5]])
        assert abs(pred.mean[0]) < 1e-12
        assert pred.var[0] == pytest.approx(1.0, abs=1e-12)

    def test_single_point_hand_algebra(self):
        model = fit([[0.0]], [1.0], HP)
        xs = 1.3
        c = math.exp(-(xs**2) / 2.0)
        pred = predict(model, [[xs]])
        assert pred.mean[0] == pytest.approx(c, abs=1e-12)
        assert pred.var[0] == pytest.approx(1.0 - c * c, abs=1e-12)

    def test_matches_dense_oracle(self):
        rng = np.random.default_rng(13)
        for _ in range(50):
            X, y, hp = random_instance(rng, n_max=50)
            Xs = rng.normal(size=(7, X.shape[1])) * 2.0
            model = fit(X, y, hp)
            pred = predict(model, Xs)
            mean_ref, cov_ref = dense_predict(X, y, hp, Xs)
            assert np.max(np.abs(pred.mean - mean_ref)) < 1e-8
            assert np.max(np.abs(pred.cov - cov_ref)) < 1e-8

    def test_dimension_mismatch(self):
        model = fit([[0.0, 0.0]], [1.0], HP)
        with pytest.raises(GpError, match="dimension"):
            predict(model, [[1.0]])

    def test_variance_nonincreasing_with_data(self):
        rng = np.random.default_rng(17)
        hp = Hyperparams(lengthscale=1.0, signal_var=1.0, noise_var=0.01)
        X = rng.normal(size=(30, 2))
        y = rng.normal(size=30)
        Xs = rng.normal(size=(10, 2))
        prev = np.full(10, np.inf)
        for n in (5, 10, 20, 30):
            model = fit(X[:n], y[:n], hp)
            var = predict(model, Xs).var
            assert np.all(var <= prev + 1e-9)
            prev = var


class TestLogMarginalLikelihood:
    def test_single_zero_target(self):
        hp = Hyperparams(lengthscale=1.0, signal_var=1.0, noise_var=0.0)
        model = fit([[0.0]], [0.0], hp)
        assert log_marginal_likelihood(model) == pytest.approx(
            -0.5 * math.log(2 * math.pi), abs=1e-12
        )

    def test_zero_targets_drop_quadratic_term(self):
        rng = np.random.default_rng(19)
        X, _, hp = random_instance(rng, n_max=10)
        model = fit(X, np.zeros(len(X)), hp)
        expected = -float(np.sum(np.log(np.diag(model.L)))) - 0.5 * len(X) * math.log(2 * math.pi)
        assert log_marginal_likelihood(model) == pytest.approx(expected, abs=1e-12)

    def test_matches_dense_density(self):
        rng = np.random.default_rng(23)
        for _ in range(20):
            X, y, hp = random_instance(rng, n_max=50)
            model = fit(X, y, hp)
            assert log_marginal_likelihood(model) == pytest.approx(
                dense_lml(X, y, hp), abs=1e-8
            )


class TestSampling:
    def test_monte_carlo_mean(self):
        model = fit([[0.0], [1.0]], [0.5, -0.5], Hyperparams(1.0, 1.0, 0.01))
        pred = predict(model, [[0.4]])
        draws = sample_posterior_functions(model, [[0.4]], count=100_000, seed=5)
        se = math.sqrt(pred.var[0] / draws.shape[0]) + 1e-12
        assert abs(draws[:, 0].mean() - pred.mean[0]) < 3 * se + 1e-3

    def test_deterministic(self):
        model = fit([[0.0]], [1.0], Hyperparams(1.0, 1.0, 0.1))
        a = sample_posterior_functions(model, [[0.5], [1.5]], count=3, seed=9)
        b = sample_posterior_functions(model, [[0.5], [1.5]], count=3, seed=9)
        assert np.array_equal(a, b)

    def test_degenerate_covariance_returns_mean(self):
        X = [[0.0], [1.0]]
        y = [1.0, 2.0]
        model = fit(X, y, HP)  # noiseless
        draws = sample_posterior_functions(model, X, count=4, seed=1)
        assert np.max(np.abs(draws - np.asarray(y)[None, :])) < 1e-3

    def test_count_validated(self):
        model = fit([[0.0]], [1.0], HP)
        with pytest.raises(GpError):
            sample_posterior_functions(model, [[0.0]], count=0, seed=0)


class TestStandardization:
    def test_matches_manual_standardization(self):
        rng = np.random.default_rng(29)
        X = rng.normal(size=(15, 2))
        y = rng.normal(size=15) * 10 + 40
        hp = Hyperparams(lengthscale=1.0, signal_var=1.0, noise_var=0.05)
        model = fit(X, y, hp, standardize=True)
        Xs = rng.normal(size=(6, 2))
        pred = predict(model, Xs)
        shift, scale = float(np.mean(y)), float(np.std(y))
        mean_ref, cov_ref = dense_predict(X, (y - shift) / scale, hp, Xs)
        assert np.max(np.abs(pred.mean - (mean_ref * scale + shift))) < 1e-8
        assert np.max(np.abs(pred.cov - cov_ref * scale**2)) < 1e-6


class TestModelDump:
    def test_roundtrip(self, tmp_path):
        rng = np.random.default_rng(31)
        X = rng.normal(size=(8, 2))
        y = rng.normal(size=8)
        hp = Hyperparams(lengthscale=1.3, signal_var=0.8, noise_var=0.02)
        model = fit(X, y, hp)
        path = tmp_path / "model.json"
        dump_model(model, path)
        loaded = load_model(path, X, y)
        assert loaded.hp == hp
        assert np.allclose(loaded.L, model.L)

    def test_checksum_guards_data(self, tmp_path):
        rng = np.random.default_rng(37)
        X = rng.normal(size=(5, 1))
        y = rng.normal(size=5)
        model = fit(X, y, Hyperparams(1.0, 1.0, 0.1))
        path = tmp_path / "model.json"
        dump_model(model, path)
        with pytest.raises(GpError, match="checksum"):
            load_model(path, X, y + 1.0)
