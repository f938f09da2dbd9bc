import numpy as np
import pytest

from avdkit.errors import ConstantFeatures, DegenerateData, DimMismatch
from avdkit.svm import SvmConfig, SvmModel, resolve_gamma, svm_predict, svm_train

from oracles import qp_decision_values, qp_svm_oracle

XOR_X = np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]])
XOR_Y = np.array([0, 0, 1, 1])


def random_blobs(rng, n, d=2, spread=1.0):
    n0 = n // 2
    n1 = n - n0
    X = np.vstack([
        rng.normal(loc=-1.0, scale=spread, size=(n0, d)),
        rng.normal(loc=+1.0, scale=spread, size=(n1, d)),
    ])
    y = np.concatenate([np.zeros(n0, dtype=int), np.ones(n1, dtype=int)])
    perm = rng.permutation(n)
    return X[perm], y[perm]


def kkt_audit(model: SvmModel, X, y01, C, tol):
    """Check stationarity on free support vectors and the equality constraint."""
    assert abs(float(np.sum(model.dual_coefs))) <= 1e-6
    eps = 1e-9
    for sv, coef in zip(model.support_vectors, model.dual_coefs):
        alpha = abs(coef)
        assert eps < alpha <= C + 1e-12
        if alpha < C - eps:  # strictly inside the box
            y_sv = 1.0 if coef > 0 else -1.0
            f = model.decision_value(sv)
            assert abs(y_sv * f - 1.0) <= tol, f"free SV violates KKT: y*f={y_sv * f}"
    del X, y01


class TestResolveGamma:
    def test_one_dim(self):
        assert resolve_gamma(np.array([[0.0], [2.0]])) == 1.0

    def test_two_dim(self):
        assert resolve_gamma(np.array([[0.0, 0.0], [2.0, 2.0]])) == 0.5

    def test_constant_rejected(self):
        with pytest.raises(ConstantFeatures):
            resolve_gamma(np.full((5, 3), 7.0))


class TestSvmTrain:
    def test_two_point_symmetry(self):
        X = np.array([[1.0], [-1.0]])
        y = np.array([1, 0])
        model = svm_train(X, y, SvmConfig(), seed=0)
        assert model.converged
        assert abs(model.decision_value(np.array([0.0]))) <= 1e-9
        assert model.decision_value(np.array([1.0])) > 0
        assert model.decision_value(np.array([-1.0])) < 0

    def test_xor_training_accuracy(self):
        model = svm_train(XOR_X, XOR_Y, SvmConfig(C=1.0), seed=0)
        assert np.array_equal(model.predict_labels(XOR_X), XOR_Y)

    def test_xor_agrees_with_qp_oracle(self):
        gamma = resolve_gamma(XOR_X)
        model = svm_train(XOR_X, XOR_Y, SvmConfig(C=1.0), seed=0)
        alpha, bias = qp_svm_oracle(XOR_X, XOR_Y, C=1.0, gamma=gamma)
        ours = np.array([model.decision_value(x) for x in XOR_X])
        ref = qp_decision_values(XOR_X, XOR_Y, alpha, bias, gamma, XOR_X)
        assert np.max(np.abs(ours - ref)) < 5e-3

    def test_labels_match_qp_oracle_on_probe_grid(self):
        rng = np.random.default_rng(77)
        C = 1.0
        for trial in range(20):
            n = int(rng.integers(6, 31))
            d = int(rng.integers(1, 4))
            X, y = random_blobs(rng, n, d, spread=1.2)
            gamma = resolve_gamma(X)
            model = svm_train(X, y, SvmConfig(C=C), seed=trial)
            alpha, bias = qp_svm_oracle(X, y, C=C, gamma=gamma)

            lo, hi = X.min(axis=0) - 0.5, X.max(axis=0) + 0.5
            probes = rng.uniform(lo, hi, size=(100, d))
            f_ref = qp_decision_values(X, y, alpha, bias, gamma, probes)
            f_ours = np.array([model.decision_value(p) for p in probes])
            confident = np.minimum(np.abs(f_ref), np.abs(f_ours)) >= 1e-3
            labels_ref = f_ref > 0
            labels_ours = f_ours > 0
            assert np.array_equal(labels_ref[confident], labels_ours[confident]), (
                f"trial {trial}: {np.sum(labels_ref[confident] != labels_ours[confident])} "
                f"confident disagreements"
            )

    def test_kkt_conditions_hold(self):
        rng = np.random.default_rng(31)
        for trial in range(10):
            n = int(rng.integers(10, 60))
            X, y = random_blobs(rng, n, d=3, spread=1.5)
            cfg = SvmConfig()
            model = svm_train(X, y, cfg, seed=trial)
            kkt_audit(model, X, y, C=cfg.C, tol=cfg.kkt_tol)

    def test_dual_feasibility(self):
        rng = np.random.default_rng(99)
        X, y = random_blobs(rng, 40, d=2)
        cfg = SvmConfig()
        model = svm_train(X, y, cfg, seed=0)
        alphas = np.abs(model.dual_coefs)
        assert np.all(alphas > cfg.numeric_eps)
        assert np.all(alphas <= cfg.C + 1e-12)
        assert abs(float(np.sum(model.dual_coefs))) <= 1e-6

    def test_deterministic_given_seed(self):
        rng = np.random.default_rng(15)
        X, y = random_blobs(rng, 30)
        a = svm_train(X, y, SvmConfig(), seed=4)
        b = svm_train(X, y, SvmConfig(), seed=4)
        assert np.array_equal(a.support_vectors, b.support_vectors)
        assert np.array_equal(a.dual_coefs, b.dual_coefs)
        assert a.bias == b.bias

    def test_single_class_rejected(self):
        with pytest.raises(DegenerateData):
            svm_train(np.zeros((6, 2)), np.zeros(6, dtype=int))

    def test_explicit_gamma_used(self):
        X = np.array([[1.0], [-1.0]])
        model = svm_train(X, np.array([1, 0]), SvmConfig(gamma=0.25), seed=0)
        assert model.gamma == 0.25


class TestSvmPredict:
    def test_empty_support_set_is_bias(self):
        model = SvmModel(support_vectors=np.zeros((0, 3)), dual_coefs=np.zeros(0),
                         bias=-0.7, gamma=1.0)
        pred = svm_predict(model, np.array([1.0, 2.0, 3.0]))
        assert pred.score == -0.7
        assert pred.label == 0

    def test_zero_decision_is_class_zero(self):
        X = np.array([[1.0], [-1.0]])
        model = svm_train(X, np.array([1, 0]), SvmConfig(), seed=0)
        pred = model.predict(np.array([0.0]))
        assert pred.label == 0

    def test_free_sv_sits_on_margin(self):
        rng = np.random.default_rng(50)
        X, y = random_blobs(rng, 30, d=2, spread=1.4)
        cfg = SvmConfig()
        model = svm_train(X, y, cfg, seed=1)
        free = np.abs(model.dual_coefs) < cfg.C - 1e-9
        assert free.any()
        for sv, coef in zip(model.support_vectors[free], model.dual_coefs[free]):
            y_sv = 1.0 if coef > 0 else -1.0
            assert abs(y_sv * model.decision_value(sv) - 1.0) <= cfg.kkt_tol

    def test_dim_mismatch(self):
        X = np.array([[1.0], [-1.0]])
        model = svm_train(X, np.array([1, 0]), SvmConfig(), seed=0)
        with pytest.raises(DimMismatch):
            model.predict(np.array([0.0, 1.0]))


class TestKernelCache:
    def test_tiny_cache_budget_same_model(self):
        rng = np.random.default_rng(42)
        X, y = random_blobs(rng, 25)
        big = svm_train(X, y, SvmConfig(kernel_cache_rows=512), seed=0)
        tiny = svm_train(X, y, SvmConfig(kernel_cache_rows=2), seed=0)
        assert np.array_equal(big.support_vectors, tiny.support_vectors)
        assert np.array_equal(big.dual_coefs, tiny.dual_coefs)
        assert big.bias == tiny.bias
