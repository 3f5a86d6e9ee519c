import numpy as np
import pytest
import scipy.sparse as sp

from datasets.vectorizer import COUNTS, TFIDF, DocTermMatrix
from graphs.labeler import ConstraintMatrix
from models.tsnmf import (SolverConfig, fit, fit_nmf, init_factors, objective, read_factorization,
                          write_factorization)


def as_matrix(dense, kind=TFIDF):
    return DocTermMatrix(entries=sp.csr_matrix(np.asarray(dense, dtype=np.float64)), kind=kind)


def all_ones(n, k):
    return ConstraintMatrix(entries=np.ones((n, k)), labeled_mask=np.zeros(n, dtype=bool))


def random_instance(seed, n=30, w=25, k=4, density=0.3):
    rng = np.random.default_rng(seed)
    X = sp.random(n, w, density=density, random_state=seed, format='csr')
    L = np.ones((n, k))
    mask = rng.random(n) < 0.5
    for i in np.flatnonzero(mask):
        L[i] = 0
        L[i, rng.choice(k, size=rng.integers(1, k), replace=False)] = 1
    return DocTermMatrix(entries=X, kind=TFIDF), ConstraintMatrix(entries=L, labeled_mask=mask)


class TestSolverConfig:
    def test_defaults(self):
        config = SolverConfig()
        assert (config.k, config.max_iter, config.tol, config.epsilon) == (80, 200, 1e-4, 1e-12)

    @pytest.mark.parametrize('kwargs', [{'k': 0}, {'tol': 0}, {'epsilon': -1.0}, {'max_iter': 0}])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            SolverConfig(**kwargs)


class TestInitFactors:
    def test_mask_applied(self):
        X, L = random_instance(0)
        W0, H0 = init_factors(X, L, SolverConfig(k=4))
        assert np.all(W0[L.entries == 0] == 0)
        assert np.all(W0[L.entries == 1] > 0)
        assert H0.shape == (4, X.w) and np.all(H0 >= 0)

    def test_seeded(self):
        X, L = random_instance(0)
        a = init_factors(X, L, SolverConfig(k=4, seed=3))
        b = init_factors(X, L, SolverConfig(k=4, seed=3))
        c = init_factors(X, L, SolverConfig(k=4, seed=4))
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])
        assert not np.array_equal(a[1], c[1])

    def test_scale(self):
        X, L = random_instance(1)
        W0, H0 = init_factors(X, L, SolverConfig(k=4))
        bound = np.sqrt(X.entries.sum() / (X.n * X.w) / 4)
        assert W0.max() < bound and H0.max() < bound

    def test_zero_data(self):
        X = as_matrix(np.zeros((3, 2)))
        W0, H0 = init_factors(X, all_ones(3, 2), SolverConfig(k=2))
        assert not W0.any() and not H0.any()


class TestObjective:
    def test_zero_reconstruction(self):
        X = as_matrix([[3.0, 0.0], [0.0, 4.0]])
        assert objective(X, np.zeros((2, 2)), all_ones(2, 2), np.ones((2, 2))) == pytest.approx(5.0)

    def test_masked_product(self):
        X = as_matrix(np.eye(2))
        L = all_ones(2, 2)
        assert objective(X, np.eye(2), L, np.eye(2)) == 0.0
        L.entries[0, 0] = 0
        assert objective(X, np.eye(2), L, np.eye(2)) == pytest.approx(1.0, abs=1e-12)

    def test_exact_factorization(self):
        rng = np.random.default_rng(0)
        W, H = rng.random((5, 2)), rng.random((2, 4))
        assert objective(as_matrix(W @ H), W, all_ones(5, 2), H) == pytest.approx(0.0, abs=1e-12)

    def test_dimension_mismatch(self):
        X = as_matrix(np.eye(2))
        with pytest.raises(ValueError, match='dimension'):
            objective(X, np.ones((3, 2)), all_ones(2, 2), np.ones((2, 2)))


class TestFit:
    @pytest.mark.parametrize('seed', range(50))
    def test_invariants_every_iteration(self, seed):
        X, L = random_instance(seed, k=int(2 + seed % 5))
        config = SolverConfig(k=L.k, max_iter=60, tol=1e-9, seed=seed)
        zeros = L.entries == 0
        seen = []

        def check(it, W, H):
            assert W.min() >= 0 and H.min() >= 0
            assert np.all(W[zeros] == 0)
            seen.append(it)

        fact = fit(X, L, config, callback=check)
        assert seen == list(range(1, fact.iterations_run + 1))
        trace = fact.objective_trace
        assert all(b <= a * (1 + 1e-10) for a, b in zip(trace, trace[1:]))
        assert len(trace) == fact.iterations_run
        assert fact.final_objective == pytest.approx(objective(X, fact.W, L, fact.H), rel=1e-9)

    @pytest.mark.parametrize('seed', range(10))
    def test_all_ones_mask_matches_plain_nmf(self, seed):
        X, _ = random_instance(100 + seed, n=40, w=30, k=5)
        L = all_ones(X.n, 5)
        config = SolverConfig(k=5, max_iter=50, tol=1e-300, seed=seed)
        init = init_factors(X, L, config)
        masked = fit(X, L, config, init=init)
        plain = fit_nmf(X, config, init=init)
        assert masked.iterations_run == plain.iterations_run == 50
        assert np.array_equal(masked.W, plain.W)
        assert np.array_equal(masked.H, plain.H)
        assert masked.objective_trace == plain.objective_trace

    def test_recovers_separable_low_rank(self):
        # one component per document; L marks the true component
        recovered = 0
        for seed in range(10):
            rng = np.random.default_rng(seed)
            component = rng.permutation(np.arange(100) % 5)
            W_true = np.zeros((100, 5))
            W_true[np.arange(100), component] = rng.uniform(0.5, 1.5, size=100)
            H_true = rng.random((5, 150))
            X = as_matrix(W_true @ H_true)
            L = ConstraintMatrix(entries=(W_true > 0).astype(np.float64), labeled_mask=np.ones(100, dtype=bool))
            fact = fit(X, L, SolverConfig(k=5, max_iter=200, tol=1e-12, seed=seed))
            norm = np.linalg.norm(X.entries.toarray())
            recovered += fact.final_objective < 1e-3 * norm
        assert recovered >= 9

    def test_plain_updates_approach_dense_low_rank(self):
        close = 0
        for seed in range(10):
            rng = np.random.default_rng(seed)
            W_true, H_true = rng.random((100, 5)), rng.random((5, 150))
            X = as_matrix(W_true @ H_true)
            fact = fit(X, all_ones(100, 5), SolverConfig(k=5, max_iter=200, tol=1e-12, seed=seed))
            norm = np.linalg.norm(X.entries.toarray())
            close += fact.final_objective < 0.05 * norm
        assert close >= 9

    def test_deterministic(self):
        X, L = random_instance(5)
        config = SolverConfig(k=L.k, max_iter=30, seed=9)
        a, b = fit(X, L, config), fit(X, L, config)
        assert np.array_equal(a.W, b.W) and np.array_equal(a.H, b.H)
        assert a.objective_trace == b.objective_trace

    def test_scale_covariance(self):
        X, L = random_instance(6)
        config = SolverConfig(k=L.k, max_iter=40, tol=1e-300, epsilon=1e-30, seed=2)
        base = fit(X, L, config)
        scaled = fit(DocTermMatrix(entries=X.entries * 4.0, kind=X.kind), L, config)
        np.testing.assert_allclose(scaled.objective_trace, 4.0 * np.array(base.objective_trace), rtol=1e-9)

    def test_converged_flag(self):
        X, L = random_instance(7)
        fact = fit(X, L, SolverConfig(k=L.k, max_iter=500, tol=1e-3))
        assert fact.converged and fact.iterations_run < 500
        capped = fit(X, L, SolverConfig(k=L.k, max_iter=3, tol=1e-300))
        assert not capped.converged and capped.iterations_run == 3

    def test_zero_data(self):
        X = as_matrix(np.zeros((4, 3)), kind=COUNTS)
        fact = fit(X, all_ones(4, 2), SolverConfig(k=2, max_iter=5))
        assert not fact.W.any() and fact.final_objective == 0.0
        assert fact.converged

    def test_non_finite(self):
        X, L = random_instance(8, k=3)
        W0, H0 = init_factors(X, L, SolverConfig(k=3))
        W0[L.entries == 1] = np.inf
        with pytest.raises(FloatingPointError, match='iteration 1'):
            fit(X, L, SolverConfig(k=3, max_iter=5), init=(W0, H0))

    def test_constraint_shape(self):
        X, _ = random_instance(9)
        with pytest.raises(ValueError):
            fit(X, all_ones(X.n, 3), SolverConfig(k=4))

    def test_write_read(self, tmp_path):
        X, L = random_instance(10)
        fact = fit(X, L, SolverConfig(k=L.k, max_iter=10))
        write_factorization(fact, str(tmp_path), 'supervised')
        assert (tmp_path / 'W_supervised.mtx').read_text().split('\n', 1)[0].split()[:2] == [str(X.n), str(L.k)]
        back = read_factorization(str(tmp_path), 'supervised')
        np.testing.assert_array_equal(back.W, fact.W)
        np.testing.assert_array_equal(back.H, fact.H)
        assert back.objective_trace == fact.objective_trace
        assert (back.iterations_run, back.converged) == (fact.iterations_run, fact.converged)
