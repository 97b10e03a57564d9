import numpy as np
import pytest

from ccbcut.embedding import (
    apply_reduced_operator,
    eigensolve_smallest,
    make_eliminator,
    read_embedding,
    reduced_operator,
    scaled_laplacian_operator,
    solve_weighted_step,
    write_embedding,
)
from ccbcut.errors import (
    ConstraintViolationError,
    DimensionMismatchError,
    DomainError,
    EigensolverError,
)
from ccbcut.graph import BalanceWeights, balance_weights
from ccbcut.irrq import embedding_objective
from helpers import (
    barbell,
    dense_elimination_isometry,
    dense_laplacian,
    dense_reduced_operator,
    p3,
    principal_angle,
    random_connected_graph,
)


def _weights(pi):
    pi = np.asarray(pi, dtype=np.float64)
    return BalanceWeights(mode="custom", pi=pi)


def _random_orthonormal(rng, rows, cols):
    return np.linalg.qr(rng.standard_normal((rows, cols)))[0][:, :cols]


class TestEliminator:
    def test_uniform_weights(self):
        e = make_eliminator(_weights(np.ones(4)))
        assert np.allclose(e.q, 0.5)

    def test_weighted(self):
        e = make_eliminator(_weights([1.0, 2.0, 1.0]))
        assert np.allclose(e.q, np.array([1.0, np.sqrt(2.0), 1.0]) / 2.0)

    def test_unit_norm(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            pi = rng.uniform(0.1, 5.0, size=int(rng.integers(2, 20)))
            e = make_eliminator(_weights(pi))
            assert abs(np.linalg.norm(e.q) - 1.0) < 1e-14
            assert (e.q > 0).all()

    def test_nonpositive_rejected(self):
        with pytest.raises(DomainError):
            make_eliminator(_weights([1.0, 0.0, 2.0]))


class TestExpandReduce:
    def test_expand_satisfies_constraints(self):
        rng = np.random.default_rng(1)
        for _ in range(25):
            n = int(rng.integers(3, 25))
            k = int(rng.integers(1, min(4, n - 1) + 1))
            pi = rng.uniform(0.1, 3.0, size=n)
            e = make_eliminator(_weights(pi))
            Y = e.expand(_random_orthonormal(rng, n - 1, k))
            piY = pi[:, None] * Y
            assert np.abs(Y.T @ piY - np.eye(k)).max() < 1e-10
            assert np.abs(piY.sum(axis=0)).max() < 1e-10

    def test_expand_matches_dense_isometry(self):
        rng = np.random.default_rng(2)
        for _ in range(15):
            n = int(rng.integers(3, 11))
            pi = rng.uniform(0.2, 4.0, size=n)
            _, B = dense_elimination_isometry(pi)
            e = make_eliminator(_weights(pi))
            G = _random_orthonormal(rng, n - 1, 2)
            expected = np.diag(pi ** -0.5) @ B @ G
            assert np.abs(e.expand(G) - expected).max() < 1e-10

    def test_round_trip_from_factor(self):
        rng = np.random.default_rng(3)
        for _ in range(25):
            n = int(rng.integers(3, 25))
            pi = rng.uniform(0.1, 3.0, size=n)
            e = make_eliminator(_weights(pi))
            G = _random_orthonormal(rng, n - 1, 2)
            back = e.reduce(e.expand(G))
            assert np.abs(back - G).max() < 1e-10

    def test_round_trip_from_embedding(self):
        # Gram-Schmidt in the pi inner product, orthogonal to the ones vector
        rng = np.random.default_rng(4)
        for _ in range(25):
            n = int(rng.integers(4, 20))
            k = 2
            pi = rng.uniform(0.1, 3.0, size=n)
            Y = rng.standard_normal((n, k))
            ones = np.ones(n)
            for c in range(k):
                y = Y[:, c]
                y = y - (pi @ y) / (pi @ ones) * ones
                for prev in range(c):
                    y = y - (pi * Y[:, prev]) @ y * Y[:, prev]
                Y[:, c] = y / np.sqrt(pi @ (y * y))
            e = make_eliminator(_weights(pi))
            assert np.abs(e.expand(e.reduce(Y)) - Y).max() < 1e-10

    def test_reduce_output_is_orthonormal(self):
        rng = np.random.default_rng(5)
        pi = rng.uniform(0.5, 2.0, size=9)
        e = make_eliminator(_weights(pi))
        G = e.reduce(e.expand(_random_orthonormal(rng, 8, 3)))
        assert np.abs(G.T @ G - np.eye(3)).max() < 1e-10

    def test_non_orthonormal_factor_rejected(self):
        e = make_eliminator(_weights(np.ones(5)))
        with pytest.raises(ConstraintViolationError):
            e.expand(np.ones((4, 2)))

    def test_constraint_violating_embedding_rejected(self):
        e = make_eliminator(_weights(np.ones(5)))
        with pytest.raises(ConstraintViolationError):
            e.reduce(np.ones((5, 1)))


class TestReducedOperator:
    def test_matches_dense_oracle(self):
        rng = np.random.default_rng(6)
        for _ in range(50):
            n = int(rng.integers(3, 51))
            g = random_connected_graph(rng, n, extra_p=0.2)
            pi = rng.uniform(0.2, 3.0, size=n)
            gamma = rng.uniform(0.1, 2.0, size=g.num_edges) if rng.random() < 0.5 else None
            e = make_eliminator(_weights(pi))
            dense = dense_reduced_operator(g, pi, gamma)
            x = rng.standard_normal(n - 1)
            got = apply_reduced_operator(e, g, gamma, x)
            assert np.abs(got - dense @ x).max() < 1e-10

    def test_zero_maps_to_zero(self):
        g = p3()
        e = make_eliminator(_weights(np.ones(3)))
        assert np.allclose(apply_reduced_operator(e, g, None, np.zeros(2)), 0.0)

    def test_symmetry_and_psd(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            n = int(rng.integers(3, 30))
            g = random_connected_graph(rng, n)
            pi = rng.uniform(0.2, 3.0, size=n)
            e = make_eliminator(_weights(pi))
            op = reduced_operator(e, g)
            x = rng.standard_normal(n - 1)
            y = rng.standard_normal(n - 1)
            assert x @ op.apply(y) == pytest.approx(op.apply(x) @ y, rel=1e-10, abs=1e-10)
            assert x @ op.apply(x) >= -1e-12

    def test_dimension_mismatch(self):
        g = p3()
        e = make_eliminator(_weights(np.ones(3)))
        with pytest.raises(DimensionMismatchError):
            apply_reduced_operator(e, g, None, np.zeros(3))

    def test_matrix_input(self):
        rng = np.random.default_rng(8)
        g = random_connected_graph(rng, 12)
        pi = rng.uniform(0.5, 2.0, size=12)
        e = make_eliminator(_weights(pi))
        X = rng.standard_normal((11, 3))
        cols = np.column_stack([apply_reduced_operator(e, g, None, X[:, c])
                                for c in range(3)])
        assert np.abs(apply_reduced_operator(e, g, None, X) - cols).max() < 1e-12


class TestEigensolve:
    def test_p3_reduced_spectrum(self):
        g = p3()
        e = make_eliminator(_weights(np.ones(3)))
        vals, vecs, _ = eigensolve_smallest(reduced_operator(e, g), 2)
        assert np.allclose(vals, [1.0, 3.0], atol=1e-10)

    def test_k1_rayleigh_quotient(self):
        rng = np.random.default_rng(9)
        g = random_connected_graph(rng, 15)
        e = make_eliminator(_weights(np.ones(15)))
        op = reduced_operator(e, g)
        vals, vecs, _ = eigensolve_smallest(op, 1)
        u = vecs[:, 0]
        assert u @ op.apply(u) == pytest.approx(vals[0], rel=1e-8)

    def test_matches_dense_eigh_n30(self):
        rng = np.random.default_rng(10)
        g = random_connected_graph(rng, 31)
        pi = rng.uniform(0.3, 2.0, size=31)
        e = make_eliminator(_weights(pi))
        vals, vecs, _ = eigensolve_smallest(reduced_operator(e, g), 4)
        ref = np.linalg.eigvalsh(dense_reduced_operator(g, pi))
        assert np.abs(vals - ref[:4]).max() < 1e-8

    def test_vectors_orthonormal_values_sorted(self):
        rng = np.random.default_rng(11)
        g = random_connected_graph(rng, 25)
        e = make_eliminator(_weights(np.ones(25)))
        vals, vecs, _ = eigensolve_smallest(reduced_operator(e, g), 5)
        assert np.abs(vecs.T @ vecs - np.eye(5)).max() < 1e-8
        assert (np.diff(vals) >= -1e-12).all()

    def test_iterative_path_matches_dense(self):
        rng = np.random.default_rng(12)
        g = random_connected_graph(rng, 60, extra_p=0.1)
        pi = rng.uniform(0.5, 2.0, size=60)
        e = make_eliminator(_weights(pi))
        op = scaled_laplacian_operator(e, g)
        vals, vecs, _ = eigensolve_smallest(op, 3, dense_cutoff=10, maxiter=2000)
        ref = np.linalg.eigvalsh(dense_reduced_operator(g, pi))
        assert np.abs(vals - ref[:3]).max() < 1e-7

    def test_nonconvergence_raises(self):
        rng = np.random.default_rng(13)
        g = random_connected_graph(rng, 80, extra_p=0.05)
        e = make_eliminator(_weights(np.ones(80)))
        op = scaled_laplacian_operator(e, g)
        with pytest.raises(EigensolverError):
            eigensolve_smallest(op, 3, tol=1e-12, maxiter=1, dense_cutoff=10,
                                dense_rescue_limit=0)

    def test_k_domain(self):
        g = p3()
        e = make_eliminator(_weights(np.ones(3)))
        with pytest.raises(DomainError):
            eigensolve_smallest(reduced_operator(e, g), 3)

    def test_sign_convention(self):
        g = barbell()
        e = make_eliminator(_weights(np.ones(8)))
        _, vecs, _ = eigensolve_smallest(reduced_operator(e, g), 2)
        for c in range(2):
            assert vecs[np.abs(vecs[:, c]).argmax(), c] > 0


class TestSolveWeightedStep:
    def test_barbell_sign_pattern_separates_clusters(self):
        g = barbell()
        w = balance_weights(g, "normalized")
        Y, vals, _ = solve_weighted_step(g, None, 1, w)
        signs = np.sign(Y[:, 0])
        assert np.all(signs[:4] == signs[0])
        assert np.all(signs[4:] == -signs[0])
        # dense oracle: smallest nontrivial eigenvector of the scaled Laplacian
        S = np.diag(w.pi ** -0.5) @ dense_laplacian(g) @ np.diag(w.pi ** -0.5)
        dvals, dvecs = np.linalg.eigh(S)
        oracle = np.diag(w.pi ** -0.5) @ dvecs[:, 1:2]
        assert principal_angle(Y, oracle) < 1e-8
        assert vals[0] == pytest.approx(dvals[1], rel=1e-8)

    def test_trace_identity(self):
        rng = np.random.default_rng(14)
        g = random_connected_graph(rng, 12)
        w = balance_weights(g, "normalized")
        gamma = rng.uniform(0.2, 2.0, size=g.num_edges)
        Y, vals, _ = solve_weighted_step(g, gamma, 3, w)
        e = make_eliminator(w)
        U = e.reduce(Y)
        quad = np.trace(U.T @ apply_reduced_operator(e, g, gamma, U))
        assert quad == pytest.approx(vals.sum(), rel=1e-10)

    def test_unit_gamma_objective_equals_plain_quadratic(self):
        rng = np.random.default_rng(15)
        g = random_connected_graph(rng, 10)
        w = balance_weights(g, "normalized")
        Y, vals, _ = solve_weighted_step(g, None, 2, w)
        # the weighted objective at gamma = 1 is the plain tau = 2 objective
        assert embedding_objective(g, Y, 2.0) == pytest.approx(2 * vals.sum(), rel=1e-9)

    def test_no_trivial_eigenvalue_for_connected_graphs(self):
        rng = np.random.default_rng(16)
        for _ in range(10):
            n = int(rng.integers(4, 30))
            g = random_connected_graph(rng, n)
            w = balance_weights(g, "normalized")
            _, vals, _ = solve_weighted_step(g, None, min(3, n - 1), w)
            assert vals[0] > 1e-8 * vals[-1]

    def test_large_path_uses_iterative_route(self):
        from helpers import path_graph

        g = path_graph(300)
        w = balance_weights(g, "ratio")
        Y, vals, iters = solve_weighted_step(g, None, 2, w, dense_cutoff=200)
        assert iters > 0  # iterative route engaged
        dense = np.linalg.eigvalsh(dense_laplacian(g))
        assert np.abs(vals - dense[1:3]).max() < 1e-7
        piY = w.pi[:, None] * Y
        assert np.abs(Y.T @ piY - np.eye(2)).max() < 1e-8


class TestEmbeddingIO:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(17)
        Y = rng.standard_normal((6, 2))
        path = tmp_path / "emb.csv"
        write_embedding(Y, path, 2, 1.0, "normalized")
        back, k, tau, mode = read_embedding(path)
        assert k == 2 and tau == 1.0 and mode == "normalized"
        assert np.abs(back - Y).max() == 0.0
        assert path.read_text().splitlines()[0] == "2 1 normalized"
