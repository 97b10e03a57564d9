import numpy as np
import pytest

from ccbcut.embedding import solve_weighted_step
from ccbcut.errors import DegenerateWeightsError, DomainError, FormatError
from ccbcut.graph import balance_weights, build_graph
from ccbcut.irrq import (
    IrrqConfig,
    config_from_file,
    embedding_objective,
    estimate_active_pairs,
    initial_gamma_from_embedding,
    irrq_solve,
    reweight_edges,
    select_rank,
    shrink_epsilon,
    write_trace,
)
from helpers import (
    barbell,
    dense_laplacian,
    principal_angle,
    random_connected_graph,
)


class TestObjective:
    def test_constant_rows_give_zero(self):
        g = barbell()
        Y = np.ones((8, 2))
        assert embedding_objective(g, Y, 1.0) == 0.0

    def test_single_edge_hand_value(self):
        g = build_graph(2, [(0, 1, 2.0)])
        Y = np.array([[1.0], [0.0]])
        # ordered pairs: both orderings of the edge contribute 2 * 1
        assert embedding_objective(g, Y, 1.0) == pytest.approx(4.0)

    def test_tau2_is_twice_laplacian_trace(self):
        rng = np.random.default_rng(0)
        g = random_connected_graph(rng, 9)
        Y = rng.standard_normal((9, 2))
        expected = 2.0 * np.trace(Y.T @ dense_laplacian(g) @ Y)
        assert embedding_objective(g, Y, 2.0) == pytest.approx(expected, rel=1e-12)

    def test_domain(self):
        g = barbell()
        with pytest.raises(DomainError):
            embedding_objective(g, np.ones((8, 1)), 2.5)


class TestReweight:
    def test_tau2_gives_exact_ones(self):
        rng = np.random.default_rng(1)
        g = random_connected_graph(rng, 8)
        Y = rng.standard_normal((8, 2))
        gamma = reweight_edges(g, Y, 0.37, 2.0)
        assert (gamma == 1.0).all()

    def test_arithmetic(self):
        g = build_graph(2, [(0, 1, 1.0)])
        Y = np.array([[np.sqrt(3.0)], [0.0]])  # w * ||dy||^2 = 3
        gamma = reweight_edges(g, Y, 1.0, 1.0)
        assert gamma[0] == pytest.approx(0.5, rel=1e-14)  # (3 + 1)^(-1/2)

    def test_degenerate_raises(self):
        g = build_graph(2, [(0, 1, 1.0)])
        Y = np.zeros((2, 1))
        with pytest.raises(DegenerateWeightsError):
            reweight_edges(g, Y, 0.0, 1.0)

    def test_degenerate_clamp_warns(self):
        g = build_graph(2, [(0, 1, 1.0)])
        Y = np.zeros((2, 1))
        with pytest.warns(RuntimeWarning):
            gamma = reweight_edges(g, Y, 0.0, 1.0, clamp=True)
        assert np.isfinite(gamma).all()


class TestShrinkEpsilon:
    def test_constant_embedding_gives_zero(self):
        g = barbell()
        assert shrink_epsilon(g, np.ones((8, 1)), 1.0, 2) == 0.0

    def test_rank_beyond_list_gives_zero(self):
        g = build_graph(2, [(0, 1, 1.0)])
        Y = np.array([[1.0], [0.0]])
        assert shrink_epsilon(g, Y, 5.0, 50) == 0.0

    def test_sort_and_select(self):
        # path on 4 vertices with per-edge residuals 3, 2, 1
        g = build_graph(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)])
        Y = np.array([[0.0], [3.0], [5.0], [6.0]])
        # kappa = 1: the 2nd largest residual is 2, scaled by 1/n = 1/4
        assert shrink_epsilon(g, Y, 1.0, 1) == pytest.approx(2.0 / 4.0)
        # never increases epsilon
        assert shrink_epsilon(g, Y, 0.1, 1) == pytest.approx(0.1)

    def test_never_increases(self):
        rng = np.random.default_rng(2)
        g = random_connected_graph(rng, 10)
        Y = rng.standard_normal((10, 2))
        eps = 1.0
        for kappa in range(0, 20, 3):
            new = shrink_epsilon(g, Y, eps, kappa)
            assert new <= eps + 1e-15
            eps = new


class TestScheduleRank:
    def test_limits(self):
        assert select_rank(4, 1e-12, 9) == 4
        assert select_rank(4, 1 - 1e-12, 9) == 18

    def test_rounding_half_up(self):
        assert select_rank(4, 0.2, 9) == 7  # 4 + 0.2 * 14 = 6.8

    def test_domain(self):
        with pytest.raises(DomainError):
            select_rank(4, 0.0, 9)


class TestActivePairs:
    def test_separated_clusters_count_bridges(self):
        g = barbell()
        w = balance_weights(g, "normalized")
        Y, _, _ = solve_weighted_step(g, None, 2, w)
        assert estimate_active_pairs(g, Y, 2) == 2  # one bridge, both orderings

    def test_k1_is_zero(self):
        g = barbell()
        assert estimate_active_pairs(g, np.ones((8, 1)), 1) == 0

    def test_identical_rows_deterministic(self):
        g = barbell()
        Y = np.ones((8, 2))
        first = estimate_active_pairs(g, Y, 2, seed=3)
        assert first == estimate_active_pairs(g, Y, 2, seed=3)
        assert first % 2 == 0


class TestIrrqSolve:
    def test_tau2_matches_spectral_relaxation(self):
        rng = np.random.default_rng(3)
        for _ in range(5):
            n = int(rng.integers(6, 41))
            g = random_connected_graph(rng, n, extra_p=0.2)
            w = balance_weights(g, "normalized")
            k = int(rng.integers(1, 4))
            res = irrq_solve(g, IrrqConfig(tau=2.0, k=k), w)
            S = np.diag(w.pi ** -0.5) @ dense_laplacian(g) @ np.diag(w.pi ** -0.5)
            _, vecs = np.linalg.eigh(S)
            oracle = np.diag(w.pi ** -0.5) @ vecs[:, 1:k + 1]
            assert principal_angle(res.embedding, oracle) < 1e-6

    def test_tau2_keeps_unit_gamma_and_stops_quickly(self):
        g = barbell()
        w = balance_weights(g, "normalized")
        res = irrq_solve(g, IrrqConfig(tau=2.0, k=1), w)
        assert res.iterations == 2
        assert res.stop_reason == "cost"
        assert res.trace[0].objective == pytest.approx(res.trace[1].objective, rel=1e-12)

    def test_barbell_tau1_piecewise_flat(self):
        g = barbell()
        w = balance_weights(g, "normalized")
        res = irrq_solve(g, IrrqConfig(tau=1.0, k=1), w)
        y = res.embedding[:, 0]
        gap = abs(y[:4].mean() - y[4:].mean())
        assert max(y[:4].var(), y[4:].var()) < 1e-3 * gap

    def test_objective_never_ends_above_start(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            n = int(rng.integers(6, 20))
            g = random_connected_graph(rng, n)
            w = balance_weights(g, "normalized" if rng.random() < 0.5 else "ratio")
            tau = float(rng.choice([0.5, 1.0, 1.5]))
            res = irrq_solve(g, IrrqConfig(tau=tau, k=2), w)
            # the returned embedding never scores above the unit-weight start
            assert res.objective <= res.trace[0].objective + 1e-9
            assert res.objective == pytest.approx(
                embedding_objective(g, res.embedding, tau), rel=1e-12)

    def test_epsilon_trace_nonincreasing_nonnegative(self):
        g = barbell()
        w = balance_weights(g, "normalized")
        res = irrq_solve(g, IrrqConfig(tau=0.5, k=2), w)
        eps = [rec.epsilon for rec in res.trace]
        assert all(e >= 0 for e in eps)
        assert all(b <= a + 1e-15 for a, b in zip(eps, eps[1:]))

    def test_every_iterate_satisfies_constraints(self):
        g = barbell()
        w = balance_weights(g, "normalized")
        seen = []

        def check(Y):
            piY = w.pi[:, None] * Y
            seen.append((np.abs(Y.T @ piY - np.eye(Y.shape[1])).max(),
                         np.abs(piY.sum(axis=0)).max()))

        irrq_solve(g, IrrqConfig(tau=1.0, k=2), w, on_iterate=check)
        assert seen
        for gram_err, bal_err in seen:
            assert gram_err < 1e-8 and bal_err < 1e-8

    def test_reweighting_invariant_under_rotation(self):
        rng = np.random.default_rng(5)
        g = random_connected_graph(rng, 12)
        Y = rng.standard_normal((12, 3))
        Q = np.linalg.qr(rng.standard_normal((3, 3)))[0]
        assert shrink_epsilon(g, Y @ Q, 1.0, 4) == pytest.approx(
            shrink_epsilon(g, Y, 1.0, 4), rel=1e-12)
        assert np.allclose(reweight_edges(g, Y @ Q, 0.3, 1.0),
                           reweight_edges(g, Y, 0.3, 1.0), rtol=1e-12)

    def test_supplied_initial_weights_reproduce_default_run(self):
        g = barbell()
        w = balance_weights(g, "normalized")
        cfg = IrrqConfig(tau=1.0, k=1)
        default = irrq_solve(g, cfg, w)
        assert default.iterations >= 3  # needs a nontrivial run to compare

        Y1, _, _ = solve_weighted_step(g, None, cfg.k, w)  # the unit-gamma iterate
        eps1 = shrink_epsilon(g, Y1, 1.0, default.kappa)
        gamma0 = initial_gamma_from_embedding(g, Y1, cfg.tau, eps1)
        custom = irrq_solve(g, cfg, w, initial_gamma=gamma0,
                            initial_epsilon=eps1, kappa=default.kappa)
        # the custom run replays the default from its second iterate on
        assert custom.iterations == default.iterations - 1
        for rec_c, rec_d in zip(custom.trace, default.trace[1:]):
            assert rec_c.objective == pytest.approx(rec_d.objective, rel=1e-10)
            assert rec_c.epsilon == pytest.approx(rec_d.epsilon, rel=1e-10)
        assert np.allclose(custom.embedding, default.embedding, atol=1e-10)

    def test_ratio_formula_initial_weights(self):
        g = barbell()
        rng = np.random.default_rng(6)
        Y = rng.standard_normal((8, 2))
        gamma = initial_gamma_from_embedding(g, Y, 1.0, formula="ratio")
        assert (gamma > 0).all()

    def test_k_too_large_rejected(self):
        g = build_graph(2, [(0, 1, 1.0)])
        w = balance_weights(g, "ratio")
        with pytest.raises(DomainError):
            irrq_solve(g, IrrqConfig(tau=1.0, k=2), w)


class TestConfig:
    def test_validation(self):
        with pytest.raises(DomainError):
            IrrqConfig(tau=0.0)
        with pytest.raises(DomainError):
            IrrqConfig(tau=1.0, kappa_tilde=1.5)
        with pytest.raises(DomainError):
            IrrqConfig(tau=1.0, max_iters=0)

    def test_config_file(self, tmp_path):
        path = tmp_path / "solver.cfg"
        path.write_text("tau = 1.5\nk: 3\nmax_iters = 10  # short run\n")
        cfg = config_from_file(path)
        assert cfg.tau == 1.5 and cfg.k == 3 and cfg.max_iters == 10

    def test_config_file_overrides(self, tmp_path):
        path = tmp_path / "solver.cfg"
        path.write_text("tau = 1.5\n")
        cfg = config_from_file(path, tau=0.5)
        assert cfg.tau == 0.5

    def test_config_file_rejects_unknown_keys(self, tmp_path):
        path = tmp_path / "solver.cfg"
        path.write_text("bogus = 1\n")
        with pytest.raises(FormatError):
            config_from_file(path)


class TestTraceIO:
    def test_csv_format(self, tmp_path):
        g = barbell()
        w = balance_weights(g, "normalized")
        res = irrq_solve(g, IrrqConfig(tau=1.0, k=1), w)
        path = tmp_path / "trace.csv"
        write_trace(res.trace, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "iter,j_tau,epsilon,eig_iters"
        assert len(lines) == len(res.trace) + 1
