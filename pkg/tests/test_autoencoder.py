"""Autoencoder forward passes, loss, analytic gradients, and training.

The gradient checks compare the analytic formulas against central finite
differences entry by entry; the acceptance suite repeats this at larger
scale.  Loss identities used below:

  * Z = 0 makes every logit 0, and with the class-balanced weights the
    total loss collapses to exactly ln 2
  * W = 0 is a stationary point for both encoders
"""

import numpy as np
import pytest
import scipy.sparse as sp

from bihop.autoencoder import (
    EmbeddingModel,
    LossWeights,
    ModelKind,
    TrainConfig,
    TrainingDivergedError,
    decode_pair,
    decode_pairs,
    forward,
    gae_forward,
    init_weights,
    lgae_forward,
    load_model,
    loss_gradient,
    loss_weights,
    reconstruction_loss,
    save_model,
    train,
    training_labels,
)
from bihop.graph import adjacency, normalized_adjacency

from conftest import random_bipartite


def problem_instance(rng, kind: ModelKind, max_side=5, embed_dim=3, hidden_dim=4):
    while True:
        g = random_bipartite(rng, max_side=max_side)
        if 2 * g.m + g.n < g.n * g.n:  # complete graphs make the loss degenerate
            break
    norm = normalized_adjacency(g)
    labels = training_labels(adjacency(g))
    lw = loss_weights(g.n, int(labels.nnz))
    cfg = TrainConfig(
        model_kind=kind,
        embed_dim=embed_dim,
        hidden_dim=hidden_dim,
        seed=int(rng.integers(2**31)),
    )
    weights = init_weights(cfg, g.n)
    return norm, labels, lw, weights


def fd_gradient(weights, norm, labels, lw, h=1e-5):
    """Central finite differences of the loss in every weight entry."""
    grads = []
    for k, w in enumerate(weights):
        grad = np.zeros_like(w)
        for idx in np.ndindex(*w.shape):
            bumped = [x.copy() for x in weights]
            bumped[k][idx] = w[idx] + h
            hi = reconstruction_loss(forward(tuple(bumped), norm), labels, lw)
            bumped[k][idx] = w[idx] - h
            lo = reconstruction_loss(forward(tuple(bumped), norm), labels, lw)
            grad[idx] = (hi - lo) / (2.0 * h)
        grads.append(grad)
    return tuple(grads)


class TestForward:
    def test_lgae_matches_dense(self):
        rng = np.random.default_rng(30)
        g = random_bipartite(rng)
        norm = normalized_adjacency(g)
        w = rng.standard_normal((g.n, 3))
        got = lgae_forward(norm, w)
        assert np.allclose(got, norm.matrix.toarray() @ w, rtol=0, atol=1e-14)

    def test_lgae_zero_weights(self):
        rng = np.random.default_rng(31)
        g = random_bipartite(rng)
        norm = normalized_adjacency(g)
        assert not lgae_forward(norm, np.zeros((g.n, 2))).any()

    def test_gae_matches_dense(self):
        rng = np.random.default_rng(32)
        g = random_bipartite(rng)
        norm = normalized_adjacency(g)
        w0 = rng.standard_normal((g.n, 4))
        w1 = rng.standard_normal((4, 2))
        an = norm.matrix.toarray()
        want = an @ np.maximum(an @ w0, 0.0) @ w1
        assert np.allclose(gae_forward(norm, w0, w1), want, rtol=0, atol=1e-13)

    def test_gae_negative_hidden_collapses(self):
        """An all-negative first layer dies under relu, so Z = 0."""
        rng = np.random.default_rng(33)
        g = random_bipartite(rng)
        norm = normalized_adjacency(g)
        w0 = -np.ones((g.n, 3))
        w1 = rng.standard_normal((3, 2))
        assert not gae_forward(norm, w0, w1).any()

    def test_dispatch_rejects_three_matrices(self):
        g = random_bipartite(np.random.default_rng(34))
        norm = normalized_adjacency(g)
        with pytest.raises(ValueError):
            forward((np.eye(g.n),) * 3, norm)


class TestDecode:
    def test_zero_embedding_gives_half(self):
        z = np.zeros((4, 3))
        assert decode_pair(z, 0, 2) == 0.5

    def test_log3_norm_gives_three_quarters(self):
        z = np.full((2, 1), np.sqrt(np.log(3.0)))
        assert decode_pair(z, 0, 1) == pytest.approx(0.75, abs=1e-12)

    def test_symmetry(self):
        rng = np.random.default_rng(35)
        z = rng.standard_normal((6, 4))
        for i in range(6):
            for j in range(6):
                assert decode_pair(z, i, j) == decode_pair(z, j, i)

    def test_decode_pairs_matches_scalar(self):
        rng = np.random.default_rng(36)
        z = rng.standard_normal((8, 3))
        us = rng.integers(0, 8, size=20)
        vs = rng.integers(0, 8, size=20)
        got = decode_pairs(z, us, vs)
        want = [decode_pair(z, int(u), int(v)) for u, v in zip(us, vs)]
        assert np.allclose(got, want, rtol=0, atol=1e-15)


class TestLossWeights:
    def test_worked_example(self):
        lw = loss_weights(3, 5)
        assert lw.pos_weight == 0.8
        assert lw.norm == 1.125

    def test_balanced_labels(self):
        lw = loss_weights(4, 8)
        assert lw.pos_weight == 1.0
        assert lw.norm == 1.0

    def test_degenerate_counts_rejected(self):
        with pytest.raises(ValueError):
            loss_weights(3, 0)
        with pytest.raises(ValueError):
            loss_weights(3, 9)


class TestTrainingLabels:
    def test_structure(self):
        rng = np.random.default_rng(37)
        g = random_bipartite(rng)
        labels = training_labels(adjacency(g))
        dense = labels.toarray()
        assert np.array_equal(dense, dense.T)
        assert np.all(np.diag(dense) == 1.0)
        assert labels.nnz == 2 * g.m + g.n


class TestReconstructionLoss:
    def test_zero_embedding_is_ln2(self):
        """With the balancing weights, the all-zero embedding always costs
        exactly ln 2 regardless of the graph."""
        rng = np.random.default_rng(38)
        for _ in range(10):
            g = random_bipartite(rng)
            labels = training_labels(adjacency(g))
            lw = loss_weights(g.n, int(labels.nnz))
            loss = reconstruction_loss(np.zeros((g.n, 3)), labels, lw)
            assert loss == pytest.approx(np.log(2.0), abs=1e-12)

    def test_matches_double_loop_oracle(self):
        rng = np.random.default_rng(39)
        for _ in range(10):
            g = random_bipartite(rng, max_side=5)
            if 2 * g.m + g.n == g.n * g.n:
                continue
            labels = training_labels(adjacency(g))
            lw = loss_weights(g.n, int(labels.nnz))
            z = rng.standard_normal((g.n, 3))
            dense = labels.toarray()
            total = 0.0
            for i in range(g.n):
                for j in range(g.n):
                    theta = float(z[i] @ z[j])
                    y = dense[i, j]
                    total += lw.pos_weight * y * np.logaddexp(0.0, -theta)
                    total += (1.0 - y) * np.logaddexp(0.0, theta)
            want = lw.norm * total / (g.n * g.n)
            got = reconstruction_loss(z, labels, lw)
            assert got == pytest.approx(want, rel=1e-12)

    def test_block_streaming_matches_dense(self):
        rng = np.random.default_rng(40)
        g = random_bipartite(rng, max_side=8)
        labels = training_labels(adjacency(g))
        lw = loss_weights(g.n, int(labels.nnz))
        z = rng.standard_normal((g.n, 4))
        dense = reconstruction_loss(z, labels, lw, block_rows=None)
        for block in (1, 2, 3, g.n):
            blocked = reconstruction_loss(z, labels, lw, block_rows=block)
            assert blocked == pytest.approx(dense, rel=1e-12)

    def test_confident_correct_reconstruction_drives_loss_down(self):
        g = random_bipartite(np.random.default_rng(41), max_side=4)
        labels = training_labels(adjacency(g))
        lw = loss_weights(g.n, int(labels.nnz))
        # embed each node so that z_i . z_j is a large positive logit
        # exactly on label support and large negative elsewhere
        dense = np.asarray(labels.todense())
        sign = 2.0 * dense - 1.0
        # use an eigen factorization of the signed matrix scaled up
        vals, vecs = np.linalg.eigh(20.0 * sign)
        # shift spectrum to be representable: synthesize logits directly
        theta = 20.0 * sign
        total = (
            lw.pos_weight * dense * np.logaddexp(0.0, -theta)
            + (1.0 - dense) * np.logaddexp(0.0, theta)
        ).sum()
        want = lw.norm * total / (g.n * g.n)
        assert want < 1e-7  # the target the trained model approaches


class TestGradients:
    def test_lgae_matches_finite_differences(self):
        rng = np.random.default_rng(42)
        for _ in range(10):
            norm, labels, lw, weights = problem_instance(rng, ModelKind.LGAE)
            got = loss_gradient(weights, norm, labels, lw)
            want = fd_gradient(weights, norm, labels, lw)
            for g_a, g_f in zip(got, want):
                denom = max(np.abs(g_f).max(), 1e-12)
                assert np.abs(g_a - g_f).max() / denom < 1e-5

    def test_gae_matches_finite_differences(self):
        rng = np.random.default_rng(43)
        for _ in range(10):
            norm, labels, lw, weights = problem_instance(rng, ModelKind.GAE)
            got = loss_gradient(weights, norm, labels, lw)
            want = fd_gradient(weights, norm, labels, lw)
            for g_a, g_f in zip(got, want):
                denom = max(np.abs(g_f).max(), 1e-12)
                assert np.abs(g_a - g_f).max() / denom < 1e-5

    def test_zero_weights_are_stationary(self):
        rng = np.random.default_rng(44)
        g = random_bipartite(rng)
        norm = normalized_adjacency(g)
        labels = training_labels(adjacency(g))
        lw = loss_weights(g.n, int(labels.nnz))
        (gw,) = loss_gradient((np.zeros((g.n, 3)),), norm, labels, lw)
        assert not gw.any()
        gw0, gw1 = loss_gradient(
            (np.zeros((g.n, 4)), np.zeros((4, 2))), norm, labels, lw
        )
        assert not gw0.any() and not gw1.any()

    def test_gradient_scales_with_norm_constant(self):
        rng = np.random.default_rng(45)
        norm, labels, lw, weights = problem_instance(rng, ModelKind.LGAE)
        (g1,) = loss_gradient(weights, norm, labels, lw)
        doubled = LossWeights(pos_weight=lw.pos_weight, norm=2.0 * lw.norm)
        (g2,) = loss_gradient(weights, norm, labels, doubled)
        assert np.allclose(g2, 2.0 * g1, rtol=1e-12, atol=0)

    def test_blocked_gradient_matches_dense(self):
        rng = np.random.default_rng(46)
        norm, labels, lw, weights = problem_instance(rng, ModelKind.GAE, max_side=7)
        dense = loss_gradient(weights, norm, labels, lw, block_rows=None)
        blocked = loss_gradient(weights, norm, labels, lw, block_rows=2)
        for g_d, g_b in zip(dense, blocked):
            assert np.allclose(g_b, g_d, rtol=1e-11, atol=1e-14)


class TestInitWeights:
    def test_shapes_and_bounds(self):
        cfg = TrainConfig(model_kind=ModelKind.GAE, embed_dim=3, hidden_dim=5, seed=9)
        w0, w1 = init_weights(cfg, 7)
        assert w0.shape == (7, 5) and w1.shape == (5, 3)
        assert np.abs(w0).max() <= np.sqrt(6.0 / (7 + 5))
        assert np.abs(w1).max() <= np.sqrt(6.0 / (5 + 3))

    def test_deterministic_in_seed(self):
        cfg = TrainConfig(seed=123)
        a = init_weights(cfg, 6)
        b = init_weights(cfg, 6)
        assert all(np.array_equal(x, y) for x, y in zip(a, b))

    def test_seed_changes_weights(self):
        a = init_weights(TrainConfig(seed=1), 6)
        b = init_weights(TrainConfig(seed=2), 6)
        assert not np.array_equal(a[0], b[0])


class TestTrainConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            TrainConfig(embed_dim=0)
        with pytest.raises(ValueError):
            TrainConfig(epochs=0)
        with pytest.raises(ValueError):
            TrainConfig(learning_rate=0.0)
        with pytest.raises(ValueError):
            TrainConfig(model_kind=ModelKind.GAE, hidden_dim=0)

    def test_lgae_ignores_hidden_dim(self):
        TrainConfig(model_kind=ModelKind.LGAE, hidden_dim=0)  # no error


class TestTrain:
    def test_loss_history_and_descent(self):
        rng = np.random.default_rng(47)
        g = random_bipartite(rng, max_side=10, min_edges=8)
        norm = normalized_adjacency(g)
        labels = training_labels(adjacency(g))
        cfg = TrainConfig(embed_dim=4, epochs=60, seed=3)
        model = train(norm, labels, cfg)
        assert model.loss_history.shape == (61,)
        assert np.all(np.isfinite(model.loss_history))
        assert model.loss_history[-1] < model.loss_history[0]

    def test_embeddings_equal_forward_of_weights(self):
        rng = np.random.default_rng(48)
        g = random_bipartite(rng)
        norm = normalized_adjacency(g)
        labels = training_labels(adjacency(g))
        for kind in ModelKind:
            cfg = TrainConfig(model_kind=kind, embed_dim=3, epochs=5, seed=4)
            model = train(norm, labels, cfg)
            assert np.array_equal(model.Z, forward(model.weights, norm))

    def test_deterministic(self):
        rng = np.random.default_rng(49)
        g = random_bipartite(rng, min_edges=4)
        norm = normalized_adjacency(g)
        labels = training_labels(adjacency(g))
        cfg = TrainConfig(embed_dim=3, epochs=20, seed=11)
        a = train(norm, labels, cfg)
        b = train(norm, labels, cfg)
        assert np.array_equal(a.Z, b.Z)
        assert np.array_equal(a.loss_history, b.loss_history)

    def test_single_epoch_history(self):
        rng = np.random.default_rng(50)
        g = random_bipartite(rng)
        model = train(
            normalized_adjacency(g),
            training_labels(adjacency(g)),
            TrainConfig(epochs=1, seed=0),
        )
        assert model.loss_history.shape == (2,)

    def test_divergence_raises_with_epoch(self):
        rng = np.random.default_rng(51)
        g = random_bipartite(rng, max_side=6, min_edges=4)
        cfg = TrainConfig(embed_dim=4, epochs=5, learning_rate=1e160, seed=2)
        with np.errstate(over="ignore", invalid="ignore"):
            with pytest.raises(TrainingDivergedError) as exc:
                train(normalized_adjacency(g), training_labels(adjacency(g)), cfg)
        assert 0 <= exc.value.epoch < 5

    def test_label_shape_mismatch(self):
        rng = np.random.default_rng(52)
        g = random_bipartite(rng)
        bad = sp.identity(g.n + 1, format="csr")
        with pytest.raises(ValueError):
            train(normalized_adjacency(g), bad, TrainConfig())


class TestCheckpointing:
    def test_round_trip_exact(self, tmp_path):
        rng = np.random.default_rng(53)
        g = random_bipartite(rng, min_edges=3)
        norm = normalized_adjacency(g)
        labels = training_labels(adjacency(g))
        for kind in ModelKind:
            cfg = TrainConfig(
                model_kind=kind, embed_dim=3, hidden_dim=4, epochs=8,
                learning_rate=0.02, seed=6,
            )
            model = train(norm, labels, cfg)
            path = tmp_path / f"{kind.value}.npz"
            save_model(model, cfg, path)
            loaded, loaded_cfg = load_model(path)
            assert loaded_cfg == cfg
            assert loaded.model_kind is kind
            assert np.array_equal(loaded.Z, model.Z)
            assert np.array_equal(loaded.loss_history, model.loss_history)
            assert len(loaded.weights) == len(model.weights)
            for a, b in zip(loaded.weights, model.weights):
                assert np.array_equal(a, b)

    def test_unsupported_version_rejected(self, tmp_path):
        path = tmp_path / "bad.npz"
        np.savez(path, format_version=np.int64(99))
        with pytest.raises(ValueError, match="version"):
            load_model(path)
