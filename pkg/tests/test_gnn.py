"""Encoder forward pass, DistMult decoder, loss gradients against finite
differences, and training-loop contracts."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lexgraph import casegraph as cg
from lexgraph import corpus as corp
from lexgraph import gnn
from lexgraph.annotate import LawpointDictionary, AliasTable, annotate_corpus
from lexgraph.errors import GraphError, TrainingError
from lexgraph.resources import default_aliases, default_lawpoints, feature_spec_json


def _single_layer_model(w_rel, w_self, relations=("cites",), task="cites"):
    out_dim, in_dim = w_self.shape
    return gnn.RgcnModel(
        layers=[gnn.LayerParams("rgcn", {r: w_rel.copy() for r in relations}, w_self)],
        relation_diagonals={r: np.zeros(out_dim) for r in relations},
        relations=sorted(relations),
        input_dim=in_dim,
        hidden_dim=out_dim,
        embedding_dim=out_dim,
        task=task,
    )


class TestRgcnForward:
    def test_isolated_node_self_loop_identity(self):
        model = _single_layer_model(np.zeros((3, 3)), np.eye(3))
        features = np.array([[1.0, -2.0, 0.5]])
        out = gnn.rgcn_forward({"cites": []}, features, model)
        np.testing.assert_array_equal(out, features)

    def test_output_shape(self):
        config = gnn.TrainConfig(task="cites", hidden_dim=5, embedding_dim=4, seed=0)
        model = gnn.init_model(7, ["cites"], config)
        features = np.random.default_rng(0).normal(size=(9, 7))
        out = gnn.rgcn_forward({"cites": [(0, 1), (2, 3)]}, features, model)
        assert out.shape == (9, 4)

    def test_two_node_swap(self):
        # identity relation weight, zero self weight, single mutual edge:
        # each node receives exactly the other's features
        model = _single_layer_model(np.eye(2), np.zeros((2, 2)))
        features = np.array([[1.0, 2.0], [3.0, 4.0]])
        out = gnn.rgcn_forward({"cites": [(0, 1), (1, 0)]}, features, model)
        np.testing.assert_allclose(out[0], features[1])
        np.testing.assert_allclose(out[1], features[0])

    def test_mean_normalization(self):
        model = _single_layer_model(np.eye(1), np.zeros((1, 1)))
        features = np.array([[2.0], [4.0], [0.0]])
        out = gnn.rgcn_forward({"cites": [(0, 2), (1, 2)]}, features, model)
        assert out[2, 0] == pytest.approx(3.0)

    def test_dimension_mismatch_reports_both(self):
        config = gnn.TrainConfig(task="cites", seed=0)
        model = gnn.init_model(5, ["cites"], config)
        with pytest.raises(GraphError, match="expected 5.*got 3"):
            gnn.rgcn_forward({"cites": []}, np.zeros((2, 3)), model)

    @settings(max_examples=60, deadline=None)
    @given(data=st.data())
    def test_permutation_equivariance(self, data):
        n = data.draw(st.integers(min_value=2, max_value=8))
        d = data.draw(st.integers(min_value=1, max_value=4))
        seed = data.draw(st.integers(min_value=0, max_value=2**31 - 1))
        rng = np.random.default_rng(seed)
        features = rng.normal(size=(n, d))
        n_edges = int(rng.integers(0, n * n))
        edges = [
            (int(a), int(b)) for a, b in rng.integers(0, n, size=(n_edges, 2))
        ]
        config = gnn.TrainConfig(
            task="cites", hidden_dim=3, embedding_dim=3,
            seed=int(rng.integers(0, 2**31)),
        )
        model = gnn.init_model(d, ["cites"], config)
        perm = rng.permutation(n)

        base = gnn.rgcn_forward({"cites": edges}, features, model)
        perm_feats = np.empty_like(features)
        perm_feats[perm] = features
        perm_edges = [(int(perm[s]), int(perm[t])) for s, t in edges]
        permuted = gnn.rgcn_forward({"cites": perm_edges}, perm_feats, model)
        np.testing.assert_allclose(permuted[perm], base, atol=1e-9)


class TestSageAggregate:
    def test_mean_concat(self):
        out = gnn.sage_aggregate([1.0, 0.0], [[0.0, 2.0], [2.0, 0.0]], "mean")
        assert out.tolist() == [1.0, 0.0, 1.0, 1.0]

    def test_empty_neighborhood_zero_block(self):
        out = gnn.sage_aggregate([3.0, -1.0], [], "mean")
        assert out.tolist() == [3.0, -1.0, 0.0, 0.0]

    def test_pool_elementwise_max(self):
        out = gnn.sage_aggregate([0.0, 0.0], [[0.0, 2.0], [2.0, 0.0]], "pool")
        assert out.tolist() == [0.0, 0.0, 2.0, 2.0]

    def test_mixed_lengths_rejected(self):
        with pytest.raises(GraphError):
            gnn.sage_aggregate([1.0, 2.0], [[1.0]], "mean")

    @given(
        st.integers(min_value=1, max_value=6),
        st.integers(min_value=0, max_value=5),
        st.sampled_from(["mean", "pool"]),
    )
    def test_output_length_doubles(self, dim, n_nb, kind):
        rng = np.random.default_rng(dim * 31 + n_nb)
        out = gnn.sage_aggregate(
            rng.normal(size=dim), [rng.normal(size=dim) for _ in range(n_nb)], kind
        )
        assert out.shape == (2 * dim,)


class TestDistMult:
    def test_all_ones_diag_is_dot_product(self):
        assert gnn.distmult_score([1.0, 2.0], [1.0, 1.0], [3.0, 4.0]) == 11.0

    def test_zero_diag(self):
        rng = np.random.default_rng(1)
        e1, e2 = rng.normal(size=4), rng.normal(size=4)
        assert gnn.distmult_score(e1, np.zeros(4), e2) == 0.0

    def test_symmetric(self):
        rng = np.random.default_rng(2)
        s, r, o = rng.normal(size=5), rng.normal(size=5), rng.normal(size=5)
        assert gnn.distmult_score(s, r, o) == pytest.approx(
            gnn.distmult_score(o, r, s), rel=1e-12
        )

    def test_positive_scaling_monotone(self):
        rng = np.random.default_rng(3)
        s, r, o = rng.normal(size=5), rng.normal(size=5), rng.normal(size=5)
        base = gnn.distmult_score(s, r, o)
        assert gnn.distmult_score(2.5 * s, r, o) == pytest.approx(2.5 * base, rel=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(GraphError):
            gnn.distmult_score([1.0], [1.0, 2.0], [1.0, 2.0])


def _tiny_setup(kind="rgcn", seed=5):
    rng = np.random.default_rng(seed)
    n, d = 6, 3
    features = rng.normal(size=(n, d))
    edges = {
        "r1": [(0, 1), (1, 2), (2, 3), (3, 0), (4, 5)],
        "r2": [(1, 0), (2, 4), (5, 3)],
    }
    config = gnn.TrainConfig(
        task="r1", hidden_dim=3, embedding_dim=2, seed=seed, layer_kind=kind
    )
    model = gnn.init_model(d, ["r1", "r2"], config)
    pos = [(0, 1), (2, 3), (4, 5)]
    neg = [(0, 2), (1, 4), (3, 5)]
    return model, edges, features, pos, neg


class TestLossAndGrads:
    def test_zero_parameters_give_log_two(self):
        model, edges, features, pos, neg = _tiny_setup()
        for layer in model.layers:
            layer.self_weight[:] = 0.0
            for w in layer.weights.values():
                w[:] = 0.0
        for diag in model.relation_diagonals.values():
            diag[:] = 0.0
        loss, _ = gnn.loss_and_grads(model, edges, features, pos, neg)
        assert loss == pytest.approx(math.log(2.0), abs=1e-15)

    def test_duplicating_edges_keeps_loss(self):
        model, edges, features, pos, neg = _tiny_setup()
        loss_a, _ = gnn.loss_and_grads(model, edges, features, pos, neg)
        loss_b, _ = gnn.loss_and_grads(model, edges, features, pos + pos, neg + neg)
        assert loss_b == pytest.approx(loss_a, rel=1e-12)

    def test_empty_edges_rejected(self):
        model, edges, features, pos, neg = _tiny_setup()
        with pytest.raises(GraphError):
            gnn.loss_and_grads(model, edges, features, [], neg)

    @pytest.mark.parametrize("kind", ["rgcn", "sage-mean", "sage-pool"])
    def test_gradients_match_finite_differences(self, kind):
        model, edges, features, pos, neg = _tiny_setup(kind)
        _, grads = gnn.loss_and_grads(model, edges, features, pos, neg)
        params = model.parameter_arrays()
        grad_arrays = grads.arrays(model)
        eps = 1e-5
        worst = 0.0
        for p_arr, g_arr in zip(params, grad_arrays):
            flat_p = p_arr.ravel()
            flat_g = g_arr.ravel()
            for i in range(flat_p.size):
                orig = flat_p[i]
                flat_p[i] = orig + eps
                up, _ = gnn.loss_and_grads(model, edges, features, pos, neg)
                flat_p[i] = orig - eps
                down, _ = gnn.loss_and_grads(model, edges, features, pos, neg)
                flat_p[i] = orig
                fd = (up - down) / (2 * eps)
                denom = max(abs(fd), abs(flat_g[i]), 1e-8)
                worst = max(worst, abs(fd - flat_g[i]) / denom)
        assert worst <= 1e-4


@pytest.fixture(scope="module")
def planted_graph():
    config = corp.SynthConfig(n_docs=80, n_topics=14, seed=21,
                              feature_link_correlation=0.9,
                              citation_density=0.01)
    docs, _ = corp.synth_corpus(config)
    dictionary = LawpointDictionary(default_lawpoints())
    aliases = AliasTable(default_aliases())
    mentions = annotate_corpus(docs, dictionary)
    spec = cg.parse_feature_spec(feature_spec_json(27), dictionary.concept_labels())
    return cg.build_case_graph(docs, mentions, spec, aliases)


class TestTrain:
    def test_deterministic_loss_sequence(self, planted_graph):
        graph = planted_graph
        split = cg.make_split(graph, "cites", test_fraction=0.2, seed=3)
        config = gnn.TrainConfig(task="cites", epochs=30, seed=3)
        _, r1 = gnn.train(graph, graph.features, split, config)
        _, r2 = gnn.train(graph, graph.features, split, config)
        assert r1.losses == r2.losses
        assert r1.auc_history == r2.auc_history

    def test_loss_trend_decreases(self, planted_graph):
        graph = planted_graph
        split = cg.make_split(graph, "cites", test_fraction=0.1, seed=4)
        config = gnn.TrainConfig(task="cites", epochs=120, seed=4)
        _, report = gnn.train(graph, graph.features, split, config)
        first = sum(report.losses[:10]) / 10
        last = sum(report.losses[-10:]) / 10
        assert last < first

    def test_auc_recorded_every_fifty(self, planted_graph):
        graph = planted_graph
        split = cg.make_split(graph, "cites", test_fraction=0.2, seed=5)
        config = gnn.TrainConfig(task="cites", epochs=120, seed=5)
        _, report = gnn.train(graph, graph.features, split, config)
        assert [e for e, _ in report.auc_history] == [50, 100, 120]
        assert report.final_test_auc == report.auc_history[-1][1]

    def test_divergence_raises_with_epoch(self, planted_graph):
        graph = planted_graph
        split = cg.make_split(graph, "cites", test_fraction=0.1, seed=6)
        config = gnn.TrainConfig(
            task="cites", epochs=40, learning_rate=1e18, optimizer="sgd", seed=6
        )
        with pytest.raises(TrainingError, match=r"epoch \d+"):
            gnn.train(graph, graph.features, split, config)

    def test_sgd_also_trains(self, planted_graph):
        graph = planted_graph
        split = cg.make_split(graph, "cites", test_fraction=0.2, seed=7)
        config = gnn.TrainConfig(
            task="cites", epochs=60, optimizer="sgd", learning_rate=0.05, seed=7
        )
        _, report = gnn.train(graph, graph.features, split, config)
        assert report.losses[-1] < report.losses[0]


class TestCheckpoint:
    def test_round_trip_bitwise(self, planted_graph, tmp_path):
        graph = planted_graph
        split = cg.make_split(graph, "cites", test_fraction=0.2, seed=8)
        config = gnn.TrainConfig(task="cites", epochs=20, seed=8)
        model, _ = gnn.train(graph, graph.features, split, config)
        path = tmp_path / "model.bin"
        gnn.save_model(model, path, extra={"note": "test"})
        loaded, extra = gnn.load_model(path)
        assert extra == {"note": "test"}
        assert loaded.task == model.task
        assert loaded.relations == model.relations
        for a, b in zip(model.parameter_arrays(), loaded.parameter_arrays()):
            assert a.tobytes() == b.tobytes()

    def test_loaded_model_scores_identically(self, planted_graph, tmp_path):
        graph = planted_graph
        split = cg.make_split(graph, "cites", test_fraction=0.2, seed=9)
        config = gnn.TrainConfig(task="cites", epochs=20, seed=9)
        model, _ = gnn.train(graph, graph.features, split, config)
        path = tmp_path / "model.bin"
        gnn.save_model(model, path)
        loaded, _ = gnn.load_model(path)
        edges = {"cites": cg.to_undirected(split.train_pos)}
        a = gnn.rgcn_forward(edges, graph.features, model)
        b = gnn.rgcn_forward(edges, graph.features, loaded)
        assert a.tobytes() == b.tobytes()
