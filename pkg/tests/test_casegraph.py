"""Feature encoding, edge assembly, undirected conversion, splits, and
negative sampling."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lexgraph import annotate as ann
from lexgraph import casegraph as cg
from lexgraph import corpus as corp
from lexgraph.errors import GraphError
from lexgraph.resources import (
    default_aliases,
    default_lawpoints,
    feature_spec_json,
    mini_corpus_path,
)


@pytest.fixture(scope="module")
def aliases():
    return ann.AliasTable(default_aliases())


@pytest.fixture(scope="module")
def dictionary():
    return ann.LawpointDictionary(default_lawpoints())


@pytest.fixture(scope="module")
def mini_graph(aliases, dictionary):
    docs = corp.load_corpus(mini_corpus_path())
    mentions = ann.annotate_corpus(docs, dictionary)
    spec = cg.parse_feature_spec(feature_spec_json(27), dictionary.concept_labels())
    return docs, mentions, cg.build_case_graph(docs, mentions, spec, aliases)


def _doc(**over):
    base = dict(
        id="doc-x", title="t", court="Delhi High Court", doc_type="case",
        date="2015-06-01", body="One. Two sentences.", metadata={}, citations=[],
    )
    base.update(over)
    return corp.Document(**base)


class TestFeatureSpecs:
    def test_bundled_lengths(self, dictionary):
        assert len(cg.parse_feature_spec(feature_spec_json(13))) == 13
        assert len(cg.parse_feature_spec(feature_spec_json(27), dictionary.concept_labels())) == 27

    def test_duplicate_name_rejected(self):
        entries = [
            {"name": "x", "source": "metadata-numeric", "key": "year"},
            {"name": "x", "source": "metadata-numeric", "key": "month"},
        ]
        with pytest.raises(GraphError):
            cg.parse_feature_spec(entries)

    def test_unknown_concept_rejected(self):
        entries = [{"name": "x", "source": "lawpoint-count", "key": "NotAConcept"}]
        with pytest.raises(GraphError):
            cg.parse_feature_spec(entries, ["Patent"])


class TestEncodeFeatures:
    def test_lawpoint_count_component(self, aliases):
        spec = cg.parse_feature_spec(
            [{"name": "pat", "source": "lawpoint-count", "key": "Patent"}]
        )
        mentions = [
            ann.Mention("doc-x", "prior art", "Patent", 0, 9),
            ann.Mention("doc-x", "inventive step", "Patent", 12, 26),
        ]
        vec = cg.encode_features(_doc(), mentions, spec, aliases, {})
        assert vec.tolist() == [2.0]

    def test_vector_lengths_match_specs(self, aliases, dictionary):
        doc = _doc()
        for n in (13, 27):
            spec = cg.parse_feature_spec(feature_spec_json(n), dictionary.concept_labels())
            maps = cg.build_ordinal_maps([doc], spec, aliases)
            vec = cg.encode_features(doc, [], spec, aliases, maps)
            assert vec.shape == (n,)

    def test_bombay_and_mumbai_share_code(self, aliases):
        spec = cg.parse_feature_spec(
            [{"name": "court", "source": "metadata-ordinal", "key": "court"}]
        )
        a = _doc(id="a", court="Bombay")
        b = _doc(id="b", court="Mumbai")
        maps = cg.build_ordinal_maps([a, b], spec, aliases)
        va = cg.encode_features(a, [], spec, aliases, maps)
        vb = cg.encode_features(b, [], spec, aliases, maps)
        assert va.tolist() == vb.tolist()
        assert va[0] >= 1.0

    def test_unknown_ordinal_gets_reserved_zero(self, aliases):
        spec = cg.parse_feature_spec(
            [{"name": "court", "source": "metadata-ordinal", "key": "court"}]
        )
        known = _doc(id="a", court="Delhi High Court")
        maps = cg.build_ordinal_maps([known], spec, aliases)
        vec = cg.encode_features(_doc(id="b", court="Unseen Court"), [], spec, aliases, maps)
        assert vec[0] == 0.0

    def test_non_numeric_value_names_doc_and_key(self, aliases):
        spec = cg.parse_feature_spec(
            [{"name": "num", "source": "metadata-numeric", "key": "score"}]
        )
        doc = _doc(metadata={"score": "not-a-number"})
        with pytest.raises(GraphError, match="doc-x.*score"):
            cg.encode_features(doc, [], spec, aliases, {})

    def test_derived_counts(self, aliases):
        spec = cg.parse_feature_spec(
            [
                {"name": "judge_count", "source": "metadata-numeric", "key": "judge_count"},
                {"name": "year", "source": "metadata-numeric", "key": "year"},
                {"name": "sentence_count", "source": "metadata-numeric", "key": "sentence_count"},
            ]
        )
        doc = _doc(metadata={"judges": "Justice A; Justice B"})
        vec = cg.encode_features(doc, [], spec, aliases, {})
        assert vec.tolist() == [2.0, 2015.0, 2.0]


class TestToUndirected:
    def test_reverses_appended(self):
        assert cg.to_undirected([(0, 1)]) == [(0, 1), (1, 0)]

    def test_empty(self):
        assert cg.to_undirected([]) == []

    def test_self_loop_duplicated(self):
        assert cg.to_undirected([(2, 2)]) == [(2, 2), (2, 2)]

    @given(st.lists(st.tuples(st.integers(0, 20), st.integers(0, 20)), max_size=40))
    def test_length_doubles(self, edges):
        out = cg.to_undirected(edges)
        assert len(out) == 2 * len(edges)
        assert out[: len(edges)] == list(edges)


class TestSplitEdges:
    EDGES = [(i, i + 1) for i in range(100)]

    def test_fraction_zero(self):
        train, test = cg.split_edges(self.EDGES, 0.0, seed=1)
        assert test == []
        assert sorted(train) == self.EDGES

    def test_fraction_one(self):
        train, test = cg.split_edges(self.EDGES, 1.0, seed=1)
        assert train == []
        assert sorted(test) == self.EDGES

    def test_deterministic_ninety_ten(self):
        a = cg.split_edges(self.EDGES, 0.1, seed=5)
        b = cg.split_edges(self.EDGES, 0.1, seed=5)
        assert a == b
        train, test = a
        assert len(train) == 90 and len(test) == 10

    def test_bad_fraction_rejected(self):
        with pytest.raises(GraphError):
            cg.split_edges(self.EDGES, 1.2, seed=0)


def _plain_graph(n, edges):
    return cg.CaseGraph(
        node_ids=[f"n{i:03d}" for i in range(n)],
        feature_names=["f0"],
        feature_sources=["metadata-numeric"],
        feature_keys=["f0"],
        features=np.zeros((n, 1)),
        raw_features=np.zeros((n, 1)),
        norm_mean=np.zeros(1),
        norm_std=np.ones(1),
        edges={"cites": edges},
    )


class TestSampleNegatives:
    def test_zero_samples(self):
        graph = _plain_graph(4, [(0, 1)])
        assert cg.sample_negatives(graph, "cites", 0, seed=0) == []

    def test_only_feasible_pair_returned(self):
        # complete digraph minus one unordered pair: that pair (in both
        # orientations) is the entire feasible pool
        n = 4
        all_pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
        edges = [p for p in all_pairs if p not in ((2, 1), (1, 2))]
        graph = _plain_graph(n, edges)
        got = cg.sample_negatives(graph, "cites", 2, seed=3)
        assert sorted(got) == [(1, 2), (2, 1)]
        (single,) = cg.sample_negatives(graph, "cites", 1, seed=3)
        assert single in ((1, 2), (2, 1))

    def test_deterministic_and_disjoint(self):
        rng = np.random.default_rng(0)
        edges = list({(int(a), int(b)) for a, b in rng.integers(0, 50, size=(80, 2)) if a != b})
        graph = _plain_graph(50, edges)
        a = cg.sample_negatives(graph, "cites", 200, seed=9)
        b = cg.sample_negatives(graph, "cites", 200, seed=9)
        assert a == b
        assert len(set(a)) == 200
        for pair in a:
            assert pair not in edges
            assert (pair[1], pair[0]) not in edges
            assert pair[0] != pair[1]

    def test_infeasible_rejected(self):
        graph = _plain_graph(3, [(0, 1), (1, 2), (0, 2)])
        with pytest.raises(GraphError):
            cg.sample_negatives(graph, "cites", 10, seed=0)


class TestMakeSplitInvariants:
    @settings(max_examples=120, deadline=None)
    @given(data=st.data())
    def test_invariant_suite(self, data):
        n = data.draw(st.integers(min_value=4, max_value=12))
        possible = [(i, j) for i in range(n) for j in range(n) if i != j]
        max_edges = max(1, len(possible) // 4)
        edges = data.draw(
            st.lists(st.sampled_from(possible), min_size=1, max_size=max_edges, unique=True)
        )
        fraction = data.draw(st.floats(min_value=0.0, max_value=1.0))
        seed = data.draw(st.integers(min_value=0, max_value=2**32 - 1))

        graph = _plain_graph(n, edges)
        split = cg.make_split(graph, "cites", test_fraction=fraction, seed=seed)

        assert set(split.train_pos).isdisjoint(split.test_pos)
        assert sorted(split.train_pos + split.test_pos) == sorted(edges)
        assert len(split.test_pos) == int(round(fraction * len(edges)))
        assert len(split.train_neg) == len(split.train_pos)
        assert len(split.test_neg) == len(split.test_pos)
        positives = set(edges) | {(d, s) for s, d in edges}
        for neg in split.train_neg + split.test_neg:
            assert neg not in positives
            assert neg[0] != neg[1]
        assert set(split.train_neg).isdisjoint(split.test_neg)


class TestBuildCaseGraph:
    def test_nodes_sorted_and_legislation_excluded(self, mini_graph):
        docs, _, graph = mini_graph
        assert graph.node_ids == sorted(graph.node_ids)
        assert len(graph.node_ids) == 10
        assert "doc-011" not in graph.node_ids
        assert "doc-012" not in graph.node_ids

    def test_edges_within_node_set(self, mini_graph):
        _, _, graph = mini_graph
        n = graph.n_nodes
        for rel, edges in graph.edges.items():
            for s, d in edges:
                assert 0 <= s < n and 0 <= d < n

    def test_similar_pairs_canonical(self, mini_graph):
        _, _, graph = mini_graph
        for s, d in graph.edges["similar_to"]:
            assert s < d

    def test_build_is_stable(self, mini_graph, aliases, dictionary):
        docs, mentions, graph = mini_graph
        spec = cg.parse_feature_spec(feature_spec_json(27), dictionary.concept_labels())
        again = cg.build_case_graph(docs, mentions, spec, aliases)
        assert again.node_ids == graph.node_ids
        assert np.array_equal(again.features, graph.features)
        assert again.edges == graph.edges

    def test_normalized_columns(self, mini_graph):
        _, _, graph = mini_graph
        means = graph.features.mean(axis=0)
        np.testing.assert_allclose(means, 0.0, atol=1e-12)

    def test_json_round_trip(self, mini_graph, tmp_path):
        _, _, graph = mini_graph
        path = tmp_path / "graph.json"
        graph.save(path)
        loaded = cg.CaseGraph.load(path)
        assert loaded.node_ids == graph.node_ids
        assert np.array_equal(loaded.features, graph.features)
        assert np.array_equal(loaded.raw_features, graph.raw_features)
        assert loaded.edges == graph.edges
        assert loaded.feature_sources == graph.feature_sources
