"""HTTP service endpoints over mini-corpus artifacts."""

import json
import math

import numpy as np
import pytest
from fastapi.testclient import TestClient

from lexgraph import annotate as ann
from lexgraph import casegraph as cg
from lexgraph import corpus as corp
from lexgraph import gnn
from lexgraph.pipeline import PipelineArtifacts
from lexgraph.resources import (
    default_aliases,
    default_lawpoints,
    default_ontology,
    golden_path,
    mini_corpus_path,
)
from lexgraph.service import make_app


def build_mini_artifacts(directory, epochs=30):
    """Assemble a full artifact snapshot for the bundled mini corpus."""
    docs = corp.load_corpus(mini_corpus_path())
    dictionary = ann.LawpointDictionary(default_lawpoints())
    aliases = ann.AliasTable(default_aliases())
    ontology = ann.Ontology.from_dict(default_ontology())
    mentions = ann.annotate_corpus(docs, dictionary)
    kg = ann.build_kg(docs, mentions, ontology, aliases)
    stats = ann.kg_stats(kg, docs)

    from lexgraph.resources import feature_spec_json

    spec = cg.parse_feature_spec(feature_spec_json(27), dictionary.concept_labels())
    graph = cg.build_case_graph(docs, mentions, spec, aliases)

    corp.write_corpus(docs, directory / "corpus.jsonl")
    ann.write_mentions_json(mentions, directory / "mentions.json")
    graph.save(directory / "graph.json")
    (directory / "stats.json").write_text(
        json.dumps(stats.to_json(), indent=2, sort_keys=True) + "\n"
    )

    for task in ("cites", "similar_to"):
        split = cg.make_split(graph, task, test_fraction=0.0, seed=2)
        config = gnn.TrainConfig(task=task, epochs=epochs, seed=2)
        model, _ = gnn.train(graph, graph.features, split, config)
        gnn.save_model(model, directory / f"model-{task}.bin")
    return directory


@pytest.fixture(scope="module")
def artifacts(tmp_path_factory):
    directory = tmp_path_factory.mktemp("artifacts")
    build_mini_artifacts(directory)
    return PipelineArtifacts.load(directory)


@pytest.fixture(scope="module")
def client(artifacts):
    return TestClient(make_app(artifacts))


class TestStats:
    def test_matches_golden(self, client):
        golden = json.loads(golden_path("mini_stats.json").read_text())
        assert client.get("/stats").json() == golden


class TestCases:
    def test_search_patent_titles(self, client):
        hits = client.get("/cases", params={"q": "patent"}).json()
        assert {h["id"] for h in hits} == {"doc-003", "doc-004"}

    def test_empty_query_lists_nodes(self, client):
        hits = client.get("/cases").json()
        assert len(hits) == 10

    def test_limit(self, client):
        hits = client.get("/cases", params={"limit": 3}).json()
        assert len(hits) == 3

    def test_bad_limit_400(self, client):
        response = client.get("/cases", params={"limit": 0})
        assert response.status_code == 400
        assert "error" in response.json()

    def test_non_numeric_param_400(self, client):
        assert client.get("/cases", params={"limit": "abc"}).status_code == 400

    def test_detail(self, client):
        detail = client.get("/cases/doc-005").json()
        assert detail["court"] == "High Court of Judicature at Bombay"
        assert "Trademark" in detail["lawpoints"]

    def test_unknown_id_404_json_body(self, client):
        response = client.get("/cases/doc-999")
        assert response.status_code == 404
        assert "doc-999" in response.json()["error"]


class TestSimilar:
    def test_top_k_sorted_descending(self, client):
        rows = client.get("/cases/doc-001/similar", params={"k": 5}).json()
        assert len(rows) == 5
        scores = [r["score"] for r in rows]
        assert scores == sorted(scores, reverse=True)
        assert all(r["id"] != "doc-001" for r in rows)

    def test_scores_match_offline_distmult(self, client, artifacts):
        rows = client.get("/cases/doc-002/similar", params={"k": 3}).json()
        model = artifacts.models["similar_to"]
        emb = artifacts.embeddings["similar_to"]
        diag = model.relation_diagonals["similar_to"]
        u = artifacts.graph.node_ids.index("doc-002")
        for row in rows:
            v = artifacts.graph.node_ids.index(row["id"])
            raw = float(np.sum(emb[u] * diag * emb[v]))
            offline = 1.0 / (1.0 + math.exp(-raw))
            assert row["score"] == offline  # bit-equal

    def test_unknown_task_400(self, client):
        response = client.get("/cases/doc-001/similar", params={"task": "nope"})
        assert response.status_code == 400


class TestPredict:
    def test_score_returned(self, client):
        response = client.post(
            "/predict", json={"u": "doc-001", "v": "doc-002", "task": "cites"}
        )
        assert response.status_code == 200
        assert 0.0 <= response.json()["score"] <= 1.0

    def test_unknown_node_404(self, client):
        response = client.post("/predict", json={"u": "doc-001", "v": "nope"})
        assert response.status_code == 404

    def test_missing_field_400(self, client):
        assert client.post("/predict", json={"u": "doc-001"}).status_code == 400


class TestExplain:
    def test_self_comparison_zero_diffs(self, client):
        body = client.get("/explain", params={"u": "doc-004", "v": "doc-004"}).json()
        assert all(fd["delta_normalized"] == 0.0 for fd in body["feature_diffs"])
        assert len(body["feature_diffs"]) == 27

    def test_attributions_length(self, client):
        body = client.get(
            "/explain", params={"u": "doc-001", "v": "doc-002", "k": 4}
        ).json()
        assert len(body["top_attributions"]) == 4
        drops = [a["drop"] for a in body["top_attributions"]]
        assert drops == sorted(drops, reverse=True)

    def test_bad_k_400(self, client):
        assert client.get(
            "/explain", params={"u": "doc-001", "v": "doc-002", "k": 0}
        ).status_code == 400


class TestSubgraph:
    def test_nodes_and_edges(self, client):
        body = client.get(
            "/subgraph", params={"center": "doc-001", "hops": 1, "task": "cites"}
        ).json()
        ids = {n["id"] for n in body["nodes"]}
        assert "doc-001" in ids
        for edge in body["edges"]:
            assert edge["src"] in ids and edge["dst"] in ids
            assert isinstance(edge["observed"], bool)

    def test_zero_hops_single_node(self, client):
        body = client.get(
            "/subgraph", params={"center": "doc-005", "hops": 0, "task": "cites"}
        ).json()
        assert [n["id"] for n in body["nodes"]] == ["doc-005"]

    def test_excessive_hops_400(self, client):
        assert client.get(
            "/subgraph", params={"center": "doc-001", "hops": 9}
        ).status_code == 400


class TestArtifactValidation:
    def test_dim_mismatch_rejected(self, tmp_path):
        build_mini_artifacts(tmp_path, epochs=2)
        graph = cg.CaseGraph.load(tmp_path / "graph.json")
        graph.features = graph.features[:, :5]
        graph.raw_features = graph.raw_features[:, :5]
        graph.feature_names = graph.feature_names[:5]
        graph.feature_sources = graph.feature_sources[:5]
        graph.feature_keys = graph.feature_keys[:5]
        graph.save(tmp_path / "graph.json")
        from lexgraph.errors import DataError

        with pytest.raises(DataError, match="features"):
            PipelineArtifacts.load(tmp_path)

    def test_deterministic_endpoints(self, client):
        a = client.get("/cases/doc-003/similar", params={"k": 4}).json()
        b = client.get("/cases/doc-003/similar", params={"k": 4}).json()
        assert a == b
