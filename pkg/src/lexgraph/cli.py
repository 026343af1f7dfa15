"""Command-line pipeline driver.

Exit codes: 0 success, 1 usage error, 2 data error. A JSON config file may
supply any flag (keyed by the flag's long name with dashes as underscores);
explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict

from . import annotate as ann
from . import casegraph as cg
from . import corpus as corp
from . import gnn, metrics, topics
from .errors import DataError, TrainingError
from .resources import (
    default_aliases,
    default_lawpoints,
    default_ontology,
    feature_spec_json,
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _write_json(obj, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, ensure_ascii=False, indent=2, sort_keys=True)
        fh.write("\n")


def _load_aliases(path: str | None) -> ann.AliasTable:
    if path:
        return ann.AliasTable.from_json(path)
    return ann.AliasTable(default_aliases())


def _load_dictionary(path: str | None) -> ann.LawpointDictionary:
    if path:
        return ann.LawpointDictionary.from_json(path)
    return ann.LawpointDictionary(default_lawpoints())


def _load_ontology(path: str | None) -> ann.Ontology:
    if path:
        return ann.Ontology.from_json(path)
    return ann.Ontology.from_dict(default_ontology())


def _load_feature_spec(spec: str, concepts) -> list[cg.FeatureDef]:
    if spec in ("13", "27"):
        return cg.parse_feature_spec(feature_spec_json(int(spec)), concepts)
    return cg.load_feature_spec(spec, concepts)


def _require(parser: _Parser, args: argparse.Namespace, *names: str) -> None:
    for name in names:
        if getattr(args, name, None) is None:
            parser.error(f"--{name.replace('_', '-')} is required")


def cmd_synth(args) -> int:
    config = corp.SynthConfig(
        n_docs=args.docs,
        n_topics=args.topics,
        vocab_size=args.vocab,
        doc_length=args.doc_length,
        citation_density=args.density,
        feature_link_correlation=args.correlation,
        seed=args.seed,
    )
    docs, truth = corp.synth_corpus(config)
    corp.write_corpus(docs, args.out)
    if args.truth:
        _write_json(truth.to_json(), args.truth)
    print(json.dumps({"documents": len(docs), "out": args.out}))
    return 0


def cmd_ingest(args) -> int:
    docs = corp.load_corpus(args.corpus)
    if args.out:
        corp.write_corpus(docs, args.out)
    n_with_dates = sum(1 for d in docs if d.date)
    print(
        json.dumps(
            {
                "documents": len(docs),
                "with_dates": n_with_dates,
                "citations": sum(len(d.citations) for d in docs),
            }
        )
    )
    return 0


def cmd_annotate(args) -> int:
    docs = corp.load_corpus(args.corpus)
    dictionary = _load_dictionary(args.dict)
    aliases = _load_aliases(args.aliases)
    ontology = _load_ontology(args.ontology)

    mentions = ann.annotate_corpus(docs, dictionary)
    kg = ann.build_kg(docs, mentions, ontology, aliases)
    stats = ann.kg_stats(kg, docs)

    if args.mentions:
        ann.write_mentions_json(mentions, args.mentions)
    if args.triples:
        ann.write_triples_tsv(kg, args.triples)
    if args.stats:
        _write_json(stats.to_json(), args.stats)
    print(json.dumps(stats.to_json()))
    return 0


def cmd_topics(args) -> int:
    docs = corp.load_corpus(args.corpus)
    tokenized = [(doc_id, ts.stems()) for doc_id, ts in corp.tokenize_corpus(docs)]
    model = topics.fit_lda(
        tokenized,
        k=args.k,
        alpha=args.alpha,
        beta=args.beta,
        iterations=args.iterations,
        seed=args.seed,
    )
    topics.save_topic_model(model, args.out)
    report = topics.topic_report(model, top_n=args.top_n)
    suggestions = topics.suggest_features(report, _load_ontology(args.ontology))
    payload = {
        "kernel": topics.kernel_name(),
        "topics": [
            {
                "topic": t.topic,
                "top_stem": t.top_stem,
                "occurrence_pct": t.occurrence_pct,
                "top_words": t.top_words,
            }
            for t in report
        ],
        "suggested_features": [
            {"stem": stem, "concept": concept} for stem, concept in suggestions
        ],
        "log_likelihood": model.ll_history,
    }
    if args.report:
        _write_json(payload, args.report)
    print(json.dumps({"topics": len(report), "out": args.out}))
    return 0


def cmd_build_graph(args) -> int:
    docs = corp.load_corpus(args.corpus)
    dictionary = _load_dictionary(args.dict)
    aliases = _load_aliases(args.aliases)
    spec = _load_feature_spec(args.features, dictionary.concept_labels())
    mentions = (
        ann.load_mentions_json(args.mentions)
        if args.mentions
        else ann.annotate_corpus(docs, dictionary)
    )
    graph = cg.build_case_graph(docs, mentions, spec, aliases)
    graph.save(args.out)
    print(
        json.dumps(
            {
                "nodes": graph.n_nodes,
                "features": len(graph.feature_names),
                "edges": {rel: len(es) for rel, es in sorted(graph.edges.items())},
            }
        )
    )
    return 0


def cmd_train(args) -> int:
    graph = cg.CaseGraph.load(args.graph)
    config = gnn.TrainConfig(
        task=args.task,
        epochs=args.epochs,
        learning_rate=args.lr,
        hidden_dim=args.hidden_dim,
        embedding_dim=args.embedding_dim,
        negative_ratio=args.negative_ratio,
        seed=args.seed,
        optimizer=args.optimizer,
        layer_kind=args.layer_kind,
    )
    split = cg.make_split(
        graph,
        args.task,
        test_fraction=args.test_fraction,
        seed=args.seed,
        negative_ratio=args.negative_ratio,
    )
    model, report = gnn.train(graph, graph.features, split, config)
    extra = {
        "train_config": asdict(config),
        "split": {
            "test_fraction": args.test_fraction,
            "seed": args.seed,
            "negative_ratio": args.negative_ratio,
        },
    }
    gnn.save_model(model, args.out, extra=extra)
    if args.report:
        _write_json(report.to_json(), args.report)
    print(
        json.dumps(
            {
                "task": args.task,
                "epochs": args.epochs,
                "final_loss": report.losses[-1],
                "final_test_auc": report.final_test_auc,
            }
        )
    )
    return 0


def cmd_eval(args) -> int:
    graph = cg.CaseGraph.load(args.graph)
    model, extra = gnn.load_model(args.model)
    split_info = extra.get("split")
    if not split_info:
        raise DataError("model checkpoint lacks split parameters; retrain with `train`")
    split = cg.make_split(
        graph,
        model.task,
        test_fraction=split_info["test_fraction"],
        seed=split_info["seed"],
        negative_ratio=split_info["negative_ratio"],
    )
    report = metrics.evaluate(model, graph, graph.features, split)
    _write_json(report.to_json(), args.out)
    if args.scores:
        report.write_csv(args.scores)
    print(json.dumps({"task": model.task, "auc": report.auc}))
    return 0


def cmd_explain(args) -> int:
    from .explain import attribute_link, compare_nodes

    graph = cg.CaseGraph.load(args.graph)
    model, _ = gnn.load_model(args.model)
    docs = corp.load_corpus(args.corpus)
    u = graph.index_of(args.u)
    v = graph.index_of(args.v)
    explanation = compare_nodes(graph, docs, u, v)
    message_edges = {model.task: cg.to_undirected(graph.edges.get(model.task, []))}
    k = args.k if args.k is not None else 5
    explanation.top_attributions = attribute_link(
        model, graph, graph.features, u, v, min(k, len(graph.feature_names)),
        message_edges,
    )
    emb = gnn.rgcn_forward({model.task: message_edges[model.task]}, graph.features, model)
    raw = gnn.distmult_score(emb[u], model.relation_diagonals[model.task], emb[v])
    explanation.link_score = 1.0 / (1.0 + math.exp(-raw))
    _write_json(explanation.to_json(), args.out)
    print(json.dumps({"u": args.u, "v": args.v, "score": explanation.link_score}))
    return 0


def cmd_serve(args) -> int:
    from .pipeline import PipelineArtifacts
    from .service import serve

    artifacts = PipelineArtifacts.load(args.artifacts)
    serve(artifacts, host=args.host, port=args.port, ui_dir=args.ui)
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="lexgraph", description=__doc__)
    parser.add_argument("--config", help="JSON file supplying default flag values")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("synth", help="generate a synthetic corpus", add_help=True)
    p.add_argument("--docs", type=int)
    p.add_argument("--topics", type=int)
    p.add_argument("--vocab", type=int, default=None)
    p.add_argument("--doc-length", type=int, default=None)
    p.add_argument("--density", type=float, default=None)
    p.add_argument("--correlation", type=float, default=None)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--truth")
    p.set_defaults(func=cmd_synth, required=("docs", "topics", "seed", "out"))

    p = sub.add_parser("ingest", help="validate and summarize a corpus")
    p.add_argument("--corpus")
    p.add_argument("--out")
    p.set_defaults(func=cmd_ingest, required=("corpus",))

    p = sub.add_parser("annotate", help="lawpoint mentions, triples, and stats")
    p.add_argument("--corpus")
    p.add_argument("--dict")
    p.add_argument("--aliases")
    p.add_argument("--ontology")
    p.add_argument("--mentions")
    p.add_argument("--triples")
    p.add_argument("--stats")
    p.set_defaults(func=cmd_annotate, required=("corpus",))

    p = sub.add_parser("topics", help="fit the LDA topic model")
    p.add_argument("--corpus")
    p.add_argument("--k", type=int)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--iterations", type=int, default=None)
    p.add_argument("--top-n", type=int, default=None)
    p.add_argument("--seed", type=int)
    p.add_argument("--ontology")
    p.add_argument("--out")
    p.add_argument("--report")
    p.set_defaults(func=cmd_topics, required=("corpus", "k", "seed", "out"))

    p = sub.add_parser("build-graph", help="assemble the attributed case graph")
    p.add_argument("--corpus")
    p.add_argument("--mentions")
    p.add_argument("--features", help="bundled preset '13' or '27', or a JSON path")
    p.add_argument("--dict")
    p.add_argument("--aliases")
    p.add_argument("--out")
    p.set_defaults(func=cmd_build_graph, required=("corpus", "features", "out"))

    p = sub.add_parser("train", help="train a link predictor")
    p.add_argument("--graph")
    p.add_argument("--task", choices=("cites", "similar_to"))
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--hidden-dim", type=int, default=None)
    p.add_argument("--embedding-dim", type=int, default=None)
    p.add_argument("--test-fraction", type=float, default=None)
    p.add_argument("--negative-ratio", type=int, default=None)
    p.add_argument("--optimizer", choices=gnn.OPTIMIZERS, default=None)
    p.add_argument("--layer-kind", choices=gnn.LAYER_KINDS, default=None)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--report")
    p.set_defaults(func=cmd_train, required=("graph", "task", "seed", "out"))

    p = sub.add_parser("eval", help="evaluate a trained model on its split")
    p.add_argument("--graph")
    p.add_argument("--model")
    p.add_argument("--out")
    p.add_argument("--scores", help="optional per-edge CSV")
    p.set_defaults(func=cmd_eval, required=("graph", "model", "out"))

    p = sub.add_parser("explain", help="explain a predicted link")
    p.add_argument("--graph")
    p.add_argument("--model")
    p.add_argument("--corpus")
    p.add_argument("--u")
    p.add_argument("--v")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--out")
    p.set_defaults(
        func=cmd_explain, required=("graph", "model", "corpus", "u", "v", "out")
    )

    p = sub.add_parser("serve", help="run the read-only HTTP service")
    p.add_argument("--artifacts")
    p.add_argument("--host", default=None)
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--ui", help="optional static UI directory to mount at /ui")
    p.set_defaults(func=cmd_serve, required=("artifacts",))

    return parser


_FLAG_DEFAULTS = {
    "vocab": 400,
    "doc_length": 60,
    "density": 0.02,
    "correlation": 0.0,
    "alpha": None,  # fit_lda picks 50/k
    "beta": 0.01,
    "iterations": 1000,
    "top_n": 10,
    "epochs": 600,
    "lr": 0.01,
    "hidden_dim": 16,
    "embedding_dim": 16,
    "test_fraction": 0.1,
    "negative_ratio": 1,
    "optimizer": "adam",
    "layer_kind": "rgcn",
    "host": "127.0.0.1",
    "port": 8321,
}


def _merge_config(parser: _Parser, args: argparse.Namespace) -> None:
    config = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                config = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise DataError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(config, dict):
            raise DataError("config file must contain a JSON object")
    for key, value in vars(args).items():
        if value is None and key in config:
            setattr(args, key, config[key])
    for key, value in _FLAG_DEFAULTS.items():
        if getattr(args, key, "absent") is None and key not in config:
            setattr(args, key, value)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not getattr(args, "command", None):
        parser.print_help(sys.stderr)
        return 1
    try:
        _merge_config(parser, args)
        _require(parser, args, *args.required)
        return args.func(args)
    except (DataError, TrainingError, OSError) as exc:
        print(f"lexgraph: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
