"""Relational GCN encoder (with GraphSAGE-style aggregation variants),
DistMult decoder, binary cross-entropy loss with hand-written reverse-mode
gradients, and the full-batch training loop."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .casegraph import CaseGraph, EdgeSplit, to_undirected
from .errors import GraphError, TrainingError

LAYER_KINDS = ("rgcn", "sage-mean", "sage-pool")
OPTIMIZERS = ("adam", "sgd")  # adam = adaptive-moment estimates


@dataclass
class LayerParams:
    kind: str  # one of LAYER_KINDS
    weights: dict[str, np.ndarray]  # relation -> W_r, (out, in) or (out, 2*in)
    self_weight: np.ndarray  # W_0, (out, in)


@dataclass
class RgcnModel:
    layers: list[LayerParams]
    relation_diagonals: dict[str, np.ndarray]
    relations: list[str]  # sorted; fixes parameter and checkpoint order
    input_dim: int
    hidden_dim: int
    embedding_dim: int
    task: str

    def parameter_arrays(self) -> list[np.ndarray]:
        """All parameters in the pinned order: per layer each relation's W_r
        (relations sorted) then W_0; finally the relation diagonals."""
        arrays: list[np.ndarray] = []
        for layer in self.layers:
            for rel in self.relations:
                arrays.append(layer.weights[rel])
            arrays.append(layer.self_weight)
        for rel in self.relations:
            arrays.append(self.relation_diagonals[rel])
        return arrays


@dataclass(frozen=True)
class TrainConfig:
    task: str
    epochs: int = 600
    learning_rate: float = 0.01
    hidden_dim: int = 16
    embedding_dim: int = 16
    negative_ratio: int = 1
    seed: int = 0
    optimizer: str = "adam"
    layer_kind: str = "rgcn"

    def __post_init__(self):
        if self.epochs < 1:
            raise GraphError("epochs must be >= 1")
        if self.learning_rate <= 0:
            raise GraphError("learning_rate must be > 0")
        if self.hidden_dim < 1 or self.embedding_dim < 1:
            raise GraphError("dims must be >= 1")
        if self.optimizer not in OPTIMIZERS:
            raise GraphError(f"optimizer must be one of {OPTIMIZERS}")
        if self.layer_kind not in LAYER_KINDS:
            raise GraphError(f"layer_kind must be one of {LAYER_KINDS}")


class _RelEdges(NamedTuple):
    src: np.ndarray  # int64 (E,)
    dst: np.ndarray
    inv_indeg: np.ndarray  # (N,), 1/|N_r(i)| with 0 for isolated nodes


def prepare_edges(
    edges_by_relation: dict[str, Sequence[tuple[int, int]]], n_nodes: int
) -> dict[str, _RelEdges]:
    prepared: dict[str, _RelEdges] = {}
    for rel, edges in edges_by_relation.items():
        if edges:
            arr = np.asarray(edges, dtype=np.int64)
            src, dst = arr[:, 0], arr[:, 1]
        else:
            src = dst = np.zeros(0, dtype=np.int64)
        indeg = np.bincount(dst, minlength=n_nodes).astype(np.float64)
        inv = np.zeros(n_nodes)
        nz = indeg > 0
        inv[nz] = 1.0 / indeg[nz]
        prepared[rel] = _RelEdges(src, dst, inv)
    return prepared


def _aggregate_mean(h: np.ndarray, re: _RelEdges) -> np.ndarray:
    agg = np.zeros_like(h)
    if re.src.size:
        np.add.at(agg, re.dst, h[re.src])
        agg *= re.inv_indeg[:, None]
    return agg


def _aggregate_max(h: np.ndarray, re: _RelEdges) -> tuple[np.ndarray, np.ndarray]:
    """Element-wise max over incoming neighbors; returns (agg, argmax source
    node per (node, dim), -1 where the neighborhood is empty)."""
    n, d = h.shape
    best = np.full((n, d), -np.inf)
    best_src = np.full((n, d), -1, dtype=np.int64)
    for s, t in zip(re.src.tolist(), re.dst.tolist()):
        row = h[s]
        better = row > best[t]
        if better.any():
            best[t, better] = row[better]
            best_src[t, better] = s
    empty = best_src == -1
    best[empty] = 0.0
    return best, best_src


@dataclass
class _LayerCache:
    h_in: np.ndarray
    z: np.ndarray
    aggregates: dict[str, np.ndarray]
    argmax_src: dict[str, np.ndarray]


def _forward(
    features: np.ndarray,
    rel_edges: dict[str, _RelEdges],
    model: RgcnModel,
    keep_cache: bool = False,
) -> tuple[np.ndarray, list[_LayerCache]]:
    if features.shape[1] != model.input_dim:
        raise GraphError(
            f"feature dimension mismatch: expected {model.input_dim}, "
            f"got {features.shape[1]}"
        )
    h = features
    caches: list[_LayerCache] = []
    last = len(model.layers) - 1
    for li, layer in enumerate(model.layers):
        z = h @ layer.self_weight.T
        aggregates: dict[str, np.ndarray] = {}
        argmax: dict[str, np.ndarray] = {}
        for rel in model.relations:
            re = rel_edges.get(rel)
            if re is None:
                re = _RelEdges(
                    np.zeros(0, dtype=np.int64),
                    np.zeros(0, dtype=np.int64),
                    np.zeros(h.shape[0]),
                )
            if layer.kind == "sage-pool":
                agg, arg = _aggregate_max(h, re)
                argmax[rel] = arg
            else:
                agg = _aggregate_mean(h, re)
            aggregates[rel] = agg
            if layer.kind == "rgcn":
                z += agg @ layer.weights[rel].T
            else:
                z += np.concatenate([h, agg], axis=1) @ layer.weights[rel].T
        if keep_cache:
            caches.append(_LayerCache(h, z, aggregates, argmax))
        h = np.maximum(z, 0.0) if li < last else z
    return h, caches


def rgcn_forward(graph, features: np.ndarray, model: RgcnModel) -> np.ndarray:
    """Node embeddings (N x embedding_dim). ``graph`` is a CaseGraph or a
    relation -> edge-list dict; hidden layers use ReLU, the output layer is
    linear."""
    edges = graph.edges if isinstance(graph, CaseGraph) else graph
    rel_edges = prepare_edges(
        {r: edges.get(r, []) for r in model.relations}, features.shape[0]
    )
    out, _ = _forward(features, rel_edges, model)
    return out


def sage_aggregate(
    h_self: Sequence[float], neighbors: Sequence[Sequence[float]], kind: str
) -> np.ndarray:
    """concat(h_self, AGG(neighbors)) with AGG = element-wise mean or max;
    an empty neighborhood aggregates to the zero vector."""
    h = np.asarray(h_self, dtype=np.float64)
    dim = h.shape[0]
    mats = [np.asarray(v, dtype=np.float64) for v in neighbors]
    for v in mats:
        if v.shape != (dim,):
            raise GraphError(f"neighbor vector of length {v.shape}, expected {dim}")
    if not mats:
        agg = np.zeros(dim)
    elif kind == "mean":
        agg = np.mean(mats, axis=0)
    elif kind == "pool":
        agg = np.max(mats, axis=0)
    else:
        raise GraphError(f"unknown aggregation kind {kind!r}")
    return np.concatenate([h, agg])


def distmult_score(e_s: np.ndarray, r_diag: np.ndarray, e_o: np.ndarray) -> float:
    """sum_k e_s[k] * r_diag[k] * e_o[k]."""
    e_s = np.asarray(e_s, dtype=np.float64)
    r_diag = np.asarray(r_diag, dtype=np.float64)
    e_o = np.asarray(e_o, dtype=np.float64)
    if not (e_s.shape == r_diag.shape == e_o.shape):
        raise GraphError(
            f"length mismatch: {e_s.shape}, {r_diag.shape}, {e_o.shape}"
        )
    return float(np.sum(e_s * r_diag * e_o))


def score_edges(
    embeddings: np.ndarray, diag: np.ndarray, edges: Sequence[tuple[int, int]]
) -> np.ndarray:
    if not len(edges):
        return np.zeros(0)
    arr = np.asarray(edges, dtype=np.int64)
    return np.sum(embeddings[arr[:, 0]] * diag * embeddings[arr[:, 1]], axis=1)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):  # saturates cleanly to 0/1
        return 1.0 / (1.0 + np.exp(-x))


@dataclass
class Grads:
    layers: list[dict]  # per layer: {"weights": {rel: dW_r}, "self_weight": dW_0}
    diagonals: dict[str, np.ndarray]

    def arrays(self, model: RgcnModel) -> list[np.ndarray]:
        arrays: list[np.ndarray] = []
        for layer_grad in self.layers:
            for rel in model.relations:
                arrays.append(layer_grad["weights"][rel])
            arrays.append(layer_grad["self_weight"])
        for rel in model.relations:
            arrays.append(self.diagonals[rel])
        return arrays


def loss_and_grads(
    model: RgcnModel,
    graph,
    features: np.ndarray,
    pos_edges: Sequence[tuple[int, int]],
    neg_edges: Sequence[tuple[int, int]],
) -> tuple[float, Grads]:
    """Mean sigmoid binary cross-entropy over DistMult scores of positive and
    negative edges, with gradients for every parameter group."""
    if not len(pos_edges) or not len(neg_edges):
        raise GraphError("loss needs nonempty positive and negative edge lists")
    edges_map = graph.edges if isinstance(graph, CaseGraph) else graph
    rel_edges = prepare_edges(
        {r: edges_map.get(r, []) for r in model.relations}, features.shape[0]
    )
    emb, caches = _forward(features, rel_edges, model, keep_cache=True)

    edges = list(pos_edges) + list(neg_edges)
    labels = np.concatenate(
        [np.ones(len(pos_edges)), np.zeros(len(neg_edges))]
    )
    arr = np.asarray(edges, dtype=np.int64)
    diag = model.relation_diagonals[model.task]
    # softplus(s) - y*s == -[y log p + (1-y) log(1-p)] for p = sigmoid(s);
    # non-finite values raise below instead of warning here
    with np.errstate(invalid="ignore", over="ignore"):
        scores = np.sum(emb[arr[:, 0]] * diag * emb[arr[:, 1]], axis=1)
        loss = float(np.mean(np.logaddexp(0.0, scores) - labels * scores))
    if not math.isfinite(loss):
        raise TrainingError(f"non-finite loss {loss}")

    g_scores = (_sigmoid(scores) - labels) / scores.shape[0]

    d_emb = np.zeros_like(emb)
    src_e, dst_e = arr[:, 0], arr[:, 1]
    np.add.at(d_emb, src_e, g_scores[:, None] * diag * emb[dst_e])
    np.add.at(d_emb, dst_e, g_scores[:, None] * diag * emb[src_e])
    d_diag_task = np.sum(g_scores[:, None] * emb[src_e] * emb[dst_e], axis=0)
    d_diagonals = {
        rel: (d_diag_task if rel == model.task else np.zeros_like(v))
        for rel, v in model.relation_diagonals.items()
    }

    layer_grads: list[dict] = []
    d_h = d_emb
    last = len(model.layers) - 1
    for li in range(last, -1, -1):
        layer = model.layers[li]
        cache = caches[li]
        d_z = d_h if li == last else d_h * (cache.z > 0)
        h_in = cache.h_in
        in_dim = h_in.shape[1]

        d_w0 = d_z.T @ h_in
        d_h_in = d_z @ layer.self_weight
        d_weights: dict[str, np.ndarray] = {}
        for rel in model.relations:
            agg = cache.aggregates[rel]
            re = rel_edges.get(rel)
            if layer.kind == "rgcn":
                d_weights[rel] = d_z.T @ agg
                d_agg = d_z @ layer.weights[rel]
            else:
                concat = np.concatenate([h_in, agg], axis=1)
                d_weights[rel] = d_z.T @ concat
                d_concat = d_z @ layer.weights[rel]
                d_h_in += d_concat[:, :in_dim]
                d_agg = d_concat[:, in_dim:]
            if re is not None and re.src.size:
                if layer.kind == "sage-pool":
                    arg = cache.argmax_src[rel]
                    valid = arg >= 0
                    rows = arg[valid]
                    cols = np.nonzero(valid)[1]
                    np.add.at(d_h_in, (rows, cols), d_agg[valid])
                else:
                    np.add.at(
                        d_h_in,
                        re.src,
                        d_agg[re.dst] * re.inv_indeg[re.dst][:, None],
                    )
        layer_grads.append({"weights": d_weights, "self_weight": d_w0})
        d_h = d_h_in

    layer_grads.reverse()
    return loss, Grads(layers=layer_grads, diagonals=d_diagonals)


def _glorot(rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    if len(shape) == 2:
        fan_out, fan_in = shape
    else:
        fan_in = fan_out = shape[0]
    a = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-a, a, size=shape)


def init_model(
    input_dim: int, relations: Sequence[str], config: TrainConfig
) -> RgcnModel:
    """Two layers (input -> hidden -> embedding) with seeded Glorot-uniform
    parameters, created in the same pinned order used by checkpoints."""
    rng = np.random.Generator(np.random.PCG64(config.seed))
    relations = sorted(relations)
    widen = 1 if config.layer_kind == "rgcn" else 2
    dims = [(config.hidden_dim, input_dim), (config.embedding_dim, config.hidden_dim)]
    layers: list[LayerParams] = []
    for out_dim, in_dim in dims:
        weights = {
            rel: _glorot(rng, (out_dim, widen * in_dim)) for rel in relations
        }
        self_weight = _glorot(rng, (out_dim, in_dim))
        layers.append(LayerParams(config.layer_kind, weights, self_weight))
    diagonals = {rel: _glorot(rng, (config.embedding_dim,)) for rel in relations}
    return RgcnModel(
        layers=layers,
        relation_diagonals=diagonals,
        relations=relations,
        input_dim=input_dim,
        hidden_dim=config.hidden_dim,
        embedding_dim=config.embedding_dim,
        task=config.task,
    )


@dataclass
class TrainReport:
    relation: str
    losses: list[float] = field(default_factory=list)
    auc_history: list[tuple[int, float]] = field(default_factory=list)
    final_test_auc: float = float("nan")

    def to_json(self) -> dict:
        return {
            "relation": self.relation,
            "losses": self.losses,
            "auc_history": [[e, a] for e, a in self.auc_history],
            "final_test_auc": self.final_test_auc,
        }


def train(
    graph: CaseGraph,
    features: np.ndarray,
    split: EdgeSplit,
    config: TrainConfig,
) -> tuple[RgcnModel, TrainReport]:
    """Full-batch training on the split's train edges; message passing runs
    over the undirected train positives only, so test edges stay unseen.
    Loss is recorded every epoch and test AUC every 50 epochs."""
    from .metrics import roc_auc  # local import; metrics also imports gnn helpers

    if split.relation != config.task:
        raise GraphError(
            f"split is for {split.relation!r} but config trains {config.task!r}"
        )
    message_edges = {config.task: to_undirected(split.train_pos)}
    model = init_model(features.shape[1], [config.task], config)

    params = model.parameter_arrays()
    if config.optimizer == "adam":
        m_state = [np.zeros_like(p) for p in params]
        v_state = [np.zeros_like(p) for p in params]
        beta1, beta2, eps = 0.9, 0.999, 1e-8

    report = TrainReport(relation=config.task)
    for epoch in range(1, config.epochs + 1):
        try:
            loss, grads = loss_and_grads(
                model, message_edges, features, split.train_pos, split.train_neg
            )
        except TrainingError as exc:
            raise TrainingError(f"epoch {epoch}: {exc}") from exc
        report.losses.append(loss)

        grad_arrays = grads.arrays(model)
        if config.optimizer == "sgd":
            for p, g in zip(params, grad_arrays):
                p -= config.learning_rate * g
        else:
            for i, (p, g) in enumerate(zip(params, grad_arrays)):
                m_state[i] = beta1 * m_state[i] + (1 - beta1) * g
                v_state[i] = beta2 * v_state[i] + (1 - beta2) * g * g
                m_hat = m_state[i] / (1 - beta1**epoch)
                v_hat = v_state[i] / (1 - beta2**epoch)
                p -= config.learning_rate * m_hat / (np.sqrt(v_hat) + eps)

        if epoch % 50 == 0 or epoch == config.epochs:
            if split.test_pos and split.test_neg:
                emb, _ = _forward(
                    features,
                    prepare_edges(message_edges, features.shape[0]),
                    model,
                )
                diag = model.relation_diagonals[config.task]
                auc = roc_auc(
                    score_edges(emb, diag, split.test_pos).tolist(),
                    score_edges(emb, diag, split.test_neg).tolist(),
                )
                report.auc_history.append((epoch, auc))

    if report.auc_history:
        report.final_test_auc = report.auc_history[-1][1]
    return model, report


# ---------------------------------------------------------------------------
# Checkpoint format: one JSON manifest line, then little-endian float64
# parameter blocks in the pinned order (per layer: each relation's W_r
# row-major, then W_0; finally the relation diagonals).


def save_model(model: RgcnModel, path, extra: dict | None = None) -> None:
    manifest = {
        "input_dim": model.input_dim,
        "hidden_dim": model.hidden_dim,
        "embedding_dim": model.embedding_dim,
        "relations": model.relations,
        "task": model.task,
        "layer_kinds": [layer.kind for layer in model.layers],
        "extra": extra or {},
    }
    with open(path, "wb") as fh:
        fh.write(json.dumps(manifest, ensure_ascii=False).encode("utf-8"))
        fh.write(b"\n")
        for arr in model.parameter_arrays():
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_model(path) -> tuple[RgcnModel, dict]:
    with open(path, "rb") as fh:
        manifest = json.loads(fh.readline().decode("utf-8"))
        relations = list(manifest["relations"])
        dims = [
            (manifest["hidden_dim"], manifest["input_dim"]),
            (manifest["embedding_dim"], manifest["hidden_dim"]),
        ]
        layers: list[LayerParams] = []
        for kind, (out_dim, in_dim) in zip(manifest["layer_kinds"], dims):
            widen = 1 if kind == "rgcn" else 2
            weights = {}
            for rel in relations:
                shape = (out_dim, widen * in_dim)
                weights[rel] = _read_block(fh, shape)
            self_weight = _read_block(fh, (out_dim, in_dim))
            layers.append(LayerParams(kind, weights, self_weight))
        diagonals = {
            rel: _read_block(fh, (manifest["embedding_dim"],)) for rel in relations
        }
    model = RgcnModel(
        layers=layers,
        relation_diagonals=diagonals,
        relations=relations,
        input_dim=manifest["input_dim"],
        hidden_dim=manifest["hidden_dim"],
        embedding_dim=manifest["embedding_dim"],
        task=manifest["task"],
    )
    return model, manifest.get("extra", {})


def _read_block(fh, shape: tuple[int, ...]) -> np.ndarray:
    count = int(np.prod(shape))
    data = fh.read(count * 8)
    if len(data) != count * 8:
        raise GraphError("model checkpoint truncated")
    return np.frombuffer(data, dtype="<f8").reshape(shape).copy()
