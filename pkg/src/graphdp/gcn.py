"""Two-layer graph convolutional network with hand-written gradients.

Propagation uses ``D^-1/2 (A + I) D^-1/2``. Both tasks share the encoder
``Z = A_hat drop(relu(A_hat X W1 + b1)) W2 + b2``; node classification reads
``Z`` as logits, link prediction scores a pair by ``<z_u, z_v>``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.special import expit
from scipy.stats import rankdata

from .dp import make_rng
from .graph import Graph, sample_non_edges


class GcnError(ValueError):
    pass


@dataclass(frozen=True)
class GcnConfig:
    hidden_dim: int = 256
    dropout: float = 0.25
    learning_rate: float = 0.01
    layers: int = 2
    split: tuple = (0.8, 0.1, 0.1)
    epochs: int = 200
    patience: int = 50
    out_dim: int = 64  # link-prediction embedding width
    degree_buckets: int = 16
    weight_decay: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if abs(sum(self.split) - 1) > 1e-9:
            raise GcnError("split fractions must sum to 1")
        if self.layers != 2:
            raise GcnError("only two-layer networks are supported")
        if not 0 <= self.dropout < 1:
            raise GcnError("dropout must lie in [0, 1)")


def normalized_adjacency(n: int, edges: np.ndarray) -> sp.csr_matrix:
    u, v = edges[:, 0], edges[:, 1]
    rows = np.concatenate([u, v, np.arange(n)])
    cols = np.concatenate([v, u, np.arange(n)])
    a = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    d = 1.0 / np.sqrt(np.asarray(a.sum(axis=1)).ravel())
    return sp.diags(d) @ a @ sp.diags(d)


def degree_bucket_features(deg: np.ndarray, buckets: int) -> np.ndarray:
    b = np.minimum(np.floor(np.log2(deg + 1)).astype(int), buckets - 1)
    out = np.zeros((len(deg), buckets))
    out[np.arange(len(deg)), b] = 1.0
    return out


def input_features(g: Graph, edges: np.ndarray, cfg: GcnConfig, identity_if_bare: bool) -> np.ndarray:
    deg = np.bincount(edges.ravel(), minlength=g.n) if len(edges) else np.zeros(g.n, int)
    parts = []
    if g.features is not None and g.features.shape[1]:
        parts.append(g.features.astype(float))
    elif identity_if_bare:
        parts.append(np.eye(g.n))
    parts.append(degree_bucket_features(deg, cfg.degree_buckets))
    return np.hstack(parts)


def glorot(rng, fan_in, fan_out):
    lim = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-lim, lim, size=(fan_in, fan_out))


class GCN:
    """Parameters plus forward/backward passes for a fixed propagation matrix."""

    def __init__(self, a_hat, x, hidden: int, out: int, rng):
        self.a_hat = a_hat
        self.ax = np.asarray(a_hat @ x)
        self.params = {
            "W1": glorot(rng, x.shape[1], hidden),
            "b1": np.zeros(hidden),
            "W2": glorot(rng, hidden, out),
            "b2": np.zeros(out),
        }

    def forward(self, mask=None):
        p = self.params
        z1 = self.ax @ p["W1"] + p["b1"]
        h = np.maximum(z1, 0.0)
        hd = h if mask is None else h * mask
        hw = hd @ p["W2"]
        z = np.asarray(self.a_hat @ hw) + p["b2"]
        return z, (z1, hd, mask)

    def backward(self, dz, cache):
        z1, hd, mask = cache
        p = self.params
        grads = {"b2": dz.sum(axis=0)}
        dhw = np.asarray(self.a_hat.T @ dz)
        grads["W2"] = hd.T @ dhw
        dh = dhw @ p["W2"].T
        if mask is not None:
            dh = dh * mask
        dz1 = dh * (z1 > 0)
        grads["W1"] = self.ax.T @ dz1
        grads["b1"] = dz1.sum(axis=0)
        return grads


def dropout_mask(rng, shape, rate):
    if rate == 0:
        return None
    return (rng.random(shape) >= rate) / (1.0 - rate)


def softmax_xent(z, y, idx):
    """Mean cross-entropy over rows ``idx`` and its gradient w.r.t. ``z``."""
    zi = z[idx]
    zi = zi - zi.max(axis=1, keepdims=True)
    e = np.exp(zi)
    prob = e / e.sum(axis=1, keepdims=True)
    loss = -np.mean(np.log(prob[np.arange(len(idx)), y[idx]] + 1e-300))
    dz = np.zeros_like(z)
    prob[np.arange(len(idx)), y[idx]] -= 1
    dz[idx] = prob / len(idx)
    return loss, dz


def pair_bce(z, pairs, targets):
    """Mean logistic loss of inner-product scores for ``pairs`` and its gradient."""
    u, v = pairs[:, 0], pairs[:, 1]
    s = np.einsum("ij,ij->i", z[u], z[v])
    loss = np.mean(np.logaddexp(0, s) - targets * s)
    ds = (expit(s) - targets) / len(s)
    dz = np.zeros_like(z)
    np.add.at(dz, u, ds[:, None] * z[v])
    np.add.at(dz, v, ds[:, None] * z[u])
    return loss, dz


class Adam:
    def __init__(self, params, lr, b1=0.9, b2=0.999, eps=1e-8, weight_decay=0.0):
        self.lr, self.b1, self.b2, self.eps, self.wd = lr, b1, b2, eps, weight_decay
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params, grads):
        self.t += 1
        for k, g in grads.items():
            if self.wd:
                g = g + self.wd * params[k]
            self.m[k] = self.b1 * self.m[k] + (1 - self.b1) * g
            self.v[k] = self.b2 * self.v[k] + (1 - self.b2) * g * g
            mh = self.m[k] / (1 - self.b1**self.t)
            vh = self.v[k] / (1 - self.b2**self.t)
            params[k] -= self.lr * mh / (np.sqrt(vh) + self.eps)


def auroc(scores, targets) -> float:
    """Area under the ROC curve via the rank-sum statistic (ties averaged)."""
    scores = np.asarray(scores, dtype=float)
    targets = np.asarray(targets).astype(bool)
    npos, nneg = targets.sum(), (~targets).sum()
    if npos == 0 or nneg == 0:
        raise GcnError("AUROC needs both positive and negative items")
    r = rankdata(scores)
    return float((r[targets].sum() - npos * (npos + 1) / 2) / (npos * nneg))


def macro_f1(y_true, y_pred) -> float:
    y_true, y_pred = np.asarray(y_true), np.asarray(y_pred)
    scores = []
    for c in np.union1d(y_true, y_pred):
        tp = np.sum((y_pred == c) & (y_true == c))
        fp = np.sum((y_pred == c) & (y_true != c))
        fn = np.sum((y_pred != c) & (y_true == c))
        scores.append(2 * tp / (2 * tp + fp + fn) if tp + fp + fn else 0.0)
    return float(np.mean(scores))


@dataclass
class NodeSplit:
    train: np.ndarray
    val: np.ndarray
    test: np.ndarray


@dataclass
class LinkSplit:
    val_pos: np.ndarray
    val_neg: np.ndarray
    test_pos: np.ndarray
    test_neg: np.ndarray

    def held_out_keys(self, n: int) -> np.ndarray:
        pairs = np.concatenate([self.val_pos, self.test_pos, self.val_neg, self.test_neg])
        return np.sort(pairs, axis=1) @ np.array([n, 1])


@dataclass
class GcnResult:
    value: float
    metric: str
    split: object
    history: list = field(default_factory=list)


def _fractions(count, split):
    n_val = int(round(split[1] * count))
    n_test = int(round(split[2] * count))
    return count - n_val - n_test, n_val, n_test


def node_split(labels: np.ndarray, cfg: GcnConfig, rng) -> NodeSplit:
    labelled = np.flatnonzero(labels >= 0)
    perm = rng.permutation(labelled)
    n_tr, n_val, _ = _fractions(len(perm), cfg.split)
    return NodeSplit(np.sort(perm[:n_tr]), np.sort(perm[n_tr : n_tr + n_val]), np.sort(perm[n_tr + n_val :]))


def link_split(g: Graph, cfg: GcnConfig, rng) -> LinkSplit:
    perm = rng.permutation(g.m)
    _, n_val, n_test = _fractions(g.m, cfg.split)
    val_pos = g.edges[perm[:n_val]]
    test_pos = g.edges[perm[n_val : n_val + n_test]]
    neg = sample_non_edges(g.n, g.edge_keys(), n_val + n_test, rng)
    return LinkSplit(val_pos, neg[:n_val], test_pos, neg[n_val:])


def _train(model: GCN, loss_fn, eval_fn, cfg: GcnConfig, rng, hidden_shape):
    opt = Adam(model.params, cfg.learning_rate, weight_decay=cfg.weight_decay)
    best, best_params, since, history = -np.inf, None, 0, []
    for _ in range(cfg.epochs):
        mask = dropout_mask(rng, hidden_shape, cfg.dropout)
        z, cache = model.forward(mask)
        loss, dz = loss_fn(z, rng)
        opt.step(model.params, model.backward(dz, cache))
        z_eval, _ = model.forward(None)
        score = eval_fn(z_eval)
        history.append((float(loss), score))
        if score > best:
            best, since = score, 0
            best_params = {k: v.copy() for k, v in model.params.items()}
        else:
            since += 1
            if since >= cfg.patience:
                break
    if best_params is not None:
        model.params = best_params
    return history


def gcn_train_eval(
    g: Graph,
    task: str,
    cfg: GcnConfig = GcnConfig(),
    fixed_test_set=None,
) -> GcnResult:
    """Train on ``g`` and return test AUROC (link prediction) or macro F1 (node classification).

    ``fixed_test_set`` is the split returned by an earlier call on the original
    graph; passing it evaluates a private graph on exactly the same items.
    """
    rng = make_rng(cfg.seed)
    if task == "node-classification":
        return _node_classification(g, cfg, fixed_test_set, rng)
    if task == "link-prediction":
        return _link_prediction(g, cfg, fixed_test_set, rng)
    raise GcnError(f"unknown task {task!r}")


def _node_classification(g, cfg, split, rng):
    if g.labels is None:
        raise GcnError("node classification needs labels")
    if g.features is None:
        raise GcnError("node classification needs node features")
    y = g.labels
    split = split if split is not None else node_split(y, cfg, rng)
    if len(split.test) == 0 or len(split.train) == 0:
        raise GcnError("degenerate split: empty train or test set")
    if split.test.max() >= g.n:
        raise GcnError("fixed test set refers to nodes outside the graph")
    x = input_features(g, g.edges, cfg, identity_if_bare=False)
    a_hat = normalized_adjacency(g.n, g.edges)
    n_classes = int(y.max()) + 1
    model = GCN(a_hat, x, cfg.hidden_dim, n_classes, rng)
    val = split.val if len(split.val) else split.train

    def loss_fn(z, _rng):
        return softmax_xent(z, y, split.train)

    def eval_fn(z):
        return macro_f1(y[val], z[val].argmax(axis=1))

    hist = _train(model, loss_fn, eval_fn, cfg, rng, (g.n, cfg.hidden_dim))
    z, _ = model.forward(None)
    return GcnResult(macro_f1(y[split.test], z[split.test].argmax(axis=1)), "f1", split, hist)


def _link_prediction(g, cfg, split: Optional[LinkSplit], rng):
    split = split if split is not None else link_split(g, cfg, rng)
    if len(split.test_pos) == 0 or len(split.test_neg) == 0:
        raise GcnError("degenerate test set: need positive and negative pairs")
    held = split.held_out_keys(g.n)
    keep = ~np.isin(g.edge_keys(), held)
    train_edges = g.edges[keep]
    if len(train_edges) == 0:
        raise GcnError("no training edges left")
    x = input_features(g, train_edges, cfg, identity_if_bare=True)
    a_hat = normalized_adjacency(g.n, train_edges)
    model = GCN(a_hat, x, cfg.hidden_dim, cfg.out_dim, rng)
    forbid = np.concatenate([g.edge_keys(), held])
    n_neg = min(len(train_edges), g.n * (g.n - 1) // 2 - len(np.unique(forbid)))
    val_pairs = np.concatenate([split.val_pos, split.val_neg])
    val_t = np.r_[np.ones(len(split.val_pos)), np.zeros(len(split.val_neg))]

    def loss_fn(z, r):
        neg = sample_non_edges(g.n, forbid, n_neg, r)
        pairs = np.concatenate([train_edges, neg])
        t = np.r_[np.ones(len(train_edges)), np.zeros(len(neg))]
        return pair_bce(z, pairs, t)

    def score(z, pairs):
        return np.einsum("ij,ij->i", z[pairs[:, 0]], z[pairs[:, 1]])

    def eval_fn(z):
        if len(split.val_pos) == 0 or len(split.val_neg) == 0:
            return 0.0
        return auroc(score(z, val_pairs), val_t)

    hist = _train(model, loss_fn, eval_fn, cfg, rng, (g.n, cfg.hidden_dim))
    z, _ = model.forward(None)
    test_pairs = np.concatenate([split.test_pos, split.test_neg])
    t = np.r_[np.ones(len(split.test_pos)), np.zeros(len(split.test_neg))]
    return GcnResult(auroc(score(z, test_pairs), t), "auroc", split, hist)
