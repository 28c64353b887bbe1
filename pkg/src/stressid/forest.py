"""Random forest of CART trees (Gini impurity, bootstrap, random feature subspaces).

Everything random goes through :class:`~stressid.rng.SplitMix64`. Tree ``i``
owns the substream ``stream_seed(seed, i)``, so a forest is the same whatever
order or thread its trees are grown on.

Feature matrices are ``scipy.sparse`` CSR; a node's candidate columns are
densified for the split search, so implicit zeros take part like any other
value.
"""

import hashlib
import json
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import NamedTuple, Optional

import numpy as np
import scipy.sparse as sp

from stressid.corpus import LABELS
from stressid.errors import (
    CorruptModel,
    DimensionMismatch,
    EmptyNode,
    EmptyTrainingSet,
    IoError,
    VersionMismatch,
)
from stressid.features import SparseVector, Vocabulary, Weighting, to_csr
from stressid.rng import SplitMix64, stream_seed

FORMAT_VERSION = 1

# relative slack when comparing split scores; exact ties in rational
# arithmetic must not be broken by rounding noise
_TIE_RTOL = 1e-12


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 100
    max_depth: Optional[int] = None
    min_samples_split: int = 2
    features_per_split: object = "sqrt"  # "sqrt", "all" or a fixed int
    bootstrap: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.min_samples_split < 2:
            raise ValueError("min_samples_split must be >= 2")
        if self.max_depth is not None and self.max_depth < 0:
            raise ValueError("max_depth must be >= 0")
        rule = self.features_per_split
        if isinstance(rule, str):
            if rule not in ("sqrt", "all"):
                raise ValueError(f"unknown features_per_split rule {rule!r}")
        elif isinstance(rule, bool) or not isinstance(rule, int) or rule < 1:
            raise ValueError(f"features_per_split must be 'sqrt', 'all' or a positive int, got {rule!r}")

    def n_candidates(self, n_features):
        rule = self.features_per_split
        if rule == "all":
            return n_features
        if rule == "sqrt":
            return min(n_features, max(1, math.isqrt(n_features)))
        if rule > n_features:
            raise ValueError(f"features_per_split={rule} exceeds {n_features} features")
        return rule

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        known = {k: d[k] for k in cls.__dataclass_fields__ if k in d}
        return cls(**known)


def gini(class_counts):
    """``1 - sum(p_c ** 2)`` for the class counts of one node."""
    counts = np.asarray(class_counts, dtype=np.float64)
    total = counts.sum()
    if total <= 0:
        raise EmptyNode("gini of an empty node")
    p = counts / total
    return float(1.0 - np.dot(p, p))


def bootstrap_indices(n, rng):
    """``n`` draws with replacement from ``range(n)``."""
    return [rng.below(n) for _ in range(n)]


class Split(NamedTuple):
    feature: int
    threshold: float
    gain: float


def _as_csr(X):
    if sp.issparse(X):
        return sp.csr_matrix(X, dtype=np.float64)
    if isinstance(X, np.ndarray):
        return sp.csr_matrix(X.astype(np.float64))
    X = list(X)
    if X and isinstance(X[0], SparseVector):
        return to_csr(X)
    return sp.csr_matrix(np.asarray(X, dtype=np.float64))


def _as_class_indices(y, labels):
    lookup = {label: i for i, label in enumerate(labels)}
    out = np.empty(len(y), dtype=np.int64)
    for k, value in enumerate(y):
        if isinstance(value, str):
            out[k] = lookup[value]
        else:
            out[k] = int(value)
    return out


def _split_search(values, ys, features, n_classes):
    """Best split over a dense ``(m, k)`` block of candidate columns.

    Returns ``(column, threshold, gain)`` or ``None``.
    """
    m = values.shape[0]
    parent = np.bincount(ys, minlength=n_classes)
    parent_gini = 1.0 - float(np.dot(parent, parent)) / (m * m)

    order = np.argsort(values, axis=0, kind="stable")
    sorted_vals = np.take_along_axis(values, order, axis=0)
    onehot = ys[order][:, :, None] == np.arange(n_classes)
    left = np.cumsum(onehot, axis=0)[:-1].astype(np.float64)  # (m-1, k, C)
    right = parent[None, None, :] - left
    n_left = np.arange(1, m, dtype=np.float64)[:, None]
    n_right = m - n_left
    # weighted child gini = 1 - score / m
    score = (left * left).sum(axis=2) / n_left + (right * right).sum(axis=2) / n_right
    score[sorted_vals[1:] <= sorted_vals[:-1]] = -np.inf

    best = score.max(initial=-np.inf)
    if not np.isfinite(best):
        return None
    gain = parent_gini - (1.0 - best / m)
    if gain <= _TIE_RTOL:
        return None

    near = score >= best - _TIE_RTOL * m
    cols = np.flatnonzero(near.any(axis=0))
    col = cols[np.argmin(np.asarray(features)[cols])]
    row = int(np.argmax(near[:, col]))
    lo, hi = sorted_vals[row, col], sorted_vals[row + 1, col]
    threshold = (lo + hi) / 2.0
    if threshold >= hi:  # adjacent floats
        threshold = lo
    return int(col), float(threshold), float(gain)


def best_split(samples, X, y, candidate_features, n_classes=len(LABELS)):
    """Gini-optimal ``feature <= threshold`` split of the given samples.

    Candidate thresholds are midpoints between consecutive distinct values.
    Ties go to the lower feature index, then the lower threshold. Returns
    ``None`` when no split strictly lowers the weighted impurity.
    """
    X = _as_csr(X)
    samples = np.asarray(samples, dtype=np.int64)
    features = list(candidate_features)
    ys = _as_class_indices(y, LABELS)[samples]
    if len(samples) < 2 or not features:
        return None
    block = X[samples][:, features].toarray()
    found = _split_search(block, ys, features, n_classes)
    if found is None:
        return None
    col, threshold, gain = found
    return Split(features[col], threshold, gain)


@dataclass
class Node:
    counts: tuple
    feature: int = -1
    threshold: float = 0.0
    left: int = -1
    right: int = -1

    @property
    def is_leaf(self):
        return self.feature < 0

    @property
    def label_index(self):
        # first maximum, so ties go to the canonical label order
        return self.counts.index(max(self.counts))


@dataclass
class DecisionTree:
    """Nodes in preorder; ``nodes[0]`` is the root."""

    nodes: list
    n_features: int
    labels: tuple = LABELS

    def leaf_for(self, entries):
        node = self.nodes[0]
        while not node.is_leaf:
            if entries.get(node.feature, 0.0) <= node.threshold:
                node = self.nodes[node.left]
            else:
                node = self.nodes[node.right]
        return node

    @property
    def depth(self):
        depth = {0: 0}
        for i, node in enumerate(self.nodes):
            if not node.is_leaf:
                depth[node.left] = depth[node.right] = depth[i] + 1
        return max(depth.values())

    def to_dict(self):
        out = []
        for node in self.nodes:
            counts = [int(c) for c in node.counts]
            if node.is_leaf:
                out.append(
                    {"type": "leaf", "feature": None, "threshold": None, "left": None, "right": None,
                     "label": self.labels[node.label_index], "counts": counts}
                )
            else:
                out.append(
                    {"type": "split", "feature": node.feature, "threshold": node.threshold,
                     "left": node.left, "right": node.right, "label": None, "counts": counts}
                )
        return {"n_features": self.n_features, "nodes": out}

    @classmethod
    def from_dict(cls, d, labels):
        nodes = []
        for raw in d["nodes"]:
            counts = tuple(int(c) for c in raw["counts"])
            if raw["type"] == "leaf":
                nodes.append(Node(counts))
            elif raw["type"] == "split":
                nodes.append(Node(counts, int(raw["feature"]), float(raw["threshold"]), int(raw["left"]), int(raw["right"])))
            else:
                raise ValueError(f"unknown node type {raw['type']!r}")
        return cls(nodes, int(d["n_features"]), tuple(labels))


def _grow(X, y, samples, params, rng, n_classes):
    n_features = X.shape[1]
    k = params.n_candidates(n_features) if n_features else 0
    nodes = []
    # (samples, depth, parent, is_left); right child pushed first so the
    # left subtree is finished first and ids come out in preorder
    stack = [(samples, 0, -1, False)]
    while stack:
        idx, depth, parent, is_left = stack.pop()
        ys = y[idx]
        counts = np.bincount(ys, minlength=n_classes)
        node_id = len(nodes)
        node = Node(tuple(int(c) for c in counts))
        nodes.append(node)
        if parent >= 0:
            if is_left:
                nodes[parent].left = node_id
            else:
                nodes[parent].right = node_id

        if (
            np.count_nonzero(counts) <= 1
            or len(idx) < params.min_samples_split
            or (params.max_depth is not None and depth >= params.max_depth)
            or k == 0
        ):
            continue
        features = rng.sample(n_features, k)
        block = X[idx][:, features].toarray()
        found = _split_search(block, ys, features, n_classes)
        if found is None:
            continue
        col, threshold, _ = found
        node.feature = features[col]
        node.threshold = threshold
        go_left = block[:, col] <= threshold
        stack.append((idx[~go_left], depth + 1, node_id, False))
        stack.append((idx[go_left], depth + 1, node_id, True))
    return DecisionTree(nodes, n_features)


def train_tree(X, y, params, rng, samples=None, labels=LABELS):
    """Grow one unpruned CART tree.

    A fresh set of candidate features is drawn from ``rng`` at every node that
    is not already pure, too small or at the depth limit.
    """
    X = _as_csr(X)
    y = _as_class_indices(y, labels)
    if X.shape[0] != len(y):
        raise DimensionMismatch(f"{X.shape[0]} rows but {len(y)} labels")
    if len(y) == 0:
        raise EmptyTrainingSet("no training samples")
    if samples is None:
        samples = np.arange(len(y), dtype=np.int64)
    tree = _grow(X, y, np.asarray(samples, dtype=np.int64), params, rng, len(labels))
    tree.labels = tuple(labels)
    return tree


@dataclass
class Forest:
    trees: list
    params: ForestParams
    labels: tuple = LABELS
    fingerprint: Optional[tuple] = None  # (dim, sha256) of the vocabulary
    n_features: int = field(default=0)

    def votes(self, x):
        entries = _entries(x, self.n_features)
        counts = [0] * len(self.labels)
        for tree in self.trees:
            counts[tree.leaf_for(entries).label_index] += 1
        return counts

    def predict(self, X):
        """Labels and per-label vote counts for each row of ``X``."""
        labels, votes = [], []
        for entries in _rows(X, self.n_features):
            counts = [0] * len(self.labels)
            for tree in self.trees:
                counts[tree.leaf_for(entries).label_index] += 1
            votes.append(counts)
            labels.append(self.labels[int(np.argmax(counts))])
        return labels, votes


def _entries(x, dim):
    if isinstance(x, SparseVector):
        if x.dim != dim:
            raise DimensionMismatch(f"vector dim {x.dim} != model dim {dim}")
        return x.as_dict()
    if isinstance(x, dict):
        return x
    arr = np.asarray(x, dtype=np.float64).ravel()
    if arr.shape[0] != dim:
        raise DimensionMismatch(f"vector dim {arr.shape[0]} != model dim {dim}")
    nz = np.flatnonzero(arr)
    return dict(zip(nz.tolist(), arr[nz].tolist()))


def _rows(X, dim):
    if isinstance(X, (list, tuple)):
        for x in X:
            yield _entries(x, dim)
        return
    X = _as_csr(X)
    if X.shape[1] != dim:
        raise DimensionMismatch(f"matrix has {X.shape[1]} columns, model expects {dim}")
    for i in range(X.shape[0]):
        lo, hi = X.indptr[i], X.indptr[i + 1]
        yield dict(zip(X.indices[lo:hi].tolist(), X.data[lo:hi].tolist()))


def train_forest(X, y, params=ForestParams(), n_jobs=1, fingerprint=None, labels=LABELS):
    """Train ``params.n_trees`` trees on bootstrap resamples.

    The result depends only on the data and ``params``; ``n_jobs`` only
    changes how many trees are grown concurrently.
    """
    X = _as_csr(X)
    y = _as_class_indices(y, labels)
    if len(y) == 0:
        raise EmptyTrainingSet("no training samples")
    if X.shape[0] != len(y):
        raise DimensionMismatch(f"{X.shape[0]} rows but {len(y)} labels")
    missing = [labels[c] for c in range(len(labels)) if not np.any(y == c)]
    if missing:
        warnings.warn(f"training data has no samples of {missing}", stacklevel=2)
    n = len(y)

    def grow(i):
        rng = SplitMix64(stream_seed(params.seed, i))
        if params.bootstrap:
            samples = np.asarray(bootstrap_indices(n, rng), dtype=np.int64)
        else:
            samples = np.arange(n, dtype=np.int64)
        tree = _grow(X, y, samples, params, rng, len(labels))
        tree.labels = tuple(labels)
        return tree

    if n_jobs and n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            trees = list(pool.map(grow, range(params.n_trees)))
    else:
        trees = [grow(i) for i in range(params.n_trees)]
    return Forest(trees, params, tuple(labels), fingerprint, X.shape[1])


def predict_tree(tree, x):
    entries = _entries(x, tree.n_features)
    return tree.labels[tree.leaf_for(entries).label_index]


def predict_forest(forest, x):
    """Majority vote; returns ``(label, {label: votes})``."""
    counts = forest.votes(x)
    label = forest.labels[int(np.argmax(counts))]
    return label, dict(zip(forest.labels, counts))


def _canonical(doc):
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def model_to_dict(forest, vocab, weighting):
    if forest.n_features != vocab.dim:
        raise DimensionMismatch(f"forest has {forest.n_features} features, vocabulary {vocab.dim}")
    dim, digest = vocab.fingerprint()
    doc = {
        "format_version": FORMAT_VERSION,
        "weighting": Weighting(weighting).value,
        "vocabulary": vocab.to_dict(),
        "fingerprint": {"dim": dim, "sha256": digest},
        "label_order": list(forest.labels),
        "params": forest.params.to_dict(),
        "trees": [t.to_dict() for t in forest.trees],
    }
    doc["checksum"] = hashlib.sha256(_canonical(doc).encode("utf-8")).hexdigest()
    return doc


def save_model(forest, vocab, weighting, path):
    """Write a single JSON model file; identical models give identical bytes."""
    doc = model_to_dict(forest, vocab, weighting)
    text = json.dumps(doc, ensure_ascii=False, separators=(",", ":")) + "\n"
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoError(f"cannot write model to {path}: {exc}") from exc


def load_model(path):
    """Read a model file back as ``(forest, vocabulary, weighting)``.

    Raises IoError, VersionMismatch or CorruptModel. A vocabulary whose
    fingerprint disagrees with the trees is reported as CorruptModel.
    """
    if not os.path.isfile(path):
        raise IoError(f"no such model file: {path}")
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except (OSError, UnicodeDecodeError) as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CorruptModel(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise CorruptModel(f"{path}: top level is not an object")
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise VersionMismatch(f"{path}: format_version {version!r}, expected {FORMAT_VERSION}")
    stored = doc.pop("checksum", None)
    if stored != hashlib.sha256(_canonical(doc).encode("utf-8")).hexdigest():
        raise CorruptModel(f"{path}: checksum mismatch")
    try:
        vocab = Vocabulary.from_dict(doc["vocabulary"])
        labels = tuple(doc["label_order"])
        params = ForestParams.from_dict(doc["params"])
        trees = [DecisionTree.from_dict(t, labels) for t in doc["trees"]]
        weighting = Weighting(doc["weighting"])
        fp = (int(doc["fingerprint"]["dim"]), doc["fingerprint"]["sha256"])
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptModel(f"{path}: malformed model ({exc})") from exc
    if fp != vocab.fingerprint():
        raise CorruptModel(f"{path}: vocabulary fingerprint does not match the stored terms")
    for t in trees:
        _check_tree(t, vocab.dim, len(labels), path)
    if len(trees) != params.n_trees:
        raise CorruptModel(f"{path}: {len(trees)} trees but params say {params.n_trees}")
    return Forest(trees, params, labels, fp, vocab.dim), vocab, weighting


def _check_tree(tree, dim, n_labels, path):
    if tree.n_features != dim:
        raise CorruptModel(f"{path}: tree expects {tree.n_features} features, vocabulary has {dim}")
    n = len(tree.nodes)
    if n == 0:
        raise CorruptModel(f"{path}: empty tree")
    for i, node in enumerate(tree.nodes):
        if len(node.counts) != n_labels:
            raise CorruptModel(f"{path}: node {i} has {len(node.counts)} class counts")
        if node.is_leaf:
            continue
        # preorder: children strictly after their parent, so no cycles
        if not (0 <= node.feature < dim and i < node.left < n and i < node.right < n):
            raise CorruptModel(f"{path}: node {i} has out-of-range links")
