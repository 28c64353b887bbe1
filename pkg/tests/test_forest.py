import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import oracle_best_split, oracle_predict, oracle_tree

from stressid.corpus import LABELS, NON_STRESSED, STRESSED, synthetic_split
from stressid.errors import CorruptModel, DimensionMismatch, EmptyNode, EmptyTrainingSet, IoError, VersionMismatch
from stressid.features import PAPER_CONFIGS, SparseVector, fit_vocabulary, to_csr, transform_corpus, vectorize
from stressid.forest import (
    Forest,
    ForestParams,
    best_split,
    bootstrap_indices,
    gini,
    load_model,
    predict_forest,
    predict_tree,
    save_model,
    train_forest,
    train_tree,
)
from stressid.metrics import compute_metrics, confusion
from stressid.rng import SplitMix64

N, S = NON_STRESSED, STRESSED
ALL = ForestParams(n_trees=1, bootstrap=False, features_per_split="all")


def test_gini_values():
    assert gini([5, 5]) == 0.5
    assert gini([4, 0]) == 0.0
    assert gini([3, 1]) == 0.375
    with pytest.raises(EmptyNode):
        gini([0, 0])


@given(st.lists(st.integers(0, 50), min_size=2, max_size=4).filter(lambda c: sum(c) > 0))
def test_gini_bounds(counts):
    g = gini(counts)
    assert -1e-15 <= g <= 1 - 1 / len(counts) + 1e-15
    assert (abs(g) < 1e-15) == (sum(1 for c in counts if c) == 1)


def test_bootstrap_indices():
    assert bootstrap_indices(1, SplitMix64(5)) == [0]
    assert bootstrap_indices(50, SplitMix64(9)) == bootstrap_indices(50, SplitMix64(9))
    idx = bootstrap_indices(1000, SplitMix64(42))
    assert len(idx) == 1000 and all(0 <= i < 1000 for i in idx)
    assert max(np.bincount(idx)) <= 10
    assert abs(len(set(idx)) / 1000 - (1 - 1 / math.e)) < 0.05


def test_best_split_binary_feature():
    X = [[0.0], [0.0], [1.0], [1.0]]
    split = best_split([0, 1, 2, 3], X, [N, N, S, S], [0])
    assert split.feature == 0 and split.threshold == 0.5
    assert split.gain == pytest.approx(0.5)


def test_best_split_none_when_constant():
    X = [[1.0, 0.0]] * 4
    assert best_split([0, 1, 2, 3], X, [N, S, N, S], [0, 1]) is None


def test_best_split_tie_lowest_feature():
    X = [[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [1.0, 1.0, 1.0], [1.0, 1.0, 1.0]]
    assert best_split([0, 1, 2, 3], X, [N, N, S, S], [2, 1]).feature == 1
    assert best_split([0, 1, 2, 3], X, [N, N, S, S], [0, 1, 2]).feature == 0


def test_best_split_sparse_zeros_and_duplicates():
    # implicit zeros take part; duplicated samples count twice
    X = to_csr([SparseVector(2, (1,), (0.3,)), SparseVector(2), SparseVector(2, (1,), (0.9,))])
    split = best_split([0, 1, 2, 2], X, [S, N, S], [0, 1])
    assert split.feature == 1 and split.threshold == pytest.approx(0.15)


@settings(max_examples=150, deadline=None)
@given(st.integers(2, 8), st.integers(1, 4), st.data())
def test_best_split_matches_oracle(n, f, data):
    rows = [[float(data.draw(st.integers(0, 3))) for _ in range(f)] for _ in range(n)]
    labels = [data.draw(st.sampled_from(LABELS)) for _ in range(n)]
    got = best_split(list(range(n)), rows, labels, list(range(f)))
    want = oracle_best_split(rows, labels)
    if want is None:
        assert got is None
    else:
        assert (got.feature, got.threshold) == (want[0], float(want[1]))
        assert got.gain > 0


def _predict_all(tree, rows):
    return [predict_tree(tree, np.array(r)) for r in rows]


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 8), st.integers(1, 4), st.data())
def test_tree_matches_oracle_binary(n, f, data):
    rows = [[float(data.draw(st.integers(0, 1))) for _ in range(f)] for _ in range(n)]
    labels = [data.draw(st.sampled_from(LABELS)) for _ in range(n)]
    tree = train_tree(rows, labels, ALL, SplitMix64(0))
    oracle = oracle_tree(rows, labels)
    grid = [list(map(float, bits)) for bits in itertools.product([0, 1], repeat=f)]
    assert _predict_all(tree, grid) == [oracle_predict(oracle, r) for r in grid]


def test_tree_separable_depth_one():
    X = [[0.0], [0.0], [1.0], [1.0]]
    tree = train_tree(X, [N, N, S, S], ALL, SplitMix64(1))
    assert tree.depth == 1 and len(tree.nodes) == 3
    assert _predict_all(tree, X) == [N, N, S, S]
    assert predict_tree(tree, SparseVector(1)) == N
    assert predict_tree(tree, SparseVector(1, (0,), (1.0,))) == S


def test_tree_single_class_and_conflicts():
    tree = train_tree([[0.0], [1.0]], [S, S], ALL, SplitMix64(1))
    assert len(tree.nodes) == 1 and predict_tree(tree, np.array([5.0])) == S
    tie = train_tree([[1.0], [1.0]], [S, N], ALL, SplitMix64(1))
    assert len(tie.nodes) == 1 and predict_tree(tie, np.array([1.0])) == N
    majority = train_tree([[1.0]] * 3, [S, N, S], ALL, SplitMix64(1))
    assert predict_tree(majority, np.array([1.0])) == S


def test_tree_errors():
    with pytest.raises(DimensionMismatch):
        train_tree([[0.0], [1.0]], [N], ALL, SplitMix64(0))
    tree = train_tree([[0.0, 1.0], [1.0, 0.0]], [N, S], ALL, SplitMix64(0))
    with pytest.raises(DimensionMismatch):
        predict_tree(tree, SparseVector(3))
    with pytest.raises(EmptyTrainingSet):
        train_forest(np.zeros((0, 2)), [], ALL)


def test_depth_and_min_samples_limits():
    rng = np.random.default_rng(0)
    X = rng.integers(0, 2, size=(60, 6)).astype(float)
    y = [LABELS[int(v)] for v in rng.integers(0, 2, size=60)]
    stump = train_tree(X, y, ForestParams(max_depth=1, features_per_split="all"), SplitMix64(0))
    assert stump.depth <= 1
    coarse = train_tree(X, y, ForestParams(min_samples_split=30, features_per_split="all"), SplitMix64(0))
    for node in coarse.nodes:
        if not node.is_leaf:
            assert sum(node.counts) >= 30


def _check_strict_gains(tree):
    for node in tree.nodes:
        if node.is_leaf:
            continue
        left, right = tree.nodes[node.left], tree.nodes[node.right]
        children = (sum(left.counts) * gini(left.counts) + sum(right.counts) * gini(right.counts)) / sum(node.counts)
        assert children < gini(node.counts)


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 30), st.integers(1, 5), st.data())
def test_accepted_splits_strictly_improve(n, f, data):
    rows = sorted({tuple(float(data.draw(st.integers(0, 4))) for _ in range(f)) for _ in range(n)})
    labels = [data.draw(st.sampled_from(LABELS)) for _ in rows]
    _check_strict_gains(train_tree(rows, labels, ForestParams(bootstrap=False, features_per_split="all"), SplitMix64(3)))


def test_xor_stops_without_improving_split():
    # no single threshold lowers impurity, so greedy growth stops at the root
    tree = train_tree([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]], [N, S, S, N], ALL, SplitMix64(0))
    assert len(tree.nodes) == 1


@pytest.mark.parametrize("fc", PAPER_CONFIGS, ids=lambda fc: fc.slug)
def test_memorization_on_text(fc):
    corpus = synthetic_split(300, noise_rate=0.05, seed=21)
    vocab = fit_vocabulary(corpus, fc.analyzer)
    vectors = transform_corpus(corpus, vocab, fc.weighting)
    seen = {}
    for v, label in zip(vectors, corpus.labels):
        seen.setdefault(v, set()).add(label)
    keep = [(v, next(iter(ls))) for v, ls in seen.items() if len(ls) == 1]
    X, y = [v for v, _ in keep], [label for _, label in keep]
    tree = train_tree(X, y, ForestParams(bootstrap=False, features_per_split="all"), SplitMix64(0))
    assert [predict_tree(tree, v) for v in X] == y
    _check_strict_gains(tree)


def test_sqrt_rule():
    p = ForestParams()
    assert p.n_candidates(864) == 29
    assert p.n_candidates(1) == 1 and p.n_candidates(3) == 1
    assert ForestParams(features_per_split="all").n_candidates(50) == 50
    assert ForestParams(features_per_split=7).n_candidates(50) == 7
    with pytest.raises(ValueError):
        ForestParams(features_per_split=7).n_candidates(5)
    for bad in [{"n_trees": 0}, {"min_samples_split": 1}, {"features_per_split": "log"}]:
        with pytest.raises(ValueError):
            ForestParams(**bad)


@pytest.fixture(scope="module")
def text_data():
    train = synthetic_split(200, noise_rate=0.05, seed=1)
    test = synthetic_split(100, noise_rate=0.05, seed=2)
    fc = PAPER_CONFIGS[0]
    vocab = fit_vocabulary(train, fc.analyzer)
    X = to_csr(transform_corpus(train, vocab, fc.weighting), vocab.dim)
    Xt = to_csr(transform_corpus(test, vocab, fc.weighting), vocab.dim)
    return train, test, vocab, fc, X, Xt


def test_degenerate_forest_equals_tree(text_data):
    train, _, _, _, X, Xt = text_data
    forest = train_forest(X, train.labels, ForestParams(n_trees=1, bootstrap=False, features_per_split="all", seed=4))
    tree = train_tree(X, train.labels, ForestParams(features_per_split="all"), SplitMix64(0))
    labels, votes = forest.predict(Xt)
    rows = [dict(zip(Xt[i].indices.tolist(), Xt[i].data.tolist())) for i in range(Xt.shape[0])]
    assert labels == [predict_tree(tree, r) for r in rows]
    assert all(sum(v) == 1 for v in votes)


def test_forest_learns_synthetic(text_data):
    train, test, _, _, X, Xt = text_data
    forest = train_forest(X, train.labels, ForestParams(n_trees=50, seed=42))
    labels, votes = forest.predict(Xt)
    assert compute_metrics(confusion(test.labels, labels)).macro["f1"] >= 0.95
    assert all(sum(v) == 50 for v in votes)


def test_forest_thread_invariance(text_data, tmp_path):
    train, _, vocab, fc, X, _ = text_data
    params = ForestParams(n_trees=12, seed=7)
    a = train_forest(X, train.labels, params, n_jobs=1)
    b = train_forest(X, train.labels, params, n_jobs=4)
    save_model(a, vocab, fc.weighting, tmp_path / "a.json")
    save_model(b, vocab, fc.weighting, tmp_path / "b.json")
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
    c = train_forest(X, train.labels, ForestParams(n_trees=12, seed=8))
    save_model(c, vocab, fc.weighting, tmp_path / "c.json")
    assert (tmp_path / "c.json").read_bytes() != (tmp_path / "a.json").read_bytes()


def _forest_with_votes(vote_labels):
    trees = []
    for label in vote_labels:
        t = train_tree([[0.0]], [label], ALL, SplitMix64(0))
        trees.append(t)
    return Forest(trees, ForestParams(n_trees=len(trees)), LABELS, None, 1)


def test_predict_forest_votes():
    label, votes = predict_forest(_forest_with_votes([S, S, N]), SparseVector(1))
    assert label == S and votes == {N: 1, S: 2}
    label, votes = predict_forest(_forest_with_votes([S, N]), SparseVector(1))
    assert label == N and votes == {N: 1, S: 1}
    with pytest.raises(DimensionMismatch):
        predict_forest(_forest_with_votes([S]), SparseVector(2))


def test_single_tree_forest_equals_predict_tree(text_data):
    train, _, _, _, X, Xt = text_data
    forest = train_forest(X, train.labels, ForestParams(n_trees=1, seed=3))
    for i in range(Xt.shape[0]):
        x = SparseVector(Xt.shape[1], tuple(Xt[i].indices.tolist()), tuple(Xt[i].data.tolist()))
        assert predict_forest(forest, x)[0] == predict_tree(forest.trees[0], x)


def test_model_roundtrip(text_data, tmp_path):
    train, test, vocab, fc, X, Xt = text_data
    forest = train_forest(X, train.labels, ForestParams(n_trees=10, seed=1), fingerprint=vocab.fingerprint())
    path = tmp_path / "m.json"
    save_model(forest, vocab, fc.weighting, path)
    loaded, vocab2, weighting = load_model(path)
    assert vocab2 == vocab and weighting == fc.weighting
    assert loaded.predict(Xt) == forest.predict(Xt)
    for text in test.texts:
        v = vectorize(text, vocab2, weighting)
        assert predict_forest(loaded, v) == predict_forest(forest, v)
    save_model(loaded, vocab2, weighting, tmp_path / "m2.json")
    assert path.read_bytes() == (tmp_path / "m2.json").read_bytes()

    doc = json.loads(path.read_text())
    assert doc["format_version"] == 1
    node = doc["trees"][0]["nodes"][0]
    assert set(node) == {"type", "feature", "threshold", "left", "right", "label", "counts"}


def test_model_errors(text_data, tmp_path):
    train, _, vocab, fc, X, _ = text_data
    forest = train_forest(X, train.labels, ForestParams(n_trees=2, seed=1))
    path = tmp_path / "m.json"
    save_model(forest, vocab, fc.weighting, path)
    text = path.read_text()

    with pytest.raises(IoError):
        load_model(tmp_path / "missing.json")

    (tmp_path / "trunc.json").write_text(text[: len(text) // 2])
    with pytest.raises(CorruptModel):
        load_model(tmp_path / "trunc.json")

    doc = json.loads(text)
    doc["format_version"] = "99"
    (tmp_path / "v.json").write_text(json.dumps(doc))
    with pytest.raises(VersionMismatch):
        load_model(tmp_path / "v.json")

    doc = json.loads(text)
    doc["trees"][0]["nodes"][0]["counts"][0] += 1
    (tmp_path / "tamper.json").write_text(json.dumps(doc))
    with pytest.raises(CorruptModel):
        load_model(tmp_path / "tamper.json")

    with pytest.raises(DimensionMismatch):
        save_model(forest, fit_vocabulary(["aa"], fc.analyzer), fc.weighting, tmp_path / "x.json")


def test_fingerprint_mismatch_is_corrupt(text_data, tmp_path):
    import hashlib

    train, _, vocab, fc, X, _ = text_data
    forest = train_forest(X, train.labels, ForestParams(n_trees=2, seed=1))
    save_model(forest, vocab, fc.weighting, tmp_path / "m.json")
    doc = json.loads((tmp_path / "m.json").read_text())
    # drop a term but re-sign the file: only the fingerprint check can catch it
    doc["vocabulary"]["terms"] = doc["vocabulary"]["terms"][:-1]
    doc.pop("checksum")
    canon = json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    doc["checksum"] = hashlib.sha256(canon.encode()).hexdigest()
    (tmp_path / "fp.json").write_text(json.dumps(doc))
    with pytest.raises(CorruptModel, match="fingerprint"):
        load_model(tmp_path / "fp.json")


def test_warns_on_single_class():
    with pytest.warns(UserWarning):
        train_forest([[0.0], [1.0]], [S, S], ForestParams(n_trees=2))
