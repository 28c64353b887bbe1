"""
A random forest from scratch
============================

CART trees on Gini impurity, bootstrap resampling and sqrt(F) candidate
features per node. Every random draw comes from a SplitMix64 stream.
"""

import tempfile
from pathlib import Path

from stressid.corpus import synthetic_split
from stressid.features import PAPER_CONFIGS, fit_vocabulary, to_csr, transform_corpus, vectorize
from stressid.forest import ForestParams, gini, load_model, predict_forest, save_model, train_forest
from stressid.metrics import compute_metrics, confusion

# %%
# Gini impurity of a few nodes.
print(gini([5, 5]), gini([3, 1]), gini([4, 0]))

# %%
# Fit on a synthetic training split with word uni-gram TF-IDF features.
train = synthetic_split(600, seed=1)
dev = synthetic_split(150, seed=2, split_name="validation")
fc = PAPER_CONFIGS[0]
vocab = fit_vocabulary(train, fc.analyzer)
X = to_csr(transform_corpus(train, vocab, fc.weighting), vocab.dim)
forest = train_forest(X, train.labels, ForestParams(n_trees=50, seed=42), fingerprint=vocab.fingerprint())
sizes = [len(t.nodes) for t in forest.trees]
print(f"{len(forest.trees)} trees, {min(sizes)}-{max(sizes)} nodes each")

# %%
# Majority vote with per-label vote counts.
print(predict_forest(forest, vectorize("tension ah iruku bro", vocab, fc.weighting)))
print(predict_forest(forest, vectorize("semma mass video", vocab, fc.weighting)))

predicted, _ = forest.predict(to_csr(transform_corpus(dev, vocab, fc.weighting), vocab.dim))
print("validation macro F1", compute_metrics(confusion(dev.labels, predicted)).macro["f1"])

# %%
# Models are single JSON files. The same data and seed always give the same
# bytes, whatever the thread count.
path = Path(tempfile.mkdtemp()) / "model.json"
save_model(forest, vocab, fc.weighting, path)
again = train_forest(X, train.labels, ForestParams(n_trees=50, seed=42), n_jobs=4, fingerprint=vocab.fingerprint())
save_model(again, vocab, fc.weighting, path.with_name("again.json"))
print("byte-identical:", path.read_bytes() == path.with_name("again.json").read_bytes())
loaded, vocab2, weighting = load_model(path)
print(loaded.params)
