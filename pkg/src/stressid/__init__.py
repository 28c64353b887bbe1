"""Stress detection on code-mixed text with n-gram features and a from-scratch random forest."""

__version__ = "0.1.0"

from stressid.corpus import (
    LABELS,
    ClassDistribution,
    LabeledCorpus,
    LabeledDocument,
    SynthSpec,
    corpus_stats,
    generate_synthetic,
    load_corpus,
    normalize_label,
    write_corpus,
)
from stressid.features import (
    AnalyzerConfig,
    SparseVector,
    Vocabulary,
    Weighting,
    char_ngrams,
    fit_vocabulary,
    idf_weight,
    tokenize_words,
    transform_corpus,
    vectorize,
)
from stressid.forest import (
    DecisionTree,
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
from stressid.metrics import ConfusionMatrix, MetricsReport, compute_metrics, confusion, render_metrics
from stressid.runner import ExperimentConfig, ExperimentReport, predict_file, run_experiment, select_best

__all__ = [name for name in dir() if not name.startswith("_")]
