"""End-to-end experiments: fit on train, score validation, predict test.

Output layout under ``output_dir``::

    {language}/{slug}/model.json      forest trained on the train split
    {language}/{slug}/model_final.json  only with final_training=train_plus_validation
    {language}/{slug}/metrics.json    validation (and test) metrics + config echo
    {language}/{slug}/report.md
    {language}/{slug}/test_predictions.jsonl  when a test split is given
    table3.txt, table4.txt, report.json, report.md
    run_log.json                      timestamps and wall-clock, the only
                                      non-deterministic file
"""

import csv
import dataclasses
import io
import json
import os
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Optional

import scipy.sparse as sp

from stressid import __version__
from stressid.corpus import has_column, load_corpus, load_texts
from stressid.errors import DataError, ExperimentError, UnknownMetric
from stressid.features import PAPER_CONFIGS, FeatureConfig, fit_vocabulary, to_csr, transform_corpus, vectorize
from stressid.forest import ForestParams, load_model, save_model, train_forest
from stressid.metrics import METRIC_KEYS, compute_metrics, confusion, render_markdown, render_table

FINAL_TRAINING = ("train_only", "train_plus_validation")


@dataclass(frozen=True)
class DatasetSpec:
    language: str
    train: str
    validation: str
    test: Optional[str] = None
    text_col: str = "text"
    label_col: str = "label"

    def to_dict(self):
        return dataclasses.asdict(self)


@dataclass
class ExperimentConfig:
    datasets: list
    feature_configs: list = field(default_factory=lambda: list(PAPER_CONFIGS))
    forest_params: ForestParams = field(default_factory=ForestParams)
    final_training: str = "train_only"
    output_dir: Optional[str] = None
    seed: int = 42
    n_jobs: int = 1
    selection_metric: str = "macro_f1"

    def __post_init__(self):
        if not self.datasets:
            raise ValueError("at least one dataset is required")
        if not self.feature_configs:
            raise ValueError("at least one feature config is required")
        if self.final_training not in FINAL_TRAINING:
            raise ValueError(f"final_training must be one of {FINAL_TRAINING}")
        if self.selection_metric not in METRIC_KEYS:
            raise UnknownMetric(self.selection_metric)
        for ds in self.datasets:
            paths = [p for p in (ds.train, ds.validation, ds.test) if p]
            if len(set(paths)) != len(paths):
                raise ValueError(f"dataset {ds.language!r}: split paths must be distinct")
        slugs = [fc.slug for fc in self.feature_configs]
        if len(set(slugs)) != len(slugs):
            raise ValueError(f"duplicate feature configs: {slugs}")

    @classmethod
    def from_dict(cls, d, base_dir="."):
        def resolve(p):
            if p is None:
                return None
            return p if os.path.isabs(p) else os.path.normpath(os.path.join(base_dir, p))

        datasets = [
            DatasetSpec(
                language=ds["language"],
                train=resolve(ds["train"]),
                validation=resolve(ds["validation"]),
                test=resolve(ds.get("test")),
                text_col=ds.get("text_col", "text"),
                label_col=ds.get("label_col", "label"),
            )
            for ds in d["datasets"]
        ]
        kwargs = {"datasets": datasets}
        if "feature_configs" in d:
            kwargs["feature_configs"] = [FeatureConfig.from_dict(fc) for fc in d["feature_configs"]]
        seed = int(d.get("seed", 42))
        kwargs["seed"] = seed
        kwargs["forest_params"] = ForestParams.from_dict({**d.get("forest", {}), "seed": seed})
        for key in ("final_training", "selection_metric"):
            if key in d:
                kwargs[key] = d[key]
        if "n_jobs" in d:
            kwargs["n_jobs"] = int(d["n_jobs"])
        if d.get("output_dir"):
            kwargs["output_dir"] = resolve(d["output_dir"])
        return cls(**kwargs)

    def echo(self):
        """Config fields that affect results (execution details excluded)."""
        return {
            "datasets": [ds.to_dict() for ds in self.datasets],
            "feature_configs": [fc.to_dict() for fc in self.feature_configs],
            "forest": self.forest_params.to_dict(),
            "final_training": self.final_training,
            "seed": self.seed,
            "selection_metric": self.selection_metric,
        }


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        d = json.load(fh)
    return ExperimentConfig.from_dict(d, base_dir=os.path.dirname(os.path.abspath(path)))


@dataclass
class CellResult:
    language: str
    config_index: int
    feature_config: FeatureConfig
    validation: object
    test: Optional[object]
    seconds: float
    model_path: str
    config_echo: dict
    version: str = __version__

    @property
    def slug(self):
        return self.feature_config.slug

    def to_dict(self):
        return {
            "language": self.language,
            "feature_config": self.feature_config.to_dict(),
            "slug": self.slug,
            "name": self.feature_config.display_name,
            "validation": self.validation.to_dict(),
            "test": self.test.to_dict() if self.test is not None else None,
            "model_path": self.model_path,
            "version": self.version,
        }


@dataclass
class ExperimentReport:
    rows: list
    config: ExperimentConfig

    def table3(self, split="validation"):
        return [(r.language, r.feature_config.display_name, getattr(r, split)) for r in self.rows]

    def table4(self, criterion=None):
        best = select_best(self, criterion or self.config.selection_metric)
        return [(lang, f"This proposal ({row.feature_config.display_name})", row.test) for lang, row in best.items()]

    def to_dict(self):
        criterion = self.config.selection_metric
        return {
            "version": __version__,
            "config": self.config.echo(),
            "rows": [r.to_dict() for r in self.rows],
            "best": {lang: row.slug for lang, row in select_best(self, criterion).items()},
        }


def select_best(report, criterion="macro_f1"):
    """Best validation row per dataset; ties go to the earlier feature config."""
    if criterion not in METRIC_KEYS:
        raise UnknownMetric(criterion)
    rows = report.rows if hasattr(report, "rows") else report
    best = {}
    for row in rows:
        key = (row.validation.get(criterion), -row.config_index)
        if row.language not in best or key > best[row.language][0]:
            best[row.language] = (key, row)
    return {lang: row for lang, (_, row) in best.items()}


def _write_json(path, obj):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2, ensure_ascii=False)
        fh.write("\n")


def _write_text(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _load_test(ds):
    if not ds.test:
        return None, None
    if has_column(ds.test, ds.label_col):
        corpus = load_corpus(ds.test, "test", ds.text_col, ds.label_col, ds.language)
        return corpus.texts, corpus
    return load_texts(ds.test, ds.text_col), None


def _score(forest, X, y_true):
    y_pred, _ = forest.predict(X)
    return compute_metrics(confusion(list(y_true), y_pred))


def _run_cell(ds, index, fc, splits, config, cell_dir, output_dir):
    train, validation, test_texts, test_corpus = splits
    start = time.perf_counter()
    # vocabulary only ever sees the train split
    vocab = fit_vocabulary(train, fc.analyzer)
    X_train = to_csr(transform_corpus(train, vocab, fc.weighting), vocab.dim)
    X_val = to_csr(transform_corpus(validation, vocab, fc.weighting), vocab.dim)
    fingerprint = vocab.fingerprint()
    forest = train_forest(X_train, train.labels, config.forest_params, n_jobs=config.n_jobs, fingerprint=fingerprint)
    val_report = _score(forest, X_val, validation.labels)

    os.makedirs(cell_dir, exist_ok=True)
    model_path = os.path.join(cell_dir, "model.json")
    save_model(forest, vocab, fc.weighting, model_path)

    test_report = None
    if test_texts is not None:
        final = forest
        if config.final_training == "train_plus_validation":
            final = train_forest(
                sp.vstack([X_train, X_val]).tocsr(),
                train.labels + validation.labels,
                config.forest_params,
                n_jobs=config.n_jobs,
                fingerprint=fingerprint,
            )
            save_model(final, vocab, fc.weighting, os.path.join(cell_dir, "model_final.json"))
        X_test = to_csr([vectorize(t, vocab, fc.weighting) for t in test_texts], vocab.dim)
        labels, votes = final.predict(X_test)
        with open(os.path.join(cell_dir, "test_predictions.jsonl"), "w", encoding="utf-8", newline="\n") as fh:
            for i, (label, v) in enumerate(zip(labels, votes)):
                fh.write(json.dumps({"text_index": i, "label": label, "votes": dict(zip(final.labels, v))}, ensure_ascii=False) + "\n")
        if test_corpus is not None:
            test_report = compute_metrics(confusion(test_corpus.labels, labels))
    seconds = time.perf_counter() - start

    echo = {
        "dataset": ds.to_dict(),
        "feature_config": fc.to_dict(),
        "forest": config.forest_params.to_dict(),
        "final_training": config.final_training,
        "seed": config.seed,
    }
    row = CellResult(ds.language, index, fc, val_report, test_report, seconds, os.path.relpath(model_path, output_dir), echo)
    _write_json(
        os.path.join(cell_dir, "metrics.json"),
        {
            "version": __version__,
            "language": ds.language,
            "slug": fc.slug,
            "name": fc.display_name,
            "config": echo,
            "vocabulary_size": vocab.dim,
            "validation": val_report.to_dict(),
            "test": test_report.to_dict() if test_report is not None else None,
        },
    )
    cell_rows = [(ds.language, fc.display_name, val_report)]
    md = [f"# {ds.language} / {fc.display_name}\n", "## Validation\n", render_markdown(cell_rows)]
    if test_report is not None:
        md += ["\n## Test\n", render_markdown([(ds.language, fc.display_name, test_report)])]
    _write_text(os.path.join(cell_dir, "report.md"), "\n".join(md))
    return row


def run_experiment(config, output_dir=None):
    """Run every (dataset, feature config) cell and write all artifacts.

    Errors raised inside a cell are re-raised as ExperimentError naming it.
    """
    output_dir = output_dir or config.output_dir
    if not output_dir:
        raise ValueError("no output directory given")
    os.makedirs(output_dir, exist_ok=True)
    started = datetime.now(timezone.utc).isoformat()
    rows = []
    for ds in config.datasets:
        try:
            train = load_corpus(ds.train, "train", ds.text_col, ds.label_col, ds.language)
            validation = load_corpus(ds.validation, "validation", ds.text_col, ds.label_col, ds.language)
            test_texts, test_corpus = _load_test(ds)
        except DataError as exc:
            raise ExperimentError(f"{ds.language}/load", exc) from exc
        splits = (train, validation, test_texts, test_corpus)
        for index, fc in enumerate(config.feature_configs):
            cell_dir = os.path.join(output_dir, ds.language, fc.slug)
            try:
                rows.append(_run_cell(ds, index, fc, splits, config, cell_dir, output_dir))
            except ExperimentError:
                raise
            except Exception as exc:
                raise ExperimentError(f"{ds.language}/{fc.slug}", exc) from exc

    report = ExperimentReport(rows, config)
    _write_json(os.path.join(output_dir, "report.json"), report.to_dict())
    _write_text(os.path.join(output_dir, "table3.txt"), render_table(report.table3(), "table3"))
    _write_text(os.path.join(output_dir, "table4.txt"), render_table(report.table4(), "table4"))
    md = ["# Validation (Table 3 layout)\n", render_markdown(report.table3(), "table3")]
    md += ["\n# Test, best validation config per dataset (Table 4 layout)\n", render_markdown(report.table4(), "table4")]
    _write_text(os.path.join(output_dir, "report.md"), "\n".join(md))
    _write_json(
        os.path.join(output_dir, "run_log.json"),
        {
            "started": started,
            "finished": datetime.now(timezone.utc).isoformat(),
            "n_jobs": config.n_jobs,
            "cells": [{"language": r.language, "slug": r.slug, "seconds": r.seconds} for r in rows],
        },
    )
    return report


def predict_file(model_path, input_path=None, text=None, out=None, fmt=None, text_col="text"):
    """Label every text of a CSV (or one inline string) with a saved model.

    Returns the records ``{text_index, label, votes}``; they are also written
    to ``out`` as CSV or JSON lines (chosen by ``fmt`` or the file extension).
    """
    forest, vocab, weighting = load_model(model_path)
    if (input_path is None) == (text is None):
        raise ValueError("give exactly one of input_path or text")
    texts = [text] if text is not None else load_texts(input_path, text_col)
    vectors = [vectorize(t, vocab, weighting) for t in texts]
    labels, votes = forest.predict(vectors) if vectors else ([], [])
    records = [
        {"text_index": i, "label": label, "votes": dict(zip(forest.labels, v))}
        for i, (label, v) in enumerate(zip(labels, votes))
    ]
    if out is not None:
        fmt = fmt or ("csv" if str(out).endswith(".csv") else "jsonl")
        write_predictions(records, out, fmt, forest.labels)
    return records


def format_predictions(records, fmt, labels):
    if fmt == "jsonl":
        return "".join(json.dumps(r, ensure_ascii=False) + "\n" for r in records)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["text_index", "label"] + [f"votes_{label}" for label in labels])
    for r in records:
        writer.writerow([r["text_index"], r["label"]] + [r["votes"][label] for label in labels])
    return buf.getvalue()


def write_predictions(records, path, fmt, labels):
    _write_text(path, format_predictions(records, fmt, labels))
