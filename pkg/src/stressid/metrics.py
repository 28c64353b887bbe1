"""Confusion matrix, per-class and averaged precision/recall/F1, table rendering.

Undefined ratios (0/0) evaluate to 0. Macro averages always run over the full
label schema, including labels with zero support.
"""

import json
from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Decimal

from stressid.corpus import LABELS
from stressid.errors import EmptyMatrix, LengthMismatch, UnknownLabel, UnknownMetric

# (key, column header) in the column order of the results tables
METRIC_COLUMNS = (
    ("macro_f1", "Macro F1-score"),
    ("macro_recall", "Macro Recall"),
    ("macro_precision", "Macro Precision"),
    ("weighted_f1", "Weighted F1-score"),
    ("weighted_recall", "Weighted Recall"),
    ("weighted_precision", "Weighted Precision"),
    ("accuracy", "Accuracy"),
)
METRIC_KEYS = tuple(k for k, _ in METRIC_COLUMNS)
METRIC_HEADERS = tuple(h for _, h in METRIC_COLUMNS)


@dataclass(frozen=True)
class ConfusionMatrix:
    """Rows are true labels, columns predicted labels, both in ``labels`` order."""

    labels: tuple
    counts: tuple

    @property
    def total(self):
        return sum(sum(row) for row in self.counts)

    @property
    def trace(self):
        return sum(self.counts[i][i] for i in range(len(self.labels)))


def confusion(y_true, y_pred, labels=LABELS):
    if len(y_true) != len(y_pred):
        raise LengthMismatch(f"{len(y_true)} true labels vs {len(y_pred)} predictions")
    if not y_true:
        raise LengthMismatch("no predictions to score")
    index = {label: i for i, label in enumerate(labels)}
    counts = [[0] * len(labels) for _ in labels]
    for t, p in zip(y_true, y_pred):
        if t not in index:
            raise UnknownLabel(t)
        if p not in index:
            raise UnknownLabel(p)
        counts[index[t]][index[p]] += 1
    return ConfusionMatrix(tuple(labels), tuple(tuple(r) for r in counts))


def _ratio(num, den):
    return num / den if den else 0.0


@dataclass(frozen=True)
class MetricsReport:
    labels: tuple
    confusion: tuple
    per_class: dict
    macro: dict
    weighted: dict
    accuracy: float

    def get(self, key):
        """Look up one of :data:`METRIC_KEYS`, e.g. ``"macro_f1"``."""
        if key == "accuracy":
            return self.accuracy
        avg, _, name = key.partition("_")
        table = {"macro": self.macro, "weighted": self.weighted}.get(avg)
        if table is None or name not in table:
            raise UnknownMetric(key)
        return table[name]

    def values(self):
        return [self.get(k) for k in METRIC_KEYS]

    def to_dict(self):
        return {
            "labels": list(self.labels),
            "confusion": [list(r) for r in self.confusion],
            "per_class": {label: dict(v) for label, v in self.per_class.items()},
            "macro": dict(self.macro),
            "weighted": dict(self.weighted),
            "accuracy": self.accuracy,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            tuple(d["labels"]),
            tuple(tuple(r) for r in d["confusion"]),
            {label: dict(v) for label, v in d["per_class"].items()},
            dict(d["macro"]),
            dict(d["weighted"]),
            d["accuracy"],
        )


def compute_metrics(cm):
    total = cm.total
    if total == 0:
        raise EmptyMatrix("confusion matrix is empty")
    n = len(cm.labels)
    per_class = {}
    for c, label in enumerate(cm.labels):
        tp = cm.counts[c][c]
        predicted = sum(cm.counts[r][c] for r in range(n))
        support = sum(cm.counts[c])
        precision = _ratio(tp, predicted)
        recall = _ratio(tp, support)
        f1 = _ratio(2 * precision * recall, precision + recall)
        per_class[label] = {"precision": precision, "recall": recall, "f1": f1, "support": support}

    macro, weighted = {}, {}
    for name in ("precision", "recall", "f1"):
        vals = [per_class[label][name] for label in cm.labels]
        macro[name] = sum(vals) / n
        weighted[name] = sum(per_class[label][name] * per_class[label]["support"] for label in cm.labels) / total
    return MetricsReport(cm.labels, cm.counts, per_class, macro, weighted, cm.trace / total)


def round3(x):
    """Half-even rounding to 3 decimals of the shortest decimal form of ``x``."""
    return str(Decimal(repr(float(x))).quantize(Decimal("0.001"), rounding=ROUND_HALF_EVEN))


def _cells(values):
    return ["-" if v is None else round3(v) for v in values]


def render_metrics(report, style="table3"):
    """One report as a row of seven 3-decimal values, or as full-precision JSON."""
    if style == "json":
        return json.dumps(report.to_dict(), ensure_ascii=False)
    if style not in ("table3", "table4"):
        raise ValueError(f"unknown style {style!r}")
    return " ".join(_cells(report.values()))


def render_table(rows, style="table3"):
    """Tab-separated results table.

    ``rows`` holds ``(dataset, name, report)`` triples; ``name`` is the
    feature configuration for ``table3`` and the system for ``table4``.
    A ``None`` report renders as dashes.
    """
    second = {"table3": "Feature", "table4": "Author"}[style]
    lines = ["\t".join(("Data set", second) + METRIC_HEADERS)]
    previous = None
    for dataset, name, report in rows:
        values = report.values() if report is not None else [None] * len(METRIC_KEYS)
        shown = dataset if dataset != previous else ""
        previous = dataset
        lines.append("\t".join([shown, name] + _cells(values)))
    return "\n".join(lines) + "\n"


def render_markdown(rows, style="table3"):
    second = {"table3": "Feature", "table4": "Author"}[style]
    header = ("Data set", second) + METRIC_HEADERS
    lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    for dataset, name, report in rows:
        values = report.values() if report is not None else [None] * len(METRIC_KEYS)
        lines.append("| " + " | ".join([dataset, name] + _cells(values)) + " |")
    return "\n".join(lines) + "\n"
