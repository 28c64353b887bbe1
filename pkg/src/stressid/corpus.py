"""Labeled corpora: CSV loading, class statistics and a seeded synthetic generator.

Text is kept exactly as read. The only normalization applied anywhere in this
module is to the label column.
"""

import csv
import json
import math
import os
from dataclasses import dataclass, field

from stressid.errors import EmptyFile, InvalidSpec, MalformedHeader, MissingFile, UnknownLabel
from stressid.rng import SplitMix64

NON_STRESSED = "Non stressed"
STRESSED = "stressed"
# canonical order; a label's position is its class index
LABELS = (NON_STRESSED, STRESSED)

SPLITS = ("train", "validation", "test")

_LABEL_ALIASES = {
    "non stressed": NON_STRESSED,
    "non-stressed": NON_STRESSED,
    "stressed": STRESSED,
}


def normalize_label(raw):
    """Map a raw label cell onto one of :data:`LABELS`.

    Surrounding whitespace is trimmed and matching is case-insensitive;
    ``"non-stressed"`` is accepted as a spelling of ``"Non stressed"``.
    """
    if raw is None:
        raise UnknownLabel(raw)
    key = raw.strip().lower()
    try:
        return _LABEL_ALIASES[key]
    except KeyError:
        raise UnknownLabel(raw) from None


def label_index(label):
    return LABELS.index(label)


@dataclass(frozen=True)
class LabeledDocument:
    text: str
    label: str


@dataclass(frozen=True)
class LabeledCorpus:
    docs: tuple
    split_name: str = "train"
    language_tag: str = ""

    def __post_init__(self):
        object.__setattr__(self, "docs", tuple(self.docs))

    def __len__(self):
        return len(self.docs)

    def __iter__(self):
        return iter(self.docs)

    @property
    def texts(self):
        return [d.text for d in self.docs]

    @property
    def labels(self):
        return [d.label for d in self.docs]

    @classmethod
    def from_pairs(cls, pairs, split_name="train", language_tag=""):
        return cls(tuple(LabeledDocument(t, normalize_label(l)) for t, l in pairs), split_name, language_tag)

    def concat(self, other, split_name=None):
        return LabeledCorpus(self.docs + other.docs, split_name or self.split_name, self.language_tag)


def _resolve_column(header, wanted):
    if wanted in header:
        return wanted
    lowered = {h.strip().lower(): h for h in header}
    return lowered.get(wanted.strip().lower())


def _read_rows(path, text_col, label_col):
    if not os.path.isfile(path):
        raise MissingFile(f"no such file: {path}")
    # utf-8-sig only strips a leading BOM from the header line
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyFile(f"{path}: no header row") from None
        tcol = _resolve_column(header, text_col)
        if tcol is None:
            raise MalformedHeader(f"{path}: text column {text_col!r} not in header {header}")
        ti = header.index(tcol)
        li = None
        if label_col is not None:
            lcol = _resolve_column(header, label_col)
            if lcol is None:
                raise MalformedHeader(f"{path}: label column {label_col!r} not in header {header}")
            li = header.index(lcol)
        rows = []
        for lineno, row in enumerate(reader, start=1):
            if not row:
                continue
            text = row[ti] if ti < len(row) else ""
            label = row[li] if li is not None and li < len(row) else None
            rows.append((lineno, text, label))
    return header, rows


def load_corpus(path, split_name="train", text_col="text", label_col="label", language_tag=""):
    """Read a labeled CSV (header row, RFC-4180 quoting, UTF-8).

    Raises MissingFile, MalformedHeader, UnknownLabel or EmptyFile.
    """
    _, rows = _read_rows(path, text_col, label_col)
    if not rows:
        raise EmptyFile(f"{path}: no data rows")
    docs = []
    for lineno, text, raw in rows:
        try:
            label = normalize_label(raw)
        except UnknownLabel:
            raise UnknownLabel(raw, row=lineno) from None
        docs.append(LabeledDocument(text, label))
    return LabeledCorpus(tuple(docs), split_name, language_tag)


def load_texts(path, text_col="text"):
    """Text column of a CSV that may lack labels. Empty files give ``[]``."""
    try:
        _, rows = _read_rows(path, text_col, None)
    except EmptyFile:
        return []
    return [text for _, text, _ in rows]


def has_column(path, name):
    if not os.path.isfile(path):
        raise MissingFile(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8-sig") as fh:
        header = next(csv.reader(fh), [])
    return _resolve_column(header, name) is not None


def write_corpus(corpus, path, text_col="text", label_col="label"):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, quoting=csv.QUOTE_MINIMAL, lineterminator="\r\n")
        writer.writerow([text_col, label_col])
        for doc in corpus.docs:
            writer.writerow([doc.text, doc.label])


@dataclass(frozen=True)
class ClassDistribution:
    counts: dict
    total: int
    split_name: str = ""

    @property
    def imbalance_ratio(self):
        """Largest over smallest class count; ``inf`` when a class is empty."""
        values = list(self.counts.values())
        lo, hi = min(values), max(values)
        if lo == 0:
            return math.inf
        return hi / lo


def corpus_stats(corpus):
    counts = {label: 0 for label in LABELS}
    for doc in corpus.docs:
        counts[doc.label] += 1
    return ClassDistribution(counts, sum(counts.values()), corpus.split_name)


def render_stats(dists, fmt="table"):
    """Render class distributions as a Table-1 style text table or JSON.

    ``dists`` is a sequence of :class:`ClassDistribution`, one per split.
    """
    if fmt == "json":
        records = []
        for dist in dists:
            for label in LABELS:
                records.append({"label": label, "split": dist.split_name, "count": dist.counts[label], "total": dist.total})
        return json.dumps(records, indent=2, ensure_ascii=False) + "\n"
    header = ["Label"] + [d.split_name.capitalize() or "Count" for d in dists] + ["Total"]
    lines = ["\t".join(header)]
    for label in LABELS:
        cells = [d.counts[label] for d in dists]
        lines.append("\t".join([label] + [str(c) for c in cells] + [str(sum(cells))]))
    totals = [d.total for d in dists]
    lines.append("\t".join(["Total"] + [str(t) for t in totals] + [str(sum(totals))]))
    ratios = ["inf" if math.isinf(d.imbalance_ratio) else f"{d.imbalance_ratio:.3f}" for d in dists]
    lines.append("\t".join(["Imbalance"] + ratios + [""]))
    return "\n".join(lines) + "\n"


# Romanized Tamil/Telugu/English filler, in the spirit of the shared-task posts.
DEFAULT_SHARED_VOCAB = (
    "bro", "video", "clip", "swap", "agi", "iruku", "atha", "gavanichingala", "super", "comment",
    "pettav", "chala", "anna", "enna", "ippo", "naan", "nenu", "meeru", "idhu", "adhu", "romba",
    "konjam", "cheppu", "vachindi", "poyi", "vandhu", "ellam", "inka", "epdi", "ela", "today",
    "really", "the", "is", "and", "this", "what", "ok", "ha", "da", "ra", "ga", "😂", "!!", "...",
)
DEFAULT_MARKERS = {
    NON_STRESSED: ("navvostundi", "semma", "jollyga", "santhosham", "mass", "happyga", "kalakkal", "bagundi"),
    STRESSED: ("kashtam", "bayama", "tension", "kavalai", "pressure", "thookam", "ozhiyala", "bhayam"),
}


@dataclass(frozen=True)
class SynthSpec:
    """Recipe for :func:`generate_synthetic`.

    Each document draws ``doc_len`` tokens; ``markers_per_doc`` of them are
    markers of its label and the rest come from ``shared_vocab``. Every marker
    is independently swapped for a shared token with probability ``noise_rate``.
    """

    n_per_label: dict
    marker_tokens: dict = field(default_factory=lambda: dict(DEFAULT_MARKERS))
    shared_vocab: tuple = DEFAULT_SHARED_VOCAB
    doc_len: tuple = (4, 12)
    noise_rate: float = 0.0
    seed: int = 0
    markers_per_doc: tuple = (1, 2)

    def validate(self):
        if set(self.n_per_label) - set(LABELS):
            raise InvalidSpec(f"unknown labels in n_per_label: {sorted(set(self.n_per_label) - set(LABELS))}")
        if any(n < 0 for n in self.n_per_label.values()):
            raise InvalidSpec("label counts must be non-negative")
        if not 0.0 <= self.noise_rate <= 1.0:
            raise InvalidSpec(f"noise_rate {self.noise_rate} outside [0, 1]")
        lo, hi = self.doc_len
        if not 1 <= lo <= hi:
            raise InvalidSpec(f"bad doc_len {self.doc_len}")
        mlo, mhi = self.markers_per_doc
        if not 1 <= mlo <= mhi or mhi > lo:
            raise InvalidSpec(f"bad markers_per_doc {self.markers_per_doc} for doc_len {self.doc_len}")
        if not self.shared_vocab:
            raise InvalidSpec("shared_vocab is empty")
        seen = {}
        for label, markers in self.marker_tokens.items():
            if label not in LABELS:
                raise InvalidSpec(f"unknown label {label!r} in marker_tokens")
            for tok in markers:
                if tok in seen and seen[tok] != label:
                    raise InvalidSpec(f"marker {tok!r} shared by {seen[tok]!r} and {label!r}")
                seen[tok] = label
        for label, n in self.n_per_label.items():
            if n and not self.marker_tokens.get(label):
                raise InvalidSpec(f"no marker tokens for {label!r}")
        if set(self.shared_vocab) & set(seen):
            raise InvalidSpec("shared_vocab overlaps marker tokens")

    @classmethod
    def from_dict(cls, d):
        kwargs = {"n_per_label": {normalize_label(k): int(v) for k, v in d["n_per_label"].items()}}
        if "marker_tokens" in d:
            kwargs["marker_tokens"] = {normalize_label(k): tuple(v) for k, v in d["marker_tokens"].items()}
        if "shared_vocab" in d:
            kwargs["shared_vocab"] = tuple(d["shared_vocab"])
        for key in ("doc_len", "markers_per_doc"):
            if key in d:
                kwargs[key] = tuple(int(v) for v in d[key])
        if "noise_rate" in d:
            kwargs["noise_rate"] = float(d["noise_rate"])
        if "seed" in d:
            kwargs["seed"] = int(d["seed"])
        return cls(**kwargs)


def generate_synthetic(spec, split_name="train", language_tag="synthetic"):
    """Deterministic labeled corpus from ``spec``.

    Labels come out interleaved in a seeded shuffle so that no split is sorted
    by class.
    """
    spec.validate()
    rng = SplitMix64(spec.seed)
    order = [label for label in LABELS for _ in range(spec.n_per_label.get(label, 0))]
    for i in range(len(order) - 1, 0, -1):
        j = rng.below(i + 1)
        order[i], order[j] = order[j], order[i]

    docs = []
    for label in order:
        length = rng.randint(*spec.doc_len)
        n_markers = rng.randint(*spec.markers_per_doc)
        slots = set(rng.sample(length, n_markers))
        tokens = []
        for pos in range(length):
            if pos in slots and rng.random() >= spec.noise_rate:
                tokens.append(rng.choice(spec.marker_tokens[label]))
            else:
                tokens.append(rng.choice(spec.shared_vocab))
        docs.append(LabeledDocument(" ".join(tokens), label))
    return LabeledCorpus(tuple(docs), split_name, language_tag)


def synthetic_split(n_total, ratio=(3720, 1784), noise_rate=0.05, seed=0, split_name="train", **kwargs):
    """Synthetic split of ``n_total`` docs whose class ratio follows ``ratio``."""
    n_non = round(n_total * ratio[0] / (ratio[0] + ratio[1]))
    spec = SynthSpec({NON_STRESSED: n_non, STRESSED: n_total - n_non}, noise_rate=noise_rate, seed=seed, **kwargs)
    return generate_synthetic(spec, split_name=split_name)
