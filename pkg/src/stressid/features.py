"""Word and character n-gram features with raw-count or TF-IDF weighting.

Three configurations matter for the experiments:

* ``word1_tfidf``  word uni-grams, smoothed TF-IDF, L2 normalized
* ``word1_count``  word uni-grams, raw counts
* ``char123_tfidf`` character 1/2/3-grams over the raw string, TF-IDF

Tokenization follows the usual vectorizer defaults: words are runs of two or
more word characters, text is lowercased unless disabled.
"""

import hashlib
import math
import re
from collections import Counter
from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.sparse as sp

from stressid.errors import DimensionMismatch, DomainError, EmptyCorpus

_TOKEN_RE = re.compile(r"(?u)\b\w\w+\b")


class Weighting(str, Enum):
    COUNT = "count"
    TFIDF = "tfidf"


@dataclass(frozen=True)
class AnalyzerConfig:
    analyzer: str = "word"
    ngram_min: int = 1
    ngram_max: int = 1
    lowercase: bool = True

    def __post_init__(self):
        if self.analyzer not in ("word", "char"):
            raise ValueError(f"analyzer must be 'word' or 'char', got {self.analyzer!r}")
        if not 1 <= self.ngram_min <= self.ngram_max:
            raise ValueError(f"bad ngram range ({self.ngram_min}, {self.ngram_max})")

    def analyze(self, text):
        if self.analyzer == "char":
            return char_ngrams(text, self.ngram_min, self.ngram_max, self.lowercase)
        tokens = tokenize_words(text, self.lowercase)
        if self.ngram_min == self.ngram_max == 1:
            return tokens
        return word_ngrams(tokens, self.ngram_min, self.ngram_max)


@dataclass(frozen=True)
class FeatureConfig:
    """An analyzer paired with a weighting scheme."""

    analyzer: AnalyzerConfig
    weighting: Weighting

    @property
    def slug(self):
        a = self.analyzer
        grams = "".join(str(n) for n in range(a.ngram_min, a.ngram_max + 1))
        suffix = "" if a.lowercase else "_cased"
        return f"{a.analyzer}{grams}_{self.weighting.value}{suffix}"

    @property
    def display_name(self):
        return PAPER_NAMES.get(self.slug, self.slug)

    def to_dict(self):
        a = self.analyzer
        return {
            "analyzer": a.analyzer,
            "ngram_min": a.ngram_min,
            "ngram_max": a.ngram_max,
            "lowercase": a.lowercase,
            "weighting": self.weighting.value,
        }

    @classmethod
    def from_dict(cls, d):
        analyzer = AnalyzerConfig(
            d.get("analyzer", "word"), int(d.get("ngram_min", 1)), int(d.get("ngram_max", 1)), bool(d.get("lowercase", True))
        )
        return cls(analyzer, Weighting(d.get("weighting", "tfidf")))


PAPER_CONFIGS = (
    FeatureConfig(AnalyzerConfig("word", 1, 1), Weighting.TFIDF),
    FeatureConfig(AnalyzerConfig("word", 1, 1), Weighting.COUNT),
    FeatureConfig(AnalyzerConfig("char", 1, 3), Weighting.TFIDF),
)
PAPER_NAMES = {
    "word1_tfidf": "TF-IDF",
    "word1_count": "Uni-grams of Words",
    "char123_tfidf": "(1+2+3)-Grams of Characters",
}


def tokenize_words(text, lowercase=True):
    if lowercase:
        text = text.lower()
    return _TOKEN_RE.findall(text)


def word_ngrams(tokens, nmin, nmax):
    out = []
    for n in range(nmin, nmax + 1):
        out.extend(" ".join(tokens[i : i + n]) for i in range(len(tokens) - n + 1))
    return out


def char_ngrams(text, nmin, nmax, lowercase=True):
    """All substrings of lengths ``nmin..nmax``, shortest first, left to right."""
    if not 1 <= nmin <= nmax:
        raise ValueError(f"bad ngram range ({nmin}, {nmax})")
    if lowercase:
        text = text.lower()
    out = []
    for n in range(nmin, nmax + 1):
        out.extend(text[i : i + n] for i in range(len(text) - n + 1))
    return out


def idf_weight(df, n_docs):
    """Smoothed inverse document frequency ``ln((1 + n) / (1 + df)) + 1``."""
    if not 1 <= df <= n_docs:
        raise DomainError(f"need 1 <= df <= n_docs, got df={df}, n_docs={n_docs}")
    return math.log((1 + n_docs) / (1 + df)) + 1.0


@dataclass(frozen=True)
class SparseVector:
    """Non-zero entries of one document vector, sorted by index."""

    dim: int
    indices: tuple = ()
    weights: tuple = ()

    def __post_init__(self):
        if len(self.indices) != len(self.weights):
            raise ValueError("indices and weights differ in length")

    def as_dict(self):
        return dict(zip(self.indices, self.weights))

    def to_dense(self):
        out = np.zeros(self.dim)
        out[list(self.indices)] = self.weights
        return out

    def norm(self):
        return math.sqrt(math.fsum(w * w for w in self.weights))

    def __len__(self):
        return len(self.indices)


class Vocabulary:
    """Frozen term index with document frequencies.

    Terms get indices in sorted order. Instances are immutable after
    :func:`fit_vocabulary`; :meth:`index_of` never adds terms.
    """

    def __init__(self, terms, doc_freq, n_docs, analyzer):
        self.terms = tuple(terms)
        self.doc_freq = tuple(int(d) for d in doc_freq)
        self.n_docs = int(n_docs)
        self.analyzer = analyzer
        self._index = {t: i for i, t in enumerate(self.terms)}
        self._idf = None

    def __len__(self):
        return len(self.terms)

    @property
    def dim(self):
        return len(self.terms)

    def index_of(self, term):
        return self._index.get(term)

    def __contains__(self, term):
        return term in self._index

    def __eq__(self, other):
        return (
            isinstance(other, Vocabulary)
            and self.terms == other.terms
            and self.doc_freq == other.doc_freq
            and self.n_docs == other.n_docs
            and self.analyzer == other.analyzer
        )

    @property
    def idf(self):
        if self._idf is None:
            self._idf = np.array([idf_weight(df, self.n_docs) for df in self.doc_freq])
        return self._idf

    def fingerprint(self):
        """``(dim, sha256)`` binding a model to the exact term list."""
        h = hashlib.sha256()
        for term in self.terms:
            h.update(term.encode("utf-8"))
            h.update(b"\x00")
        return self.dim, h.hexdigest()

    def to_dict(self):
        a = self.analyzer
        return {
            "analyzer": a.analyzer,
            "ngram_min": a.ngram_min,
            "ngram_max": a.ngram_max,
            "lowercase": a.lowercase,
            "n_docs": self.n_docs,
            "terms": [{"term": t, "index": i, "df": df} for i, (t, df) in enumerate(zip(self.terms, self.doc_freq))],
        }

    @classmethod
    def from_dict(cls, d):
        analyzer = AnalyzerConfig(d["analyzer"], int(d["ngram_min"]), int(d["ngram_max"]), bool(d["lowercase"]))
        entries = sorted(d["terms"], key=lambda e: e["index"])
        if [e["index"] for e in entries] != list(range(len(entries))):
            raise ValueError("vocabulary indices are not 0..V-1")
        return cls([e["term"] for e in entries], [e["df"] for e in entries], d["n_docs"], analyzer)


def _texts(corpus):
    if hasattr(corpus, "docs"):
        return [d.text for d in corpus.docs]
    return list(corpus)


def fit_vocabulary(corpus, config):
    """Every term seen in at least one document, with its document frequency.

    ``corpus`` may be a :class:`~stressid.corpus.LabeledCorpus` or a plain
    sequence of strings.
    """
    texts = _texts(corpus)
    if not texts:
        raise EmptyCorpus("cannot fit a vocabulary on zero documents")
    df = Counter()
    for text in texts:
        df.update(set(config.analyze(text)))
    terms = sorted(df)
    return Vocabulary(terms, [df[t] for t in terms], len(texts), config)


def vectorize(text, vocab, weighting):
    weighting = Weighting(weighting)
    counts = Counter()
    for term in vocab.analyzer.analyze(text):
        idx = vocab.index_of(term)
        if idx is not None:
            counts[idx] += 1
    indices = sorted(counts)
    if weighting is Weighting.COUNT:
        return SparseVector(vocab.dim, tuple(indices), tuple(float(counts[i]) for i in indices))
    idf = vocab.idf
    raw = [counts[i] * idf[i] for i in indices]
    norm = math.sqrt(math.fsum(w * w for w in raw))
    if norm == 0.0:
        return SparseVector(vocab.dim)
    return SparseVector(vocab.dim, tuple(indices), tuple(float(w / norm) for w in raw))


def transform_corpus(corpus, vocab, weighting):
    return [vectorize(text, vocab, weighting) for text in _texts(corpus)]


def to_csr(vectors, dim=None):
    """Stack sparse vectors into a ``scipy.sparse.csr_matrix``."""
    if dim is None:
        if not vectors:
            raise ValueError("dim is required for an empty vector list")
        dim = vectors[0].dim
    indptr = [0]
    indices = []
    data = []
    for v in vectors:
        if v.dim != dim:
            raise DimensionMismatch(f"vector of dim {v.dim} in a batch of dim {dim}")
        indices.extend(v.indices)
        data.extend(v.weights)
        indptr.append(len(indices))
    return sp.csr_matrix(
        (np.asarray(data, dtype=np.float64), np.asarray(indices, dtype=np.int64), np.asarray(indptr, dtype=np.int64)),
        shape=(len(vectors), dim),
    )
