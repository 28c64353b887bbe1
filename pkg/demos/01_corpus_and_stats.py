"""
Corpora, labels and class statistics
====================================

Labeled CSVs have a ``text`` and a ``label`` column. Text is kept exactly as
written; only labels are normalized onto the two canonical values.
"""

import tempfile
from pathlib import Path

from stressid.corpus import (
    LABELS,
    LabeledCorpus,
    SynthSpec,
    corpus_stats,
    generate_synthetic,
    load_corpus,
    normalize_label,
    render_stats,
    write_corpus,
)

# %%
# Two label spellings, one schema. Index 0 is "Non stressed", index 1 "stressed".
print(LABELS)
print(normalize_label("  Non Stressed "), "|", normalize_label("STRESSED "))

# %%
# The two sample posts from the shared task, written to and read back from CSV.
# Punctuation, diacritics and casing survive untouched.
samples = LabeledCorpus.from_pairs(
    [
        ("Bro video clip swap agi iruku atha gavanichingala", "Non stressed"),
        ("Nēnu 10 rōjulaṅgā snānam chēyalēdu!", "stressed"),
    ]
)
tmp = Path(tempfile.mkdtemp())
write_corpus(samples, tmp / "samples.csv")
for doc in load_corpus(tmp / "samples.csv"):
    print(repr(doc.text), "->", doc.label)

# %%
# The real data is not redistributable, so desk-scale work uses a seeded
# generator. Here the class ratio follows the Tamil training split (3720:1784).
spec = SynthSpec({"Non stressed": 372, "stressed": 178}, noise_rate=0.05, seed=7)
train = generate_synthetic(spec, split_name="train")
dev = generate_synthetic(SynthSpec({"Non stressed": 94, "stressed": 44}, noise_rate=0.05, seed=8), split_name="validation")
print(train.docs[0])

# %%
# Table-1 style distribution, then the same numbers as JSON records.
print(render_stats([corpus_stats(train), corpus_stats(dev)]))
print(render_stats([corpus_stats(dev)], "json"))
