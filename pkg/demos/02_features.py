"""
Word uni-grams, character n-grams and TF-IDF
============================================

Three representations are compared: TF-IDF weighted word uni-grams, raw
uni-gram counts, and TF-IDF weighted character 1-3 grams.
"""

from stressid.features import (
    PAPER_CONFIGS,
    AnalyzerConfig,
    Weighting,
    char_ngrams,
    fit_vocabulary,
    idf_weight,
    tokenize_words,
    vectorize,
)

# %%
# Word tokens are runs of two or more word characters, lowercased.
# Single letters (and the lone "!") disappear.
print(tokenize_words("I a Bro video clip !"))

# %%
# Character grams run over the raw string, spaces included.
print(char_ngrams("Bro da", 1, 3))

# %%
# A tiny worked example: "bb" appears in one of two documents, so its idf is
# ln(3/2) + 1, while "aa" (in both) gets exactly 1.
vocab = fit_vocabulary(["aa bb", "aa cc"], AnalyzerConfig("word", 1, 1))
print(vocab.terms, vocab.doc_freq)
print(idf_weight(1, 2), idf_weight(2, 2))
v = vectorize("aa bb", vocab, Weighting.TFIDF)
print(v.as_dict(), "norm", v.norm())
print(vectorize("aa bb", vocab, Weighting.COUNT).as_dict())

# %%
# The three experiment configurations and their vocabulary sizes on the
# shared-task sample sentences.
texts = ["Bro video clip swap agi iruku atha gavanichingala", "super comment pettav bro , chala navvostundi"]
for fc in PAPER_CONFIGS:
    vocab = fit_vocabulary(texts, fc.analyzer)
    print(f"{fc.slug:15s} {fc.display_name:30s} V={vocab.dim}")
