"""Corpus ingestion: tokenization, stopword removal, TF-IDF vectorization."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

_TOKEN_RE = re.compile(r"[^0-9a-z]+")

# Minimal built-in English stopword list; external files override it.
DEFAULT_STOPWORDS = frozenset(
    """a an and are as at be but by for from has have he her his if in into is it
    its no not of on or she that the their them then there these they this to was
    we were what which who will with you your""".split()
)


class CorpusError(Exception):
    """Raised for ingestion and vocabulary failures."""


@dataclass(frozen=True)
class RawDocument:
    label: str
    text: str

    def __post_init__(self):
        if not self.label:
            raise CorpusError("document label must be non-empty")


@dataclass(frozen=True)
class Corpus:
    docs: tuple[RawDocument, ...]
    classes: tuple[str, ...]  # first-appearance order

    @staticmethod
    def from_docs(docs) -> "Corpus":
        docs = tuple(docs)
        seen: dict[str, None] = {}
        for d in docs:
            seen.setdefault(d.label, None)
        return Corpus(docs=docs, classes=tuple(seen))


@dataclass(frozen=True)
class Vocabulary:
    terms: dict[str, int]  # term -> contiguous index, first-appearance order
    df: np.ndarray  # document frequency per index

    @property
    def n_terms(self) -> int:
        return len(self.terms)

    def term_list(self) -> list[str]:
        out = [""] * len(self.terms)
        for t, i in self.terms.items():
            out[i] = t
        return out


@dataclass(frozen=True)
class DocTermMatrix:
    """Sparse N x M TF-IDF matrix with per-row class labels."""

    weights: sp.csr_matrix
    labels: np.ndarray  # class index per row

    @property
    def n_docs(self) -> int:
        return self.weights.shape[0]

    @property
    def n_features(self) -> int:
        return self.weights.shape[1]

    @property
    def n_classes(self) -> int:
        return int(self.labels.max()) + 1 if len(self.labels) else 0

    def restrict_columns(self, column_indices: np.ndarray) -> "DocTermMatrix":
        """Matrix over a feature subset; engines run on IG-reduced universes."""
        return DocTermMatrix(
            weights=self.weights[:, column_indices].tocsr(), labels=self.labels
        )

    def fingerprint(self) -> str:
        """Cheap identity for checkpoint validation: shape + label multiset."""
        counts = np.bincount(self.labels)
        return f"{self.n_docs}x{self.n_features}:" + ",".join(map(str, counts))


@dataclass(frozen=True)
class CorpusStats:
    n_features: int
    n_instances: int
    n_classes: int
    avg_words_per_instance: float
    avg_word_length: float


def tokenize(text: str, stopwords=DEFAULT_STOPWORDS) -> list[str]:
    """Lowercase, split on non-alphanumeric runs, drop length<2 and stopwords."""
    return [
        tok
        for tok in _TOKEN_RE.split(text.lower())
        if len(tok) >= 2 and tok not in stopwords
    ]


def load_stopwords(path) -> frozenset[str]:
    """One token per line, UTF-8."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    return frozenset(tok.strip().lower() for tok in lines if tok.strip())


def load_corpus(path, format: str = "tsv") -> Corpus:
    path = Path(path)
    if not path.exists():
        raise CorpusError(f"corpus path does not exist: {path}")
    if format == "tsv":
        docs = []
        with path.open(encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                if not line:
                    continue
                if "\t" not in line:
                    raise CorpusError(f"malformed TSV line {lineno}: no tab")
                label, text = line.split("\t", 1)
                docs.append(RawDocument(label=label, text=text))
    elif format in ("dirs", "class-dirs"):
        docs = []
        for class_dir in sorted(p for p in path.iterdir() if p.is_dir()):
            for doc_file in sorted(p for p in class_dir.iterdir() if p.is_file()):
                text = doc_file.read_text(encoding="utf-8", errors="replace")
                docs.append(RawDocument(label=class_dir.name, text=text))
    else:
        raise CorpusError(f"unknown corpus format: {format!r}")
    if not docs:
        raise CorpusError("zero documents")
    return Corpus.from_docs(docs)


def build_vocabulary(corpus: Corpus, stopwords=DEFAULT_STOPWORDS) -> Vocabulary:
    terms: dict[str, int] = {}
    df_counts: list[int] = []
    for doc in corpus.docs:
        seen: set[str] = set()
        for tok in tokenize(doc.text, stopwords):
            if tok in seen:
                continue
            seen.add(tok)
            idx = terms.get(tok)
            if idx is None:
                terms[tok] = len(terms)
                df_counts.append(1)
            else:
                df_counts[idx] += 1
    if not terms:
        raise CorpusError("vocabulary empty after filtering")
    return Vocabulary(terms=terms, df=np.asarray(df_counts, dtype=np.int64))


def vectorize_tfidf(
    corpus: Corpus, vocab: Vocabulary, stopwords=DEFAULT_STOPWORDS
) -> DocTermMatrix:
    """tf * (ln((1+N)/(1+df)) + 1), rows L2-normalized; zero rows left zero."""
    n = len(corpus.docs)
    m = vocab.n_terms
    idf = np.log((1.0 + n) / (1.0 + vocab.df)) + 1.0

    indptr = [0]
    indices: list[int] = []
    data: list[float] = []
    class_of = {c: i for i, c in enumerate(corpus.classes)}
    labels = np.empty(n, dtype=np.int64)
    for row, doc in enumerate(corpus.docs):
        labels[row] = class_of[doc.label]
        counts: dict[int, int] = {}
        for tok in tokenize(doc.text, stopwords):
            idx = vocab.terms.get(tok)
            if idx is not None:
                counts[idx] = counts.get(idx, 0) + 1
        row_idx = sorted(counts)
        row_w = [counts[i] * idf[i] for i in row_idx]
        norm = math.sqrt(sum(w * w for w in row_w))
        if norm > 0:
            row_w = [w / norm for w in row_w]
        indices.extend(row_idx)
        data.extend(row_w)
        indptr.append(len(indices))
    weights = sp.csr_matrix(
        (np.asarray(data), np.asarray(indices, dtype=np.int64), np.asarray(indptr)),
        shape=(n, m),
    )
    return DocTermMatrix(weights=weights, labels=labels)


def compute_stats(
    corpus: Corpus, vocab: Vocabulary, stopwords=DEFAULT_STOPWORDS
) -> CorpusStats:
    if not corpus.docs:
        raise CorpusError("empty corpus")
    n_words = 0
    n_chars = 0
    for doc in corpus.docs:
        toks = tokenize(doc.text, stopwords)
        n_words += len(toks)
        n_chars += sum(len(t) for t in toks)
    n = len(corpus.docs)
    return CorpusStats(
        n_features=vocab.n_terms,
        n_instances=n,
        n_classes=len(corpus.classes),
        avg_words_per_instance=n_words / n,
        avg_word_length=(n_chars / n_words) if n_words else 0.0,
    )
