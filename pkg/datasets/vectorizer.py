"""Vocabulary, document-term count matrix X and its TF-IDF reweighting."""
import logging
from collections import Counter
from dataclasses import dataclass
from typing import Dict, List

import numpy as np
import scipy.sparse as sp
from sklearn.feature_extraction.text import CountVectorizer, TfidfTransformer

from utils import write_coordinate

COUNTS = 'counts'
TFIDF = 'tfidf'


@dataclass
class Vocabulary:
    token_to_index: Dict[str, int]
    index_to_token: List[str]
    doc_frequency: List[int]

    def __len__(self):
        return len(self.index_to_token)


@dataclass
class DocTermMatrix:
    entries: sp.csr_matrix
    kind: str

    @property
    def n(self):
        return self.entries.shape[0]

    @property
    def w(self):
        return self.entries.shape[1]

    @property
    def nnz(self):
        return self.entries.nnz


def _identity(tokens):
    return tokens


def build_vocabulary(docs, min_df=5):
    """Tokens present in at least `min_df` documents, indexed lexicographically."""
    if not docs:
        raise ValueError('cannot build a vocabulary from zero documents')
    df = Counter(t for d in docs for t in set(d.tokens))
    kept = sorted(t for t, c in df.items() if c >= min_df)
    if not kept:
        raise ValueError('empty vocabulary')
    logging.info('vocabulary: %d of %d tokens with df >= %d', len(kept), len(df), min_df)
    return Vocabulary(token_to_index={t: i for i, t in enumerate(kept)},
                      index_to_token=kept,
                      doc_frequency=[df[t] for t in kept])


def count_matrix(docs, vocab):
    # fixed vocabulary: out-of-vocabulary tokens are skipped, empty rows retained
    vectorizer = CountVectorizer(analyzer=_identity, vocabulary=vocab.token_to_index, dtype=np.float64)
    X = vectorizer.fit_transform([d.tokens for d in docs])
    return DocTermMatrix(entries=sp.csr_matrix(X, dtype=np.float64), kind=COUNTS)


def tfidf(X):
    """Smooth idf ln((1+n)/(1+df))+1 followed by l2 row normalization."""
    if X.kind != COUNTS:
        raise ValueError('tfidf expects a counts matrix, got {!r}'.format(X.kind))
    transformer = TfidfTransformer(norm='l2', use_idf=True, smooth_idf=True, sublinear_tf=False)
    Xt = transformer.fit_transform(X.entries)
    Xt = sp.csr_matrix(Xt, dtype=np.float64)
    Xt.sort_indices()
    return DocTermMatrix(entries=Xt, kind=TFIDF)


def write_vocabulary(vocab, path):
    with open(path, 'w', encoding='utf-8') as f:
        for i, (t, df) in enumerate(zip(vocab.index_to_token, vocab.doc_frequency)):
            f.write('{}\t{}\t{}\n'.format(t, i, df))


def read_vocabulary(path):
    rows = []
    with open(path, encoding='utf-8') as f:
        for line in f:
            if not line.strip():
                continue
            token, index, df = line.rstrip('\n').split('\t')
            rows.append((int(index), token, int(df)))
    rows.sort()
    if [r[0] for r in rows] != list(range(len(rows))):
        raise ValueError('{}: vocabulary indices are not contiguous'.format(path))
    tokens = [r[1] for r in rows]
    return Vocabulary(token_to_index={t: i for i, t in enumerate(tokens)},
                      index_to_token=tokens,
                      doc_frequency=[r[2] for r in rows])


def write_matrix(X, path):
    write_coordinate(X.entries, path)
