import math

import numpy as np
import pytest
import scipy.sparse as sp

from datasets.corpus import make_document
from datasets.vectorizer import (COUNTS, TFIDF, DocTermMatrix, build_vocabulary, count_matrix, read_vocabulary,
                                 tfidf, write_vocabulary)


def docs_of(*token_lists):
    return [make_document(str(i), tokens) for i, tokens in enumerate(token_lists)]


def dense_counts(docs, vocab):
    X = np.zeros((len(docs), len(vocab)))
    for i, d in enumerate(docs):
        for t in d.tokens:
            if t in vocab.token_to_index:
                X[i, vocab.token_to_index[t]] += 1
    return X


def dense_tfidf(counts):
    n = counts.shape[0]
    df = (counts > 0).sum(axis=0)
    X = counts * (np.log((1 + n) / (1 + df)) + 1)
    norms = np.sqrt((X ** 2).sum(axis=1, keepdims=True))
    norms[norms == 0] = 1
    return X / norms


class TestVocabulary:
    def test_min_df(self):
        vocab = build_vocabulary(docs_of(['aa', 'bb'], ['bb', 'cc']), min_df=2)
        assert vocab.index_to_token == ['bb']

    def test_lexicographic_indices(self):
        vocab = build_vocabulary(docs_of(['bb', 'aa'], ['cc', 'bb']), min_df=1)
        assert vocab.token_to_index == {'aa': 0, 'bb': 1, 'cc': 2}
        assert vocab.doc_frequency == [1, 2, 1]
        assert all(vocab.index_to_token[i] == t for t, i in vocab.token_to_index.items())

    def test_doc_frequency_counts_documents_once(self):
        vocab = build_vocabulary(docs_of(['aa', 'aa', 'aa']), min_df=1)
        assert vocab.doc_frequency == [1]

    def test_empty_vocabulary(self):
        with pytest.raises(ValueError, match='empty vocabulary'):
            build_vocabulary(docs_of([]), min_df=1)

    def test_tsv(self, tmp_path):
        vocab = build_vocabulary(docs_of(['#tag', 'bb'], ['bb']), min_df=1)
        write_vocabulary(vocab, tmp_path / 'v.tsv')
        assert (tmp_path / 'v.tsv').read_text() == '#tag\t0\t1\nbb\t1\t2\n'
        assert read_vocabulary(tmp_path / 'v.tsv') == vocab


class TestCountMatrix:
    def test_repeated_token(self):
        docs = docs_of(['bb', 'bb', 'bb'])
        X = count_matrix(docs, build_vocabulary(docs, min_df=1))
        assert X.kind == COUNTS
        assert X.entries.toarray().tolist() == [[3.0]]

    def test_out_of_vocabulary_row_retained(self):
        vocab = build_vocabulary(docs_of(['aa']), min_df=1)
        X = count_matrix(docs_of(['aa'], ['zz', 'yy']), vocab)
        assert X.entries.toarray().tolist() == [[1.0], [0.0]]

    def test_two_documents(self):
        docs = docs_of(['aa', 'bb'], ['bb'])
        X = count_matrix(docs, build_vocabulary(docs, min_df=1))
        assert X.entries.toarray().tolist() == [[1.0, 1.0], [0.0, 1.0]]


class TestTfidf:
    def test_single_document(self):
        docs = docs_of(['aa'] * 3 + ['bb'] * 4)
        Xt = tfidf(count_matrix(docs, build_vocabulary(docs, min_df=1)))
        assert Xt.kind == TFIDF
        np.testing.assert_allclose(Xt.entries.toarray(), [[0.6, 0.8]], atol=1e-12)

    def test_idf_ordering(self):
        docs = docs_of(['aa', 'bb'], ['bb'])
        Xt = tfidf(count_matrix(docs, build_vocabulary(docs, min_df=1))).entries.toarray()
        idf_one, idf_both = math.log(3 / 2) + 1, 1.0
        assert idf_both < idf_one
        assert idf_one == pytest.approx(1.405465, abs=1e-6)
        norm = math.hypot(idf_one, idf_both)
        np.testing.assert_allclose(Xt, [[idf_one / norm, idf_both / norm], [0.0, 1.0]], atol=1e-12)

    def test_zero_row_passes_through(self):
        X = DocTermMatrix(entries=sp.csr_matrix(np.array([[0.0, 0.0], [1.0, 2.0]])), kind=COUNTS)
        out = tfidf(X).entries.toarray()
        assert out[0].tolist() == [0.0, 0.0]
        assert np.linalg.norm(out[1]) == pytest.approx(1.0, abs=1e-9)

    def test_requires_counts(self):
        X = DocTermMatrix(entries=sp.csr_matrix(np.eye(2)), kind=TFIDF)
        with pytest.raises(ValueError):
            tfidf(X)

    @pytest.mark.parametrize('seed', range(20))
    def test_matches_dense_reference(self, seed):
        rng = np.random.default_rng(seed)
        words = ['w{}'.format(j) for j in range(12)]
        n = int(rng.integers(1, 11))
        docs = docs_of(*[list(rng.choice(words, size=int(rng.integers(0, 9)))) for _ in range(n)])
        if not any(d.tokens for d in docs):
            docs = docs_of(['w0'], *[d.tokens for d in docs])
        vocab = build_vocabulary(docs, min_df=1)
        X = count_matrix(docs, vocab)
        counts = dense_counts(docs, vocab)
        np.testing.assert_allclose(X.entries.toarray(), counts, rtol=0, atol=1e-12)
        Xt = tfidf(X)
        np.testing.assert_allclose(Xt.entries.toarray(), dense_tfidf(counts), rtol=0, atol=1e-12)
        # same sparsity pattern, unit rows
        assert np.array_equal(Xt.entries.toarray() > 0, counts > 0)
        norms = np.linalg.norm(Xt.entries.toarray(), axis=1)
        np.testing.assert_allclose(norms[counts.sum(axis=1) > 0], 1.0, atol=1e-9)
        assert (Xt.entries.data > 0).all()
