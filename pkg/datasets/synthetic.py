"""Planted-topic corpus with hashtags, for checking topic separation end to end.

Every document draws its words from one planted topic, mixed with a vocabulary
of noise words shared by all topics. Some documents also carry hashtags from
that topic's tag pool (or, with some probability, from another topic's pool).
Topics sit on a ring: each shares part of its word support with the next one,
with its own Zipf ordering over that support.
"""
import logging
from dataclasses import dataclass

import numpy as np

from .corpus import RawDocument, make_document


@dataclass
class PlantedCorpus:
    docs: list
    topics: np.ndarray
    n_topics: int

    def reference_labels(self):
        return [{int(t)} for t in self.topics]

    def raw_documents(self):
        # tokens are tokenizer-stable, so joining them reproduces the documents
        return [RawDocument(id=d.id, text=' '.join(d.tokens)) for d in self.docs]


def content_word(j):
    return 'word{:04d}'.format(j)


def noise_word(j):
    return 'common{:03d}'.format(j)


def topic_tag(topic, j):
    return '#topic{}tag{}'.format(topic, j)


def topic_supports(n_topics, words_per_topic, overlap):
    stride = max(1, int(round(words_per_topic * (1 - overlap))))
    total = max(n_topics * stride, words_per_topic)
    return [[(t * stride + j) % total for j in range(words_per_topic)] for t in range(n_topics)]


def make_planted_corpus(n_docs=2000, n_topics=5, seed=0, words_per_topic=60, overlap=0.75,
                        noise_words=120, noise_fraction=0.3, doc_length=(4, 8), tags_per_topic=4,
                        hashtag_weights=(0.78, 0.12, 0.06, 0.04), contamination=0.2, zipf_exponent=1.0):
    """Sample a corpus with known topic assignments.

    The defaults leave about a fifth of the documents tagged and make the
    topics hard to tell apart from their words alone.

    Args:
        overlap: fraction of a topic's word support shared with the next topic.
        noise_fraction: probability that a word is drawn from the shared
            noise vocabulary instead of the document's topic.
        doc_length: inclusive range of non-hashtag tokens per document.
        hashtag_weights: probabilities of carrying 0, 1, 2, ... hashtags.
        contamination: probability that a hashtag comes from the pool of a
            different, uniformly chosen topic.
    """
    rng = np.random.default_rng(seed)
    supports = [rng.permutation(s) for s in topic_supports(n_topics, words_per_topic, overlap)]
    ranks = np.arange(1, words_per_topic + 1, dtype=np.float64)
    word_p = ranks ** -zipf_exponent
    word_p /= word_p.sum()
    tag_p = np.asarray(hashtag_weights, dtype=np.float64)
    tag_p /= tag_p.sum()

    topics = rng.integers(0, n_topics, size=n_docs)
    docs = []
    for i, topic in enumerate(topics):
        length = int(rng.integers(doc_length[0], doc_length[1] + 1))
        tokens = []
        for _ in range(length):
            if rng.random() < noise_fraction:
                tokens.append(noise_word(int(rng.integers(noise_words))))
            else:
                tokens.append(content_word(int(supports[topic][rng.choice(words_per_topic, p=word_p)])))
        for _ in range(int(rng.choice(len(tag_p), p=tag_p))):
            source = int(topic)
            if n_topics > 1 and rng.random() < contamination:
                source = int((topic + rng.integers(1, n_topics)) % n_topics)
            tokens.append(topic_tag(source, int(rng.integers(tags_per_topic))))
        docs.append(make_document('doc{:05d}'.format(i), tokens))
    logging.info('planted corpus: %d documents, %d topics, seed %d', n_docs, n_topics, seed)
    return PlantedCorpus(docs=docs, topics=topics, n_topics=n_topics)
