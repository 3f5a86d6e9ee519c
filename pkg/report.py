"""Topic reports and supervised-vs-unsupervised comparison metrics."""
import logging
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
from sklearn.metrics.cluster import contingency_matrix, normalized_mutual_info_score

from utils import save_json

UNASSIGNED = -1


@dataclass
class TopicReport:
    topics: List[List[Tuple[str, float]]]
    dominant: np.ndarray
    coefficients: np.ndarray


@dataclass
class ComparisonResult:
    purity: float
    nmi: float
    objective: float
    inverse_purity: float = float('nan')
    n_evaluated: int = 0

    def to_json(self):
        return {'purity': self.purity, 'nmi': self.nmi, 'objective': self.objective,
                'inverse_purity': self.inverse_purity, 'n_evaluated': self.n_evaluated}


def top_words(H, vocab, top_n=20, W=None):
    """Highest-weight tokens per topic; ties go to the lower token index.

    Zero weights are never reported. Passing W also fills the per-document
    dominant topics and coefficients.
    """
    H = np.asarray(H, dtype=np.float64)
    topics = []
    for row in H:
        order = np.lexsort((np.arange(len(row)), -row))
        order = [j for j in order[:top_n] if row[j] > 0]
        topics.append([(vocab.index_to_token[j], float(row[j])) for j in order])
    if W is None:
        W = np.zeros((0, H.shape[0]))
    W = np.asarray(W, dtype=np.float64)
    return TopicReport(topics=topics, dominant=dominant_topics(W), coefficients=W)


def dominant_topics(W):
    W = np.asarray(W, dtype=np.float64)
    if W.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    # argmax returns the first maximum, i.e. the lowest component id
    dominant = np.argmax(W, axis=1).astype(np.int64)
    dominant[~(W > 0).any(axis=1)] = UNASSIGNED
    return dominant


def purity_score(y_true, y_pred):
    contingency = contingency_matrix(y_true, y_pred)
    return float(np.sum(np.amax(contingency, axis=0)) / np.sum(contingency))


def inverse_purity_score(y_true, y_pred):
    contingency = contingency_matrix(y_true, y_pred)
    return float(np.sum(np.amax(contingency, axis=1)) / np.sum(contingency))


def single_label_indices(reference):
    return [i for i, labels in enumerate(reference) if len(labels) == 1]


def evaluate_run(fact, reference):
    """Purity and NMI of dominant topics against single-label reference docs."""
    keep = single_label_indices(reference)
    if not keep:
        raise ValueError('no document has exactly one reference label')
    if fact.W.shape[0] != len(reference):
        raise ValueError('factorization has {} documents, reference has {}'.format(fact.W.shape[0], len(reference)))
    y_true = np.array([next(iter(reference[i])) for i in keep])
    y_pred = dominant_topics(fact.W)[keep]
    return ComparisonResult(purity=purity_score(y_true, y_pred),
                            nmi=float(normalized_mutual_info_score(y_true, y_pred, average_method='arithmetic')),
                            objective=float(fact.final_objective),
                            inverse_purity=inverse_purity_score(y_true, y_pred),
                            n_evaluated=len(keep))


def compare_runs(run_a, run_b, reference):
    result_a = evaluate_run(run_a, reference)
    result_b = evaluate_run(run_b, reference)
    logging.info('comparison on %d documents: purity %.4f vs %.4f, nmi %.4f vs %.4f',
                 result_a.n_evaluated, result_a.purity, result_b.purity, result_a.nmi, result_b.nmi)
    return result_a, result_b


def match_topics(report_a, report_b):
    """Pair every topic of report_a with its best top-word overlap in report_b.

    Returns (topic_a, topic_b, jaccard) triples; topic_b is None when no topic
    of report_b shares a word.
    """
    words_b = [{t for t, _ in topic} for topic in report_b.topics]
    matches = []
    for a, topic in enumerate(report_a.topics):
        words = {t for t, _ in topic}
        best, best_score = None, 0.0
        for b, other in enumerate(words_b):
            union = words | other
            score = len(words & other) / len(union) if union else 0.0
            if score > best_score:
                best, best_score = b, score
        matches.append((a, best, best_score))
    return matches


def write_topic_report(report, doc_ids, path):
    topics = [{'id': j, 'words': [{'token': t, 'weight': w} for t, w in words]}
              for j, words in enumerate(report.topics)]
    documents = [{'id': doc_id,
                  'dominant_topic': None if report.dominant[i] == UNASSIGNED else int(report.dominant[i]),
                  'coefficients': [float(v) for v in report.coefficients[i]]}
                 for i, doc_id in enumerate(doc_ids)]
    save_json({'topics': topics, 'documents': documents}, path)


def write_comparison(supervised, unsupervised, path, matches=None, reference=None):
    """reference describes where the reference labels came from."""
    obj = {'supervised': supervised.to_json(), 'unsupervised': unsupervised.to_json()}
    if reference is not None:
        obj['reference'] = reference
    if matches is not None:
        obj['topic_matches'] = [{'supervised': a, 'unsupervised': b, 'jaccard': s} for a, b, s in matches]
    save_json(obj, path)
