"""Community labels for documents and the constraint matrix L.

L[i, j] = 1 when document i carries a hashtag of community j or carries no
selected community at all, 0 otherwise. Columns from the number of selected
communities up to k are therefore zero for every labeled document.
"""
import logging
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Dict

import numpy as np


@dataclass
class CommunityLookup:
    table: Dict[str, int]

    def __contains__(self, tag):
        return tag in self.table

    def __getitem__(self, tag):
        return self.table[tag]


@dataclass
class ConstraintMatrix:
    entries: np.ndarray
    labeled_mask: np.ndarray

    @property
    def n(self):
        return self.entries.shape[0]

    @property
    def k(self):
        return self.entries.shape[1]


def build_lookup(partition, selected):
    selected = set(selected)
    table = {t: c for t, c in sorted(partition.community_of.items()) if c in selected}
    logging.info('look-up table: %d hashtags in %d communities', len(table), len(selected))
    return CommunityLookup(table=table)


def label_documents(docs, lookup):
    return [replace(d, labels=frozenset(lookup[h] for h in d.hashtags if h in lookup)) for d in docs]


def labeled_fraction(docs):
    if not docs:
        return 0.0
    return sum(d.is_labeled for d in docs) / len(docs)


def build_constraint_matrix(docs, k):
    L = np.zeros((len(docs), k), dtype=np.float64)
    mask = np.zeros(len(docs), dtype=bool)
    for i, d in enumerate(docs):
        if not d.labels:
            L[i, :] = 1.0
            continue
        bad = [l for l in d.labels if not 0 <= l < k]
        if bad:
            raise ValueError('document {!r} has label {} outside [0, {})'.format(d.id, max(bad), k))
        L[i, sorted(d.labels)] = 1.0
        mask[i] = True
    return ConstraintMatrix(entries=L, labeled_mask=mask)


def downsample_unlabeled(docs, target_ratio=0.5, seed=42):
    """Drop a seeded random subset of unlabeled documents.

    Keeps floor(n_labeled * (1 - r) / r) unlabeled documents so the labeled
    fraction reaches at least r; relative order is preserved.
    """
    if not 0 < target_ratio <= 1:
        raise ValueError('target ratio must be in (0, 1], got {}'.format(target_ratio))
    labeled = [i for i, d in enumerate(docs) if d.is_labeled]
    unlabeled = [i for i, d in enumerate(docs) if not d.is_labeled]
    if not unlabeled:
        return list(docs)
    if not labeled:
        raise ValueError('cannot reach target ratio {}: no labeled documents'.format(target_ratio))
    # decimal ratios such as 0.2 are meant exactly, not as their binary value
    r = Fraction(target_ratio).limit_denominator()
    keep = math.floor(len(labeled) * (1 - r) / r)
    if len(unlabeled) <= keep:
        return list(docs)
    rng = np.random.default_rng(seed)
    chosen = rng.choice(len(unlabeled), size=keep, replace=False)
    kept = set(labeled) | {unlabeled[j] for j in chosen}
    logging.info('down-sampling: kept %d of %d unlabeled documents', keep, len(unlabeled))
    return [d for i, d in enumerate(docs) if i in kept]


def write_lookup(lookup, path):
    with open(path, 'w', encoding='utf-8') as f:
        for tag in sorted(lookup.table):
            f.write('{}\t{}\n'.format(tag, lookup.table[tag]))


def write_constraints(L, path):
    """Coordinate text of the 1-entries; unlabeled rows are written as `row *`."""
    with open(path, 'w', encoding='utf-8') as f:
        nnz = int(L.entries[L.labeled_mask].sum())
        f.write('{} {} {}\n'.format(L.n, L.k, nnz))
        for i in range(L.n):
            if not L.labeled_mask[i]:
                f.write('{} *\n'.format(i))
                continue
            for j in np.flatnonzero(L.entries[i]):
                f.write('{} {} 1\n'.format(i, int(j)))
