"""Short-document ingestion: JSONL loading, tweet filtering, tokenization.

Raw input is JSON Lines, one object per line with the fields `id`, `text`,
`is_retweet` (default false), `in_reply_to` (default null) and `created_at`.
"""
import json
import logging
import re
import unicodedata
from dataclasses import dataclass, field
from typing import FrozenSet, List, Optional

URL_RE = re.compile(r'(?:https?://|www\.)\S+', re.IGNORECASE)
MENTION_RE = re.compile(r'(?<!\w)@\w+')
HAS_LETTER_RE = re.compile(r'[^\W\d_]')
MIN_TOKEN_LEN = 2


@dataclass(frozen=True)
class RawDocument:
    id: str
    text: str
    is_retweet: bool = False
    in_reply_to: Optional[str] = None
    created_at: Optional[str] = None

    def to_json(self):
        obj = {'id': self.id, 'text': self.text, 'is_retweet': self.is_retweet,
               'in_reply_to': self.in_reply_to}
        if self.created_at is not None:
            obj['created_at'] = self.created_at
        return obj


@dataclass(frozen=True)
class Document:
    id: str
    tokens: List[str]
    hashtags: FrozenSet[str]
    labels: FrozenSet[int] = field(default_factory=frozenset)

    @property
    def length(self):
        return len(self.tokens)

    @property
    def is_labeled(self):
        return len(self.labels) > 0

    def to_json(self):
        return {'id': self.id,
                'tokens': list(self.tokens),
                'hashtags': sorted(self.hashtags),
                'labels': sorted(self.labels)}

    @classmethod
    def from_json(cls, obj):
        return cls(id=obj['id'], tokens=list(obj['tokens']),
                   hashtags=frozenset(obj['hashtags']),
                   labels=frozenset(int(l) for l in obj.get('labels', [])))


@dataclass
class FilterStats:
    total: int = 0
    retweets: int = 0
    replies: int = 0
    too_short: int = 0
    kept: int = 0


def _strip_punctuation(token):
    start, end = 0, len(token)
    while start < end and token[start] != '#' and unicodedata.category(token[start]).startswith('P'):
        start += 1
    while end > start and token[end - 1] != '#' and unicodedata.category(token[end - 1]).startswith('P'):
        end -= 1
    return token[start:end]


def tokenize(text):
    """Lowercase tokens with URLs and @-mentions removed, hashtags kept whole."""
    text = URL_RE.sub(' ', text)
    text = MENTION_RE.sub(' ', text)
    tokens = []
    for raw in text.lower().split():
        token = _strip_punctuation(raw)
        if len(token) >= MIN_TOKEN_LEN:
            tokens.append(token)
    return tokens


def extract_hashtags(tokens):
    # digits-only tags like #2020 are dates or counters, not topics
    return {t for t in tokens if t.startswith('#') and HAS_LETTER_RE.search(t[1:])}


def make_document(doc_id, tokens):
    return Document(id=doc_id, tokens=list(tokens), hashtags=frozenset(extract_hashtags(tokens)))


def _parse_raw(obj, lineno):
    if not isinstance(obj, dict):
        raise ValueError('line {}: expected a JSON object'.format(lineno))
    doc_id, text = obj.get('id'), obj.get('text')
    if not isinstance(doc_id, str) or not doc_id:
        raise ValueError('line {}: missing or empty "id"'.format(lineno))
    if not isinstance(text, str):
        raise ValueError('line {}: missing "text"'.format(lineno))
    return RawDocument(id=doc_id, text=text,
                       is_retweet=bool(obj.get('is_retweet', False)),
                       in_reply_to=obj.get('in_reply_to'),
                       created_at=obj.get('created_at'))


def read_raw_documents(path):
    raw, seen = [], set()
    with open(path, encoding='utf-8') as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise ValueError('line {}: malformed JSON ({})'.format(lineno, e.msg)) from e
            doc = _parse_raw(obj, lineno)
            if doc.id in seen:
                raise ValueError('line {}: duplicate id {!r}'.format(lineno, doc.id))
            seen.add(doc.id)
            raw.append(doc)
    return raw


def filter_documents(raw, min_chars=160, drop_retweets=True, drop_replies=True):
    """Apply the tweet filters and tokenize survivors, input order preserved."""
    stats = FilterStats(total=len(raw))
    docs = []
    for r in raw:
        if drop_retweets and r.is_retweet:
            stats.retweets += 1
            continue
        if drop_replies and r.in_reply_to is not None:
            stats.replies += 1
            continue
        # len() counts code points
        if len(r.text) < min_chars:
            stats.too_short += 1
            continue
        docs.append(make_document(r.id, tokenize(r.text)))
    stats.kept = len(docs)
    logging.info('kept %d of %d documents (retweets %d, replies %d, too short %d)',
                 stats.kept, stats.total, stats.retweets, stats.replies, stats.too_short)
    return docs, stats


def load_corpus(path, min_chars=160, drop_retweets=True, drop_replies=True):
    docs, _ = filter_documents(read_raw_documents(path), min_chars, drop_retweets, drop_replies)
    return docs


def write_raw_documents(raw, path):
    with open(path, 'w', encoding='utf-8') as f:
        for r in raw:
            f.write(json.dumps(r.to_json(), ensure_ascii=False) + '\n')


def write_documents(docs, path):
    with open(path, 'w', encoding='utf-8') as f:
        for d in docs:
            f.write(json.dumps(d.to_json(), ensure_ascii=False) + '\n')


def read_documents(path):
    docs = []
    with open(path, encoding='utf-8') as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                docs.append(Document.from_json(json.loads(line)))
            except (json.JSONDecodeError, KeyError) as e:
                raise ValueError('{} line {}: bad document record ({})'.format(path, lineno, e)) from e
    return docs
