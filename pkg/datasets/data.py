import os

from .corpus import filter_documents, read_raw_documents

data_root = os.path.dirname(os.path.realpath(__file__)) + '/../data'
data_paths = {
    'sample': os.path.join(data_root, 'sample_corpus.jsonl'),
}


def resolve_input(name):
    """Map a bundled dataset name to its path, pass real paths through."""
    path = data_paths.get(name, name)
    if not os.path.isfile(path):
        raise FileNotFoundError('input corpus not found: {}'.format(path))
    return path


def get_dataset(name, min_chars=160, drop_retweets=True, drop_replies=True):
    raw = read_raw_documents(resolve_input(name))
    return filter_documents(raw, min_chars=min_chars, drop_retweets=drop_retweets,
                            drop_replies=drop_replies)
