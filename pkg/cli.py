"""Hashtag-community topic pipeline.

    python cli.py pipeline --config config.json --output-dir results/run1
    python cli.py ingest --input data/sample_corpus.jsonl --output-dir results/run1
    python cli.py graph|communities|label|fit|report --output-dir results/run1

Every stage reads the previous stage's files from the output directory and
writes its own, so any stage can be re-run on its own. Diagnostics go to
stderr and to log_<hostname>.txt; results only go to artifact files.
"""
import argparse
import logging
import os
import socket
import sys
import time
from dataclasses import asdict, dataclass, fields

import numpy as np
import wandb
import yaml

from datasets.corpus import read_documents, write_documents, write_raw_documents
from datasets.data import get_dataset, resolve_input
from datasets.synthetic import make_planted_corpus
from datasets.vectorizer import build_vocabulary, count_matrix, read_vocabulary, tfidf, write_matrix, write_vocabulary
from graphs.hashgraph import (ModularityParams, build_graph, graph_summary, louvain, modularity, read_graph,
                              read_partition, top_communities, write_graph, write_partition)
from graphs.labeler import (build_constraint_matrix, build_lookup, downsample_unlabeled, label_documents,
                            labeled_fraction, write_constraints, write_lookup)
from models.tsnmf import SolverConfig, fit, fit_nmf, init_factors, read_factorization, write_factorization
from report import compare_runs, match_topics, top_words, write_comparison, write_topic_report
from utils import file_checksum, log_fit_end, save_json, seed_everything, setup_logging

STAGES = ['ingest', 'graph', 'communities', 'label', 'fit', 'report']
STAGE_ARTIFACTS = {
    'ingest': ['documents.jsonl'],
    'graph': ['graph.tsv'],
    'communities': ['partition.tsv'],
    'label': ['lookup.tsv', 'labeled.jsonl'],
    'fit': ['vocabulary.tsv', 'tfidf.mtx', 'constraints.txt',
            'W_supervised.mtx', 'H_supervised.mtx', 'fit_supervised.json',
            'W_unsupervised.mtx', 'H_unsupervised.mtx', 'fit_unsupervised.json'],
    'report': ['topics_supervised.json', 'topics_unsupervised.json', 'comparison.json'],
}
PIPELINE_ARTIFACTS = [name for stage in STAGES for name in STAGE_ARTIFACTS[stage]]
RUNS = ['supervised', 'unsupervised']
# the same labels confine the supervised run, so its scores against them are optimistic
COMMUNITY_REFERENCE = 'community labels (also used as constraints in the supervised run)'


@dataclass
class PipelineConfig:
    input_path: str = 'sample'
    min_chars: int = 160
    drop_retweets: bool = True
    drop_replies: bool = True
    min_df: int = 5
    tau: int = 2
    resolution: float = 0.3
    num_communities: int = 70
    k: int = 80
    target_labeled_ratio: float = 0.5
    max_iter: int = 200
    tol: float = 1e-4
    epsilon: float = 1e-12
    seed: int = 42
    top_n: int = 20
    output_dir: str = './results'
    device: str = 'cpu'
    wandb_log: bool = False
    project: str = 'hashtag-tsnmf'

    def validate(self):
        checks = [
            (self.min_chars >= 1, 'min_chars must be >= 1'),
            (self.min_df >= 1, 'min_df must be >= 1'),
            (self.tau >= 1, 'tau must be >= 1'),
            (self.resolution > 0, 'resolution must be positive'),
            (self.num_communities >= 1, 'num_communities must be >= 1'),
            (self.k >= 1, 'k must be >= 1'),
            (self.num_communities <= self.k,
             'num_communities ({}) must not exceed k ({})'.format(self.num_communities, self.k)),
            (0 < self.target_labeled_ratio <= 1, 'target_labeled_ratio must be in (0, 1]'),
            (self.max_iter >= 1, 'max_iter must be >= 1'),
            (self.tol > 0, 'tol must be positive'),
            (self.epsilon > 0, 'epsilon must be positive'),
            (self.top_n >= 1, 'top_n must be >= 1'),
            (self.device in ('cpu', 'cuda'), 'device must be cpu or cuda'),
        ]
        for ok, message in checks:
            if not ok:
                raise ValueError('invalid config: ' + message)
        return self

    def solver_config(self):
        return SolverConfig(k=self.k, max_iter=self.max_iter, tol=self.tol, epsilon=self.epsilon,
                            seed=self.seed, device=self.device)

    def artifact(self, name):
        return os.path.join(self.output_dir, name)


def load_config(path):
    """JSON or YAML mapping of PipelineConfig fields, all optional."""
    with open(path, encoding='utf-8') as f:
        values = yaml.safe_load(f) or {}
    if not isinstance(values, dict):
        raise ValueError('{}: config must be a mapping'.format(path))
    defaults = PipelineConfig()
    known = {f.name for f in fields(PipelineConfig)}
    unknown = sorted(set(values) - known)
    if unknown:
        raise ValueError('{}: unknown config keys {}'.format(path, ', '.join(unknown)))
    return PipelineConfig(**{name: _coerce(name, value, getattr(defaults, name)) for name, value in values.items()})


def _coerce(name, value, default):
    # YAML reads JSON-style exponents such as 1e-4 as strings
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ValueError('config key {} must be true or false'.format(name))
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or float(value) != int(float(value)):
            raise ValueError('config key {} must be an integer'.format(name))
        return int(float(value))
    if isinstance(default, float):
        return float(value)
    return str(value)


def stage_ingest(config):
    docs, stats = get_dataset(config.input_path, min_chars=config.min_chars,
                              drop_retweets=config.drop_retweets, drop_replies=config.drop_replies)
    write_documents(docs, config.artifact('documents.jsonl'))
    return {'n_raw': stats.total, 'n_filtered': stats.kept, 'retweets': stats.retweets,
            'replies': stats.replies, 'too_short': stats.too_short}


def stage_graph(config):
    docs = read_documents(config.artifact('documents.jsonl'))
    graph = build_graph(docs, tau=config.tau)
    write_graph(graph, config.artifact('graph.tsv'))
    return graph_summary(graph)


def stage_communities(config):
    docs = read_documents(config.artifact('documents.jsonl'))
    tags = {h for d in docs for h in d.hashtags}
    graph = read_graph(config.artifact('graph.tsv'), tau=config.tau, nodes=tags)
    params = ModularityParams(resolution=config.resolution)
    partition = louvain(graph, params, seed=config.seed)
    write_partition(partition, config.artifact('partition.tsv'))
    return {'num_communities': partition.num_communities,
            'modularity': modularity(graph, partition, params) if graph.nodes else 0.0,
            'largest_sizes': [partition.sizes[c] for c in top_communities(partition, 10)]}


def stage_label(config):
    docs = read_documents(config.artifact('documents.jsonl'))
    partition = read_partition(config.artifact('partition.tsv'))
    lookup = build_lookup(partition, top_communities(partition, config.num_communities))
    labeled = label_documents(docs, lookup)
    before = labeled_fraction(labeled)
    kept = downsample_unlabeled(labeled, config.target_labeled_ratio, seed=config.seed)
    after = labeled_fraction(kept)
    logging.info('labeled fraction %.4f before and %.4f after down-sampling', before, after)
    write_lookup(lookup, config.artifact('lookup.tsv'))
    write_documents(kept, config.artifact('labeled.jsonl'))
    return {'n_before_downsampling': len(labeled), 'n_after_downsampling': len(kept),
            'labeled_fraction_before': before, 'labeled_fraction_after': after}


def stage_fit(config):
    docs = read_documents(config.artifact('labeled.jsonl'))
    vocab = build_vocabulary(docs, min_df=config.min_df)
    X = tfidf(count_matrix(docs, vocab))
    L = build_constraint_matrix(docs, config.k)
    solver = config.solver_config()
    init = init_factors(X, L, solver)
    supervised = fit(X, L, solver, init=init)
    unsupervised = fit_nmf(X, solver, init=init_factors(X, np.ones((X.n, solver.k)), solver))
    write_vocabulary(vocab, config.artifact('vocabulary.tsv'))
    write_matrix(X, config.artifact('tfidf.mtx'))
    write_constraints(L, config.artifact('constraints.txt'))
    for name, fact in zip(RUNS, [supervised, unsupervised]):
        write_factorization(fact, config.output_dir, name)
        if config.wandb_log:
            log_fit_end(name, fact)
    return {'n': X.n, 'w': X.w, 'nnz': X.nnz,
            'objective_supervised': supervised.final_objective,
            'objective_unsupervised': unsupervised.final_objective}


def stage_report(config):
    docs = read_documents(config.artifact('labeled.jsonl'))
    vocab = read_vocabulary(config.artifact('vocabulary.tsv'))
    runs = [read_factorization(config.output_dir, name) for name in RUNS]
    reports = []
    for name, fact in zip(RUNS, runs):
        report = top_words(fact.H, vocab, config.top_n, W=fact.W)
        write_topic_report(report, [d.id for d in docs], config.artifact('topics_{}.json'.format(name)))
        reports.append(report)
    supervised, unsupervised = compare_runs(runs[0], runs[1], [set(d.labels) for d in docs])
    write_comparison(supervised, unsupervised, config.artifact('comparison.json'),
                     matches=match_topics(reports[0], reports[1]), reference=COMMUNITY_REFERENCE)
    if config.wandb_log:
        wandb.log({'purity_supervised': supervised.purity, 'nmi_supervised': supervised.nmi,
                   'purity_unsupervised': unsupervised.purity, 'nmi_unsupervised': unsupervised.nmi})
    return {'supervised': supervised.to_json(), 'unsupervised': unsupervised.to_json()}


STAGE_FUNCS = {
    'ingest': stage_ingest,
    'graph': stage_graph,
    'communities': stage_communities,
    'label': stage_label,
    'fit': stage_fit,
    'report': stage_report,
}


def run_stage(name, config):
    """Run one stage; returns (exit status, stats, seconds)."""
    start = time.time()
    try:
        stats = STAGE_FUNCS[name](config)
    except Exception as e:
        logging.error('stage %s failed: %s', name, e)
        return 1, None, time.time() - start
    seconds = time.time() - start
    logging.info('stage %s done in %.2fs', name, seconds)
    return 0, stats, seconds


def _start_run(config):
    os.makedirs(config.output_dir, exist_ok=True)
    setup_logging(os.path.join(config.output_dir, 'log_{}.txt'.format(socket.gethostname())))
    logging.info("running config: %s", config)
    if config.wandb_log:
        wandb.init(project=config.project, name=os.path.basename(os.path.normpath(config.output_dir)))
        wandb.config.update(asdict(config))


def run_pipeline(config):
    try:
        config.validate()
        resolve_input(config.input_path)
    except (ValueError, FileNotFoundError) as e:
        logging.error('%s', e)
        return 2
    _start_run(config)
    stats, timings = {}, {}
    for name in STAGES:
        status, stats[name], timings[name] = run_stage(name, config)
        if status != 0:
            return status
    manifest = {
        'config': asdict(config),
        'corpus': {
            'n_raw': stats['ingest']['n_raw'],
            'n_filtered': stats['ingest']['n_filtered'],
            'n_after_downsampling': stats['label']['n_after_downsampling'],
            'labeled_fraction_before': stats['label']['labeled_fraction_before'],
            'labeled_fraction_after': stats['label']['labeled_fraction_after'],
        },
        'stages': stats,
        'timings': timings,
        'artifacts': {name: file_checksum(config.artifact(name)) for name in PIPELINE_ARTIFACTS},
    }
    save_json(manifest, config.artifact('manifest.json'))
    logging.info('pipeline finished, artifacts in %s', config.output_dir)
    return 0


def add_config_flags(parser):
    parser.add_argument('--config', default=None, help='JSON or YAML config file')
    parser.add_argument('--input', dest='input_path', default=None, help='raw JSONL corpus or bundled name')
    parser.add_argument('--output-dir', dest='output_dir', default=None, help='artifact directory')
    parser.add_argument('--min-chars', dest='min_chars', type=int, default=None, help='minimum raw text length')
    parser.add_argument('--keep-retweets', dest='drop_retweets', action='store_false', default=None)
    parser.add_argument('--keep-replies', dest='drop_replies', action='store_false', default=None)
    parser.add_argument('--min-df', dest='min_df', type=int, default=None, help='minimum document frequency')
    parser.add_argument('--tau', type=int, default=None, help='edge weight threshold')
    parser.add_argument('--resolution', type=float, default=None, help='louvain resolution')
    parser.add_argument('--num-communities', dest='num_communities', type=int, default=None,
                        help='number of biggest communities used as labels')
    parser.add_argument('--k', type=int, default=None, help='number of NMF components')
    parser.add_argument('--target-labeled-ratio', dest='target_labeled_ratio', type=float, default=None,
                        help='labeled fraction reached by down-sampling unlabeled documents')
    parser.add_argument('--max-iter', dest='max_iter', type=int, default=None, help='solver iterations')
    parser.add_argument('--tol', type=float, default=None, help='relative objective change to stop')
    parser.add_argument('--top-n', dest='top_n', type=int, default=None, help='words per topic in reports')
    parser.add_argument('--device', default=None, help='cpu or cuda')
    parser.add_argument('--seed', type=int, default=None)
    parser.add_argument('--wandb_log', action='store_true', default=None)
    parser.add_argument('--project', default=None, type=str, help='wandb Project name')


def config_from_args(args):
    config = load_config(args.config) if args.config else PipelineConfig()
    for f in fields(PipelineConfig):
        value = getattr(args, f.name, None)
        if value is not None:
            setattr(config, f.name, value)
    return config.validate()


def build_parser():
    parser = argparse.ArgumentParser(description='Hashtag-community semi-supervised NMF topic pipeline')
    sub = parser.add_subparsers(dest='command', required=True)
    add_config_flags(sub.add_parser('pipeline', help='run every stage'))
    for name in STAGES:
        add_config_flags(sub.add_parser(name, help='run the {} stage'.format(name)))
    synthetic = sub.add_parser('synthetic', help='write a planted-topic corpus as raw JSONL')
    synthetic.add_argument('--output', required=True, help='JSONL path')
    synthetic.add_argument('--n-docs', dest='n_docs', type=int, default=2000)
    synthetic.add_argument('--n-topics', dest='n_topics', type=int, default=5)
    synthetic.add_argument('--seed', type=int, default=0)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    setup_logging()
    if args.command == 'synthetic':
        corpus = make_planted_corpus(n_docs=args.n_docs, n_topics=args.n_topics, seed=args.seed)
        write_raw_documents(corpus.raw_documents(), args.output)
        return 0
    try:
        config = config_from_args(args)
    except (ValueError, TypeError, OSError, yaml.YAMLError) as e:
        logging.error('%s', e)
        return 2
    seed_everything(config.seed)
    if args.command == 'pipeline':
        return run_pipeline(config)
    if args.command == 'ingest':
        try:
            resolve_input(config.input_path)
        except FileNotFoundError as e:
            logging.error('stage ingest failed: %s', e)
            return 1
    _start_run(config)
    status, _, _ = run_stage(args.command, config)
    return status


if __name__ == '__main__':
    sys.exit(main())
