"""Supervised vs unsupervised topic separation on planted-topic corpora.

For every seed a planted corpus is generated, its hashtag graph is split into
communities, the biggest communities label the documents, and the masked and
the plain factorization are fitted from the same initialization. Dominant
topics are scored against the planted topics.

    python evaluate.py --seeds 0,1,2,3,4,5,6,7,8,9 --results-dir results/planted
"""
import argparse
import logging
import os
import socket

import numpy as np
import wandb

from datasets.synthetic import make_planted_corpus
from datasets.vectorizer import build_vocabulary, count_matrix, tfidf
from graphs.hashgraph import ModularityParams, build_graph, louvain, top_communities
from graphs.labeler import (build_constraint_matrix, build_lookup, downsample_unlabeled, label_documents,
                            labeled_fraction)
from models.tsnmf import SolverConfig, fit, fit_nmf, init_factors
from report import compare_runs
from utils import save_json, seed_everything, setup_logging


def run_planted_experiment(seed, n_docs=2000, n_topics=5, k=None, num_communities=None, tau=2,
                           resolution=1.0, min_df=5, target_labeled_ratio=0.5, max_iter=200, tol=1e-4):
    corpus = make_planted_corpus(n_docs=n_docs, n_topics=n_topics, seed=seed)
    k = n_topics if k is None else k
    num_communities = n_topics if num_communities is None else num_communities

    graph = build_graph(corpus.docs, tau=tau)
    partition = louvain(graph, ModularityParams(resolution=resolution), seed=seed)
    lookup = build_lookup(partition, top_communities(partition, num_communities))
    labeled = label_documents(corpus.docs, lookup)
    # carry planted topics through down-sampling by document id
    planted = {d.id: labels for d, labels in zip(corpus.docs, corpus.reference_labels())}
    docs = downsample_unlabeled(labeled, target_labeled_ratio, seed=seed)

    vocab = build_vocabulary(docs, min_df=min_df)
    X = tfidf(count_matrix(docs, vocab))
    L = build_constraint_matrix(docs, k)
    solver = SolverConfig(k=k, max_iter=max_iter, tol=tol, seed=seed)
    supervised = fit(X, L, solver, init=init_factors(X, L, solver))
    unsupervised = fit_nmf(X, solver, init=init_factors(X, np.ones((X.n, k)), solver))

    reference = [planted[d.id] for d in docs]
    sup, unsup = compare_runs(supervised, unsupervised, reference)
    return {
        'seed': seed,
        'num_communities': partition.num_communities,
        'labeled_fraction_before': labeled_fraction(labeled),
        'labeled_fraction_after': labeled_fraction(docs),
        'supervised': sup.to_json(),
        'unsupervised': unsup.to_json(),
    }


def summarize(results):
    sup_nmi = np.array([r['supervised']['nmi'] for r in results])
    unsup_nmi = np.array([r['unsupervised']['nmi'] for r in results])
    sup_purity = np.array([r['supervised']['purity'] for r in results])
    unsup_purity = np.array([r['unsupervised']['purity'] for r in results])
    return {
        'seeds': len(results),
        'mean_nmi_supervised': float(sup_nmi.mean()),
        'mean_nmi_unsupervised': float(unsup_nmi.mean()),
        'mean_purity_supervised': float(sup_purity.mean()),
        'mean_purity_unsupervised': float(unsup_purity.mean()),
        'wins_both': int(np.sum((sup_nmi > unsup_nmi) & (sup_purity > unsup_purity))),
    }


def main(args):
    os.makedirs(args.results_dir, exist_ok=True)
    setup_logging(os.path.join(args.results_dir, 'log_{}.txt'.format(socket.gethostname())))
    logging.info("running arguments: %s", args)
    if args.wandb_log:
        wandb.init(project=args.project, name=os.path.basename(os.path.normpath(args.results_dir)))
        wandb.config.update(args)

    results = []
    for seed in map(int, args.seeds.split(',')):
        seed_everything(seed)
        result = run_planted_experiment(seed, n_docs=args.n_docs, n_topics=args.n_topics, k=args.k,
                                        num_communities=args.num_communities, tau=args.tau,
                                        resolution=args.resolution, max_iter=args.max_iter)
        results.append(result)
        logging.info('seed {}: nmi {:.4f} vs {:.4f}, purity {:.4f} vs {:.4f}'.format(
            seed, result['supervised']['nmi'], result['unsupervised']['nmi'],
            result['supervised']['purity'], result['unsupervised']['purity']))
        if args.wandb_log:
            wandb.log({'nmi_supervised': result['supervised']['nmi'],
                       'nmi_unsupervised': result['unsupervised']['nmi'],
                       'purity_supervised': result['supervised']['purity'],
                       'purity_unsupervised': result['unsupervised']['purity'], 'seed': seed})
    summary = summarize(results)
    logging.info('summary: %s', summary)
    save_json({'runs': results, 'summary': summary}, os.path.join(args.results_dir, 'planted_comparison.json'))


if __name__ == '__main__':
    parser = argparse.ArgumentParser(description='Planted-topic comparison of supervised and unsupervised NMF')
    parser.add_argument('--results-dir', default='./results/planted', help='results dir')
    parser.add_argument('--seeds', default='0,1,2,3,4,5,6,7,8,9', help='comma separated seeds')
    parser.add_argument('--n-docs', dest='n_docs', default=2000, type=int, help='documents per corpus')
    parser.add_argument('--n-topics', dest='n_topics', default=5, type=int, help='planted topics')
    parser.add_argument('--k', default=None, type=int, help='components, defaults to the topic count')
    parser.add_argument('--num-communities', dest='num_communities', default=None, type=int,
                        help='communities used as labels, defaults to the topic count')
    parser.add_argument('--tau', default=2, type=int, help='edge weight threshold')
    parser.add_argument('--resolution', default=1.0, type=float, help='louvain resolution')
    parser.add_argument('--max-iter', dest='max_iter', default=200, type=int, help='solver iterations')
    parser.add_argument('--wandb_log', action='store_true')
    parser.add_argument('--project', default='hashtag-tsnmf', type=str, help='wandb Project name')
    args = parser.parse_args()
    main(args)
