"""Hashtag co-occurrence graph, modularity and Louvain communities.

Edge weight phi_ij counts documents containing both hashtags, each document
counted once per unordered pair. Edges lighter than tau are dropped, the
hashtags themselves stay as (possibly isolated) nodes.

Modularity uses the standard convention: m is the total undirected edge
weight and the resolution gamma scales the null-model term,

    Q = 1/(2m) * sum_ij (phi_ij - gamma * k_i * k_j / (2m)) * [c_i == c_j]

Larger gamma gives more, smaller communities.
"""
import logging
from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, List

import networkx as nx

LOUVAIN_THRESHOLD = 1e-7


@dataclass
class HashtagGraph:
    nodes: List[str]
    graph: nx.Graph
    tau: int

    def edges(self):
        """Sorted (tag_i, tag_j, weight) with tag_i < tag_j."""
        return sorted((min(a, b), max(a, b), int(d['weight'])) for a, b, d in self.graph.edges(data=True))

    @property
    def total_weight(self):
        return self.graph.size(weight='weight')


@dataclass
class Partition:
    community_of: Dict[str, int]
    sizes: Dict[int, int] = field(default_factory=dict)

    def __post_init__(self):
        if not self.sizes:
            self.sizes = dict(sorted(Counter(self.community_of.values()).items()))

    @property
    def num_communities(self):
        return len(self.sizes)

    def communities(self):
        groups = {c: set() for c in self.sizes}
        for tag, c in self.community_of.items():
            groups[c].add(tag)
        return [groups[c] for c in sorted(groups)]


@dataclass(frozen=True)
class ModularityParams:
    resolution: float = 0.3

    def __post_init__(self):
        if not self.resolution > 0:
            raise ValueError('resolution must be positive, got {}'.format(self.resolution))


def build_graph(docs, tau=2):
    if tau < 1:
        raise ValueError('tau must be a positive integer, got {}'.format(tau))
    weights = Counter()
    tags = set()
    for d in docs:
        tags.update(d.hashtags)
        weights.update(combinations(sorted(d.hashtags), 2))
    nodes = sorted(tags)
    graph = nx.Graph()
    graph.add_nodes_from(nodes)
    kept = sorted((a, b, w) for (a, b), w in weights.items() if w >= tau)
    graph.add_weighted_edges_from(kept)
    logging.info('hashtag graph: %d nodes, %d of %d edges with weight >= %d',
                 len(nodes), len(kept), len(weights), tau)
    return HashtagGraph(nodes=nodes, graph=graph, tau=tau)


def graph_summary(graph):
    return {'nodes': len(graph.nodes),
            'edges': graph.graph.number_of_edges(),
            'total_weight': int(graph.total_weight),
            'isolated_nodes': nx.number_of_isolates(graph.graph)}


def modularity(graph, partition, params=ModularityParams()):
    missing = [t for t in graph.nodes if t not in partition.community_of]
    if missing:
        raise ValueError('node {!r} missing from partition'.format(missing[0]))
    if graph.total_weight == 0:
        return 0.0
    groups = {}
    for t in graph.nodes:
        groups.setdefault(partition.community_of[t], set()).add(t)
    return nx.community.modularity(graph.graph, list(groups.values()), weight='weight',
                                   resolution=params.resolution)


def partition_from_communities(communities):
    """Renumber communities by decreasing size, ties by smallest member tag."""
    ordered = sorted((sorted(c) for c in communities if c), key=lambda c: (-len(c), c[0]))
    community_of = {t: cid for cid, members in enumerate(ordered) for t in members}
    sizes = {cid: len(members) for cid, members in enumerate(ordered)}
    return Partition(community_of=community_of, sizes=sizes)


def louvain(graph, params=ModularityParams(), seed=42):
    if not graph.nodes:
        return Partition(community_of={}, sizes={})
    if graph.total_weight == 0:
        return partition_from_communities([{t} for t in graph.nodes])
    communities = nx.community.louvain_communities(graph.graph, weight='weight',
                                                   resolution=params.resolution,
                                                   threshold=LOUVAIN_THRESHOLD, seed=seed)
    partition = partition_from_communities(communities)
    logging.info('louvain: %d communities (resolution %g, seed %d), Q = %.6f',
                 partition.num_communities, params.resolution, seed,
                 modularity(graph, partition, params))
    return partition


def top_communities(partition, c):
    # ids are already ordered by size
    return list(range(min(c, partition.num_communities)))


def write_graph(graph, path):
    with open(path, 'w', encoding='utf-8') as f:
        for a, b, w in graph.edges():
            f.write('{}\t{}\t{}\n'.format(a, b, w))


def read_graph(path, tau=1, nodes=()):
    """Rebuild a graph from its edge TSV.

    Isolated hashtags are not stored in the file; pass them as nodes.
    """
    edges = []
    with open(path, encoding='utf-8') as f:
        for line in f:
            if not line.strip():
                continue
            a, b, w = line.rstrip('\n').split('\t')
            edges.append((a, b, int(w)))
    nodes = sorted({t for a, b, _ in edges for t in (a, b)} | set(nodes))
    graph = nx.Graph()
    graph.add_nodes_from(nodes)
    graph.add_weighted_edges_from(sorted(edges))
    return HashtagGraph(nodes=nodes, graph=graph, tau=tau)


def write_partition(partition, path):
    with open(path, 'w', encoding='utf-8') as f:
        for tag in sorted(partition.community_of):
            f.write('{}\t{}\n'.format(tag, partition.community_of[tag]))


def read_partition(path):
    community_of = {}
    with open(path, encoding='utf-8') as f:
        for line in f:
            if not line.strip():
                continue
            tag, cid = line.rstrip('\n').split('\t')
            community_of[tag] = int(cid)
    return Partition(community_of=community_of)
