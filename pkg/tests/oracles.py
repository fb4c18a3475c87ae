"""Independent reference computations used only by the tests."""
from __future__ import annotations

import itertools
from collections import deque

import networkx as nx
import numpy as np

from permsat.cnf import graph_from_edges


def bfs_distances(adj, s):
    dist = {s: 0}
    q = deque([s])
    while q:
        u = q.popleft()
        for w in adj[u]:
            if w not in dist:
                dist[w] = dist[u] + 1
                q.append(w)
    return dist


def all_shortest_paths_from(adj, s):
    """Explicitly enumerate every shortest path leaving s, grouped by endpoint."""
    dist = bfs_distances(adj, s)
    paths = {}
    stack = [(s,)]
    while stack:
        path = stack.pop()
        u = path[-1]
        paths.setdefault(u, []).append(path)
        for w in adj[u]:
            if dist.get(w) == dist[u] + 1:
                stack.append(path + (w,))
    return paths


def brute_force_betweenness(n, adj):
    """Ordered-pair betweenness by enumerating all shortest paths (vertices 0..n-1)."""
    bc = np.zeros(n)
    for s in range(n):
        for t, paths in all_shortest_paths_from(adj, s).items():
            if t == s:
                continue
            share = 1.0 / len(paths)
            for p in paths:
                for v in p[1:-1]:
                    bc[v] += share
    return bc


def to_primal(g: nx.Graph):
    """networkx graph on 0..n-1 -> PrimalGraph on 1..n."""
    return graph_from_edges(g.number_of_nodes(), [(u + 1, v + 1) for u, v in g.edges()])


def connected_graphs_upto7():
    for g in nx.graph_atlas_g()[1:]:
        if nx.is_connected(g):
            yield g


def connected_graphs_on8():
    """One representative (or more) of every connected graph on 8 vertices.

    Every connected graph has a vertex whose removal keeps it connected (a
    leaf of a spanning tree), so extending each connected 7-vertex graph by
    a vertex joined to a nonempty neighbour set reaches every isomorphism
    class.  Neighbour sets in the same automorphism orbit are skipped.
    """
    for g in nx.graph_atlas_g():
        if g.number_of_nodes() != 7 or not nx.is_connected(g):
            continue
        autos = [m for m in nx.algorithms.isomorphism.GraphMatcher(g, g).isomorphisms_iter()]
        done = set()
        for r in range(1, 8):
            for subset in itertools.combinations(range(7), r):
                key = frozenset(subset)
                if key in done:
                    continue
                done.update(frozenset(m[x] for x in subset) for m in autos)
                h = g.copy()
                h.add_edges_from((7, x) for x in subset)
                yield h


def random_graph(rng, n, p):
    g = nx.Graph()
    g.add_nodes_from(range(n))
    for u, v in itertools.combinations(range(n), 2):
        if rng.random() < p:
            g.add_edge(u, v)
    return g
