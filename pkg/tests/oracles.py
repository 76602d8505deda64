"""Ground truths built without the cubelab engine."""
from __future__ import annotations

import itertools
from collections import deque

import networkx as nx
import numpy as np


def tits_matrices(vertices, adjacent):
    """Integer reflection representation of a right-angled Coxeter group.

    B(s, t) = 1 on the diagonal, 0 for commuting pairs and -1 otherwise
    (m = infinity); the representation is faithful.
    """
    n = len(vertices)
    B = np.eye(n, dtype=np.int64)
    for i, j in itertools.permutations(range(n), 2):
        if not adjacent(vertices[i], vertices[j]):
            B[i, j] = -1
    mats = []
    for s in range(n):
        M = np.eye(n, dtype=np.int64)
        M[s, :] -= 2 * B[s, :]
        mats.append(M)
    return mats


def racg_element(mats, word):
    M = np.eye(len(mats), dtype=np.int64)
    for s in word:
        M = M @ mats[s]
    return M.tobytes()


def z_times_f2(word):
    """RAAG(P3) with P3 = a - b - c is Z x F(a, c): b is central."""
    z = 0
    free: list = []
    for v, e in word:
        if v == 1:
            z += e
            continue
        if free and free[-1] == (v, -e):
            free.pop()
        else:
            free.append((v, e))
    return z, tuple(free)


def bfs_distances(start, neighbours, radius):
    dist = {start: 0}
    q = deque([start])
    while q:
        x = q.popleft()
        if dist[x] == radius:
            continue
        for y in neighbours(x):
            if y not in dist:
                dist[y] = dist[x] + 1
                q.append(y)
    return dist


def median_brute(g: nx.Graph):
    """Every triple has exactly one median (plain networkx distances)."""
    d = dict(nx.all_pairs_shortest_path_length(g))
    nodes = list(g)
    for a, b, c in itertools.combinations(nodes, 3):
        meds = [m for m in nodes
                if d[a][m] + d[m][b] == d[a][b] and d[b][m] + d[m][c] == d[b][c]
                and d[a][m] + d[m][c] == d[a][c]]
        if len(meds) != 1:
            return False
    return True


def theta_partition(g: nx.Graph):
    """Djokovic-Winkler classes via the transitive closure of the relation."""
    d = dict(nx.all_pairs_shortest_path_length(g))
    edges = [tuple(e) for e in g.edges]
    parent = list(range(len(edges)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in itertools.combinations(range(len(edges)), 2):
        (x, y), (u, v) = edges[i], edges[j]
        if d[x][u] + d[y][v] != d[x][v] + d[y][u]:
            parent[find(i)] = find(j)
    classes: dict = {}
    for i, e in enumerate(edges):
        classes.setdefault(find(i), set()).add(frozenset(e))
    return {frozenset(c) for c in classes.values()}


def delta_exact(d):
    """Four-point delta over all quadruples, straight from the definition."""
    n = len(d)
    best = 0.0
    for x, y, z, w in itertools.combinations(range(n), 4):
        s = sorted([d[x][y] + d[z][w], d[x][z] + d[y][w], d[x][w] + d[y][z]])
        best = max(best, (s[2] - s[1]) / 2)
    return best
