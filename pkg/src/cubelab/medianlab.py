"""Finite median geometry: Cayley balls, hyperplanes, intervals, staircases,
flat rectangles, well-separation and trees of hyperplanes.

A :class:`Ball` is either a ball in the Cayley graph of a RACG, RAAG or graph
product of finite groups (vertices are canonical syllable tuples), or a
finite user graph that has passed :func:`verify_median`.

In Cayley mode every hyperplane has an algebraic name: the edge ``g -- g x``
with ``x`` in the vertex group of ``v`` lies in the hyperplane
``(p, v)`` where ``p`` is the shortest element of ``g <S>``; ``S`` is the star
of ``v`` (RACG, graph product) or the link of ``v`` (RAAG, where ``g`` is the
tail of a positively oriented edge).  Sides are decided with exact word
distances, so these answers are valid everywhere, not only inside the ball.
Geodesic-dependent questions that use in-ball distances (intervals, medians,
staircases) are only answered inside the safe region.
"""
from __future__ import annotations

import itertools
import os
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .graphcore import GraphError, LabeledGraph, make_graph
from .words import GraphProduct, GroupSpec, ReducedWord, engine

DEFAULT_CAP = 2_000_000


class BallResourceError(RuntimeError):
    """Vertex budget exhausted while building a ball."""

    def __init__(self, message: str, reached_radius: int):
        super().__init__(message)
        self.reached_radius = reached_radius


class SafeRadiusError(ValueError):
    """A query left the region where in-ball geodesics are trustworthy."""


class MedianError(GraphError):
    """A user graph is not median."""


def vertex_cap() -> int:
    raw = os.environ.get("CUBELAB_CAP_VERTICES")
    if not raw:
        return DEFAULT_CAP
    try:
        cap = int(raw)
    except ValueError:
        raise GraphError(f"CUBELAB_CAP_VERTICES must be an integer, got {raw!r}") from None
    if cap <= 0:
        raise GraphError("CUBELAB_CAP_VERTICES must be positive")
    return cap


@dataclass(frozen=True)
class Hyperplane:
    """A hyperplane: ``key`` is algebraic in Cayley mode, a class index otherwise."""

    key: object
    vertex: object
    edges: tuple = field(compare=False)
    label: str = field(compare=False, default="")


@dataclass(frozen=True)
class Halfspace:
    hyperplane: Hyperplane
    sector: int


class Ball:
    """A finite median (or quasi-median) graph with a distinguished centre."""

    def __init__(self, labels: list, edges: np.ndarray, edge_vertex: np.ndarray,
                 depth: np.ndarray, radius: int, safe_radius: int,
                 group: GraphProduct | None = None, graph: LabeledGraph | None = None):
        self.labels = labels
        self.index = {lab: i for i, lab in enumerate(labels)}
        self.edges = edges
        self.edge_vertex = edge_vertex
        self.depth = depth
        self.radius = radius
        self.safe_radius = safe_radius
        self.group = group
        self.graph = graph
        self._rows: dict = {}
        self._dcache: dict = {}

    # -- basic structure ------------------------------------------------------
    @property
    def mode(self) -> str:
        return "cayley" if self.group is not None else "graph"

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def margin(self) -> int:
        return self.radius - self.safe_radius

    @cached_property
    def adjacency(self) -> csr_matrix:
        n = len(self.labels)
        if len(self.edges) == 0:
            return csr_matrix((n, n), dtype=np.int8)
        i, j = self.edges[:, 0], self.edges[:, 1]
        data = np.ones(2 * len(i), dtype=np.int8)
        return csr_matrix((data, (np.r_[i, j], np.r_[j, i])), shape=(n, n))

    @cached_property
    def neighbors(self) -> list[frozenset]:
        a = self.adjacency
        return [frozenset(a.indices[a.indptr[i]:a.indptr[i + 1]].tolist()) for i in range(len(self))]

    @cached_property
    def edge_index(self) -> dict:
        return {(int(a), int(b)): k for k, (a, b) in enumerate(self.edges)}

    def edge_id(self, i: int, j: int) -> int:
        return self.edge_index[(i, j) if i < j else (j, i)]

    def sphere_sizes(self) -> list[int]:
        return np.bincount(self.depth, minlength=self.radius + 1).tolist()

    def safe_vertices(self) -> np.ndarray:
        return np.flatnonzero(self.depth <= self.safe_radius)

    def is_safe(self, i: int) -> bool:
        return bool(self.depth[i] <= self.safe_radius)

    def require_safe(self, *idx: int) -> None:
        bad = [self.name(i) for i in idx if not self.is_safe(i)]
        if bad:
            raise SafeRadiusError(
                f"vertices {bad} lie outside the safe radius {self.safe_radius} "
                f"(ball radius {self.radius}, margin {self.margin})")

    # -- naming ------------------------------------------------------------------
    def name(self, i: int) -> str:
        lab = self.labels[i]
        if self.group is not None:
            return self.group.format(lab)
        return str(lab)

    def vertex(self, ref) -> int:
        """Ball index of a word (text, letters, ReducedWord, key) or graph vertex."""
        if isinstance(ref, (int, np.integer)) and not isinstance(ref, bool) and self.group is not None:
            return int(ref)
        if self.group is None:
            if ref in self.index:
                return self.index[ref]
            raise GraphError(f"unknown vertex {ref!r}")
        key = self.key_of(ref)
        if key not in self.index:
            raise SafeRadiusError(f"{self.group.format(key)} lies outside the ball of radius {self.radius}")
        return self.index[key]

    def key_of(self, ref) -> tuple:
        g = self.group
        if isinstance(ref, ReducedWord):
            return g.reduce(ref).syllables
        if isinstance(ref, str):
            return g.parse(ref).syllables
        if isinstance(ref, tuple) and all(isinstance(s, tuple) for s in ref):
            return g.reduce_syllables(ref)
        return g.word(ref).syllables

    # -- distances ---------------------------------------------------------------
    @cached_property
    def _all_pairs(self) -> np.ndarray:
        d = shortest_path(self.adjacency, unweighted=True, directed=False)
        return d.astype(np.int32)

    def row(self, i: int) -> np.ndarray:
        """In-ball BFS distances from ``i`` (exact for the median computations below)."""
        if self.group is None:
            return self._all_pairs[i]
        r = self._rows.get(i)
        if r is None:
            r = shortest_path(self.adjacency, unweighted=True, directed=False, indices=[i])[0]
            r = r.astype(np.int32)
            if len(self._rows) > 4096:
                self._rows.clear()
            self._rows[i] = r
        return r

    def distance(self, i: int, j: int) -> int:
        """Exact distance: algebraic in Cayley mode, graph distance otherwise."""
        if self.group is None:
            return int(self._all_pairs[i, j])
        key = (i, j) if i < j else (j, i)
        d = self._dcache.get(key)
        if d is None:
            if len(self._dcache) > 4_000_000:
                self._dcache.clear()
            d = self._dcache[key] = self.group.distance_keys(self.labels[i], self.labels[j])
        return d

    def key_distance(self, a: tuple, b: tuple) -> int:
        return self.group.distance_keys(a, b)

    def all_distances(self) -> np.ndarray:
        return self._all_pairs

    def interval(self, x: int, y: int) -> list[int]:
        """I(x, y) as sorted ball indices."""
        self.require_safe(x, y)
        rx, ry = self.row(x), self.row(y)
        return np.flatnonzero(rx + ry == rx[y]).tolist()

    def median(self, a: int, b: int, c: int, checked: bool = True) -> int:
        """Unique median; ``checked=False`` is for points inside a safe interval."""
        if checked:
            self.require_safe(a, b, c)
        ra, rb, rc = self.row(a), self.row(b), self.row(c)
        m = np.flatnonzero((ra + rb == ra[b]) & (rb + rc == rb[c]) & (ra + rc == ra[c]))
        if len(m) != 1:
            raise MedianError(f"triple {[self.name(t) for t in (a, b, c)]} has {len(m)} medians")
        return int(m[0])

    # -- hyperplanes -----------------------------------------------------------------
    def _stabiliser(self, v: int) -> frozenset:
        g = self.group
        return g.link(v) if g.infinite else g.star(v)

    def wall_key(self, i: int, j: int) -> tuple:
        """Algebraic hyperplane name of the edge ``i -- j`` (Cayley mode)."""
        g = self.group
        a, b = self.labels[i], self.labels[j]
        step = g.times_syllables(g.inverse_syllables(a), b)
        (v, x), = step
        tail = a
        if g.infinite and x < 0:
            tail = b
        return (g.strip_right(tail, self._stabiliser(v)), v)

    @cached_property
    def _edge_class(self) -> np.ndarray:
        if self.group is not None:
            keys = [self.wall_key(int(a), int(b)) for a, b in self.edges]
            uniq = {k: n for n, k in enumerate(dict.fromkeys(keys))}
            self._class_keys = list(uniq)
            return np.array([uniq[k] for k in keys], dtype=np.int64)
        return self._square_classes()

    def _square_classes(self) -> np.ndarray:
        m = len(self.edges)
        parent = list(range(m))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        def union(a, b):
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)

        for a, b, c, d in self.squares():
            union(self.edge_id(a, b), self.edge_id(d, c))
            union(self.edge_id(b, c), self.edge_id(a, d))
        roots = [find(k) for k in range(m)]
        uniq = {r: n for n, r in enumerate(dict.fromkeys(roots))}
        self._class_keys = list(range(len(uniq)))
        return np.array([uniq[r] for r in roots], dtype=np.int64)

    def squares(self) -> list[tuple]:
        """4-cycles ``(a, b, c, d)`` listed once each."""
        nb = self.neighbors
        out = []
        for a in range(len(self)):
            for b, d in itertools.combinations(sorted(nb[a]), 2):
                for c in nb[b] & nb[d]:
                    if c != a and a < min(b, c, d) and b < d:
                        out.append((a, b, c, d))
        return out

    @cached_property
    def hyperplanes(self) -> list[Hyperplane]:
        cls = self._edge_class
        members: list[list] = [[] for _ in self._class_keys]
        for k, c in enumerate(cls):
            a, b = self.edges[k]
            members[c].append((int(a), int(b)))
        out = []
        for c, key in enumerate(self._class_keys):
            if self.group is not None:
                label = f"{self.group.format(key[0])} | {self.group.names[key[1]]}"
                vertex = self.group.names[key[1]]
                if self.spec_family == "racg":
                    p = key[0]
                    refl = self.group.times_syllables(p, [(key[1], 1)] + list(self.group.inverse_syllables(p)))
                    label = self.group.format(refl)
            else:
                label = f"class {c}"
                vertex = None
            out.append(Hyperplane(key, vertex, tuple(members[c]), label))
        return out

    @property
    def spec_family(self) -> str | None:
        return self.group.spec.family if self.group is not None else None

    @cached_property
    def _hyperplane_by_key(self) -> dict:
        return {h.key: h for h in self.hyperplanes}

    def hyperplane_of_edge(self, i: int, j: int) -> Hyperplane:
        if self.group is not None:
            key = self.wall_key(i, j)
            h = self._hyperplane_by_key.get(key)
            return h if h is not None else Hyperplane(key, self.group.names[key[1]], ())
        return self.hyperplanes[int(self._edge_class[self.edge_id(i, j)])]

    def hyperplanes_label(self, h: Hyperplane) -> str:
        if h.label:
            return h.label
        if self.group is not None:
            p, v = h.key
            return f"{self.group.format(p)} | {self.group.names[v]}"
        return str(h.key)

    def hyperplane(self, key) -> Hyperplane:
        """Look up a hyperplane by key; Cayley keys outside the ball are allowed."""
        h = self._hyperplane_by_key.get(key)
        if h is None:
            if self.group is None:
                raise GraphError(f"unknown hyperplane {key!r}")
            h = Hyperplane(key, self.group.names[key[1]], ())
        return h

    def translate(self, g_key: tuple, h: Hyperplane) -> Hyperplane:
        """The hyperplane ``g H`` (Cayley mode)."""
        p, v = h.key
        grp = self.group
        gp = grp.times_syllables(g_key, p)
        return self.hyperplane((grp.strip_right(gp, self._stabiliser(v)), v))

    def anchors(self, h: Hyperplane) -> list:
        """Vertices of one clique dual to ``h``; sector ``s`` is the side of anchor ``s``.

        Cayley anchors are keys, graph anchors are ball indices.
        """
        if self.group is None:
            return list(h.edges[0])
        p, v = h.key
        g = self.group
        if g.infinite:
            return [p, g.times_syllables(p, [(v, 1)])]
        return [p] + [g.times_syllables(p, [(v, x)]) for x in range(1, g.sizes[v])]

    def sector(self, h: Hyperplane, z) -> int:
        """Which side of ``h`` the vertex ``z`` (ball index or Cayley key) lies in."""
        anchors = self.anchors(h)
        if self.group is None:
            d = [self.distance(z, a) for a in anchors]
        else:
            zk = self.labels[z] if isinstance(z, (int, np.integer)) else z
            d = [self.group.distance_keys(zk, a) for a in anchors]
        return int(np.argmin(d))

    def separates(self, h: Hyperplane, x, y) -> bool:
        if self.group is None:
            self.require_safe(x, y)
        return self.sector(h, x) != self.sector(h, y)

    def transverse(self, h1: Hyperplane, h2: Hyperplane) -> bool:
        if h1.key == h2.key:
            return False
        if self.group is None:
            return frozenset((h1.key, h2.key)) in self._transverse_pairs
        (p1, u), (p2, v) = h1.key, h2.key
        g = self.group
        if u == v or v not in g.adj[u]:
            return False
        q = g.times_syllables(g.inverse_syllables(p1), p2)
        return g.in_double_coset(q, self._stabiliser(u), self._stabiliser(v))

    @cached_property
    def _transverse_pairs(self) -> set:
        cls = self._edge_class
        out = set()
        for a, b, c, d in self.squares():
            k1 = int(cls[self.edge_id(a, b)])
            k2 = int(cls[self.edge_id(b, c)])
            out.add(frozenset((self._class_keys[k1], self._class_keys[k2])))
        return out

    def side_of(self, h: Hyperplane, other: Hyperplane) -> int:
        """Sector of ``h`` containing the (disjoint, distinct) hyperplane ``other``."""
        return self.sector(h, self.anchors(other)[0])

    def separates_hyperplanes(self, h: Hyperplane, a: Hyperplane, b: Hyperplane) -> bool:
        if h.key in (a.key, b.key) or self.transverse(h, a) or self.transverse(h, b):
            return False
        return self.side_of(h, a) != self.side_of(h, b)

    def facing_triple(self, h1: Hyperplane, h2: Hyperplane, h3: Hyperplane) -> bool:
        """Pairwise disjoint and none separates the other two."""
        trio = (h1, h2, h3)
        if len({h.key for h in trio}) < 3:
            return False
        if any(self.transverse(a, b) for a, b in itertools.combinations(trio, 2)):
            return False
        return not any(self.separates_hyperplanes(trio[i], *(trio[j] for j in range(3) if j != i))
                       for i in range(3))

    def halfspace(self, h: Hyperplane, z) -> Halfspace:
        """The halfspace of ``h`` containing ``z``."""
        return Halfspace(h, self.sector(h, z))

    def halfspace_contains(self, big: Halfspace, small: Halfspace) -> bool:
        """``small`` is a subset of ``big``."""
        h1, h2 = big.hyperplane, small.hyperplane
        if h1.key == h2.key:
            return big.sector == small.sector
        if self.transverse(h1, h2):
            return False
        return self.side_of(h1, h2) == big.sector and self.side_of(h2, h1) != small.sector

    def halfspaces_disjoint(self, a: Halfspace, b: Halfspace) -> bool:
        h1, h2 = a.hyperplane, b.hyperplane
        if h1.key == h2.key:
            return a.sector != b.sector
        if self.transverse(h1, h2):
            return False
        return self.side_of(h1, h2) != a.sector and self.side_of(h2, h1) != b.sector

    def in_halfspace(self, hs: Halfspace, z) -> bool:
        return self.sector(hs.hyperplane, z) == hs.sector

    def hyperplane_distance(self, h1: Hyperplane, h2: Hyperplane) -> int:
        """0 if equal or transverse, else 1 + least distance between dual edge endpoints.

        Only dual edges inside the ball are used.
        """
        if h1.key == h2.key or self.transverse(h1, h2):
            return 0
        e1 = h1.edges or self._edges_of(h1)
        e2 = h2.edges or self._edges_of(h2)
        if not e1 or not e2:
            raise SafeRadiusError("a hyperplane has no dual edge inside the ball")
        ends1 = sorted({v for e in e1 for v in e})
        ends2 = np.array(sorted({v for e in e2 for v in e}))
        best = min(int(self.row(a)[ends2].min()) for a in ends1)
        return 1 + best

    def _edges_of(self, h: Hyperplane) -> tuple:
        found = self._hyperplane_by_key.get(h.key)
        return found.edges if found is not None else ()

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "radius": self.radius,
            "safe_radius": self.safe_radius,
            "vertices": len(self),
            "edges": int(len(self.edges)),
            "sphere_sizes": self.sphere_sizes(),
        }


# ---------------------------------------------------------------------------
# construction

def generate_ball(spec: GroupSpec, radius: int, cap: int | None = None,
                  safe_radius: int | None = None) -> Ball:
    """Breadth-first ball of the given radius around the identity."""
    if radius < 0:
        raise GraphError("radius must be >= 0")
    cap = vertex_cap() if cap is None else cap
    g = engine(spec)
    gens = g.generators
    labels = [()]
    index = {(): 0}
    depth = [0]
    edges = []
    edge_vertex = []
    frontier = [0]
    for r in range(1, radius + 1):
        nxt = []
        for i in frontier:
            key = labels[i]
            for v, x in gens:
                nk = g.times_syllables(key, ((v, x),))
                j = index.get(nk)
                if j is None:
                    if g.syllable_length(nk) != r:
                        continue
                    j = len(labels)
                    if j >= cap:
                        raise BallResourceError(
                            f"vertex budget {cap} exhausted at radius {r} "
                            f"(complete up to radius {r - 1})", r - 1)
                    index[nk] = j
                    labels.append(nk)
                    depth.append(r)
                    nxt.append(j)
                if i < j:
                    edges.append((i, j))
                    edge_vertex.append(v)
        frontier = nxt
    # edges between vertices of the same sphere cannot occur in these groups
    # (the defining relations have even length except in finite vertex groups)
    for i in frontier:
        key = labels[i]
        for v, x in gens:
            j = index.get(g.times_syllables(key, ((v, x),)))
            if j is not None and depth[j] == radius and i < j:
                edges.append((i, j))
                edge_vertex.append(v)
    e = np.array(sorted(set(edges)), dtype=np.int64).reshape(-1, 2)
    ev_map = dict(zip(edges, edge_vertex))
    ev = np.array([ev_map[(int(a), int(b))] for a, b in e], dtype=np.int64)
    safe = radius // 2 if safe_radius is None else safe_radius
    return Ball(labels, e, ev, np.array(depth, dtype=np.int64), radius, safe, group=g)


def ball_from_graph(graph: LabeledGraph, center=None, check: bool = True) -> Ball:
    """Wrap a finite connected median graph; every vertex is safe."""
    if graph.multigraph:
        raise GraphError("median graphs are simple")
    if not graph.vertices or not graph.is_connected():
        raise GraphError("graph must be nonempty and connected")
    if check:
        ok, witness = verify_median(graph)
        if not ok:
            raise MedianError(f"graph is not median: triple {witness!r}")
    labels = list(graph.vertices)
    idx = {v: i for i, v in enumerate(labels)}
    e = np.array(sorted(tuple(sorted((idx[a], idx[b]))) for a, b in graph.edges),
                 dtype=np.int64).reshape(-1, 2)
    c = idx[labels[0] if center is None else center]
    ball = Ball(labels, e, np.zeros(len(e), dtype=np.int64), np.zeros(len(labels), dtype=np.int64),
                0, 0, graph=graph)
    depth = ball.all_distances()[c].astype(np.int64)
    ball.depth = depth
    ball.radius = int(depth.max())
    ball.safe_radius = ball.radius
    return ball


def verify_median(graph: LabeledGraph):
    """Return ``(True, None)`` or ``(False, (a, b, c))`` for a triple without a unique median."""
    if not graph.vertices:
        return True, None
    if not graph.is_connected():
        raise GraphError("verify_median needs a connected graph")
    vs = list(graph.vertices)
    idx = {v: i for i, v in enumerate(vs)}
    n = len(vs)
    rows = [idx[a] for a, b in graph.edges] + [idx[b] for a, b in graph.edges]
    cols = [idx[b] for a, b in graph.edges] + [idx[a] for a, b in graph.edges]
    adj = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    d = shortest_path(adj, unweighted=True, directed=False).astype(np.int64)
    for a in range(n):
        for b in range(a, n):
            iab = d[a] + d[b] == d[a, b]
            cs = np.arange(b, n)
            # mask[c, z]: z in I(a,b), I(b,c) and I(a,c)
            mask = (iab[None, :]
                    & (d[b][None, :] + d[cs] == d[b, cs][:, None])
                    & (d[a][None, :] + d[cs] == d[a, cs][:, None]))
            counts = mask.sum(axis=1)
            bad = np.flatnonzero(counts != 1)
            if len(bad):
                return False, (vs[a], vs[b], vs[int(cs[bad[0]])])
    return True, None


def theta_classes(ball: Ball) -> list[int]:
    """Djokovic-Winkler classes of ball edges, computed from distances alone."""
    d = ball.all_distances()
    m = len(ball.edges)
    cls = [-1] * m
    nxt = 0
    for k in range(m):
        if cls[k] >= 0:
            continue
        a, b = ball.edges[k]
        for t in range(m):
            x, y = ball.edges[t]
            if d[a, x] + d[b, y] != d[a, y] + d[b, x]:
                cls[t] = nxt
        nxt += 1
    return cls


# ---------------------------------------------------------------------------
# staircases and flat rectangles

@dataclass
class Staircase:
    corner: int
    a: int
    b: int
    profile: list          # lattice points of the broken path, from (a, 0) to (0, b)
    grid: dict             # (p, q) -> ball index
    segment: tuple         # (i, j): the broken path is geodesic[i..j]

    def cells(self) -> list:
        return sorted(self.grid)

    def to_dict(self, ball: Ball) -> dict:
        return {
            "corner": ball.name(self.corner), "a": self.a, "b": self.b,
            "segment": list(self.segment),
            "profile": [list(p) for p in self.profile],
            "grid": [[p, q, ball.name(v)] for (p, q), v in sorted(self.grid.items())],
        }


class StaircaseError(RuntimeError):
    """No staircase within the search cap (a search failure, not a refutation)."""


def _check_geodesic(ball: Ball, path: Sequence[int]) -> None:
    for u, v in zip(path, path[1:]):
        if v not in ball.neighbors[u]:
            raise GraphError(f"{ball.name(u)} and {ball.name(v)} are not adjacent")
    if len(path) - 1 != ball.distance(path[0], path[-1]):
        raise GraphError("supplied path is not a geodesic")


def staircase_witness(ball: Ball, x: int, y: int, z: int, geodesic: Sequence[int],
                      cap: int = 100_000) -> Staircase:
    """Isometrically embedded staircase with corner ``z`` and broken path on ``geodesic``.

    Subsegments ``[x', y']`` of the geodesic with ``z`` in ``I(x', y')`` are
    tried in increasing staircase area.  For each one, the broken path point
    ``gamma_k`` gets coordinates ``p_k = d(z, m(z, x', gamma_k))`` and
    ``q_k = d(z, m(z, y', gamma_k))``; a lattice point ``(p, q)`` under the
    path maps to ``m(u_p, v_q, gamma_k)`` for any ``k`` with ``p <= p_k`` and
    ``q <= q_k``.  Each candidate is accepted only after the full isometry test.
    """
    path = [int(t) for t in geodesic]
    if path[0] != x or path[-1] != y:
        raise GraphError("geodesic must run from x to y")
    # intervals between safe vertices are convex and lie inside the ball,
    # so in-ball distances among their points are exact
    ball.require_safe(x, y)
    _check_geodesic(ball, path)
    rz = ball.row(z)
    if rz[x] + rz[y] != ball.row(x)[y]:
        raise GraphError(f"{ball.name(z)} is not in I(x, y)")
    n = len(path) - 1
    cands = [(i, j) for i in range(n + 1) for j in range(i, n + 1)
             if rz[path[i]] + rz[path[j]] == j - i]
    built = []
    for i, j in cands:
        prof = [(int(rz[ball.median(z, path[i], path[k], False)]), int(rz[ball.median(z, path[j], path[k], False)]))
                for k in range(i, j + 1)]
        area = sum(p + 1 for p, _ in _columns(prof).items())
        built.append((area, j - i, i, j, prof))
    built.sort()
    tried = 0
    for area, _, i, j, prof in built:
        tried += area
        if tried > cap:
            raise StaircaseError(f"staircase search exceeded cap {cap}")
        st = _build_staircase(ball, z, path, i, j, prof)
        if st is not None and check_staircase(ball, st, path):
            return st
    raise StaircaseError("no staircase passed the isometry check")


def _columns(prof) -> dict:
    """Height of the staircase over each q: max p among profile points with q_k >= q."""
    top: dict = {}
    for p, q in prof:
        for qq in range(q + 1):
            top[qq] = max(top.get(qq, -1), p)
    return top


def _build_staircase(ball, z, path, i, j, prof) -> Staircase | None:
    a, b = prof[0][0], prof[-1][1]
    if prof[0] != (a, 0) or prof[-1] != (0, b):
        return None
    for (p1, q1), (p2, q2) in zip(prof, prof[1:]):
        if (p1 - p2, q2 - q1) not in ((1, 0), (0, 1)):
            return None
    x_, y_ = path[i], path[j]
    u: dict = {}
    v: dict = {}
    for k, (p, q) in enumerate(prof):
        g = path[i + k]
        u.setdefault(p, ball.median(z, x_, g, False))
        v.setdefault(q, ball.median(z, y_, g, False))
    grid = {}
    for k, (pk, qk) in enumerate(prof):
        g = path[i + k]
        for p in range(pk + 1):
            for q in range(qk + 1):
                if (p, q) not in grid:
                    grid[(p, q)] = ball.median(u[p], v[q], g, False)
    return Staircase(z, a, b, prof, grid, (i, j))


def check_staircase(ball: Ball, st: Staircase, geodesic: Sequence[int] | None = None) -> bool:
    """Independent check: exact distances equal l1 distances, corner and path placement."""
    if st.grid.get((0, 0)) != st.corner:
        return False
    pts = sorted(st.grid)
    verts = [st.grid[p] for p in pts]
    if len(set(verts)) != len(verts):
        return False
    for (p1, v1), (p2, v2) in itertools.combinations(zip(pts, verts), 2):
        if ball.distance(v1, v2) != abs(p1[0] - p2[0]) + abs(p1[1] - p2[1]):
            return False
    # region below a monotone path
    top = _columns(st.profile)
    if set(pts) != {(p, q) for q, h in top.items() for p in range(h + 1)}:
        return False
    if geodesic is not None:
        i, j = st.segment
        if [st.grid[p] for p in st.profile] != list(geodesic[i:j + 1]):
            return False
    return True


@dataclass
class FlatRect:
    a: int
    b: int
    grid: list             # grid[i][j] for 0 <= i <= a, 0 <= j <= b

    def vertices(self) -> frozenset:
        return frozenset(v for row in self.grid for v in row)

    def rows(self) -> list[list]:
        """Horizontal geodesics ``[0, a] x {j}``."""
        return [[self.grid[i][j] for i in range(self.a + 1)] for j in range(self.b + 1)]

    def columns(self) -> list[list]:
        """Vertical geodesics ``{i} x [0, b]``."""
        return [list(self.grid[i]) for i in range(self.a + 1)]

    def to_dict(self, ball: Ball) -> dict:
        return {"a": self.a, "b": self.b,
                "grid": [[ball.name(v) for v in row] for row in self.grid]}


def check_flat(ball: Ball, flat: FlatRect) -> bool:
    pts = [((i, j), flat.grid[i][j]) for i in range(flat.a + 1) for j in range(flat.b + 1)]
    if len({v for _, v in pts}) != len(pts):
        return False
    for ((i1, j1), v1), ((i2, j2), v2) in itertools.combinations(pts, 2):
        if ball.distance(v1, v2) != abs(i1 - i2) + abs(j1 - j2):
            return False
    return True


@dataclass
class FlatSearch:
    flats: list
    truncated: bool


def find_flats(ball: Ball, amin: int = 1, bmin: int = 1, cap: int = 10_000,
               max_side: int | None = None) -> FlatSearch:
    """Maximal flat rectangles with ``a >= amin`` and ``b >= bmin``.

    Rectangles grow from a corner: a geodesic bottom row, then rows added
    one at a time by square completion, each step checked for isometry.
    A rectangle is kept when none of its four sides can be pushed outward.
    """
    if amin < 0 or bmin < 0 or cap <= 0:
        raise GraphError("flat search needs amin, bmin >= 0 and a positive cap")
    nb = ball.neighbors
    seen: set = set()
    out: list = []
    truncated = False
    limit = max_side if max_side is not None else 2 * ball.radius + 1

    def extend_row(row: list) -> list[list]:
        """Rows parallel to ``row`` at distance one, by square completion."""
        res = []
        for w in nb[row[0]]:
            new = [w]
            ok = True
            for k in range(1, len(row)):
                cand = [c for c in nb[row[k]] & nb[new[-1]] if c != row[k - 1]]
                if len(cand) != 1:
                    ok = False
                    break
                new.append(cand[0])
            if ok and len(set(new) | set(row)) == 2 * len(row):
                res.append(new)
        return res

    def isometric_add(rows: list, new: list) -> bool:
        b = len(rows)
        for j, r in enumerate(rows):
            for i1, v1 in enumerate(r):
                rv = ball.row(v1)
                for i2, v2 in enumerate(new):
                    want = abs(i1 - i2) + (b - j)
                    # in-ball distance bounds the true one from above
                    if rv[v2] < want or ball.distance(v1, v2) != want:
                        return False
        return True

    def bottom_rows(c: int):
        """Geodesic paths from ``c`` (as lists) of every length up to ``limit``."""
        stack = [[c]]
        rc = ball.row(c)
        while stack:
            p = stack.pop()
            yield p
            if len(p) - 1 >= limit:
                continue
            for w in nb[p[-1]]:
                if rc[w] == len(p) and ball.distance(c, w) == len(p):
                    stack.append(p + [w])

    def maximal(rows: list) -> bool:
        # push a side outward: new row on top/bottom, or new column left/right
        if any(isometric_add(rows, r) for r in extend_row(rows[-1])):
            return False
        rev = rows[::-1]
        if any(isometric_add(rev, r) for r in extend_row(rev[-1])):
            return False
        cols = [list(c) for c in zip(*rows)]
        if any(isometric_add(cols, c) for c in extend_row(cols[-1])):
            return False
        rc = cols[::-1]
        if any(isometric_add(rc, c) for c in extend_row(rc[-1])):
            return False
        return True

    for c in range(len(ball)):
        for row in bottom_rows(c):
            if len(row) - 1 < amin:
                continue
            stack = [[row]]
            while stack:
                rows = stack.pop()
                grew = False
                if len(rows) - 1 < limit:
                    for new in extend_row(rows[-1]):
                        if isometric_add(rows, new):
                            stack.append(rows + [new])
                            grew = True
                if grew or len(rows) - 1 < bmin:
                    continue
                key = frozenset(v for r in rows for v in r)
                if key in seen:
                    continue
                if not maximal(rows):
                    continue
                seen.add(key)
                a, b = len(rows[0]) - 1, len(rows) - 1
                grid = [[rows[j][i] for j in range(b + 1)] for i in range(a + 1)]
                out.append(FlatRect(a, b, grid))
                if len(out) >= cap:
                    return FlatSearch(out, True)
    return FlatSearch(out, truncated)


# ---------------------------------------------------------------------------
# well-separation

class SearchCapError(RuntimeError):
    """An exhaustive search was refused because its input exceeded the cap."""


def well_separation_degree(ball: Ball, h1: Hyperplane, h2: Hyperplane, cap: int = 20) -> int:
    """Largest set of ball hyperplanes transverse to both, without a facing triple."""
    if h1.key == h2.key or ball.transverse(h1, h2):
        raise GraphError("well-separation needs two distinct disjoint hyperplanes")
    cands = [h for h in ball.hyperplanes
             if h.key not in (h1.key, h2.key) and ball.transverse(h, h1) and ball.transverse(h, h2)]
    if len(cands) > cap:
        raise SearchCapError(f"{len(cands)} candidate hyperplanes exceed the cap {cap}")
    n = len(cands)
    facing = {t for t in itertools.combinations(range(n), 3) if ball.facing_triple(*(cands[i] for i in t))}
    best = 0
    chosen: list = []

    def ok(i: int) -> bool:
        return not any((a, b, i) in facing for a, b in itertools.combinations(chosen, 2))

    def search(i: int) -> None:
        nonlocal best
        if len(chosen) + (n - i) <= best:
            return
        if i == n:
            best = len(chosen)
            return
        if ok(i):
            chosen.append(i)
            search(i + 1)
            chosen.pop()
        search(i + 1)

    search(0)
    return best


# ---------------------------------------------------------------------------
# trees of hyperplanes

class TreeHypothesisError(ValueError):
    """The halfspace hypotheses of a tree of hyperplanes fail."""


@dataclass
class HyperplaneTree:
    nodes: dict                      # word over "ab" -> Hyperplane ("" is the root J)
    halfspaces: dict                 # word -> Halfspace
    K: int
    violations: list = field(default_factory=list)

    @property
    def verified(self) -> bool:
        return not self.violations

    def to_dict(self, ball: Ball) -> dict:
        return {
            "K": self.K,
            "nodes": {w or "root": ball.hyperplanes_label(h) for w, h in sorted(self.nodes.items())},
            "violations": self.violations,
            "verified": self.verified,
        }


def _hs_name(ball: Ball, hs: Halfspace) -> str:
    return f"{ball.hyperplanes_label(hs.hyperplane)} [sector {hs.sector}]"


def halfspace_of_edge(ball: Ball, u, v) -> Halfspace:
    """Halfspace of the hyperplane dual to ``u -- v`` that contains ``v``."""
    i, j = ball.vertex(u), ball.vertex(v)
    if j not in ball.neighbors[i]:
        raise GraphError(f"{ball.name(i)} and {ball.name(j)} are not adjacent")
    h = ball.hyperplane_of_edge(i, j)
    return Halfspace(h, ball.sector(h, j))


def translate_halfspace(ball: Ball, g_key: tuple, hs: Halfspace) -> Halfspace:
    # left multiplication keeps the coset prefix form, so sector labels are preserved
    return Halfspace(ball.translate(g_key, hs.hyperplane), hs.sector)


def _sample_contains(ball: Ball, big: Halfspace, small: Halfspace) -> bool:
    for z in ball.safe_vertices():
        if ball.in_halfspace(small, int(z)) and not ball.in_halfspace(big, int(z)):
            return False
    return True


def tree_of_hyperplanes(ball: Ball, a, b, J: Halfspace, A: Halfspace, B: Halfspace,
                        depth: int) -> HyperplaneTree:
    """The family ``{w J : w in <a, b>+}`` up to word length ``depth``, verified.

    Hypotheses (checked exactly, and on safe-region vertices):
    ``aJ+ < A+``, ``bJ+ < B+``, ``A+, B+ < J+`` and ``A+ & B+ = {}``.
    """
    if ball.group is None:
        raise GraphError("trees of hyperplanes need a Cayley ball")
    if depth < 0:
        raise GraphError("depth must be >= 0")
    grp = ball.group
    ka, kb = ball.key_of(a), ball.key_of(b)
    aJ, bJ = translate_halfspace(ball, ka, J), translate_halfspace(ball, kb, J)
    if not ball.halfspaces_disjoint(A, B) or any(
            ball.in_halfspace(A, int(z)) and ball.in_halfspace(B, int(z)) for z in ball.safe_vertices()):
        raise TreeHypothesisError(f"A+ and B+ intersect: {_hs_name(ball, A)} vs {_hs_name(ball, B)}")
    hyps = [("aJ+", aJ, "A+", A), ("bJ+", bJ, "B+", B), ("A+", A, "J+", J), ("B+", B, "J+", J)]
    for sn, small, bn, big in hyps:
        if not ball.halfspace_contains(big, small) or not _sample_contains(ball, big, small):
            raise TreeHypothesisError(f"{sn} is not contained in {bn}: "
                                      f"{_hs_name(ball, small)} vs {_hs_name(ball, big)}")

    words = [""]
    for n in range(1, depth + 1):
        words += ["".join(t) for t in itertools.product("ab", repeat=n)]
    elem = {"": ()}
    for w in words[1:]:
        elem[w] = grp.times_syllables(elem[w[:-1]], ka if w[-1] == "a" else kb)
    halfspaces = {w: translate_halfspace(ball, elem[w], J) for w in words}
    nodes = {w: hs.hyperplane for w, hs in halfspaces.items()}
    for w, h in nodes.items():
        if not ball._edges_of(h):
            raise SafeRadiusError(f"hyperplane {w or 'root'} has no dual edge in the ball "
                                  f"of radius {ball.radius}; lower the depth or enlarge the ball")

    def dist(u: Hyperplane, v: Hyperplane) -> int:
        return ball.hyperplane_distance(ball.hyperplane(u.key), ball.hyperplane(v.key))

    K = 0 if depth == 0 else max(dist(nodes[""], nodes["a"]), dist(nodes[""], nodes["b"]))
    violations = []
    for u, v in itertools.combinations(words, 2):
        hu, hv = halfspaces[u], halfspaces[v]
        if hu.hyperplane.key == hv.hyperplane.key or ball.transverse(hu.hyperplane, hv.hyperplane):
            violations.append({"kind": "not disjoint", "u": u, "v": v})
            continue
        if v.startswith(u):
            if not ball.halfspace_contains(hu, hv):
                violations.append({"kind": "prefix containment", "u": u, "v": v})
        elif not ball.halfspaces_disjoint(hu, hv):
            violations.append({"kind": "incomparable overlap", "u": u, "v": v})
        lcp = len(os.path.commonprefix([u, v]))
        dt = len(u) + len(v) - 2 * lcp
        d = dist(hu.hyperplane, hv.hyperplane)
        if d > K * dt:
            violations.append({"kind": "distance bound", "u": u, "v": v, "d": d, "bound": K * dt})
    return HyperplaneTree(nodes, halfspaces, K, violations)


def transeparation_check(ball: Ball, family) -> tuple[bool, dict | None]:
    """No ball hyperplane both separates two members and crosses two members.

    ``family`` is a :class:`HyperplaneTree` or any iterable of hyperplanes.
    """
    members = list(family.nodes.values()) if isinstance(family, HyperplaneTree) else list(family)
    keys = {h.key for h in members}
    for h in ball.hyperplanes:
        crossing = [m for m in members if m.key != h.key and ball.transverse(h, m)]
        if len(crossing) < 2:
            continue
        rest = [m for m in members if m.key != h.key and not ball.transverse(h, m)]
        sides: dict = {}
        for m in rest:
            sides.setdefault(ball.side_of(h, m), m)
        if len(sides) >= 2:
            s1, s2 = list(sides.values())[:2]
            return False, {
                "separator": ball.hyperplanes_label(h),
                "separated": [ball.hyperplanes_label(s1), ball.hyperplanes_label(s2)],
                "crossed": [ball.hyperplanes_label(m) for m in crossing[:2]],
                "separator_in_family": h.key in keys,
            }
    return True, None


# ---------------------------------------------------------------------------
# translates under powers

def translates_violation(ball: Ball, translates: dict):
    """First pair of equal or transverse hyperplanes in ``{k: hyperplane}``."""
    for (k1, h1), (k2, h2) in itertools.combinations(sorted(translates.items()), 2):
        if h1.key == h2.key:
            return {"k1": k1, "k2": k2, "kind": "equal"}
        if ball.transverse(h1, h2):
            return {"k1": k1, "k2": k2, "kind": "transverse"}
    return None


def power_translates_disjoint(ball: Ball, g, J: Hyperplane, kmax: int,
                              step: int | None = None) -> dict:
    """Check that ``g^(k step) J`` for ``|k| <= kmax`` are pairwise disjoint.

    ``step`` defaults to ``D!`` with ``D`` the clique number of the defining graph.
    """
    if ball.group is None:
        raise GraphError("power translates need a Cayley ball")
    grp = ball.group
    D = grp.clique_number()
    if step is None:
        step = 1
        for t in range(2, D + 1):
            step *= t
    gk = ball.key_of(g)
    top = kmax * step
    lengths = [grp.syllable_length(grp.power(grp.from_syllables(gk), k).syllables) for k in range(top + 1)]
    if any(l2 <= l1 for l1, l2 in zip(lengths, lengths[1:])):
        raise GraphError(f"|g^k| is not strictly increasing up to k={top}: {lengths}")
    p = J.key[0] if isinstance(J.key, tuple) else ()
    need = lengths[-1] + grp.syllable_length(p) + 1
    if need > ball.radius:
        raise SafeRadiusError(f"ball radius {ball.radius} too small: translates reach {need}")
    far, near = grp.power(grp.from_syllables(gk), top).syllables, grp.power(grp.from_syllables(gk), -top).syllables
    if ball.sector(J, far) == ball.sector(J, near):
        raise GraphError("J does not cross the axis segment from g^-N to g^N")
    translates = {}
    for k in range(-kmax, kmax + 1):
        hk = grp.power(grp.from_syllables(gk), k * step).syllables
        translates[k] = ball.translate(hk, J)
    bad = translates_violation(ball, translates)
    return {"disjoint": bad is None, "violation": bad, "D": D, "step": step, "lengths": lengths}


# ---------------------------------------------------------------------------
# random median graphs

def random_median_graph(max_vertices: int, rng, steps: int | None = None) -> LabeledGraph:
    """Peripheral expansions along random intervals, starting from one vertex.

    Expanding a median graph along a convex subgraph (an interval is convex)
    yields a median graph.
    """
    vs = [0]
    adj: dict = {0: set()}
    for _ in range(steps or 10 * max_vertices):
        n = len(vs)
        u, v = int(rng.integers(n)), int(rng.integers(n))
        dist = _bfs(adj, u)
        dv = _bfs(adj, v)
        conv = [z for z in vs if dist[z] + dv[z] == dist[v]]
        if n + len(conv) > max_vertices:
            continue
        copy = {z: n + t for t, z in enumerate(conv)}
        for z, c in copy.items():
            vs.append(c)
            adj[c] = {z}
            adj[z].add(c)
        for z, c in copy.items():
            for w in adj[z]:
                if w in copy:
                    adj[c].add(copy[w])
    edges = sorted({(min(a, b), max(a, b)) for a in adj for b in adj[a]})
    return make_graph([f"m{v}" for v in vs], [(f"m{a}", f"m{b}") for a, b in edges])


def _bfs(adj: dict, s) -> dict:
    dist = {s: 0}
    q = deque([s])
    while q:
        x = q.popleft()
        for y in adj[x]:
            if y not in dist:
                dist[y] = dist[x] + 1
                q.append(y)
    return dist
