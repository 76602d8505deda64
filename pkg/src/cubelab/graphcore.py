"""Finite graph model, induced-subgraph search and join decompositions.

Graphs are small (tens of vertices), so everything here is exact
backtracking or exhaustive enumeration.
"""
from __future__ import annotations

import itertools
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Sequence

import networkx as nx

INFINITE = math.inf

Vertex = Hashable


class GraphError(ValueError):
    """Invalid graph data (unknown vertex, duplicate id, bad label...)."""


class GraphParseError(GraphError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class LabeledGraph:
    """A finite graph with optional vertex-group sizes.

    ``edges`` is a tuple of 2-tuples.  In the simple variant every edge is a
    pair of distinct vertices listed once; the multigraph variant (used for
    braid inputs) may repeat pairs and contain loops ``(v, v)``.
    """

    vertices: tuple
    edges: tuple = ()
    labels: dict | None = None
    multigraph: bool = False
    _adj: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        seen = set()
        for v in self.vertices:
            if v in seen:
                raise GraphError(f"duplicate vertex id {v!r}")
            seen.add(v)
        simple_pairs = set()
        for e in self.edges:
            if len(e) != 2:
                raise GraphError(f"edge {e!r} is not a pair")
            u, v = e
            for w in (u, v):
                if w not in seen:
                    raise GraphError(f"edge {e!r} references unknown vertex {w!r}")
            if not self.multigraph:
                if u == v:
                    raise GraphError(f"loop at {u!r} in a simple graph")
                key = frozenset(e)
                if key in simple_pairs:
                    raise GraphError(f"repeated edge {e!r} in a simple graph")
                simple_pairs.add(key)
        if self.labels is not None:
            missing = [v for v in self.vertices if v not in self.labels]
            if missing:
                raise GraphError(f"labels missing for vertices {missing!r}")
            for v, s in self.labels.items():
                if v not in seen:
                    raise GraphError(f"label for unknown vertex {v!r}")
                if s != INFINITE and (not isinstance(s, int) or s < 2):
                    raise GraphError(f"group size for {v!r} must be an integer >= 2 or infinite, got {s!r}")
        adj = {v: set() for v in self.vertices}
        for u, v in self.edges:
            if u != v:
                adj[u].add(v)
                adj[v].add(u)
        object.__setattr__(self, "_adj", {v: frozenset(n) for v, n in adj.items()})

    # -- queries ---------------------------------------------------------
    def __len__(self) -> int:
        return len(self.vertices)

    def neighbors(self, v) -> frozenset:
        return self._adj[v]

    def adjacent(self, u, v) -> bool:
        return v in self._adj[u]

    def degree(self, v) -> int:
        return len(self._adj[v])

    def label(self, v):
        return 2 if self.labels is None else self.labels[v]

    def induced(self, vertices: Iterable) -> "LabeledGraph":
        keep = [v for v in self.vertices if v in set(vertices)]
        ks = set(keep)
        edges = tuple(e for e in self.edges if e[0] in ks and e[1] in ks)
        labels = None if self.labels is None else {v: self.labels[v] for v in keep}
        return LabeledGraph(tuple(keep), edges, labels, self.multigraph)

    def is_connected(self) -> bool:
        if not self.vertices:
            return True
        return len(connected_components(self)) == 1

    def clique_number(self) -> int:
        if not self.vertices:
            return 0
        g = self.to_networkx(simple=True)
        return max(len(c) for c in nx.find_cliques(g))

    def to_networkx(self, simple: bool = False):
        g = nx.Graph() if simple or not self.multigraph else nx.MultiGraph()
        g.add_nodes_from(self.vertices)
        for u, v in self.edges:
            if simple and u == v:
                continue
            g.add_edge(u, v)
        return g

    def to_dict(self) -> dict:
        out = {"vertices": list(self.vertices), "edges": [list(e) for e in self.edges]}
        if self.labels is not None:
            out["labels"] = {str(v): ("inf" if s == INFINITE else s) for v, s in self.labels.items()}
        return out


def make_graph(vertices: Sequence, edges: Iterable = (), labels: dict | None = None,
               multigraph: bool = False) -> LabeledGraph:
    return LabeledGraph(tuple(vertices), tuple(tuple(e) for e in edges), labels, multigraph)


def connected_components(g: LabeledGraph) -> list[list]:
    seen, comps = set(), []
    for s in g.vertices:
        if s in seen:
            continue
        comp, stack = [], [s]
        seen.add(s)
        while stack:
            v = stack.pop()
            comp.append(v)
            for w in g.neighbors(v):
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        comps.append(comp)
    return comps


# ---------------------------------------------------------------------------
# parsing

def _parse_size(tok: str, line: int, col: int):
    if tok in ("inf", "infinite"):
        return INFINITE
    try:
        n = int(tok)
    except ValueError:
        raise GraphParseError(f"bad group size {tok!r}", line, col) from None
    if n < 2:
        raise GraphParseError(f"group size must be >= 2, got {n}", line, col)
    return n


def _parse_lines(text: str, multigraph: bool) -> LabeledGraph:
    vertices, edges, labels = [], [], {}
    declared = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        toks, col = [], 0
        for tok in line.split():
            col = line.index(tok, col)
            toks.append((tok, col + 1))
            col += len(tok)
        kind, kcol = toks[0]
        if kind == "v":
            if len(toks) < 2 or len(toks) > 3:
                raise GraphParseError("expected 'v <id> [size=<n|inf>]'", lineno, kcol)
            vid, vcol = toks[1]
            if vid in declared:
                raise GraphParseError(f"duplicate vertex id {vid!r}", lineno, vcol)
            declared.add(vid)
            vertices.append(vid)
            if len(toks) == 3:
                opt, ocol = toks[2]
                if not opt.startswith("size="):
                    raise GraphParseError(f"unknown vertex option {opt!r}", lineno, ocol)
                labels[vid] = _parse_size(opt[5:], lineno, ocol + 5)
        elif kind == "e":
            if len(toks) != 3:
                raise GraphParseError("expected 'e <id> <id>'", lineno, kcol)
            (u, ucol), (v, vcol) = toks[1], toks[2]
            for w, wcol in ((u, ucol), (v, vcol)):
                if w not in declared:
                    raise GraphParseError(f"edge endpoint {w!r} is not a declared vertex", lineno, wcol)
            if not multigraph:
                if u == v:
                    raise GraphParseError("loops need --multigraph", lineno, ucol)
                if any({u, v} == set(e) for e in edges):
                    raise GraphParseError(f"repeated edge {u} {v} needs --multigraph", lineno, kcol)
            edges.append((u, v))
        else:
            raise GraphParseError(f"unknown record type {kind!r}", lineno, kcol)
    if labels and len(labels) != len(vertices):
        missing = [v for v in vertices if v not in labels]
        raise GraphParseError(f"labels missing for {missing!r}", 1, 1)
    return make_graph(vertices, edges, labels or None, multigraph)


def _parse_object(obj: dict, multigraph: bool) -> LabeledGraph:
    if not isinstance(obj, dict) or "vertices" not in obj:
        raise GraphParseError("structured graph needs a 'vertices' field", 1, 1)
    vertices = [str(v) for v in obj["vertices"]]
    edges = [tuple(str(x) for x in e) for e in obj.get("edges", [])]
    labels = obj.get("labels")
    if labels is not None:
        labels = {str(k): (INFINITE if v in ("inf", "infinite") else v) for k, v in labels.items()}
    return make_graph(vertices, edges, labels, multigraph)


def load_graph(text: str, multigraph: bool = False) -> LabeledGraph:
    """Parse a graph from the line format or from a JSON object.

    Line format::

        # comment
        v a size=3
        v b size=inf
        e a b
    """
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise GraphParseError(exc.msg, exc.lineno, exc.colno) from None
        try:
            return _parse_object(obj, multigraph)
        except GraphParseError:
            raise
        except GraphError as exc:
            raise GraphParseError(str(exc), 1, 1) from None
    return _parse_lines(text, multigraph)


def load_graph_file(path, multigraph: bool = False) -> LabeledGraph:
    with open(path, encoding="utf-8") as fh:
        return load_graph(fh.read(), multigraph=multigraph)


def dump_graph(g: LabeledGraph) -> str:
    out = []
    for v in g.vertices:
        if g.labels is None:
            out.append(f"v {v}")
        else:
            s = g.labels[v]
            out.append(f"v {v} size={'inf' if s == INFINITE else s}")
    out.extend(f"e {u} {v}" for u, v in g.edges)
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# patterns and induced search

@dataclass(frozen=True)
class Pattern:
    name: str
    graph: LabeledGraph
    min_sizes: dict = field(default_factory=dict)

    def constraint(self, v) -> int:
        return self.min_sizes.get(v, 2)


def _join(left: LabeledGraph, right: LabeledGraph) -> LabeledGraph:
    vs = [("L", v) for v in left.vertices] + [("R", v) for v in right.vertices]
    es = [(("L", u), ("L", v)) for u, v in left.edges]
    es += [(("R", u), ("R", v)) for u, v in right.edges]
    es += [(("L", u), ("R", v)) for u in left.vertices for v in right.vertices]
    names = {x: f"{x[0]}{x[1]}" for x in vs}
    return make_graph([names[x] for x in vs], [(names[u], names[v]) for u, v in es])


def complete_graph(n: int, prefix: str = "v") -> LabeledGraph:
    vs = [f"{prefix}{i}" for i in range(n)]
    return make_graph(vs, itertools.combinations(vs, 2))


def cycle_graph(n: int, prefix: str = "v") -> LabeledGraph:
    vs = [f"{prefix}{i}" for i in range(n)]
    return make_graph(vs, [(vs[i], vs[(i + 1) % n]) for i in range(n)])


def path_graph(n: int, prefix: str = "v") -> LabeledGraph:
    vs = [f"{prefix}{i}" for i in range(n)]
    return make_graph(vs, [(vs[i], vs[i + 1]) for i in range(n - 1)])


def empty_graph(n: int, prefix: str = "v") -> LabeledGraph:
    return make_graph([f"{prefix}{i}" for i in range(n)])


def k1_plus_k2() -> LabeledGraph:
    return make_graph(["0", "1", "2"], [("1", "2")])


def complete_bipartite(m: int, n: int) -> LabeledGraph:
    return _join(empty_graph(m, ""), empty_graph(n, ""))


K33 = _join(empty_graph(3, ""), empty_graph(3, ""))
K33_PLUS = _join(empty_graph(3, ""), k1_plus_k2())
K33_PLUS_PLUS = _join(k1_plus_k2(), k1_plus_k2())
C4 = cycle_graph(4)
K3_OPP = empty_graph(3)
K1_K2 = k1_plus_k2()
K23 = complete_bipartite(2, 3)

RACG_PATTERNS = (
    Pattern("K33", K33),
    Pattern("K33+", K33_PLUS),
    Pattern("K33++", K33_PLUS_PLUS),
)
RAAG_PATTERNS = (Pattern("C4", C4),)
FLAT_OBSTRUCTIONS = (Pattern("K3opp", K3_OPP), Pattern("K1+K2", K1_K2))

# Labeled configurations for graph products of finite groups.  The
# "K33 with a degree-3 vertex" bullet is encoded as K_{2,3} with one vertex
# of the 2-side (those have degree 3) required to have size >= 3.
GRAPH_PRODUCT_PATTERNS = RACG_PATTERNS + (
    Pattern("labeled K22", C4, {"v0": 3, "v1": 3}),
    Pattern("labeled K23", K23, {"L0": 3}),
    Pattern("labeled (K1+K2)*2K1", _join(k1_plus_k2(), empty_graph(2, "")), {"R0": 3}),
)

PATTERN_CATALOG = {p.name: p for p in RACG_PATTERNS + RAAG_PATTERNS + FLAT_OBSTRUCTIONS
                   + GRAPH_PRODUCT_PATTERNS}


def pattern_from_dict(obj: dict) -> Pattern:
    """Build a user pattern from ``{"name", "vertices", "edges", "min_sizes"}``."""
    g = _parse_object(obj, multigraph=False)
    sizes = {str(k): int(v) for k, v in obj.get("min_sizes", {}).items()}
    for v in sizes:
        if v not in g.vertices:
            raise GraphError(f"size constraint on unknown pattern vertex {v!r}")
    return Pattern(obj.get("name", "custom"), g, sizes)


def _size_ok(host: LabeledGraph, hv, need: int) -> bool:
    return need <= 2 or host.label(hv) >= need


def find_induced(host: LabeledGraph, pattern: Pattern | LabeledGraph,
                 limit: int | None = None) -> list[dict]:
    """All induced embeddings of ``pattern`` into ``host``.

    An embedding is an injective dict pattern-vertex -> host-vertex whose
    image induces a copy of the pattern and whose host labels meet the size
    constraints.  ``limit`` stops the search early.
    """
    if host.multigraph:
        raise GraphError("induced search needs a simple host graph")
    if isinstance(pattern, LabeledGraph):
        pattern = Pattern("custom", pattern)
    pg = pattern.graph
    if len(pg) > len(host):
        return []
    # most constrained pattern vertices first: high degree, then neighbours of placed ones
    order: list = []
    remaining = set(pg.vertices)
    while remaining:
        def score(v):
            placed_nbrs = sum(1 for w in pg.neighbors(v) if w in order)
            return (placed_nbrs, pg.degree(v), pattern.constraint(v))
        v = max(sorted(remaining, key=str), key=score)
        order.append(v)
        remaining.discard(v)
    pdeg = {v: pg.degree(v) for v in pg.vertices}
    candidates = {
        v: [h for h in host.vertices
            if host.degree(h) >= pdeg[v] and _size_ok(host, h, pattern.constraint(v))]
        for v in pg.vertices
    }
    results: list[dict] = []
    mapping: dict = {}
    used: set = set()

    def extend(i: int) -> bool:
        if i == len(order):
            results.append(dict(mapping))
            return limit is not None and len(results) >= limit
        pv = order[i]
        for hv in candidates[pv]:
            if hv in used:
                continue
            ok = True
            for qv, qh in mapping.items():
                if pg.adjacent(pv, qv) != host.adjacent(hv, qh):
                    ok = False
                    break
            if not ok:
                continue
            mapping[pv] = hv
            used.add(hv)
            if extend(i + 1):
                return True
            del mapping[pv]
            used.discard(hv)
        return False

    extend(0)
    return results


def is_induced_embedding(host: LabeledGraph, pattern: Pattern, emb: dict) -> bool:
    """Independent re-check of an embedding returned by :func:`find_induced`."""
    pg = pattern.graph
    if set(emb) != set(pg.vertices) or len(set(emb.values())) != len(emb):
        return False
    for u, v in itertools.combinations(pg.vertices, 2):
        if pg.adjacent(u, v) != host.adjacent(emb[u], emb[v]):
            return False
    return all(_size_ok(host, emb[v], pattern.constraint(v)) for v in pg.vertices)


# ---------------------------------------------------------------------------
# join of a clique with pairs of isolated vertices

@dataclass(frozen=True)
class JoinDecomposition:
    clique: tuple
    pairs: tuple


@dataclass(frozen=True)
class Refusal:
    pattern: str
    witness: dict


def opposite_graph(g: LabeledGraph) -> LabeledGraph:
    vs = g.vertices
    return make_graph(vs, [(u, v) for u, v in itertools.combinations(vs, 2) if not g.adjacent(u, v)],
                      g.labels)


def join_flat_decomposition(g: LabeledGraph) -> JoinDecomposition | Refusal:
    """Split ``g`` as (clique) * {u1,v1} * ... * {un,vn}, or explain why not.

    Works on the opposite graph: it must be a matching plus isolated vertices.
    Otherwise some vertex has two non-neighbours and we return an induced
    triple of isolated vertices or a K1 + K2.
    """
    opp = opposite_graph(g)
    for v in g.vertices:
        non = sorted(opp.neighbors(v), key=str)
        if len(non) >= 2:
            for a, b in itertools.combinations(non, 2):
                if g.adjacent(a, b):
                    return Refusal("K1+K2", {"0": v, "1": a, "2": b})
                return Refusal("K3opp", {"v0": v, "v1": a, "v2": b})
    clique = tuple(v for v in g.vertices if opp.degree(v) == 0)
    pairs, seen = [], set()
    for v in g.vertices:
        if opp.degree(v) == 1 and v not in seen:
            (w,) = opp.neighbors(v)
            seen.update((v, w))
            pairs.append((v, w))
    return JoinDecomposition(clique, tuple(pairs))


# ---------------------------------------------------------------------------
# cycles and disjoint subcomplexes (multigraphs)

def betti(g: LabeledGraph) -> dict:
    """First Betti number, per component and in total.

    Returns ``{"components": [...], "total": n}`` with components in the
    order of :func:`connected_components`.  Loops and parallel edges count.
    """
    comps = connected_components(g)
    where = {v: i for i, c in enumerate(comps) for v in c}
    ecount = Counter(where[u] for u, _ in g.edges)
    per = [ecount[i] - len(c) + 1 for i, c in enumerate(comps)]
    return {"components": per, "total": sum(per)}


def betti_number(g: LabeledGraph) -> int:
    return betti(g)["total"]


def subdivide(g: LabeledGraph, times: int = 1) -> LabeledGraph:
    """Subdivide every edge ``times`` times (new vertices are strings)."""
    vs = list(g.vertices)
    es = []
    for k, (u, v) in enumerate(g.edges):
        chain = [u] + [f"_s{k}_{i}" for i in range(times)] + [v]
        vs.extend(chain[1:-1])
        es.extend(zip(chain, chain[1:]))
    return make_graph(vs, es, None, multigraph=True)


def connected_subsets(g: LabeledGraph, within: Iterable | None = None):
    """Yield every nonempty vertex set inducing a connected subgraph."""
    pool = list(g.vertices if within is None else within)
    if len(pool) > 22:
        raise GraphError("subset enumeration is limited to 22 vertices")
    bit = {v: 1 << i for i, v in enumerate(pool)}
    nbr = [sum(bit[w] for w in g.neighbors(v) if w in bit) for v in pool]
    for mask in range(1, 1 << len(pool)):
        low = mask & -mask
        reach, frontier = low, low
        while frontier:
            i = (frontier & -frontier).bit_length() - 1
            frontier &= frontier - 1
            new = nbr[i] & mask & ~reach
            reach |= new
            frontier |= new
        if reach == mask:
            yield frozenset(v for v in pool if bit[v] & mask)


@dataclass(frozen=True)
class SubcomplexPair:
    first: tuple
    second: tuple


def maximal_disjoint_pairs(g: LabeledGraph):
    """Yield (S1, S2) with S1 connected and S2 a component of the complement.

    Each part is taken as the induced subcomplex.  For properties that are
    monotone under enlarging a subcomplex, these pairs dominate every pair of
    disjoint connected subcomplexes.
    """
    for s1 in connected_subsets(g):
        rest = [v for v in g.vertices if v not in s1]
        if not rest:
            continue
        for comp in connected_components(g.induced(rest)):
            yield frozenset(s1), frozenset(comp)


def disjoint_subcomplex_pairs(g: LabeledGraph,
                              predicate: Callable[[LabeledGraph], bool],
                              second: Callable[[LabeledGraph], bool] | None = None
                              ) -> SubcomplexPair | None:
    """Find disjoint connected subcomplexes satisfying the predicates.

    ``second`` defaults to ``predicate``.  Predicates must be monotone
    (stable under enlarging the subcomplex), as is "betti >= k".
    Returns a witness or ``None``.
    """
    second = predicate if second is None else second
    order = {v: i for i, v in enumerate(g.vertices)}
    cache: dict = {}

    def holds(pred, s):
        key = (id(pred), s)
        if key not in cache:
            cache[key] = pred(g.induced(s))
        return cache[key]

    for s1, s2 in maximal_disjoint_pairs(g):
        if holds(predicate, s1) and holds(second, s2):
            srt = lambda s: tuple(sorted(s, key=order.get))
            return SubcomplexPair(srt(s1), srt(s2))
    return None
