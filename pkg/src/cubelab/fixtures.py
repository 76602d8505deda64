"""Named graphs used by the tests, the acceptance suite and ``cubelab corpus``."""
from __future__ import annotations

import itertools

from .graphcore import (
    K33, K33_PLUS, K33_PLUS_PLUS, LabeledGraph, complete_graph, cycle_graph, dump_graph,
    empty_graph, make_graph, path_graph,
)


def petersen() -> LabeledGraph:
    outer = [f"o{i}" for i in range(5)]
    inner = [f"i{i}" for i in range(5)]
    edges = [(outer[i], outer[(i + 1) % 5]) for i in range(5)]
    edges += [(inner[i], inner[(i + 2) % 5]) for i in range(5)]
    edges += [(outer[i], inner[i]) for i in range(5)]
    return make_graph(outer + inner, edges)


def with_apex(g: LabeledGraph, apex: str = "apex") -> LabeledGraph:
    return make_graph(list(g.vertices) + [apex], list(g.edges) + [(v, apex) for v in g.vertices])


def theta() -> LabeledGraph:
    return make_graph(["u", "v"], [("u", "v")] * 3, multigraph=True)


def double_theta() -> LabeledGraph:
    """Two theta graphs joined by a bridge."""
    es = [("u1", "v1")] * 3 + [("u2", "v2")] * 3 + [("v1", "u2")]
    return make_graph(["u1", "v1", "u2", "v2"], es, multigraph=True)


def theta_tripod() -> LabeledGraph:
    """A theta graph with a tripod hanging off one of its vertices."""
    es = [("u", "v")] * 3 + [("v", "c"), ("c", "l1"), ("c", "l2"), ("c", "l3")]
    return make_graph(["u", "v", "c", "l1", "l2", "l3"], es, multigraph=True)


def grid(m: int, n: int) -> LabeledGraph:
    """The m x n grid graph with vertices ``"i,j"``."""
    vs = [f"{i},{j}" for i in range(m) for j in range(n)]
    es = [(f"{i},{j}", f"{i + 1},{j}") for i in range(m - 1) for j in range(n)]
    es += [(f"{i},{j}", f"{i},{j + 1}") for i in range(m) for j in range(n - 1)]
    return make_graph(vs, es)


def cube(d: int = 3) -> LabeledGraph:
    vs = ["".join(b) for b in itertools.product("01", repeat=d)]
    es = [(a, b) for a, b in itertools.combinations(vs, 2)
          if sum(x != y for x, y in zip(a, b)) == 1]
    return make_graph(vs, es)


def cartesian(g: LabeledGraph, h: LabeledGraph) -> LabeledGraph:
    vs = [f"{a}|{b}" for a in g.vertices for b in h.vertices]
    es = [(f"{a}|{b}", f"{a}|{c}") for a in g.vertices for b, c in h.edges]
    es += [(f"{a}|{b}", f"{c}|{b}") for a, c in g.edges for b in h.vertices]
    return make_graph(vs, es)


def tree(n: int = 5) -> LabeledGraph:
    """A small spider: a centre with legs of length 1 and 2."""
    vs = [f"t{i}" for i in range(n)]
    edges = [(vs[0], vs[i]) for i in range(1, min(n, 4))]
    edges += [(vs[i - 3], vs[i]) for i in range(4, n)]
    return make_graph(vs, edges)


def multigraph_of(g: LabeledGraph) -> LabeledGraph:
    return make_graph(g.vertices, g.edges, None, multigraph=True)


def catalog() -> dict[str, LabeledGraph]:
    cat = {
        "C4": cycle_graph(4),
        "C5": cycle_graph(5),
        "K33": K33,
        "K33+": K33_PLUS,
        "K33++": K33_PLUS_PLUS,
        "K33+apex": with_apex(K33),
        "Petersen": petersen(),
        "P3": path_graph(3),
        "P5": path_graph(5),
        "tree5": tree(5),
        "theta": theta(),
        "double-theta": double_theta(),
        "theta-tripod": theta_tripod(),
        "edge": path_graph(2),
        "point": empty_graph(1),
        "3K1": empty_graph(3, "a"),
    }
    for m in range(4, 10):
        cat[f"K{m}"] = complete_graph(m)
    return cat


def get(name: str) -> LabeledGraph:
    return catalog()[name]


def write_catalog(directory) -> list:
    """Write every fixture as ``<name>.graph`` into ``directory``."""
    from pathlib import Path

    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, g in catalog().items():
        p = d / f"{name}.graph"
        header = "# multigraph\n" if g.multigraph else ""
        p.write_text(header + dump_graph(g), encoding="utf-8")
        paths.append(p)
    return paths


def random_graph(n: int, p: float, rng) -> LabeledGraph:
    vs = [f"v{i}" for i in range(n)]
    return make_graph(vs, [e for e in itertools.combinations(vs, 2) if rng.random() < p])
