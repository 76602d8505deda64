"""Decision procedures for cyclic hyperbolicity and F2 x F2 subgroups.

Each procedure returns a :class:`Verdict` whose witness can be re-checked
independently (an induced embedding, or a pair of disjoint subcomplexes).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .graphcore import (
    GRAPH_PRODUCT_PATTERNS, INFINITE, RAAG_PATTERNS, RACG_PATTERNS, GraphError,
    LabeledGraph, Pattern, betti_number, complete_graph, connected_components,
    find_induced, is_induced_embedding, make_graph, maximal_disjoint_pairs,
)

YES, NO, UNDECIDED = "yes", "no", "undecided"

# oracle(subcomplex, k) -> True (cyclic), False (not cyclic) or None (unknown)
CyclicityOracle = Callable[[LabeledGraph, int], "bool | None"]


@dataclass
class Verdict:
    answer: str
    rule: str
    witness: dict | None = None
    question: str = "cyclically hyperbolic"
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {"question": self.question, "answer": self.answer, "rule": self.rule,
               "witness": self.witness}
        if self.details:
            out["details"] = self.details
        return out


def _require_simple(graph: LabeledGraph) -> None:
    if graph.multigraph:
        raise GraphError("this criterion needs a simple graph")


def _search(graph: LabeledGraph, patterns: Sequence[Pattern]):
    for p in patterns:
        found = find_induced(graph, p, limit=1)
        if found:
            return p, found[0]
    return None, None


def _pattern_verdict(graph, patterns, rule_prefix, ok_rule) -> Verdict:
    p, emb = _search(graph, patterns)
    if p is None:
        return Verdict(YES, ok_rule)
    return Verdict(NO, f"{rule_prefix}: induced {p.name}", {"pattern": p.name, "embedding": emb})


def racg_cyclically_hyperbolic(graph: LabeledGraph) -> Verdict:
    """C(graph) is cyclically hyperbolic iff no induced K33, K33+, K33++."""
    _require_simple(graph)
    return _pattern_verdict(graph, RACG_PATTERNS, "racg", "racg: no induced K33, K33+, K33++")


def racg_contains_F2xF2(graph: LabeledGraph) -> Verdict:
    v = racg_cyclically_hyperbolic(graph)
    v.answer = NO if v.answer == YES else YES
    v.question = "contains F2xF2"
    return v


def raag_cyclically_hyperbolic(graph: LabeledGraph) -> Verdict:
    """A(graph) is cyclically hyperbolic iff there is no induced 4-cycle."""
    _require_simple(graph)
    v = _pattern_verdict(graph, RAAG_PATTERNS, "raag", "raag: no induced C4")
    v.details["contains_F2xF2"] = v.answer == NO
    return v


def raag_contains_F2xF2(graph: LabeledGraph) -> Verdict:
    v = raag_cyclically_hyperbolic(graph)
    v.answer = NO if v.answer == YES else YES
    v.question = "contains F2xF2"
    return v


def graph_product_cyclically_hyperbolic(graph: LabeledGraph,
                                        patterns: Sequence[Pattern] = GRAPH_PRODUCT_PATTERNS
                                        ) -> Verdict:
    """Graph product of finite groups: forbidden labeled configurations.

    ``patterns`` defaults to the shipped table and may be replaced.
    """
    _require_simple(graph)
    if graph.labels is None:
        raise GraphError("graph product needs a size label on every vertex")
    inf = [v for v in graph.vertices if graph.labels[v] == INFINITE]
    if inf:
        raise GraphError(f"vertex groups must be finite, got infinite at {inf!r}")
    return _pattern_verdict(graph, patterns, "gp", "gp: no forbidden labeled configuration")


def graph_product_contains_F2xF2(graph: LabeledGraph, patterns=GRAPH_PRODUCT_PATTERNS) -> Verdict:
    v = graph_product_cyclically_hyperbolic(graph, patterns)
    v.answer = NO if v.answer == YES else YES
    v.question = "contains F2xF2"
    return v


# ---------------------------------------------------------------------------
# graph braid groups

def _is_arc_or_point(g: LabeledGraph) -> bool:
    if betti_number(g) != 0:
        return False
    return all(g.degree(v) <= 2 for v in g.vertices)


def _is_circle(g: LabeledGraph) -> bool:
    if not g.vertices or betti_number(g) != 1:
        return False
    deg = {v: 0 for v in g.vertices}
    for u, v in g.edges:
        deg[u] += 1
        deg[v] += 1
    return all(d == 2 for d in deg.values())


def builtin_cyclic(sub: LabeledGraph, k: int) -> bool | None:
    """Cyclicity of B_k(sub) when it follows from elementary facts.

    B_0 is trivial; B_1 is the free group of rank betti(sub); an arc or a
    point has a contractible (or empty) configuration space; a circle gives Z.
    """
    if k == 0:
        return True
    if k == 1:
        return betti_number(sub) <= 1
    if _is_arc_or_point(sub) or _is_circle(sub):
        return True
    return None


def braid_cyclically_hyperbolic(graph: LabeledGraph, n: int,
                                oracle: CyclicityOracle | None = None) -> Verdict:
    """Evaluate the disjoint-subcomplex criterion for B_n(graph).

    For every pair of disjoint connected subcomplexes and n1 + n2 <= n, one
    of B_{n1}, B_{n2} must be cyclic.  Only maximal pairs are visited, which
    suffices because non-cyclicity passes to larger subcomplexes.
    """
    if n < 0:
        raise GraphError("particle count must be >= 0")
    if not graph.vertices or not graph.is_connected():
        raise GraphError("braid input must be a nonempty connected graph")
    g = graph if graph.multigraph else make_graph(graph.vertices, graph.edges, None, True)
    order = {v: i for i, v in enumerate(g.vertices)}
    memo: dict = {}

    def cyclic(s: frozenset, k: int):
        key = (s, k)
        if key not in memo:
            sub = g.induced(s)
            ans = builtin_cyclic(sub, k)
            if ans is None and oracle is not None:
                ans = oracle(sub, k)
            memo[key] = ans
        return memo[key]

    splits = [(a, b) for a in range(1, n + 1) for b in range(1, n + 1 - a)]
    gap = None
    for s1, s2 in maximal_disjoint_pairs(g):
        for n1, n2 in splits:
            c1, c2 = cyclic(s1, n1), cyclic(s2, n2)
            if c1 is False and c2 is False:
                srt = lambda s: sorted(s, key=order.get)
                return Verdict(NO, f"braid: B_{n1} x B_{n2} on disjoint subcomplexes",
                               {"first": srt(s1), "second": srt(s2), "n1": n1, "n2": n2})
            if c1 is not True and c2 is not True and gap is None:
                gap = {"first": sorted(s1, key=order.get), "second": sorted(s2, key=order.get),
                       "n1": n1, "n2": n2}
    if gap is not None:
        return Verdict(UNDECIDED, "braid: cyclicity unknown without an oracle", gap)
    if n == 2:
        return Verdict(YES, "braid n=2: no two disjoint subcomplexes with two cycles each")
    return Verdict(YES, "braid: every disjoint pair has a cyclic factor")


def braid_two_particle_witness(graph: LabeledGraph):
    """Direct form of the two-particle criterion (both parts with betti >= 2)."""
    from .graphcore import disjoint_subcomplex_pairs

    g = graph if graph.multigraph else make_graph(graph.vertices, graph.edges, None, True)
    return disjoint_subcomplex_pairs(g, lambda s: betti_number(s) >= 2)


def braid_Km_table(ms: Iterable[int], n: int = 2, oracle: CyclicityOracle | None = None) -> dict:
    out = {}
    for m in ms:
        if m < 2:
            raise GraphError("complete graphs need m >= 2")
        out[m] = braid_cyclically_hyperbolic(complete_graph(m), n, oracle)
    return out


# ---------------------------------------------------------------------------

def analyze(family: str, graph: LabeledGraph, n: int = 2,
            oracle: CyclicityOracle | None = None) -> Verdict:
    if family == "racg":
        return racg_cyclically_hyperbolic(graph)
    if family == "raag":
        return raag_cyclically_hyperbolic(graph)
    if family == "gp":
        return graph_product_cyclically_hyperbolic(graph)
    if family == "braid":
        return braid_cyclically_hyperbolic(graph, n, oracle)
    raise GraphError(f"unknown family {family!r}")


def verify_witness(family: str, graph: LabeledGraph, verdict: Verdict,
                   oracle: CyclicityOracle | None = None) -> bool:
    """Independent re-check of a negative verdict's witness."""
    if verdict.answer != NO or verdict.question != "cyclically hyperbolic":
        return True
    w = verdict.witness or {}
    if family in ("racg", "raag", "gp"):
        table = {"racg": RACG_PATTERNS, "raag": RAAG_PATTERNS, "gp": GRAPH_PRODUCT_PATTERNS}[family]
        pats = {p.name: p for p in table}
        p = pats.get(w.get("pattern"))
        return p is not None and is_induced_embedding(graph, p, w["embedding"])
    g = graph if graph.multigraph else make_graph(graph.vertices, graph.edges, None, True)
    s1, s2 = set(w["first"]), set(w["second"])
    if s1 & s2:
        return False
    a, b = g.induced(s1), g.induced(s2)
    if len(connected_components(a)) != 1 or len(connected_components(b)) != 1:
        return False

    def non_cyclic(x, k):
        if k == 1:
            return betti_number(x) >= 2
        return oracle is not None and oracle(x, k) is False

    return non_cyclic(a, w["n1"]) and non_cyclic(b, w["n2"])
