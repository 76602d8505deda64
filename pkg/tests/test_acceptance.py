"""Acceptance criteria 1 to 11.

Each test records one PASS/FAIL line (shown in the terminal summary, or
printed when this file is run as a script) and then asserts.
"""
import itertools
import random
import time
from collections import deque

import networkx as nx
import numpy as np
import pytest

from cubelab.coneoff import (
    canonical_family, delta_4pt, delta_curve, family_from_words, flat_collapse_check, ray_distance,
)
from cubelab.criteria import (
    NO, YES, braid_Km_table, graph_product_cyclically_hyperbolic, raag_contains_F2xF2,
    raag_cyclically_hyperbolic, racg_contains_F2xF2, racg_cyclically_hyperbolic, verify_witness,
)
from cubelab.fixtures import get, random_graph, tree
from cubelab.graphcore import C4, K33, empty_graph, make_graph, path_graph
from cubelab.medianlab import (
    ball_from_graph, generate_ball, halfspace_of_edge, random_median_graph, staircase_witness,
    transeparation_check, tree_of_hyperplanes,
)
from cubelab.words import GroupSpec, engine

from oracles import tits_matrices

RESULTS: dict = {}


def record(n: int, ok: bool, detail: str) -> None:
    RESULTS[n] = (bool(ok), detail)
    print(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


# ---------------------------------------------------------------------------

def test_01_racg_matrix():
    t = time.perf_counter()
    expect = {"C4": YES, "C5": YES, "Petersen": YES, "P5": YES,
              "K33": NO, "K33+": NO, "K33++": NO, "K33+apex": NO}
    got = {}
    for name in expect:
        g = get(name)
        v = racg_cyclically_hyperbolic(g)
        assert verify_witness("racg", g, v)
        got[name] = v.answer
    dt = time.perf_counter() - t
    bad = [k for k in expect if got[k] != expect[k]]
    record(1, not bad and dt < 1, f"RACG matrix, mismatches={bad}, {dt:.3f}s")


def test_02_raag_verdicts():
    t = time.perf_counter()
    c4 = raag_cyclically_hyperbolic(C4)
    ok = c4.answer == NO and raag_contains_F2xF2(C4).answer == YES and c4.details["contains_F2xF2"]
    for name in ("K4", "C5", "tree5", "P5"):
        ok &= raag_cyclically_hyperbolic(get(name)).answer == YES
    dt = time.perf_counter() - t
    record(2, ok and dt < 1, f"RAAG C4 not CH with F2xF2, K4/C5/trees CH, {dt:.3f}s")


def test_03_braid_complete_graphs():
    t = time.perf_counter()
    table = braid_Km_table(range(4, 10), n=2)
    got = {m: v.answer == YES for m, v in table.items()}
    ok = all(got[m] == (m <= 7) for m in got)
    ok &= all(verify_witness("braid", get(f"K{m}"), table[m]) for m in table)
    dt = time.perf_counter() - t
    record(3, ok and dt < 5, f"B_2(K_m) CH for m={sorted(m for m in got if got[m])}, {dt:.3f}s")


# ---------------------------------------------------------------------------
# criterion 4: the word engine against Cayley-graph BFS over independent models

def _racg_model(graph):
    mats = [m for m in tits_matrices(list(graph.vertices), graph.adjacent)]
    n = len(mats)
    ident = np.eye(n, dtype=np.int64).tobytes()

    def act(elem, gen):
        M = np.frombuffer(elem, dtype=np.int64).reshape(n, n)
        return (M @ mats[gen[0]]).tobytes()

    return ident, act


def _raag_p3_model():
    # P3 = v0 - v1 - v2, so v1 is central and v0, v2 generate a free group
    def act(elem, gen):
        z, free = elem
        v, e = gen
        if v == 1:
            return z + e, free
        if free and free[-1] == (v, -e):
            return z, free[:-1]
        return z, free + ((v, e),)

    return (0, ()), act


def _z2_z3_model():
    return (0, 0), lambda elem, gen: ((elem[0] + gen[1]) % 2, elem[1]) if gen[0] == 0 \
        else (elem[0], (elem[1] + gen[1]) % 3)


def _bfs(ident, act, gens, radius):
    dist = {ident: 0}
    q = deque([ident])
    while q:
        x = q.popleft()
        if dist[x] == radius:
            continue
        for g in gens:
            y = act(x, g)
            if y not in dist:
                dist[y] = dist[x] + 1
                q.append(y)
    return dist


def _word_check(grp, ident, act, max_len):
    gens = grp.generators
    dist = _bfs(ident, act, gens, max_len)
    key_of: dict = {}
    elem_of: dict = {}
    words = 0
    bad = []
    stack = [((), ident)]
    while stack:
        w, e = stack.pop()
        words += 1
        key = grp.reduce_syllables(w)
        if key_of.setdefault(e, key) != key or elem_of.setdefault(key, e) != e:
            bad.append(("equal", w))
        if grp.syllable_length(key) != dist[e]:
            bad.append(("length", w))
        if len(w) < max_len:
            stack.extend((w + (g,), act(e, g)) for g in gens)
    # the public equal() on a sample of word pairs
    rng = random.Random(0)
    elems = list(key_of)
    for _ in range(500):
        e1, e2 = rng.choice(elems), rng.choice(elems)
        w1 = [(grp.names[v], x) for v, x in key_of[e1]]
        w2 = [(grp.names[v], x) for v, x in key_of[e2]]
        if grp.equal(w1, w2) != (e1 == e2):
            bad.append(("equal()", w1, w2))
    return words, bad


@pytest.mark.slow
def test_04_word_engine_oracles():
    t = time.perf_counter()
    gp_edge = make_graph(["a", "b"], [("a", "b")], {"a": 2, "b": 3})
    cases = [
        ("RACG(C4)", engine(GroupSpec("racg", C4)), *_racg_model(C4)),
        ("RAAG(P3)", engine(GroupSpec("raag", path_graph(3))), *_raag_p3_model()),
        ("GP(2,3)", engine(GroupSpec("gp", gp_edge)), *_z2_z3_model()),
    ]
    total, bad = 0, []
    for name, grp, ident, act in cases:
        n, b = _word_check(grp, ident, act, 8)
        total += n
        bad += [(name,) + x for x in b[:3]]
    dt = time.perf_counter() - t
    record(4, not bad and dt < 120, f"{total} words up to length 8, failures={bad[:3]}, {dt:.1f}s")


def test_05_sphere_sizes():
    c4 = generate_ball(GroupSpec("racg", C4), 8).sphere_sizes()
    f2 = generate_ball(GroupSpec("raag", empty_graph(2)), 8).sphere_sizes()
    ok = all(c4[r] == 4 * r for r in range(1, 9)) and all(f2[r] == 4 * 3 ** (r - 1) for r in range(1, 9))
    record(5, ok, f"C4 spheres {c4[1:]}, F2 spheres {f2[1:]}")


# ---------------------------------------------------------------------------
# criterion 6: staircases, re-checked with networkx distances

def _all_geodesics(adj, d, x, y):
    out = []

    def walk(path):
        u = path[-1]
        if u == y:
            out.append(list(path))
            return
        for w in adj[u]:
            if d[w][y] == d[u][y] - 1:
                path.append(w)
                walk(path)
                path.pop()

    walk([x])
    return out


def _independent_ok(d, st, geodesic, z):
    pts = sorted(st.grid)
    if st.grid[(0, 0)] != z or len({st.grid[p] for p in pts}) != len(pts):
        return False
    for p, q in itertools.combinations(pts, 2):
        if d[st.grid[p]][st.grid[q]] != abs(p[0] - q[0]) + abs(p[1] - q[1]):
            return False
    prof = st.profile
    if prof[0] != (st.a, 0) or prof[-1] != (0, st.b):
        return False
    if any((p1 - p2, q2 - q1) not in ((1, 0), (0, 1)) for (p1, q1), (p2, q2) in zip(prof, prof[1:])):
        return False
    under = {(p, q) for pk, qk in prof for p in range(pk + 1) for q in range(qk + 1)}
    i, j = st.segment
    return set(pts) == under and [st.grid[p] for p in prof] == geodesic[i:j + 1]


def _nx(ball):
    g = nx.Graph()
    g.add_nodes_from(range(len(ball)))
    g.add_edges_from((int(a), int(b)) for a, b in ball.edges)
    return g


@pytest.mark.slow
def test_06_staircases():
    t = time.perf_counter()
    ball = generate_ball(GroupSpec("racg", C4), 8)
    g = _nx(ball)
    d = dict(nx.all_pairs_shortest_path_length(g))
    adj = {u: sorted(g[u]) for u in g}
    safe = [int(v) for v in ball.safe_vertices()]
    count, failures = 0, []
    for x, y in itertools.product(safe, safe):
        if d[x][y] > 6:
            continue
        iv = [z for z in range(len(ball)) if d[x][z] + d[z][y] == d[x][y]]
        for gamma in _all_geodesics(adj, d, x, y):
            for z in iv:
                st = staircase_witness(ball, x, y, z, gamma)
                count += 1
                if not _independent_ok(d, st, gamma, z):
                    failures.append((x, y, z))
    # random median graph, seeded
    rng = np.random.default_rng(7)
    mg = random_median_graph(60, rng)
    mball = ball_from_graph(mg)
    gm = _nx(mball)
    dm = dict(nx.all_pairs_shortest_path_length(gm))
    adjm = {u: sorted(gm[u]) for u in gm}
    for _ in range(100):
        x, y = (int(v) for v in rng.choice(len(mball), 2, replace=False))
        iv = [z for z in range(len(mball)) if dm[x][z] + dm[z][y] == dm[x][y]]
        z = int(rng.choice(iv))
        geos = _all_geodesics(adjm, dm, x, y)
        gamma = geos[int(rng.integers(len(geos)))]
        st = staircase_witness(mball, x, y, z, gamma)
        count += 1
        if not _independent_ok(dm, st, gamma, z):
            failures.append(("median", x, y, z))
    dt = time.perf_counter() - t
    record(6, not failures and dt < 300,
           f"{count} staircases ({len(mball)}-vertex median graph included), failures={len(failures)}, {dt:.1f}s")


def test_07_tree_of_hyperplanes():
    t = time.perf_counter()
    ball = generate_ball(GroupSpec("raag", empty_graph(2, "")), 10)
    J = halfspace_of_edge(ball, (), "0")
    A = halfspace_of_edge(ball, "0", "0^2")
    B = halfspace_of_edge(ball, "0", "0 1")
    tr = tree_of_hyperplanes(ball, "0", "0 1", J, A, B, 3)
    ok_t, witness = transeparation_check(ball, tr)
    dt = time.perf_counter() - t
    record(7, tr.verified and ok_t,
           f"F2 depth 3 in R=10: K={tr.K}, violations={len(tr.violations)}, "
           f"transeparation={'ok' if ok_t else witness}, {dt:.1f}s")


def _non_increasing(xs):
    return all(b <= a for a, b in zip(xs, xs[1:]))


def _strictly_increasing(xs):
    return all(b > a for a, b in zip(xs, xs[1:]))


@pytest.mark.slow
def test_08_delta_behaviour():
    t = time.perf_counter()
    f2 = GroupSpec("raag", empty_graph(2))
    tree_curve = delta_curve(f2, None, [2, 3, 4, 5], seed=0, basepoints=16).deltas()
    tree_ok = all(x == 0 for x in tree_curve) and delta_4pt(tree(7)) == 0
    c4 = GroupSpec("racg", C4)
    c4_curve = delta_curve(c4, canonical_family(c4), [3, 4, 5, 6], seed=0, basepoints=16).deltas()
    k33 = GroupSpec("racg", K33)
    k33_curve = delta_curve(k33, canonical_family(k33), [2, 3, 4, 5], seed=0, basepoints=16).deltas()
    ok = tree_ok and _non_increasing(c4_curve) and _strictly_increasing(k33_curve)
    dt = time.perf_counter() - t
    record(8, ok and dt < 600,
           f"tree {tree_curve}, C4 r=3..6 {c4_curve} (non-increasing: {_non_increasing(c4_curve)}), "
           f"K33 r=2..5 {k33_curve} (strictly increasing: {_strictly_increasing(k33_curve)}), {dt:.0f}s")


@pytest.mark.slow
def test_09_counterexample_ray():
    t = time.perf_counter()
    spec = GroupSpec("racg", empty_graph(3, "a"))
    fam = family_from_words(spec, ["a0 a1", "a1 a2", "a0 a2"])
    res = ray_distance(spec, fam, "a0 a1 a2", list(range(1, 7)))
    ds = [res["distances"][k] for k in range(1, 7)]
    dt = time.perf_counter() - t
    record(9, _strictly_increasing(ds) and dt < 120,
           f"d(e, g^k) for k=1..6: {ds} in a ball of {res['vertices']} vertices, {dt:.0f}s")


@pytest.mark.slow
def test_10_flat_collapse():
    t = time.perf_counter()
    c4 = GroupSpec("racg", C4)
    fam = canonical_family(c4)
    c4_viol = {R: len(flat_collapse_check(generate_ball(c4, R), fam, 2)["violations"]) for R in range(2, 7)}
    k33 = GroupSpec("racg", K33)
    res = flat_collapse_check(generate_ball(k33, 4), canonical_family(k33), 2)
    k33_viol = len(res["violations"])
    dt = time.perf_counter() - t
    record(10, not any(c4_viol.values()) and k33_viol > 0,
           f"C4 K=2 violations by R {c4_viol}; K33 R=4 K=2: {k33_viol} violations "
           f"among {res['flats']} flats, {dt:.0f}s")


def test_11_criterion_equivalence():
    rng = random.Random(2024)
    disagree = 0
    for _ in range(200):
        n = rng.randint(1, 10)
        g = random_graph(n, rng.uniform(0.2, 0.95), rng)
        a = racg_cyclically_hyperbolic(g)
        b = racg_contains_F2xF2(g)
        labelled = make_graph(g.vertices, g.edges, {v: 2 for v in g.vertices})
        c = graph_product_cyclically_hyperbolic(labelled)
        if (a.answer == YES) != (b.answer == NO) or a.answer != c.answer:
            disagree += 1
    record(11, disagree == 0, f"200 seeded random graphs up to 10 vertices, disagreements={disagree}")


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_"):
            try:
                fn()
            except AssertionError:
                pass
