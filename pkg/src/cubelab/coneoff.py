"""Cone-offs of Cayley balls over coset families, and Gromov delta estimates.

Coning a coset turns it into a clique.  The clique metric is computed with a
weighted apex per coset: base edges weigh 2, apex edges weigh 1, and the
result is halved.  Two coset members are then at distance exactly 1, and no
path through an apex is shorter than the clique edge it replaces, so the
metric on group vertices is the clique metric.  ``mode="apex"`` uses unit
weights instead (the usual coned-off graph with cone points).
"""
from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .graphcore import GraphError, LabeledGraph
from .medianlab import Ball, SafeRadiusError, find_flats, generate_ball
from .words import GroupSpec, WordError, engine

SCOPES = ("safe", "ball")
MODES = ("clique", "apex")


@dataclass
class CosetFamily:
    """Subgroups given by canonical keys: cyclic ``<h>`` or standard ``<S>``."""

    cyclic: list = field(default_factory=list)       # canonical keys of generators h
    standard: list = field(default_factory=list)     # frozensets of vertex indices
    names: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.cyclic) + len(self.standard)

    def to_dict(self) -> dict:
        return {"subgroups": list(self.names)}


def canonical_family(spec: GroupSpec, extra: Iterable = ()) -> CosetFamily:
    """``<uv>`` for non-adjacent u, v (RACG) or ``<v>`` per vertex (RAAG), plus extras."""
    g = engine(spec)
    fam = CosetFamily()
    if spec.family == "racg":
        for u, v in itertools.combinations(range(len(g.names)), 2):
            if v not in g.adj[u]:
                fam.cyclic.append(g.reduce_syllables([(u, 1), (v, 1)]))
    elif spec.family == "raag":
        for v in range(len(g.names)):
            fam.cyclic.append(((v, 1),))
    else:
        raise GraphError("the canonical family is defined for racg and raag")
    for w in extra:
        add_cyclic(fam, spec, w)
    fam.names = [g.format(k) for k in fam.cyclic]
    return fam


def add_cyclic(fam: CosetFamily, spec: GroupSpec, word) -> None:
    g = engine(spec)
    key = g.reduce(word).syllables
    if not key:
        raise WordError(f"subgroup generator {word!r} reduces to the identity")
    if key not in fam.cyclic:
        fam.cyclic.append(key)
        fam.names.append(g.format(key))


def family_from_words(spec: GroupSpec, words: Iterable = (), standard: Iterable = ()) -> CosetFamily:
    """Cyclic subgroups from words and standard subgroups from vertex-name lists."""
    g = engine(spec)
    fam = CosetFamily()
    for w in words:
        add_cyclic(fam, spec, w)
    for names in standard:
        try:
            s = frozenset(g.index[n] for n in names)
        except KeyError as e:
            raise WordError(f"unknown vertex {e.args[0]!r}") from None
        if not s:
            raise WordError("standard subgroup needs at least one vertex")
        fam.standard.append(s)
        fam.names.append("<" + ",".join(g.names[v] for v in sorted(s)) + ">")
    return fam


def enumerate_cosets(ball: Ball, fam: CosetFamily, scope: str = "safe") -> list[np.ndarray]:
    """Coset intersections with the ball (size >= 2), as sorted index arrays.

    A cyclic coset ``g<h>`` is walked in both directions from ``g`` until the
    word length exceeds ``R + 2|h|``, so re-entries near the boundary are kept.
    """
    if scope not in SCOPES:
        raise GraphError(f"scope must be one of {SCOPES}")
    grp = ball.group
    if grp is None:
        raise GraphError("cone-offs need a Cayley ball")
    n = len(ball)
    out = []
    for h in fam.cyclic:
        hinv = grp.inverse_syllables(h)
        slack = ball.radius + 2 * grp.syllable_length(h)
        seen = np.zeros(n, dtype=bool)
        for i in range(n):
            if seen[i]:
                continue
            members = [i]
            start = ball.labels[i]
            for step in (h, hinv):
                k = start
                while True:
                    k = grp.times_syllables(k, step)
                    if k == start or grp.syllable_length(k) > slack:
                        break
                    j = ball.index.get(k)
                    if j is not None:
                        members.append(j)
            members = np.unique(members)
            seen[members] = True
            if len(members) >= 2:
                out.append(members)
    for s in fam.standard:
        groups: dict = {}
        for i, key in enumerate(ball.labels):
            groups.setdefault(grp.strip_right(key, s), []).append(i)
        out += [np.array(sorted(m)) for m in groups.values() if len(m) >= 2]
    if scope == "safe":
        safe = ball.depth <= ball.safe_radius
        out = [m for m in out if safe[m].any()]
    out.sort(key=lambda m: tuple(m[:2]))
    return out


class ConeOff:
    """A ball with every coset of a family made into a clique."""

    def __init__(self, ball: Ball, cosets: list, mode: str = "clique"):
        if mode not in MODES:
            raise GraphError(f"mode must be one of {MODES}")
        self.ball = ball
        self.cosets = cosets
        self.mode = mode
        n = len(ball)
        base_w = 2.0 if mode == "clique" else 1.0
        rows = [ball.edges[:, 0], ball.edges[:, 1]]
        weights = [np.full(len(ball.edges), base_w)]
        for t, m in enumerate(cosets):
            rows.append(m)
            rows.append(np.full(len(m), n + t))
            weights.append(np.ones(len(m)))
        src = np.concatenate(rows[0::2]).astype(np.int64)
        dst = np.concatenate(rows[1::2]).astype(np.int64)
        w = np.concatenate(weights)
        size = n + len(cosets)
        self.graph = csr_matrix((np.r_[w, w], (np.r_[src, dst], np.r_[dst, src])), shape=(size, size))
        self.n = n

    @property
    def scale(self) -> float:
        return 0.5 if self.mode == "clique" else 1.0

    def distances(self, sources: Sequence[int], targets: Sequence[int] | None = None) -> np.ndarray:
        """Cone-off distances between group vertices."""
        d = dijkstra(self.graph, directed=False, indices=np.asarray(sources, dtype=np.int64))
        d = d[:, : self.n] if targets is None else d[:, np.asarray(targets, dtype=np.int64)]
        d = d * self.scale
        if self.mode == "clique":
            return np.rint(d).astype(np.int64) if np.isfinite(d).all() else d
        return d

    def edges_added(self) -> int:
        """Distinct new vertex pairs made adjacent by coning (clique edges)."""
        n = self.n
        codes = []
        for m in self.cosets:
            i, j = np.triu_indices(len(m), 1)
            codes.append(m[i].astype(np.int64) * n + m[j])
        if not codes:
            return 0
        pairs = np.unique(np.concatenate(codes))
        e = self.ball.edges
        base = e[:, 0].astype(np.int64) * n + e[:, 1]
        return int(len(pairs) - np.isin(pairs, base).sum())


def build_coneoff(ball: Ball, fam: CosetFamily, scope: str = "safe", mode: str = "clique") -> ConeOff:
    return ConeOff(ball, enumerate_cosets(ball, fam, scope) if len(fam) else [], mode)


# ---------------------------------------------------------------------------
# Gromov delta

def graph_distances(g: LabeledGraph) -> np.ndarray:
    from scipy.sparse.csgraph import shortest_path

    idx = {v: i for i, v in enumerate(g.vertices)}
    n = len(idx)
    r = [idx[a] for a, b in g.edges] + [idx[b] for a, b in g.edges]
    c = [idx[b] for a, b in g.edges] + [idx[a] for a, b in g.edges]
    adj = csr_matrix((np.ones(len(r)), (r, c)), shape=(n, n))
    return shortest_path(adj, unweighted=True, directed=False)


def sample_basepoints(n: int, basepoints, seed: int) -> np.ndarray:
    if basepoints is None:
        return np.arange(n)
    if isinstance(basepoints, (int, np.integer)):
        if basepoints <= 0:
            raise GraphError("basepoint count must be positive")
        if basepoints >= n:
            return np.arange(n)
        rng = np.random.default_rng(seed)
        return np.sort(rng.choice(n, size=int(basepoints), replace=False))
    return np.asarray(sorted(basepoints), dtype=np.int64)


def delta_4pt(dist, basepoints=None, seed: int = 0) -> float:
    """Four-point delta with fixed basepoints.

    ``dist`` is a distance matrix or a :class:`LabeledGraph`.  For each
    basepoint w the value is the max over x, y, z of
    ``min((x|z)_w, (y|z)_w) - (x|y)_w``; with every vertex as a basepoint
    this is the exact four-point delta.
    """
    d = graph_distances(dist) if isinstance(dist, LabeledGraph) else np.asarray(dist, dtype=float)
    n = d.shape[0]
    if n == 0:
        return 0.0
    if not np.isfinite(d).all():
        raise GraphError("delta needs a connected graph")
    best = 0.0
    for w in sample_basepoints(n, basepoints, seed):
        gp = (d[w][:, None] + d[w][None, :] - d) / 2.0
        for z in range(n):
            col = gp[:, z]
            val = (np.minimum(col[:, None], col[None, :]) - gp).max()
            if val > best:
                best = float(val)
    diam = float(d.max())
    if best > diam:
        raise AssertionError(f"delta {best} exceeds the diameter {diam}")
    return best


def delta_bruteforce(d: np.ndarray) -> float:
    """Reference: max over all quadruples of (largest - middle pair sum) / 2."""
    n = d.shape[0]
    best = 0.0
    for x, y, z, w in itertools.product(range(n), repeat=4):
        s = sorted((d[x, y] + d[z, w], d[x, z] + d[y, w], d[x, w] + d[y, z]))
        best = max(best, (s[2] - s[1]) / 2.0)
    return best


@dataclass
class DeltaRecord:
    radius: int
    vertices: int
    edges_added: int
    delta: float
    basepoints: int
    seed: int


@dataclass
class DeltaCurve:
    records: list

    def deltas(self) -> list[float]:
        return [r.delta for r in self.records]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["radius", "vertices", "edges_added", "delta", "basepoints", "seed"])
        for r in self.records:
            w.writerow([r.radius, r.vertices, r.edges_added, f"{r.delta:g}", r.basepoints, r.seed])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {"records": [r.__dict__ for r in self.records]}


def region_indices(ball: Ball, region: str) -> np.ndarray:
    if region == "safe":
        return ball.safe_vertices()
    if region == "ball":
        return np.arange(len(ball))
    raise GraphError("region must be 'safe' or 'ball'")


def delta_curve(spec: GroupSpec, fam: CosetFamily | None, radii: Sequence[int], seed: int = 0,
                basepoints: int | None = 16, scope: str = "safe", region: str = "safe",
                mode: str = "clique") -> DeltaCurve:
    """Per radius r: ball of radius 2r, cone-off, delta over the safe region (radius r).

    With ``region="ball"`` the ball has radius r and delta is taken over all of it.
    """
    radii = list(radii)
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise GraphError("radii must be strictly increasing")
    fam = fam if fam is not None else CosetFamily()
    recs = []
    for r in radii:
        if region == "safe":
            ball = generate_ball(spec, 2 * r, safe_radius=r)
        else:
            ball = generate_ball(spec, r)
        co = build_coneoff(ball, fam, scope, mode)
        idx = region_indices(ball, region)
        d = co.distances(idx, idx)
        bp = sample_basepoints(len(idx), basepoints, seed)
        recs.append(DeltaRecord(r, len(idx), co.edges_added(), delta_4pt(d, bp, seed), len(bp), seed))
    return DeltaCurve(recs)


# ---------------------------------------------------------------------------
# hypotheses of the hyperbolicity criteria

def hausdorff(d: np.ndarray, a: Sequence[int], b: Sequence[int]) -> float:
    sub = d[np.ix_(a, b)]
    return float(max(sub.min(axis=1).max(), sub.min(axis=0).max()))


def flat_collapse_check(ball: Ball, fam: CosetFamily, K: float, flats: list | None = None,
                        scope: str = "ball", amin: int = 1, bmin: int = 1,
                        cap: int = 10_000) -> dict:
    """Every flat has all rows, or all columns, pairwise within Hausdorff distance K."""
    truncated = False
    if flats is None:
        res = find_flats(ball, amin, bmin, cap)
        flats, truncated = res.flats, res.truncated
    co = build_coneoff(ball, fam, scope)
    verts = sorted({v for f in flats for v in f.vertices()})
    pos = {v: i for i, v in enumerate(verts)}
    d = co.distances(verts, verts) if verts else np.zeros((0, 0))
    violations = []
    for f in flats:
        rows = [[pos[v] for v in r] for r in f.rows()]
        cols = [[pos[v] for v in c] for c in f.columns()]
        hr = max((hausdorff(d, p, q) for p, q in itertools.combinations(rows, 2)), default=0.0)
        hc = max((hausdorff(d, p, q) for p, q in itertools.combinations(cols, 2)), default=0.0)
        if hr > K and hc > K:
            violations.append({"a": f.a, "b": f.b, "rows_hausdorff": hr, "columns_hausdorff": hc,
                               "corner": ball.name(f.grid[0][0]),
                               "opposite": ball.name(f.grid[f.a][f.b])})
    return {"K": K, "flats": len(flats), "truncated": truncated,
            "violations": violations, "passed": not violations}


def thin_interval_check(co: ConeOff, D: float | None = None, samples: int = 2000,
                        seed: int = 0) -> dict:
    """Conditions (i) and (ii) for eta(x, y) = base interval I(x, y), on the safe region.

    Returns the least D satisfying each condition on the checked pairs/triples.
    """
    ball = co.ball
    safe = [int(v) for v in ball.safe_vertices()]
    d = co.distances(np.arange(len(ball)))
    intervals: dict = {}

    def eta(x: int, y: int) -> list:
        key = (x, y) if x < y else (y, x)
        if key not in intervals:
            intervals[key] = ball.interval(*key)
        return intervals[key]

    d_i = 0.0
    for x, y in itertools.combinations(safe, 2):
        if d[x, y] <= 1:
            e = eta(x, y)
            d_i = max(d_i, float(d[np.ix_(e, e)].max()))
    if len(safe) == 1:
        d_i = 0.0
    total = len(safe) ** 3
    partial = False
    if total <= samples:
        triples = itertools.product(safe, repeat=3)
    else:
        rng = np.random.default_rng(seed)
        triples = (tuple(int(t) for t in rng.choice(safe, 3)) for _ in range(samples))
        partial = True
    d_ii = 0.0
    for x, y, z in triples:
        e = eta(x, y)
        cover = sorted(set(eta(x, z)) | set(eta(z, y)))
        d_ii = max(d_ii, float(d[np.ix_(e, cover)].min(axis=1).max()))
    out = {"D_i": d_i, "D_ii": d_ii, "minimal_D": max(d_i, d_ii), "sampled": partial,
           "pairs": len(safe) * (len(safe) - 1) // 2}
    if D is not None:
        out["D"] = D
        out["passed"] = max(d_i, d_ii) <= D
    return out


def ray_distance(spec: GroupSpec, fam: CosetFamily, g, ks: Sequence[int],
                 radius: int | None = None, mode: str = "clique") -> dict:
    """Cone-off distance from the identity to ``g^k`` inside a ball reaching ``g^max k``."""
    grp = engine(spec)
    base = grp.reduce(g)
    if not base.syllables:
        raise WordError("g must be nontrivial")
    keys = {k: grp.power(base, k).syllables for k in ks}
    need = max((grp.syllable_length(v) for v in keys.values()), default=0)
    if radius is None:
        radius = need
    elif radius < need:
        raise SafeRadiusError(f"ball radius {radius} is too small: g^k reaches length {need}")
    ball = generate_ball(spec, radius)
    co = build_coneoff(ball, fam, "ball", mode)
    row = co.distances([0])[0]
    out = {k: (0 if not key else int(row[ball.index[key]])) for k, key in keys.items()}
    return {"radius": radius, "vertices": len(ball), "distances": out}
