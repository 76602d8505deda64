"""Normal forms for right-angled Coxeter/Artin groups and graph products.

An element is stored as a tuple of *syllables* ``(vertex_index, element)``:

* RACG: element is always 1 (the involution);
* RAAG: element is a nonzero integer exponent;
* graph product of finite groups: element is a nontrivial index of the
  vertex group (``1 .. size-1``), multiplied with a table (cyclic by default).

Reduction appends syllables one at a time; a new syllable slides left past
syllables of adjacent vertices and merges with the first same-vertex
syllable it meets.  The canonical word is the lexicographically least
linearisation of the resulting heap under the fixed vertex order.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

from .graphcore import INFINITE, GraphError, LabeledGraph

FAMILIES = ("racg", "raag", "gp", "braid")


class WordError(ValueError):
    """Invalid letter, malformed word or spec mismatch."""


@dataclass(frozen=True)
class GroupSpec:
    family: str
    graph: LabeledGraph
    particles: int = 0
    tables: dict | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise GraphError(f"unknown family {self.family!r}")
        g = self.graph
        if self.family in ("racg", "raag"):
            if g.multigraph:
                raise GraphError(f"{self.family} needs a simple graph")
        elif self.family == "gp":
            if g.multigraph:
                raise GraphError("graph products need a simple graph")
            if g.labels is None:
                raise GraphError("graph product needs a size label on every vertex")
            bad = [v for v in g.vertices if g.labels[v] == INFINITE]
            if bad:
                raise GraphError(f"graph product vertex groups must be finite: {bad!r}")
        else:
            if self.particles < 0:
                raise GraphError("particle count must be >= 0")
            if not g.is_connected():
                raise GraphError("braid input must be connected")


class VertexGroup:
    """A finite group on ``0 .. order-1`` with 0 the identity."""

    def __init__(self, order: int, table: Sequence[Sequence[int]] | None = None):
        self.order = order
        if table is None:
            self._table = None
        else:
            if len(table) != order or any(len(r) != order for r in table):
                raise WordError("multiplication table has wrong shape")
            self._table = [list(r) for r in table]
            if any(self._table[0][x] != x or self._table[x][0] != x for x in range(order)):
                raise WordError("element 0 must be the identity of the table")
        self._inv = [next(y for y in range(order) if self.mul(x, y) == 0) for x in range(order)]

    def mul(self, x: int, y: int) -> int:
        if self._table is None:
            return (x + y) % self.order
        return self._table[x][y]

    def inv(self, x: int) -> int:
        return self._inv[x]


@dataclass(frozen=True)
class ReducedWord:
    """Canonical reduced word; ``syllables`` use vertex indices."""

    syllables: tuple
    group: "GraphProduct" = field(repr=False, compare=False, hash=False)

    @property
    def length(self) -> int:
        return self.group.syllable_length(self.syllables)

    def __len__(self) -> int:
        return self.length

    def __mul__(self, other: "ReducedWord") -> "ReducedWord":
        return self.group.multiply(self, other)

    def inverse(self) -> "ReducedWord":
        return self.group.inverse(self)

    def __pow__(self, k: int) -> "ReducedWord":
        return self.group.power(self, k)

    def letters(self) -> list:
        """Named letters ``(vertex, element)``."""
        names = self.group.names
        return [(names[v], x) for v, x in self.syllables]

    def __str__(self) -> str:
        return self.group.format(self.syllables)


class GraphProduct:
    """Word engine for a RACG, RAAG or graph product of finite groups."""

    def __init__(self, spec: GroupSpec):
        if spec.family == "braid":
            raise WordError("graph braid groups have no word engine here")
        self.spec = spec
        g = spec.graph
        self.names = list(g.vertices)
        self.index = {v: i for i, v in enumerate(self.names)}
        n = len(self.names)
        self.adj = [frozenset(self.index[w] for w in g.neighbors(v)) for v in self.names]
        self.infinite = spec.family == "raag"
        if spec.family == "racg":
            sizes = [2] * n
        elif spec.family == "raag":
            sizes = [None] * n
        else:
            sizes = [g.labels[v] for v in self.names]
        self.sizes = sizes
        tables = spec.tables or {}
        self.vgroups = [None if s is None else VertexGroup(s, tables.get(self.names[i]))
                        for i, s in enumerate(sizes)]
        self.identity = ReducedWord((), self)
        # shared syllable tuples keep large balls of keys compact
        self._syl: dict = {}

    # -- generators --------------------------------------------------------
    @cached_property
    def generators(self) -> list[tuple[int, int]]:
        """Syllables of length one: v^{+-1} (RAAG) or every nontrivial element."""
        out = []
        for v in range(len(self.names)):
            if self.infinite:
                out += [(v, 1), (v, -1)]
            else:
                out += [(v, x) for x in range(1, self.sizes[v])]
        return out

    def clique_number(self) -> int:
        return self.spec.graph.clique_number()

    def syllable_length(self, syllables) -> int:
        if self.infinite:
            return sum(abs(x) for _, x in syllables)
        return len(syllables)

    # -- core reduction ---------------------------------------------------------
    def _check(self, v: int, x: int) -> None:
        if not 0 <= v < len(self.names):
            raise WordError(f"unknown vertex index {v}")
        if self.infinite:
            if not isinstance(x, int) or x == 0:
                raise WordError("RAAG exponents must be nonzero integers")
        elif not isinstance(x, int) or not 0 < x < self.sizes[v]:
            raise WordError(f"element {x!r} is not a nontrivial element of the vertex group "
                            f"of {self.names[v]!r} (size {self.sizes[v]})")

    def _merge(self, v: int, x: int, y: int) -> int:
        if self.infinite:
            return x + y
        return self.vgroups[v].mul(x, y)

    def _push(self, word: list, v: int, x: int) -> None:
        """Right-multiply the reduced syllable list ``word`` by ``(v, x)`` in place."""
        adj = self.adj[v]
        for i in range(len(word) - 1, -1, -1):
            u = word[i][0]
            if u == v:
                y = self._merge(v, word[i][1], x)
                if y == 0:
                    del word[i]
                else:
                    word[i] = self._syllable(v, y)
                return
            if u not in adj:
                break
        word.append(self._syllable(v, x))

    def _syllable(self, v: int, x: int) -> tuple:
        key = (v, x)
        return self._syl.setdefault(key, key)

    def canonical(self, word: Sequence) -> tuple:
        """Lexicographically least linearisation of a reduced syllable list."""
        n = len(word)
        if n < 2 or not any(self.adj):
            return tuple(word)
        adj = self.adj
        # pred[i]: earlier syllables that do not commute with syllable i
        pred = [0] * n
        for i in range(n):
            vi = word[i][0]
            m = 0
            for j in range(i):
                if word[j][0] not in adj[vi]:
                    m |= 1 << j
            pred[i] = m
        placed = 0
        out = []
        for _ in range(n):
            best = None
            for i in range(n):
                if placed >> i & 1 or pred[i] & ~placed:
                    continue
                if best is None or word[i] < word[best]:
                    best = i
            placed |= 1 << best
            out.append(word[best])
        return tuple(out)

    def reduce_syllables(self, letters: Iterable) -> tuple:
        word: list = []
        for v, x in letters:
            self._check(v, x)
            if not self.infinite:
                x %= self.sizes[v]
                if x == 0:
                    continue
            self._push(word, v, x)
        return self.canonical(word)

    # -- public API ---------------------------------------------------------
    def word(self, letters: Iterable) -> ReducedWord:
        """Reduce letters given as ``(vertex_name, element)`` pairs."""
        idx = []
        for name, x in letters:
            if name not in self.index:
                raise WordError(f"unknown vertex {name!r}")
            idx.append((self.index[name], x))
        return ReducedWord(self.reduce_syllables(idx), self)

    def reduce(self, w) -> ReducedWord:
        """Canonical reduced form of a word (string, letters or ReducedWord)."""
        if isinstance(w, ReducedWord):
            self._same(w)
            return ReducedWord(self.reduce_syllables(w.syllables), self)
        if isinstance(w, str):
            return self.parse(w)
        return self.word(w)

    def from_syllables(self, syllables: Iterable) -> ReducedWord:
        return ReducedWord(self.reduce_syllables(syllables), self)

    def _same(self, w: ReducedWord) -> None:
        if w.group is not self and w.group.spec != self.spec:
            raise WordError("words belong to different groups")

    def multiply(self, a: ReducedWord, b: ReducedWord) -> ReducedWord:
        self._same(a)
        self._same(b)
        word = list(a.syllables)
        for v, x in b.syllables:
            self._push(word, v, x)
        return ReducedWord(self.canonical(word), self)

    def times_syllables(self, key: tuple, syllables: Iterable) -> tuple:
        """Fast path: canonical key of ``key * syllables``."""
        word = list(key)
        for v, x in syllables:
            self._push(word, v, x)
        return self.canonical(word)

    def inverse_syllables(self, key: Sequence) -> tuple:
        if self.infinite:
            inv = [(v, -x) for v, x in reversed(key)]
        else:
            inv = [(v, self.vgroups[v].inv(x)) for v, x in reversed(key)]
        return self.canonical(inv)

    def inverse(self, a: ReducedWord) -> ReducedWord:
        self._same(a)
        return ReducedWord(self.inverse_syllables(a.syllables), self)

    def power(self, a: ReducedWord, k: int) -> ReducedWord:
        base = a if k >= 0 else self.inverse(a)
        word: list = []
        for _ in range(abs(k)):
            for v, x in base.syllables:
                self._push(word, v, x)
        return ReducedWord(self.canonical(word), self)

    def distance_keys(self, a: tuple, b: tuple) -> int:
        """Word-metric distance between two canonical keys: |a^-1 b|."""
        word = list(self.inverse_syllables(a))
        for v, x in b:
            self._push(word, v, x)
        return self.syllable_length(word)

    def equal(self, w1, w2) -> bool:
        a, b = self.reduce(w1), self.reduce(w2)
        return a.syllables == b.syllables

    # -- geodesics ----------------------------------------------------------
    def generator_steps(self, letters: Iterable) -> list[tuple[int, int]]:
        """Expand letters into single generator steps (RAAG v^3 -> v v v)."""
        out = []
        for v, x in letters:
            if self.infinite:
                s = 1 if x > 0 else -1
                out += [(v, s)] * abs(x)
            else:
                out.append((v, x % self.sizes[v]))
        return out

    def _as_index_letters(self, w) -> list:
        if isinstance(w, ReducedWord):
            return list(w.syllables)
        if isinstance(w, str):
            return self.parse_letters(w)
        return [(self.index[n], x) for n, x in w]

    def is_geodesic_word(self, w) -> bool:
        """True iff the word's generator length equals its reduced length."""
        letters = self._as_index_letters(w)
        steps = self.generator_steps(letters)
        if any(x == 0 for _, x in steps):
            return False
        return len(steps) == self.from_syllables(letters).length

    def geodesic_between(self, w1, w2) -> list[tuple]:
        """Reduced word for ``w1^-1 w2`` as generator steps with vertex names.

        Successive prefixes applied to ``w1`` trace a geodesic vertex path.
        """
        a = self.reduce(w1)
        b = self.reduce(w2)
        d = self.multiply(self.inverse(a), b)
        return [(self.names[v], x) for v, x in self.generator_steps(d.syllables)]

    def geodesic_path(self, w1, w2) -> list[ReducedWord]:
        a = self.reduce(w1)
        path = [a]
        for name, x in self.geodesic_between(w1, w2):
            path.append(self.multiply(path[-1], self.word([(name, x)])))
        return path

    # -- cosets of special subgroups --------------------------------------------
    def strip_right(self, key: Sequence, allowed: frozenset) -> tuple:
        """Shortest element of ``key * <allowed>``: drop right-extractable syllables."""
        word = list(key)
        changed = True
        while changed:
            changed = False
            for i in range(len(word) - 1, -1, -1):
                v = word[i][0]
                if v in allowed and all(word[j][0] in self.adj[v] for j in range(i + 1, len(word))):
                    del word[i]
                    changed = True
                    break
        return self.canonical(word)

    def in_double_coset(self, key: Sequence, left: frozenset, right: frozenset) -> bool:
        """Decide ``key in <left> <right>`` by greedy stripping from both ends."""
        word = list(key)
        changed = True
        while word and changed:
            changed = False
            for i in range(len(word)):
                v = word[i][0]
                if v in left and all(word[j][0] in self.adj[v] for j in range(i)):
                    del word[i]
                    changed = True
                    break
            if changed:
                continue
            for i in range(len(word) - 1, -1, -1):
                v = word[i][0]
                if v in right and all(word[j][0] in self.adj[v] for j in range(i + 1, len(word))):
                    del word[i]
                    changed = True
                    break
        return not word

    def link(self, v: int) -> frozenset:
        return self.adj[v]

    def star(self, v: int) -> frozenset:
        return self.adj[v] | {v}

    # -- text ------------------------------------------------------------------
    _TOKEN = re.compile(r"^([^\s^]+)(?:\^(-?\d+))?$")

    def parse_letters(self, text: str) -> list[tuple[int, int]]:
        out = []
        for tok in text.split():
            m = self._TOKEN.match(tok)
            if not m:
                raise WordError(f"malformed letter {tok!r}")
            name, k = m.group(1), int(m.group(2)) if m.group(2) else 1
            if name not in self.index:
                raise WordError(f"unknown vertex {name!r} in {tok!r}")
            v = self.index[name]
            if not self.infinite:
                k %= self.sizes[v]
            if k == 0:
                raise WordError(f"letter {tok!r} is trivial in its vertex group")
            out.append((v, k))
        return out

    def parse(self, text: str) -> ReducedWord:
        return self.from_syllables(self.parse_letters(text))

    def format(self, syllables: Sequence) -> str:
        if not syllables:
            return "e"
        parts = []
        for v, x in syllables:
            name = self.names[v]
            parts.append(name if x == 1 else f"{name}^{x}")
        return " ".join(parts)


def reduce(word, spec: GroupSpec) -> ReducedWord:
    return engine(spec).reduce(word)


def equal(w1, w2, spec: GroupSpec) -> bool:
    return engine(spec).equal(w1, w2)


def is_geodesic_word(word, spec: GroupSpec) -> bool:
    return engine(spec).is_geodesic_word(word)


def geodesic_between(w1, w2, spec: GroupSpec) -> list:
    return engine(spec).geodesic_between(w1, w2)


_ENGINES: dict = {}


def engine(spec: GroupSpec) -> GraphProduct:
    key = id(spec)
    cached = _ENGINES.get(key)
    if cached is None or cached.spec is not spec:
        cached = GraphProduct(spec)
        _ENGINES[key] = cached
    return cached
