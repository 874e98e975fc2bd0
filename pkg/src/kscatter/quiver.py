"""Finite fragments of covering Kronecker quivers and dimension-vector arithmetic.

A fragment is a bipartite tree (or forest) with sinks labelled 1..s and
sources labelled s+1..s+S, every arrow running source -> sink, and all
degrees bounded by the arrow multiplicity m of the ambient Kronecker quiver.
The labelling is *minimal*: sources are ordered by their lowest-labelled
target sink, then by the remaining targets.

Dimension vectors are plain tuples of ints indexed by vertex-1.  Signed
entries are allowed (they occur in the alternating sink vectors used for
framing extraction); most operations require non-negative vectors.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache

DimVec = tuple


class QuiverError(ValueError):
    pass


# ---------------------------------------------------------------- vectors

def vadd(a, b):
    return tuple(x + y for x, y in zip(a, b))


def vsub(a, b):
    return tuple(x - y for x, y in zip(a, b))


def vscale(n, a):
    return tuple(n * x for x in a)


def support(d):
    return frozenset(i + 1 for i, x in enumerate(d) if x)


def ind(d) -> int:
    """Index of an integer vector: the positive n with d/n primitive."""
    g = 0
    for x in d:
        g = math.gcd(g, x)
    if g == 0:
        raise QuiverError("index of the zero vector is undefined")
    return g


def primitive_part(d):
    """Split d = r * d0 with d0 primitive; returns (r, d0)."""
    r = ind(d)
    return r, tuple(x // r for x in d)


# ---------------------------------------------------------------- quiver

@dataclass(frozen=True)
class Quiver:
    """A minimally labelled fragment of the covering quiver of K(m).

    arrows are (source, sink) pairs.  Use :func:`make_quiver` to build one
    from arbitrarily labelled data; the constructor insists on canonical
    labels so that equal fragments compare equal.
    """

    m: int
    n_sinks: int
    n_sources: int
    arrows: tuple

    def __post_init__(self):
        n = self.n_sinks + self.n_sources
        if self.m < 1 or self.n_sinks < 0 or self.n_sources < 0 or n < 1:
            raise QuiverError("bad quiver dimensions")
        seen = set()
        for a in self.arrows:
            src, dst = a
            if not (self.n_sinks < src <= n) or not (1 <= dst <= self.n_sinks):
                raise QuiverError(f"arrow {a} is not source->sink")
            if a in seen:
                raise QuiverError(f"duplicate arrow {a}")
            seen.add(a)
        # fragments of a covering quiver are forests with degrees <= m
        if len(self.arrows) > n - 1:
            raise QuiverError("fragment has an undirected cycle")
        for v in range(1, n + 1):
            if self.degree(v) > self.m:
                raise QuiverError(f"vertex {v} exceeds degree {self.m}")
        for i in range(self.n_sinks + 1, n):
            if self._target_key(i) > self._target_key(i + 1):
                raise QuiverError("source labelling is not minimal")

    def _target_key(self, src):
        return tuple(sorted(dst for s, dst in self.arrows if s == src))

    # -- basic structure ------------------------------------------------

    @property
    def n_vertices(self):
        return self.n_sinks + self.n_sources

    @property
    def sinks(self):
        return range(1, self.n_sinks + 1)

    @property
    def sources(self):
        return range(self.n_sinks + 1, self.n_vertices + 1)

    def is_sink(self, v) -> bool:
        return v <= self.n_sinks

    def degree(self, v) -> int:
        return sum(1 for a in self.arrows if v in a)

    @cached_property
    def neighbors(self):
        adj = {v: [] for v in range(1, self.n_vertices + 1)}
        for src, dst in self.arrows:
            adj[src].append(dst)
            adj[dst].append(src)
        return {v: tuple(sorted(ws)) for v, ws in adj.items()}

    def sources_of_sink(self, j):
        return tuple(src for src, dst in self.arrows if dst == j)

    def sinks_of_source(self, i):
        return tuple(dst for src, dst in self.arrows if src == i)

    def boundary(self):
        """Vertices of undirected valency 1 (valency 0 counts for singletons)."""
        return tuple(v for v in range(1, self.n_vertices + 1)
                     if self.degree(v) <= 1)

    def is_connected(self) -> bool:
        return self.connected(range(1, self.n_vertices + 1))

    def connected(self, vertices) -> bool:
        todo = set(vertices)
        if not todo:
            return False
        stack = [next(iter(todo))]
        seen = set()
        while stack:
            v = stack.pop()
            if v in seen:
                continue
            seen.add(v)
            stack.extend(w for w in self.neighbors[v] if w in todo and w not in seen)
        return seen == todo

    # -- forms, slope, reduction ----------------------------------------

    def zero(self):
        return (0,) * self.n_vertices

    def unit(self, v):
        if not 1 <= v <= self.n_vertices:
            raise QuiverError(f"unknown vertex {v}")
        return tuple(1 if i == v - 1 else 0 for i in range(self.n_vertices))

    def _check(self, d):
        if len(d) != self.n_vertices:
            raise QuiverError("dimension vector has wrong length")

    def euler_form(self, d1, d2) -> int:
        """sum_i d1_i d2_i - sum_{arrows i->j} d1_i d2_j."""
        self._check(d1)
        self._check(d2)
        total = sum(x * y for x, y in zip(d1, d2))
        total -= sum(d1[src - 1] * d2[dst - 1] for src, dst in self.arrows)
        return total

    def dsz(self, d1, d2) -> int:
        """Skew-symmetrized Euler form <d1,d2> = e(d1,d2) - e(d2,d1)."""
        self._check(d1)
        self._check(d2)
        return sum(d1[dst - 1] * d2[src - 1] - d1[src - 1] * d2[dst - 1]
                   for src, dst in self.arrows)

    def dsz_cached(self, d1, d2) -> int:
        """dsz with memoization; series substitution hits the same pairs
        constantly."""
        memo = self.__dict__.setdefault("_dsz_memo", {})
        key = (d1, d2)
        value = memo.get(key)
        if value is None:
            value = sum(d1[dst - 1] * d2[src - 1] - d1[src - 1] * d2[dst - 1]
                        for src, dst in self.arrows)
            memo[key] = value
        return value

    def slope(self, d) -> Fraction:
        """Source mass over total mass; stability from central charge (1,0)."""
        self._check(d)
        total = sum(d)
        if total == 0:
            raise QuiverError("slope of the zero vector is undefined")
        return Fraction(sum(d[self.n_sinks:]), total)

    def reduction(self, d):
        """Collapse to (source mass, sink mass) on the base Kronecker quiver."""
        self._check(d)
        return (sum(d[self.n_sinks:]), sum(d[:self.n_sinks]))

    # -- arrow labels (edge colors identify the embedding) --------------

    @cached_property
    def arrow_labels(self):
        """Proper edge coloring with colors 1..m, a concrete embedding into
        the covering quiver.  Deterministic: edges processed in BFS order from
        the lowest vertex of each component."""
        labels = {}
        used = {v: set() for v in range(1, self.n_vertices + 1)}
        seen = set()
        for start in range(1, self.n_vertices + 1):
            if start in seen:
                continue
            queue = [start]
            seen.add(start)
            while queue:
                v = queue.pop(0)
                for w in self.neighbors[v]:
                    e = self._edge(v, w)
                    if e not in labels:
                        c = 1
                        while c in used[v] or c in used[w]:
                            c += 1
                        if c > self.m:
                            raise QuiverError("edge coloring exceeded m colors")
                        labels[e] = c
                        used[v].add(c)
                        used[w].add(c)
                    if w not in seen:
                        seen.add(w)
                        queue.append(w)
        return labels

    def _edge(self, v, w):
        src, dst = (v, w) if v > self.n_sinks else (w, v)
        return (src, dst)

    # -- serialization ---------------------------------------------------

    def to_text(self) -> str:
        return json.dumps({
            "m": self.m,
            "sinks": list(self.sinks),
            "sources": list(self.sources),
            "arrows": [list(a) for a in self.arrows],
        })

    @classmethod
    def from_text(cls, text: str) -> "Quiver":
        data = json.loads(text)
        sinks = list(data["sinks"])
        sources = list(data["sources"])
        arrows = [tuple(a) for a in data["arrows"]]
        return make_quiver(int(data["m"]), arrows, sinks=sinks, sources=sources)


def make_quiver(m, arrows, sinks=None, sources=None) -> Quiver:
    """Build a minimally labelled Quiver from arbitrarily labelled arrows.

    Vertices may carry any hashable ids; sinks/sources may be given
    explicitly (required for isolated vertices).  Sink order is preserved
    from the input; source labels are recomputed to be minimal.
    """
    arrows = [tuple(a) for a in arrows]
    src_ids = [] if sources is None else list(sources)
    dst_ids = [] if sinks is None else list(sinks)
    for s, d in arrows:
        if s not in src_ids:
            src_ids.append(s)
        if d not in dst_ids:
            dst_ids.append(d)
    if set(src_ids) & set(dst_ids):
        raise QuiverError("a vertex appears as both source and sink")
    targets = {s: sorted(dst_ids.index(d) + 1 for s2, d in arrows if s2 == s)
               for s in src_ids}
    original = {s: i for i, s in enumerate(src_ids)}
    src_ids.sort(key=lambda s: (targets[s], original[s]))
    relabel = {d: i + 1 for i, d in enumerate(dst_ids)}
    relabel.update({s: len(dst_ids) + i + 1 for i, s in enumerate(src_ids)})
    new_arrows = tuple(sorted((relabel[s], relabel[d]) for s, d in arrows))
    return Quiver(m=m, n_sinks=len(dst_ids), n_sources=len(src_ids),
                  arrows=new_arrows)


# ---------------------------------------------------------------- fragments

def build_covering_fragment(m, depth, root_kind="sink") -> Quiver:
    """The radius-`depth` ball around a root vertex in the m-regular
    oriented tree underlying the covering quiver of K(m)."""
    if m < 1 or depth < 1:
        raise QuiverError("m and depth must be >= 1")
    if root_kind not in ("sink", "source"):
        raise QuiverError("root_kind must be 'sink' or 'source'")
    counter = [0]

    def fresh(kind):
        counter[0] += 1
        return (kind, counter[0])

    root = fresh(root_kind)
    frontier = [(root, None)]
    arrows = []
    for _ in range(depth):
        new_frontier = []
        for v, parent in frontier:
            kind = v[0]
            # every vertex of the covering tree has total valency m
            missing = m - (0 if parent is None else 1)
            for _ in range(missing):
                w = fresh("source" if kind == "sink" else "sink")
                arrows.append((w, v) if kind == "sink" else (v, w))
                new_frontier.append((w, v))
        frontier = new_frontier
    sinks = [v for v in [root] if root_kind == "sink"]
    sources = [v for v in [root] if root_kind == "source"]
    for s, d in arrows:
        if s not in sources:
            sources.append(s)
        if d not in sinks:
            sinks.append(d)
    return make_quiver(m, arrows, sinks=sinks, sources=sources)


def subquiver(quiver: Quiver, vertices) -> tuple:
    """Full subquiver on `vertices`, minimally relabelled.

    Returns (sub, old_to_new) with old_to_new a dict on `vertices`.
    """
    vs = sorted(vertices)
    arrows = [(s, d) for s, d in quiver.arrows if s in vertices and d in vertices]
    sinks = [v for v in vs if quiver.is_sink(v)]
    sources = [v for v in vs if not quiver.is_sink(v)]
    sub = make_quiver(quiver.m, arrows, sinks=sinks, sources=sources)
    # recover the relabelling map by replaying make_quiver's ordering
    targets = {s: sorted(sinks.index(d) + 1 for s2, d in arrows if s2 == s)
               for s in sources}
    ordered_sources = sorted(sources, key=lambda s: (targets[s], sources.index(s)))
    old_to_new = {v: i + 1 for i, v in enumerate(sinks)}
    old_to_new.update({v: len(sinks) + i + 1 for i, v in enumerate(ordered_sources)})
    return sub, old_to_new


def pad_to_sink_boundary(quiver: Quiver) -> tuple:
    """Attach a fresh sink to every boundary source so that all boundary
    vertices are sinks (required by the framing extraction).

    Returns (padded, old_to_new).
    """
    arrows = [("s", s, d) for s, d in quiver.arrows]
    extra = 0
    for i in quiver.sources:
        if quiver.degree(i) <= 1:
            extra += 1
            arrows.append(("s", i, ("pad", extra)))
    sinks = [d for d in quiver.sinks] + [("pad", j + 1) for j in range(extra)]
    raw = [(s, d) for _, s, d in arrows]
    padded = make_quiver(quiver.m, raw, sinks=sinks, sources=list(quiver.sources))
    sink_map = {d: i + 1 for i, d in enumerate(sinks) if not isinstance(d, tuple)}
    targets = {s: sorted(sinks.index(d) + 1 for s2, d in raw if s2 == s)
               for s in quiver.sources}
    ordered = sorted(quiver.sources, key=lambda s: (targets[s], s))
    src_map = {v: len(sinks) + i + 1 for i, v in enumerate(ordered)}
    old_to_new = dict(sink_map)
    old_to_new.update(src_map)
    return padded, old_to_new


def embed_dimvec(d, old_to_new, n_new):
    out = [0] * n_new
    for v_old, x in enumerate(d, start=1):
        if x:
            out[old_to_new[v_old] - 1] = x
    return tuple(out)


# ------------------------------------------------- canonical forms, classes

def _encode(quiver, v, parent, weights, labeled):
    kids = []
    for w in quiver.neighbors[v]:
        if w == parent:
            continue
        lab = quiver.arrow_labels[quiver._edge(v, w)] if labeled else 0
        kids.append((lab, _encode(quiver, w, v, weights, labeled)))
    kids.sort()
    wt = 0 if weights is None else weights[v - 1]
    return (quiver.is_sink(v), wt, tuple(kids))


def canonical_key(quiver: Quiver, weights=None, vertices=None, labeled=False):
    """Canonical form of the (optionally weighted, optionally arrow-labelled)
    fragment: minimum of the rooted serialization over all root choices."""
    vs = sorted(vertices) if vertices is not None else list(range(1, quiver.n_vertices + 1))
    return min(_encode(quiver, v, None, weights, labeled) for v in vs)


def labeled_class_key(quiver: Quiver, d):
    """Canonical key of the arrow-labelled weighted support of d.

    Two non-negative vectors on the same fragment have equal keys iff a
    label-preserving tree isomorphism (a deck translate of the covering)
    carries one to the other.
    """
    supp = support(d)
    if not supp:
        raise QuiverError("zero vector has no class")
    if not quiver.connected(supp):
        raise QuiverError("class keys require connected support")

    def encode(v, parent):
        kids = []
        for w in quiver.neighbors[v]:
            if w == parent or w not in supp:
                continue
            kids.append((quiver.arrow_labels[quiver._edge(v, w)], encode(w, v)))
        kids.sort()
        return (quiver.is_sink(v), d[v - 1], tuple(kids))

    return min(encode(v, None) for v in sorted(supp))


@dataclass(frozen=True)
class EquivClass:
    """A deck-translation class of dimension vectors, held by a representative."""
    quiver: Quiver
    rep: tuple

    def key(self):
        return labeled_class_key(self.quiver, self.rep)


def connected_subsets(quiver: Quiver):
    """All connected vertex subsets of a forest fragment."""
    out = []
    n = quiver.n_vertices

    def grow(current, frontier, banned):
        out.append(frozenset(current))
        frontier = list(frontier)
        while frontier:
            w = frontier.pop()
            if w in banned:
                continue
            nxt = [u for u in quiver.neighbors[w]
                   if u not in current and u != w and u not in banned]
            grow(current | {w}, frontier + nxt, banned | {w})
            banned = banned | {w}

    banned = set()
    for v in range(1, n + 1):
        grow({v}, [u for u in quiver.neighbors[v] if u not in banned], banned)
        banned.add(v)
    return out


def _weightings(quiver, supp, dbar):
    """Assignments of positive weights on supp with reduction dbar."""
    a, b = dbar
    vs = sorted(supp)
    srcs = [v for v in vs if not quiver.is_sink(v)]
    snks = [v for v in vs if quiver.is_sink(v)]

    def comps(total, nparts):
        if nparts == 0:
            if total == 0:
                yield ()
            return
        for first in range(1, total - nparts + 2):
            for rest in comps(total - first, nparts - 1):
                yield (first,) + rest

    for ws in comps(a, len(srcs)):
        for wt in comps(b, len(snks)):
            d = [0] * quiver.n_vertices
            for v, x in zip(srcs, ws):
                d[v - 1] = x
            for v, x in zip(snks, wt):
                d[v - 1] = x
            yield tuple(d)


def enumerate_compatible_classes(quiver: Quiver, dbar) -> list:
    """Equivalence classes of non-negative vectors on `quiver` with connected
    support and reduction `dbar`, one representative each."""
    a, b = dbar
    if a < 0 or b < 0 or a + b == 0:
        raise QuiverError("reduction must be non-negative and nonzero")
    seen = {}
    for supp in connected_subsets(quiver):
        srcs = sum(1 for v in supp if not quiver.is_sink(v))
        snks = len(supp) - srcs
        if (srcs == 0) != (a == 0) or (snks == 0) != (b == 0):
            continue
        if srcs > a or snks > b:
            continue
        for d in _weightings(quiver, supp, dbar):
            key = labeled_class_key(quiver, d)
            if key not in seen:
                seen[key] = EquivClass(quiver, d)
    return [seen[k] for k in sorted(seen)]


# -------------------------------------- abstract shapes for localization sums

@lru_cache(maxsize=None)
def fragment_shapes(m, max_vertices) -> tuple:
    """All fragment shapes (connected, up to isomorphism) with at most
    `max_vertices` vertices, as minimally labelled quivers."""
    shapes = {}
    frontier = []
    for kind in ("sink", "source"):
        q = make_quiver(m, [], sinks=["r"] if kind == "sink" else [],
                        sources=["r"] if kind == "source" else [])
        key = canonical_key(q)
        shapes[key] = q
        frontier.append(q)
    while frontier:
        new_frontier = []
        for q in frontier:
            if q.n_vertices >= max_vertices:
                continue
            for v in range(1, q.n_vertices + 1):
                if q.degree(v) >= m:
                    continue
                new = q.n_vertices + 1
                if q.is_sink(v):
                    arrows = list(q.arrows) + [(new, v)]
                    grown = make_quiver(m, arrows, sinks=list(q.sinks),
                                        sources=list(q.sources) + [new])
                else:
                    arrows = list(q.arrows) + [(v, new)]
                    grown = make_quiver(m, arrows, sinks=list(q.sinks) + [new],
                                        sources=list(q.sources))
                key = canonical_key(grown)
                if key not in shapes:
                    shapes[key] = grown
                    new_frontier.append(grown)
        frontier = new_frontier
    return tuple(shapes[k] for k in sorted(shapes))


def quiver_automorphisms(quiver: Quiver, weights=None) -> list:
    """Type- and weight-preserving automorphisms, as vertex permutation dicts."""
    n = quiver.n_vertices
    verts = list(range(1, n + 1))

    def compatible(v, w):
        if quiver.is_sink(v) != quiver.is_sink(w):
            return False
        if quiver.degree(v) != quiver.degree(w):
            return False
        if weights is not None and weights[v - 1] != weights[w - 1]:
            return False
        return True

    autos = []

    def extend(mapping, todo):
        if not todo:
            autos.append(dict(mapping))
            return
        v = todo[0]
        candidates = verts
        for u in quiver.neighbors[v]:
            if u in mapping:
                candidates = [w for w in quiver.neighbors[mapping[u]]]
                break
        for w in candidates:
            if w in mapping.values() or not compatible(v, w):
                continue
            ok = True
            for u in quiver.neighbors[v]:
                if u in mapping and mapping[u] not in quiver.neighbors[w]:
                    ok = False
                    break
            if ok:
                mapping[v] = w
                extend(mapping, todo[1:])
                del mapping[v]

    # order vertices so each one (after the first per component) touches the map
    order = []
    seen = set()
    for v in verts:
        if v in seen:
            continue
        stack = [v]
        while stack:
            u = stack.pop(0)
            if u in seen:
                continue
            seen.add(u)
            order.append(u)
            stack.extend(quiver.neighbors[u])
    extend({}, order)
    return autos


def edge_colorings(quiver: Quiver):
    """Proper edge colorings with colors 1..m (distinct around each vertex)."""
    edges = sorted(quiver.arrows)
    out = []

    def assign(i, used):
        if i == len(edges):
            out.append(dict(zip(edges, coloring)))
            return
        s, d = edges[i]
        for c in range(1, quiver.m + 1):
            if c in used.get(s, ()) or c in used.get(d, ()):
                continue
            coloring.append(c)
            used.setdefault(s, set()).add(c)
            used.setdefault(d, set()).add(c)
            assign(i + 1, used)
            used[s].discard(c)
            used[d].discard(c)
            coloring.pop()

    coloring = []
    assign(0, {})
    return out


def count_classes_of_shape(quiver: Quiver, weights) -> int:
    """Number of deck-translation classes with the given weighted shape:
    proper edge colorings up to weight-preserving automorphism."""
    autos = quiver_automorphisms(quiver, weights)
    seen = set()
    for col in edge_colorings(quiver):
        key = min(
            tuple(sorted(((phi[s], phi[d]), c) for (s, d), c in col.items()))
            for phi in autos
        )
        seen.add(key)
    return len(seen)


def class_shapes(m, dbar):
    """Weighted support shapes compatible with dbar, with class multiplicity.

    Yields (shape, weights, n_classes) over connected shapes up to iso;
    n_classes is the number of deck-translation classes realizing the shape.
    """
    a, b = dbar
    max_vertices = a + b
    out = []
    seen = set()
    for shape in fragment_shapes(m, max_vertices):
        srcs, snks = shape.n_sources, shape.n_sinks
        if (srcs == 0) != (a == 0) or (snks == 0) != (b == 0):
            continue
        if srcs > a or snks > b:
            continue
        for d in _weightings(shape, range(1, shape.n_vertices + 1), dbar):
            key = canonical_key(shape, weights=d)
            if key in seen:
                continue
            seen.add(key)
            out.append((shape, d, count_classes_of_shape(shape, d)))
    return out
