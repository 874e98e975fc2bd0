"""Line arrangements, tropical curves from sorting genealogy, and counts.

Sinks label vertical lines (legs point down, primitive direction (0,1)),
sources label horizontal lines (legs point left, direction (1,0)), so a
vector with reduction (a,b) travels along direction (a,b).  A commutator
vertex joins its two parent rays at their intersection point; balancing is
automatic because the reduced exponents add.

Counting never reads coordinates: a curve is its genealogy plus the set of
legs, and the embedding is only used for rendering and the classical
multiplicity.  All coordinates are exact rationals.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

from .quiver import Quiver, QuiverError, vadd
from .operators import (NIL, ElemAuto, WeightFunction, elementary_weight,
                        extend_weight, mask_bits)
from .sorting import SortingDiagram


class GeometryError(RuntimeError):
    pass


# ------------------------------------------------------------- arrangement

@dataclass(frozen=True)
class Line:
    vertex: int
    levels: tuple       # level subset J; () in naive mode
    orient: str         # "v" for sinks, "h" for sources
    offset: Fraction    # x = offset (vertical) or y = offset (horizontal)
    rank: int


@dataclass(frozen=True)
class LineArrangement:
    quiver: Quiver
    k: int              # 0 in naive mode
    lines: dict         # (vertex, levels) -> Line

    def line(self, vertex, levels=()):
        return self.lines[(vertex, tuple(levels))]


def build_arrangement(quiver: Quiver, k=0, perturb=0) -> LineArrangement:
    """Vertical line per (sink, J) at x = -rank, horizontal per (source, J)
    at y = +rank; ranks run through (vertex, subset) pairs in order, so the
    labels read clockwise from the rightmost vertical line.

    `perturb` > 0 nudges offsets to restore genericity when a constructed
    vertex degenerates onto another vertex or line; the nudges use different
    rank powers per orientation (a symmetric rank^2 shift on both axes can
    reproduce the same coincidence) and shrink with the attempt number.
    """
    subsets = [()] if k == 0 else list(_subsets(k))
    lines = {}
    delta = Fraction(1, (quiver.n_vertices * len(subsets)) ** 2 * (6 * perturb + 1))
    rank_v = 0
    for q in quiver.sinks:
        for J in subsets:
            rank_v += 1
            off = Fraction(-rank_v) - (rank_v ** 2 * delta if perturb else 0)
            lines[(q, J)] = Line(q, J, "v", off, rank_v)
    rank_h = 0
    for q in quiver.sources:
        for J in subsets:
            rank_h += 1
            off = Fraction(rank_h) + (rank_h ** 3 * delta if perturb else 0)
            lines[(q, J)] = Line(q, J, "h", off, rank_h)
    return LineArrangement(quiver, k, lines)


def _subsets(k):
    for bits in range(1, 1 << k):
        yield tuple(j + 1 for j in range(k) if bits >> j & 1)


# ------------------------------------------------------------- curve data

@dataclass(frozen=True)
class CurveComponent:
    op: ElemAuto
    vertices: tuple     # ((x, y), ...) one per commutator ancestor
    edges: tuple        # ((x1,y1), (x2,y2), weight, primitive dir)
    legs: tuple         # (vertex, levels, endpoint or None, direction)
    out_point: tuple    # None when the component is a bare line
    out_dir: tuple      # reduced exponent (a, b)
    vertex_mults: tuple  # classical multiplicity data per vertex


@dataclass(frozen=True)
class TropicalCurve:
    ops: tuple
    d_out: tuple
    legs: frozenset     # leg set of the genealogy-carried trees
    mult_q: object      # total multiplicity: int (connected) or Fraction
    weight_fn: WeightFunction | None
    slope: Fraction
    lineages: tuple = ()  # ((legs, mult), ...): per-leg-set multiplicities

    @property
    def connected(self):
        return len(self.ops) == 1


def _line_point_dir(line: Line):
    if line.orient == "v":
        return (line.offset, Fraction(0)), (0, 1)
    return (Fraction(0), line.offset), (1, 0)


def _intersect(p1, v1, p2, v2):
    """Intersection of p1 + t*v1 and p2 + s*v2; returns (point, t, s)."""
    det = v1[0] * v2[1] - v1[1] * v2[0]
    if det == 0:
        raise GeometryError("parallel parent rays")
    dx = p2[0] - p1[0]
    dy = p2[1] - p1[1]
    t = Fraction(dx * v2[1] - dy * v2[0], det)
    s = Fraction(dx * v1[1] - dy * v1[0], det)
    point = (p1[0] + t * v1[0], p1[1] + t * v1[1])
    return point, t, s


class CurveCatalog:
    """All tropical curves attached to a stable sorting diagram.

    Connected curves are built per stable-diagram element from the
    genealogy; disconnected ones are same-slope tuples with pairwise
    disjoint index sets, weighted by the inductive half-bracket rule.

    Counting is purely combinatorial.  The planar embedding is computed
    lazily per curve (it is only needed for rendering, the classical
    multiplicity, and the balancing checks); combined walls need not embed
    over the standard arrangement, and `geometry` reports that honestly.
    """

    def __init__(self, diagram: SortingDiagram, arrangement=None):
        if not diagram.is_stable():
            raise QuiverError("curve catalog needs a stable diagram")
        self.diagram = diagram
        self.quiver = diagram.quiver
        self.k = diagram.k or 0
        self.arrangement = arrangement or build_arrangement(self.quiver, self.k)
        self._geom = {}
        self._perturb = 0
        self._curves = {op: self._build(op) for op in diagram.seq}

    # -- connected curves --------------------------------------------------

    def op_levels(self, op):
        if self.k == 0:
            return ()
        pairs = mask_bits(op.mask, self.k)
        return tuple(lvl for _, lvl in pairs)

    def _leaf_line(self, op) -> Line:
        vertex = op.d.index(1) + 1
        return self.arrangement.line(vertex, self.op_levels(op))

    def _geometry(self, op):
        """(out_point, out_dir, vertices, edges, legs, vertex_mults)."""
        if op in self._geom:
            return self._geom[op]
        parents = self.diagram.parents.get(op)
        if parents is None:
            line = self._leaf_line(op)
            point, direction = _line_point_dir(line)
            geom = (None, None, (), (), ((line.vertex, line.levels, None, direction),), ())
        else:
            lo, hi = parents
            glo = self._geometry(lo)
            ghi = self._geometry(hi)
            plo, vlo = self._ray(lo, glo)
            phi, vhi = self._ray(hi, ghi)
            point, t, s = _intersect(plo, vlo, phi, vhi)
            for parent, geom_p, tt in ((lo, glo, t), (hi, ghi, s)):
                if geom_p[0] is not None and tt <= 0:
                    raise GeometryError("parent ray does not reach the joint")
            vertices = glo[2] + ghi[2] + (point,)
            edges = glo[3] + ghi[3]
            legs = []
            for parent, geom_p in ((lo, glo), (hi, ghi)):
                if geom_p[0] is None:
                    (q, J, _, direction), = geom_p[4]
                    legs.append((q, J, point, direction))
                else:
                    w, m = self._weight_dir(parent)
                    edges = edges + ((geom_p[0], point, w, m),)
                    legs.extend(geom_p[4])
            if len(set(vertices)) != len(vertices):
                raise GeometryError("constructed vertices coincide")
            w1, m1 = self._weight_dir(lo)
            w2, m2 = self._weight_dir(hi)
            mult_std = w1 * w2 * abs(m1[0] * m2[1] - m1[1] * m2[0])
            geom = (point, self.quiver.reduction(op.exp), vertices, edges,
                    tuple(legs), glo[5] + ghi[5] + (mult_std,))
        self._geom[op] = geom
        return geom

    def _ray(self, op, geom):
        if geom[0] is None:
            line = self._leaf_line(op)
            return _line_point_dir(line)
        return geom[0], geom[1]

    def _weight_dir(self, op):
        a, b = self.quiver.reduction(op.exp)
        w = math.gcd(a, b)
        return w, (a // w, b // w)

    def _build(self, op) -> TropicalCurve:
        wf = elementary_weight(op) if op.mode == NIL else None
        return TropicalCurve(
            ops=(op,), d_out=op.exp,
            legs=op.legs,
            mult_q=op.mult, weight_fn=wf, slope=op.slope,
            lineages=op.lineages)

    def curve(self, op) -> TropicalCurve:
        return self._curves[op]

    def geometry(self, curve: TropicalCurve) -> tuple:
        """Embedded components ((CurveComponent, ...)); raises GeometryError
        when the genealogy-carried trees do not embed over the arrangement
        (degenerate offsets are retried with perturbed arrangements)."""
        comps = []
        for op in curve.ops:
            attempt = self._perturb
            while True:
                try:
                    comps.append(self._component(op))
                    break
                except GeometryError:
                    if attempt >= 4:
                        raise
                    attempt += 1
                    self._perturb = attempt
                    self.arrangement = build_arrangement(self.quiver, self.k,
                                                         perturb=attempt)
                    self._geom.clear()
        return tuple(comps)

    def _component(self, op) -> CurveComponent:
        out_point, out_dir, vertices, edges, legs, vmults = self._geometry(op)
        if out_dir is None:
            out_dir = self.quiver.reduction(op.exp)
        return CurveComponent(op, vertices, edges, legs, out_point, out_dir,
                              vmults)

    def connected_curves(self, mu=None):
        out = [c for c in self._curves.values()
               if mu is None or c.slope == mu]
        return out

    # -- disconnected assemblies --------------------------------------------

    def assemble(self, ops) -> TropicalCurve:
        """Union of the curves of ops (a ≺-ordered same-slope tuple with
        pairwise disjoint index sets); weight function and multiplicity by
        the inductive half-bracket rule."""
        ops = tuple(ops)
        if not ops:
            raise QuiverError("assembly needs at least one curve")
        mu = ops[0].slope
        pos = [self.diagram.position(op) for op in ops]
        if any(op.slope != mu for op in ops):
            raise QuiverError("assembly needs equal slopes")
        if any(a >= b for a, b in zip(pos, pos[1:])):
            raise QuiverError("assembly must follow the stable diagram order")
        curves = [self._curves[op] for op in ops]
        cur = curves[0]
        wf = cur.weight_fn
        d_out = cur.d_out
        prefactor = Fraction(1)
        for nxt in curves[1:]:
            if nxt.weight_fn is None or wf is None:
                raise QuiverError("assemblies need nilpotent-mode curves")
            if wf.mask & nxt.weight_fn.mask:
                raise QuiverError("assembly index sets overlap")
            bracket = self.quiver.dsz(d_out, nxt.d_out)
            prefactor *= Fraction(1, 2) * bracket
            step = extend_weight(self.quiver, wf, nxt.ops[0]) if wf.alpha else None
            wf = step if step is not None else WeightFunction(
                Fraction(0), wf.mask | nxt.weight_fn.mask,
                vadd(wf.exp, nxt.weight_fn.exp), wf.ops + nxt.ops)
            d_out = wf.exp
        # the half-bracket prefactor only sees exponents, so it scales every
        # choice of component lineages alike
        lineages = [(frozenset(), prefactor)]
        for op in ops:
            lineages = [(legs | l2, m * m2)
                        for legs, m in lineages for l2, m2 in op.lineages]
        lineages = tuple((legs, m) for legs, m in lineages if m)
        return TropicalCurve(
            ops=ops,
            d_out=d_out,
            legs=frozenset().union(*(c.legs for c in curves)),
            mult_q=sum((m for _, m in lineages), Fraction(0)),
            weight_fn=wf,
            slope=mu,
            lineages=lineages)

    def assemblies(self, mu, include_zero=False):
        """All tuples (connected curves included, length 1) of slope mu.
        Zero-multiplicity assemblies are dropped unless include_zero.
        Naive catalogs carry connected curves only."""
        if self.k == 0:
            return list(self.connected_curves(mu))
        block = self.diagram.slope_block(mu)
        out = []

        def grow(prefix, mask, start):
            if prefix:
                if len(prefix) == 1:
                    cur = self._curves[prefix[0]]
                    dead = False
                else:
                    cur = self.assemble(tuple(prefix))
                    # a vanished half-bracket kills the weight function and
                    # every lineage of every further extension
                    dead = cur.weight_fn.alpha == 0
                if include_zero or not dead:
                    out.append(cur)
                if dead and not include_zero:
                    return
            for i in range(start, len(block)):
                op = block[i]
                if mask & op.mask:
                    continue
                prefix.append(op)
                grow(prefix, mask | op.mask, i + 1)
                prefix.pop()

        grow([], 0, 0)
        return out


# ------------------------------------------------------------ weight vectors

@dataclass(frozen=True)
class WeightVector:
    """Per-vertex weakly increasing tuples of positive leg weights."""

    parts: tuple        # one tuple per vertex

    def __post_init__(self):
        for p in self.parts:
            if any(x < 1 for x in p) or list(p) != sorted(p):
                raise QuiverError("weight vector parts must be sorted positive")

    @property
    def sizes(self):
        return tuple(sum(p) for p in self.parts)

    def slope(self, quiver: Quiver) -> Fraction:
        return quiver.slope(self.sizes)

    def aut_order(self) -> int:
        out = 1
        for p in self.parts:
            for mult in Counter(p).values():
                out *= math.factorial(mult)
        return out

    def r_coefficient(self) -> Fraction:
        out = Fraction(1)
        for p in self.parts:
            for w in p:
                out *= Fraction((-1) ** (w - 1), w * w)
        return out

    def canonical_levels(self):
        """The fixed family of pairwise-disjoint level sets: consecutive
        blocks 1..w1, w1+1..w1+w2, ... at each vertex."""
        fam = []
        for q, p in enumerate(self.parts, start=1):
            at = 0
            for w in p:
                fam.append((q, tuple(range(at + 1, at + w + 1))))
                at += w
        return frozenset(fam)


def weight_vector_of_legs(quiver: Quiver, legs) -> WeightVector:
    parts = [[] for _ in range(quiver.n_vertices)]
    for q, J in legs:
        parts[q - 1].append(max(len(J), 1))
    return WeightVector(tuple(tuple(sorted(p)) for p in parts))


def curve_multiplicity(curve: TropicalCurve, flavor="quiver", catalog=None):
    """Quiver flavor: product of brackets of incoming exponents (signed).
    Standard flavor: product over vertices of w_i w_j |m_i ^ m_j|, which
    needs the embedding (pass the catalog)."""
    if flavor == "quiver":
        return curve.mult_q
    if flavor != "standard":
        raise QuiverError(f"unknown multiplicity flavor {flavor!r}")
    if catalog is None:
        raise QuiverError("standard multiplicity needs the curve catalog")
    out = 1
    for comp in catalog.geometry(curve):
        for m in comp.vertex_mults:
            out *= m
    return out


def tropical_count(catalog: CurveCatalog, wv: WeightVector, family=None):
    """Sum of quiver multiplicities over all curve lineages whose legs
    realize the given family of level sets (default: the canonical blocks)."""
    quiver = catalog.quiver
    if catalog.k:
        if any(w > catalog.k for p in wv.parts for w in p):
            raise QuiverError("weight vector parts exceed k")
        fam = frozenset((q, tuple(J)) for q, J in (family or wv.canonical_levels()))
    else:
        if any(p not in ((), (1,)) for p in wv.parts):
            raise QuiverError("naive catalogs only carry weight-1 single legs")
        fam = frozenset((q, ()) for q, p in enumerate(wv.parts, start=1) if p)
    mu = wv.slope(quiver)
    total = Fraction(0)
    for curve in catalog.assemblies(mu):
        for legs, mult in curve.lineages:
            if legs == fam:
                total += mult
    return total


def counts_by_weight_vector(catalog: CurveCatalog, mu) -> dict:
    """N(w) for every weight vector realized at slope mu, read off the
    curve lineages whose legs are exactly the canonical family of their
    shape."""
    out = {}
    for curve in catalog.assemblies(mu):
        for legs, mult in curve.lineages:
            wv = weight_vector_of_legs(catalog.quiver, legs)
            if catalog.k and legs != wv.canonical_levels():
                continue
            out[wv] = out.get(wv, Fraction(0)) + mult
    return {wv: c for wv, c in out.items() if c != 0}


def _tail_weight(quiver, exps):
    """prod_m <e_m, e_{m+1} + ... + e_l>: the exact multiplicity with which
    an increasing tuple of same-slope walls enters the log of the composed
    block (each factor is the joint of one component against the union of
    the later ones).  The last component's own exponent is the tuple's mark:
    the composed action pairs the tuple against a generator p through
    <e_last, p>, not <sum e, p>."""
    out = 1
    tail = quiver.zero()
    for e in reversed(exps[1:]):
        tail = vadd(tail, e)
    for m in range(len(exps) - 1):
        out *= quiver.dsz(exps[m], tail)
        if out == 0:
            return 0
        if m + 1 < len(exps) - 1:
            tail = tuple(a - b for a, b in zip(tail, exps[m + 1]))
    return out


def marked_counts(catalog: CurveCatalog, mu) -> dict:
    """Exact tropical counts at slope mu, keyed by (weight vector, mark).

    For each ≺-increasing disjoint-index-set tuple of stable walls and each
    choice of component lineages, the weight is the product of the lineage
    multiplicities times the tail-bracket product; the mark is the exponent
    of the last component.  Buckets are restricted to the canonical level
    family of their shape (set-independence is tested separately).
    """
    quiver = catalog.quiver
    block = catalog.diagram.slope_block(mu) if catalog.k else [
        c.ops[0] for c in catalog.connected_curves(mu)]
    out = {}

    def bucket(ops):
        weight = _tail_weight(quiver, [op.exp for op in ops])
        if weight == 0:
            return
        mark = ops[-1].exp
        choices = [(frozenset(), weight)]
        for op in ops:
            choices = [(legs | l2, m * m2)
                       for legs, m in choices for l2, m2 in op.lineages]
        for legs, m in choices:
            if m == 0:
                continue
            wv = weight_vector_of_legs(quiver, legs)
            if catalog.k and legs != wv.canonical_levels():
                continue
            key = (wv, mark)
            out[key] = out.get(key, Fraction(0)) + m

    def grow(prefix, mask, start):
        if prefix:
            bucket(prefix)
        for i in range(start, len(block)):
            op = block[i]
            if mask & op.mask:
                continue
            prefix.append(op)
            grow(prefix, mask | op.mask, i + 1)
            prefix.pop()

    grow([], 0, 0)
    return {key: c for key, c in out.items() if c != 0}
