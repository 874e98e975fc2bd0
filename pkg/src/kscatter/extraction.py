"""Euler characteristics of framed moduli from sorting diagrams.

Two routes produce the theta series whose coefficients are the Euler
characteristics (slope-ordered factorization of the fundamental product):

* direct composition: compose the slope block of the stable diagram on each
  sink generator, then solve the sink relations
  theta_mu(x_j) = x_j * prod_{sources i -> j} theta_i^{-1} leaf-inward;
* tropical counts: log theta_i = sum over weight vectors w of
  <eps(i), w> * (R_w / |Aut w|) * N_{Q,k}(w) * y^w, with eps(i) the
  alternating sink vector from the boundary-distance recursion.

Route agreement is the package's central cross-check.  The total Euler
characteristic of the base Kronecker quiver is then the localization sum
over deck-translation classes of compatible dimension vectors and over all
framed sources of each representative.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .quiver import (Quiver, QuiverError, class_shapes, embed_dimvec,
                     enumerate_compatible_classes, pad_to_sink_boundary,
                     vsub)
from .series import SeriesRing, TruncSeries
from .operators import NAIVE, NIL, cofactor, compose_on_generator, mask_bits
from .sorting import SortingDiagram, stabilize
from .tropical import CurveCatalog, marked_counts


class ExtractionError(RuntimeError):
    pass


class CapExceeded(RuntimeError):
    pass


# ---------------------------------------------------------------- caching

@lru_cache(maxsize=None)
def stable_diagram(quiver: Quiver, mode: str, k) -> SortingDiagram:
    return stabilize(quiver, mode, k)


@lru_cache(maxsize=None)
def curve_catalog(quiver: Quiver, mode: str, k) -> CurveCatalog:
    return CurveCatalog(stable_diagram(quiver, mode, k))


# ------------------------------------------------------- sink-tree solving

def source_distances(quiver: Quiver):
    """Boundary distance of every source via the recursive subsets X_n, plus
    the witness sink used at each step.  Requires sink-only boundary."""
    for v in quiver.boundary():
        if not quiver.is_sink(v):
            raise QuiverError(
                f"vertex {v} is a boundary source; enlarge the fragment "
                "(pad_to_sink_boundary) so only sinks lie on the boundary")
    dist, witness = {}, {}
    remaining = set(quiver.sources)
    n = 1
    while remaining:
        added = set()
        for i in sorted(remaining):
            for j in quiver.sinks_of_source(i):
                others = [i2 for i2 in quiver.sources_of_sink(j) if i2 != i]
                if all(i2 in dist for i2 in others):
                    dist[i], witness[i] = n, j
                    added.add(i)
                    break
        if not added:
            raise QuiverError("sink relations do not determine all sources")
        remaining -= added
        n += 1
    return dist, witness


@dataclass(frozen=True)
class EpsilonVector:
    """Alternating sink vector carrying a source's framing through the tree:
    eps(i) = i^11 - (level-2 sinks) + (level-3 sinks) - ..."""

    source: int
    vec: tuple
    sink_levels: tuple   # tuple of tuples of sink ids, outermost level first


def epsilon(quiver: Quiver, i) -> EpsilonVector:
    if quiver.is_sink(i):
        raise QuiverError(f"vertex {i} is not a source")
    dist, witness = source_distances(quiver)
    memo = {}

    def eps(src):
        if src in memo:
            return memo[src]
        j = witness[src]
        vec = quiver.unit(j)
        levels = [(j,)]
        for other in quiver.sources_of_sink(j):
            if other == src:
                continue
            sub = eps(other)
            vec = vsub(vec, sub.vec)
            for p, group in enumerate(sub.sink_levels):
                while len(levels) <= p + 1:
                    levels.append(())
                levels[p + 1] = levels[p + 1] + group
        out = EpsilonVector(src, vec, tuple(levels))
        memo[src] = out
        return out

    return eps(i)


# ---------------------------------------------------------- theta: direct

def _project_levels(series: TruncSeries, quiver: Quiver, k, y_ring: SeriesRing):
    """Descend a square-free series to the t-graded series it came from.

    Every term's index set must use, at each vertex, exactly as many levels
    as its exponent says, all level choices must occur, and their
    coefficients must agree; the common coefficient divided by the
    factorials is the t-coefficient.  This witnesses the level-permutation
    symmetry of slope blocks (the remainder ideal is invisible here because
    more than k levels at a vertex cannot occur at all).
    """
    n = quiver.n_vertices
    by_exp = {}
    for (exp, mask), c in series.terms.items():
        counts = [0] * n
        for q, _lvl in mask_bits(mask, k):
            counts[q - 1] += 1
        if tuple(counts) != exp:
            raise ExtractionError(
                f"term {exp} has index-set shape {tuple(counts)}")
        by_exp.setdefault(exp, []).append(c)
    out = y_ring.zero()
    for exp, coeffs in by_exp.items():
        expected = 1
        for e in exp:
            expected *= math.comb(k, e)
        if len(coeffs) != expected or len(set(coeffs)) != 1:
            raise ExtractionError(
                f"level symmetry broken at {exp}: {len(coeffs)}/{expected} "
                f"terms, coefficients {sorted(set(coeffs))}")
        denom = 1
        for e in exp:
            denom *= math.factorial(e)
        if not y_ring.keeps(exp):
            continue
        out._iadd((exp, 0), Fraction(coeffs[0], 1) / denom)
    return out


def theta_direct(quiver: Quiver, mu, mode=NIL, k=None, cap=None) -> dict:
    """theta_mu(x_j)/x_j for every sink j, as a t-graded series.

    Nilpotent mode composes the slope block over the square-free ring and
    projects; naive mode composes with a total degree cap.
    """
    if mode == NIL:
        if k is None or k < 1:
            raise QuiverError("nilpotent mode needs k >= 1")
        diagram = stable_diagram(quiver, NIL, k)
        u_ring = SeriesRing(quiver.n_vertices)
        y_ring = SeriesRing(quiver.n_vertices, vertex_cap=k)
    else:
        if cap is None:
            raise QuiverError("naive mode needs a degree cap")
        diagram = stable_diagram(quiver, NAIVE, None)
        u_ring = SeriesRing(quiver.n_vertices, total_cap=cap + 1)
        y_ring = SeriesRing(quiver.n_vertices, total_cap=cap)
    block = diagram.slope_block(mu)
    out = {}
    for j in quiver.sinks:
        image = compose_on_generator(quiver, block, j, u_ring)
        f = cofactor(image, j)
        if mode == NIL:
            out[j] = _project_levels(f, quiver, k, y_ring)
        else:
            y = y_ring.zero()
            for (exp, _m), c in f.terms.items():
                if y_ring.keeps(exp):
                    y._iadd((exp, 0), c)
            out[j] = y
    return out


@dataclass(frozen=True)
class ThetaSeries:
    source: int
    slope: Fraction
    series: TruncSeries
    provenance: str

    def coefficient(self, d):
        return self.series.coefficient(d)


def solve_theta_sources(quiver: Quiver, f_by_sink: dict) -> dict:
    """Recover the per-source theta series from the per-sink ratios by
    eliminating leaf-inward along the tree."""
    dist, witness = source_distances(quiver)
    theta = {}
    for i in sorted(quiver.sources, key=lambda s: (dist[s], s)):
        j = witness[i]
        prod = f_by_sink[j]
        for other in quiver.sources_of_sink(j):
            if other != i:
                prod = prod * theta[other]
        theta[i] = prod.inverse()
    return theta


def theta_sources_direct(quiver: Quiver, mu, mode=NIL, k=None, cap=None) -> dict:
    f = theta_direct(quiver, mu, mode, k, cap)
    solved = solve_theta_sources(quiver, f)
    return {i: ThetaSeries(i, mu, s, "direct-composition")
            for i, s in solved.items()}


# ------------------------------------------------------ theta: from counts

def theta_from_counts(quiver: Quiver, k, mu, i) -> ThetaSeries:
    """Exponentiated weighted tropical counts for the framing at source i:
    log theta = sum over (weight vector, mark) of
    <eps(i), mark> * (R_w / |Aut w|) * N(w, mark) * y^w.

    Connected curves carry mark = d_out, recovering the plain
    <eps(i), w>-weighted count; disconnected tuples are marked by their last
    component, which is what the composed block action actually pairs
    against the framing direction.
    """
    catalog = curve_catalog(quiver, NIL, k)
    eps = epsilon(quiver, i)
    counts = marked_counts(catalog, mu)
    y_ring = SeriesRing(quiver.n_vertices, vertex_cap=k)
    log_theta = y_ring.zero()
    for (wv, mark), count in counts.items():
        bracket = quiver.dsz(eps.vec, mark)
        if bracket == 0:
            continue
        coeff = Fraction(bracket) * wv.r_coefficient() / wv.aut_order() * count
        log_theta = log_theta + y_ring.monomial(coeff, wv.sizes)
    return ThetaSeries(i, mu, log_theta.exp(), "log-formula")


def theta_curve_product(quiver: Quiver, mu, i, cap) -> ThetaSeries:
    """Naive-mode closed form: product over connected slope-mu curves of
    (1 + y^(d_out))^<eps(i), d_out>.  Valid away from slope 1/2, where
    same-slope operators commute."""
    if mu == Fraction(1, 2):
        raise QuiverError("curve-product form needs slope != 1/2")
    catalog = curve_catalog(quiver, NAIVE, None)
    eps = epsilon(quiver, i)
    ring = SeriesRing(quiver.n_vertices, total_cap=cap)
    out = ring.one()
    for curve in catalog.connected_curves(mu):
        e = quiver.dsz(eps.vec, curve.d_out)
        if e:
            out = out * (ring.one() + ring.monomial(1, curve.d_out)).power(e)
    return ThetaSeries(i, mu, out, "curve-product")


# -------------------------------------------------------------- extraction

def euler_char_framed(quiver: Quiver, i, d, route="auto", k=None) -> int:
    """Euler characteristic of the moduli of stable representations with
    dimension vector d and a 1-dimensional framing at source i, read as a
    theta-series coefficient.

    Routes: "direct" composes the stable diagram (naive engine when m = 2,
    square-free ring otherwise); "tropical" always runs the weighted
    tropical-count route; "auto" picks the cheapest valid one.
    """
    d = tuple(d)
    if any(x < 0 for x in d) or not any(d):
        raise QuiverError("need a nonzero non-negative dimension vector")
    mu = quiver.slope(d)
    need_k = max(d)
    if k is not None and k < need_k:
        raise QuiverError(f"k={k} clips the coefficient; need k >= {need_k}")
    if route == "auto":
        route = "direct" if quiver.m == 2 else "tropical"
    if route == "tropical":
        theta = theta_from_counts(quiver, k or need_k, mu, i)
    elif route == "direct":
        if quiver.m == 2:
            if mu != Fraction(1, 2):
                theta = theta_curve_product(quiver, mu, i, cap=sum(d))
            else:
                theta = theta_sources_direct(
                    quiver, mu, NAIVE, cap=sum(d))[i]
        else:
            theta = theta_sources_direct(quiver, mu, NIL, k=k or need_k)[i]
    else:
        raise QuiverError(f"unknown route {route!r}")
    coeff = theta.coefficient(d)
    frac = Fraction(coeff)
    if frac.denominator != 1:
        raise ExtractionError(f"non-integral coefficient {frac} at {d}")
    chi = int(frac)
    if chi < 0:
        raise ExtractionError(f"negative Euler characteristic {chi} at {d}")
    return chi


# ------------------------------------------------------- localization sums

@dataclass(frozen=True)
class ChiRow:
    rep: tuple          # dimension vector on the padded support quiver
    quiver: Quiver      # the padded support quiver
    n_classes: int
    framing: int
    coefficient: int

    @property
    def contribution(self):
        return self.n_classes * self.coefficient


@dataclass(frozen=True)
class ChiReport:
    m: int
    dbar: tuple
    framing: str
    route: str
    rows: tuple
    total: int

    def table(self) -> str:
        lines = [f"m={self.m} dbar={self.dbar} framing={self.framing} "
                 f"route={self.route}"]
        running = 0
        for row in self.rows:
            running += row.contribution
            d_sparse = [(v + 1, x) for v, x in enumerate(row.rep) if x]
            lines.append(
                f"  classes={row.n_classes} rep={d_sparse} "
                f"framing_vertex={row.framing} chi={row.coefficient} "
                f"running_total={running}")
        lines.append(f"total={self.total}")
        return "\n".join(lines)


def resource_cap():
    return int(os.environ.get("KSCATTER_CAP", "12"))


def kronecker_euler(m, dbar, framing="B", route="auto", cap=None) -> ChiReport:
    """chi of the framed Kronecker moduli at dbar via the localization sum
    over compatible deck-translation classes and framed sources."""
    a, b = dbar
    if a < 0 or b < 0 or a + b == 0:
        raise QuiverError("dbar must be non-negative and nonzero")
    limit = cap if cap is not None else resource_cap()
    if a + b > limit:
        raise CapExceeded(
            f"|dbar| = {a + b} exceeds the resource cap {limit}; raise "
            "KSCATTER_CAP if you mean it")
    if framing == "F":
        mirrored = kronecker_euler(m, (b, a), "B", route, cap)
        return ChiReport(m, tuple(dbar), "F", mirrored.route,
                         mirrored.rows, mirrored.total)
    if framing != "B":
        raise QuiverError("framing must be 'B' or 'F'")
    rows = []
    total = 0
    for shape, weights, n_classes in class_shapes(m, dbar):
        if shape.n_sources == 0:
            continue   # no source to frame
        padded, old2new = pad_to_sink_boundary(shape)
        d = embed_dimvec(weights, old2new, padded.n_vertices)
        for i_old in shape.sources:
            i = old2new[i_old]
            chi = euler_char_framed(padded, i, d, route=route)
            rows.append(ChiRow(d, padded, n_classes, i, chi))
            total += n_classes * chi
    return ChiReport(m, tuple(dbar), "B", route, tuple(rows), total)


def kronecker_euler_on_fragment(quiver: Quiver, dbar, route="auto") -> ChiReport:
    """Localization sum restricted to classes supported on a fixed fragment,
    summing over all of its framed sources (the fixed-fragment corollary)."""
    rows = []
    total = 0
    for cls in enumerate_compatible_classes(quiver, dbar):
        d = cls.rep
        for i in quiver.sources:
            if d[i - 1] == 0:
                continue   # framing needs a positive dimension at i
            chi = euler_char_framed(quiver, i, d, route=route)
            rows.append(ChiRow(d, quiver, 1, i, chi))
            total += chi
    return ChiReport(quiver.m, tuple(dbar), "B", route, tuple(rows), total)


# ------------------------------------------------------------ closed forms

def closed_form_K2(a, kind, kmax=6) -> dict:
    """Closed-form generating series of framed Euler characteristics for the
    2-Kronecker quiver, as {(source mass, sink mass): coefficient}.

    kind "a,a+1": (1 + x^a y^(a+1))^a; kind "1,1": (1 - xy)^-2;
    kind "a+1,a": (1 + x^(a+1) y^a)^(a+1).  Constant terms included.
    """
    if a < 1:
        raise QuiverError("a must be >= 1")
    out = {}
    if kind == "a,a+1":
        for t in range(0, min(a, kmax) + 1):
            out[(t * a, t * (a + 1))] = math.comb(a, t)
    elif kind == "a+1,a":
        for t in range(0, min(a + 1, kmax) + 1):
            out[(t * (a + 1), t * a)] = math.comb(a + 1, t)
    elif kind == "1,1":
        for t in range(0, kmax + 1):
            out[(t, t)] = t + 1
    else:
        raise QuiverError(f"unknown kind {kind!r}")
    return out


def closed_form_K2_coeff(dbar) -> int:
    """chi of the B-framed 2-Kronecker moduli at dbar from the closed forms;
    zero off the three dimension-type families."""
    a, b = dbar
    if a < 0 or b < 0 or a + b == 0:
        raise QuiverError("dbar must be non-negative and nonzero")
    if a == 0 or b == 0:
        # a lone framed source is the only stable representation on the axes
        return 1 if (a, b) == (1, 0) else 0
    t = math.gcd(a, b)
    p, q = a // t, b // t
    if (p, q) == (1, 1):
        return t + 1
    if q == p + 1:
        return math.comb(p, t) if t <= p else 0
    if p == q + 1:
        return math.comb(q + 1, t) if t <= q + 1 else 0
    return 0
