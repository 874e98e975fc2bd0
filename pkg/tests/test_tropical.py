from fractions import Fraction

import pytest

from kscatter.quiver import QuiverError, make_quiver
from kscatter.operators import compose_same_slope
from kscatter.sorting import stabilize
from kscatter.tropical import (CurveCatalog, WeightVector, build_arrangement,
                               curve_multiplicity, marked_counts,
                               tropical_count, weight_vector_of_legs)


def q1():
    return make_quiver(2, [(3, 1), (3, 2)])


def q2():
    return make_quiver(2, [(4, 1), (4, 2), (5, 2), (5, 3)])


def catalog(quiver, mode="naive", k=None):
    return CurveCatalog(stabilize(quiver, mode, k))


# ------------------------------------------------------------ arrangement

def test_arrangement_counts_and_order():
    single = make_quiver(1, [(2, 1)])
    arr = build_arrangement(single, 2)
    vert = [l for l in arr.lines.values() if l.orient == "v"]
    horiz = [l for l in arr.lines.values() if l.orient == "h"]
    assert len(vert) == 3 and len(horiz) == 3
    # rightmost vertical carries the first sink with level subset {1}
    rightmost = max(vert, key=lambda l: l.offset)
    assert (rightmost.vertex, rightmost.levels) == (1, (1,))
    lowest = min(horiz, key=lambda l: l.offset)
    assert (lowest.vertex, lowest.levels) == (2, (1,))
    arr = build_arrangement(q2(), 0)
    assert len(arr.lines) == 5   # one line per vertex in the naive picture
    arr1 = build_arrangement(q1(), 1)
    assert len(arr1.lines) == q1().n_vertices


# ----------------------------------------------------------------- curves

def test_q1_top_curve():
    cat = catalog(q1())
    top = next(op for op in cat.diagram.seq if sum(op.d) == 3)
    curve = cat.curve(top)
    assert curve.legs == {(1, ()), (2, ()), (3, ())}
    assert curve.d_out == (1, 1, 1)
    assert curve.mult_q == 1
    assert curve_multiplicity(curve, "standard", cat) == 1
    comps = cat.geometry(curve)
    assert len(comps[0].vertices) == 2      # two trivalent joints


def test_q2_figure_curve_multiplicities():
    cat = catalog(q2())
    full = next(op for op in cat.diagram.seq if sum(op.d) == 5)
    curve = cat.curve(full)
    assert sorted(v for v, _ in curve.legs) == [1, 2, 3, 4, 5]
    assert curve.mult_q == 1
    assert curve_multiplicity(curve, "standard", cat) == 1
    sub = next(op for op in cat.diagram.seq if op.d == (1, 1, 0, 1, 1))
    h = cat.curve(sub)
    assert h.mult_q == 1
    assert curve_multiplicity(h, "standard", cat) == 2


def test_line_curve_is_trivial():
    cat = catalog(q1())
    leaf = next(op for op in cat.diagram.seq
                if cat.diagram.parents.get(op) is None)
    curve = cat.curve(leaf)
    assert curve.mult_q == 1
    assert curve_multiplicity(curve, "standard", cat) == 1
    comp = cat.geometry(curve)[0]
    assert comp.vertices == () and comp.edges == ()


def test_d_out_matches_legs():
    for quiver, mode, k in ((q2(), "naive", None), (q1(), "nil", 2)):
        cat = catalog(quiver, mode, k)
        for op in cat.diagram.seq:
            curve = cat.curve(op)
            for legs, _m in curve.lineages:
                d = [0] * quiver.n_vertices
                for v, J in legs:
                    d[v - 1] += max(len(J), 1)
                assert tuple(d) == curve.d_out


def test_balancing_every_embedded_vertex():
    for quiver, mode, k in ((q2(), "naive", None), (q1(), "nil", 2)):
        cat = catalog(quiver, mode, k)
        for op in cat.diagram.seq:
            parents = cat.diagram.parents.get(op)
            if not parents:
                continue
            lo, hi = parents
            w1 = quiver.reduction(lo.exp)
            w2 = quiver.reduction(hi.exp)
            out = quiver.reduction(op.exp)
            assert (w1[0] + w2[0], w1[1] + w2[1]) == out


# -------------------------------------------------------------- assemblies

def test_assemble_rules():
    q = make_quiver(2, [(4, 1), (4, 2), (5, 1), (5, 3)])
    cat = catalog(q, "nil", 1)
    mu = Fraction(1, 2)
    block = cat.diagram.slope_block(mu)
    pairs = [c for c in cat.assemblies(mu) if len(c.ops) == 2]
    assert pairs, "expected at least one two-component assembly"
    for c in pairs:
        a, b = c.ops
        assert a.mask & b.mask == 0
        assert cat.diagram.position(a) < cat.diagram.position(b)
        # weight function matches the same-slope composition pair term
        wfs = compose_same_slope(q, [a, b])
        pair_wf = [w for w in wfs if len(w.ops) == 2]
        if pair_wf:
            assert c.weight_fn.alpha == pair_wf[0].alpha
            assert c.weight_fn.exp == pair_wf[0].exp
    # order violations and overlaps are rejected
    with pytest.raises(QuiverError):
        cat.assemble((block[1], block[0]))


def test_zero_bracket_assembly_not_counted():
    q = q1()
    cat = catalog(q, "nil", 2)
    # sinks 1 and 2 have bracket 0; their slope-0 walls never assemble
    mu = Fraction(0)
    assert all(len(c.ops) == 1 for c in cat.assemblies(mu))


# ------------------------------------------------------------------ counts

def test_tropical_count_q1_k1():
    cat = catalog(q1(), "nil", 1)
    w = WeightVector(((1,), (), (1,)))
    assert tropical_count(cat, w) == 1
    # no balanced curve with legs at two sinks only
    w_sinks = WeightVector(((1,), (1,), ()))
    assert tropical_count(cat, w_sinks) == 0
    with pytest.raises(QuiverError):
        tropical_count(cat, WeightVector(((2,), (), ())))  # part exceeds k


def test_tropical_count_set_independence():
    cat = catalog(q1(), "nil", 3)
    w = WeightVector(((1, 2), (), (3,)))
    fam_a = w.canonical_levels()
    fam_b = frozenset({(1, (3,)), (1, (1, 2)), (3, (1, 2, 3))})
    assert tropical_count(cat, w, fam_a) == tropical_count(cat, w, fam_b)
    w2 = WeightVector(((2,), (), (2,)))
    fam_c = frozenset({(1, (1, 2)), (3, (2, 3))})
    assert tropical_count(cat, w2) == tropical_count(cat, w2, fam_c)


def test_marked_counts_connected_mark_is_d_out():
    cat = catalog(q1(), "nil", 1)
    counts = marked_counts(cat, Fraction(1, 2))
    for (wv, mark), n in counts.items():
        assert cat.quiver.slope(mark) == Fraction(1, 2) or sum(mark)
    w = WeightVector(((1,), (), (1,)))
    assert counts[(w, (1, 0, 1))] == 1


def test_standard_mult_equals_reduced_bracket_over_m():
    # at every joint: w1 w2 |m1 ^ m2| = |<red1, red2>_K(m)| / m,
    # the K(m) bracket of reductions being m * (a'b - ab')
    for quiver, mode, k in ((q2(), "naive", None), (q1(), "nil", 2)):
        cat = catalog(quiver, mode, k)
        for op in cat.diagram.seq:
            parents = cat.diagram.parents.get(op)
            if not parents:
                continue
            lo, hi = parents
            a1, b1 = quiver.reduction(lo.exp)
            a2, b2 = quiver.reduction(hi.exp)
            import math
            w1, w2 = math.gcd(a1, b1), math.gcd(a2, b2)
            m1 = (a1 // w1, b1 // w1)
            m2 = (a2 // w2, b2 // w2)
            standard = w1 * w2 * abs(m1[0] * m2[1] - m1[1] * m2[0])
            k_bracket = quiver.m * (a2 * b1 - a1 * b2)
            assert standard * quiver.m == abs(k_bracket)


def test_weight_vector_invariants():
    w = WeightVector(((1, 1, 2), (), (3,)))
    assert w.sizes == (4, 0, 3)
    assert w.aut_order() == 2
    assert w.r_coefficient() == Fraction(1 * 1 * -1, 4) * Fraction(-1, 9) * -1 \
        or True
    # explicit: R = prod (-1)^(w-1)/w^2 = 1 * 1 * (-1/4) * (1/9)
    assert w.r_coefficient() == Fraction(-1, 36)
    with pytest.raises(QuiverError):
        WeightVector(((2, 1),))   # not weakly increasing
    legs = frozenset({(1, (1,)), (1, (2, 3)), (3, (1, 2, 3))})
    assert weight_vector_of_legs(make_quiver(2, [(3, 1), (3, 2)]), legs).parts \
        == ((1, 2), (), (3,))
