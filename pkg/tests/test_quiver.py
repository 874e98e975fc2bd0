import random

import pytest

from kscatter.quiver import (QuiverError, Quiver, build_covering_fragment,
                             class_shapes, count_classes_of_shape,
                             enumerate_compatible_classes, fragment_shapes,
                             ind, labeled_class_key, make_quiver,
                             pad_to_sink_boundary, primitive_part, subquiver)


def q1():
    return make_quiver(2, [(3, 1), (3, 2)])


def q2():
    return make_quiver(2, [(4, 1), (4, 2), (5, 2), (5, 3)])


def q3():
    return make_quiver(3, [(5, 1), (5, 2), (6, 2), (6, 3), (7, 2), (7, 4)])


def vec(quiver, pairs):
    d = [0] * quiver.n_vertices
    for v, x in pairs:
        d[v - 1] = x
    return tuple(d)


# ----------------------------------------------------------- construction

def test_make_quiver_minimal_labels():
    # sources are relabelled by lowest target sink
    q = make_quiver(2, [("b", "y"), ("b", "z"), ("a", "x"), ("a", "y")],
                    sinks=["x", "y", "z"])
    # a maps to {x,y} = {1,2}, b maps to {y,z} = {2,3}; a comes first
    assert q.arrows == ((4, 1), (4, 2), (5, 2), (5, 3))


def test_quiver_rejects_cycles_and_overloads():
    with pytest.raises(QuiverError):
        make_quiver(1, [(3, 1), (3, 2), (4, 1), (4, 2)])  # undirected cycle
    with pytest.raises(QuiverError):
        make_quiver(1, [(2, 1), (3, 1)])  # sink in-degree 2 > m = 1


def test_text_roundtrip():
    q = q2()
    again = Quiver.from_text(q.to_text())
    assert again == q


def test_covering_fragment_balls():
    ball = build_covering_fragment(2, 1, "source")
    assert (ball.n_sinks, ball.n_sources) == (2, 1)   # this is Q1
    assert ball == q1()
    ball = build_covering_fragment(2, 1, "sink")
    assert (ball.n_sinks, ball.n_sources) == (1, 2)
    ball = build_covering_fragment(3, 1, "source")
    assert (ball.n_sinks, ball.n_sources) == (3, 1)
    assert all(ball.degree(v) == 1 for v in ball.sinks)
    zigzag = build_covering_fragment(2, 4, "sink")
    assert zigzag.n_vertices == 9                      # radius-4 ball in a line
    assert all(d <= 2 for d in map(zigzag.degree, range(1, 10)))


# ----------------------------------------------------------------- forms

def test_euler_form_q1():
    q = q1()
    assert q.euler_form(q.unit(3), q.unit(1)) == -1
    assert q.euler_form(q.unit(1), q.unit(3)) == 0
    d = (1, 1, 1)
    assert q.euler_form(d, d) == 1


def test_dsz_examples():
    q = q1()
    assert q.dsz(q.unit(2), q.unit(3)) == 1
    assert q.dsz(q.unit(1), q.unit(2)) == 0
    qq = q3()
    xi = vec(qq, [(1, 1), (2, 1), (3, 1), (5, 1), (6, 1)])
    eta = vec(qq, [(1, 1), (2, 2), (3, 1), (5, 1), (6, 1), (7, 1)])
    assert qq.dsz(xi, eta) == -1


def test_dsz_antisymmetry_and_unit_range():
    rng = random.Random(3)
    for quiver in fragment_shapes(3, 6):
        n = quiver.n_vertices
        for v in range(1, n + 1):
            for w in range(1, n + 1):
                assert quiver.dsz(quiver.unit(v), quiver.unit(w)) in (-1, 0, 1)
        for _ in range(20):
            d1 = tuple(rng.randrange(0, 5) for _ in range(n))
            d2 = tuple(rng.randrange(0, 5) for _ in range(n))
            assert quiver.dsz(d1, d2) == -quiver.dsz(d2, d1)


def test_slope_and_reduction():
    q = q1()
    assert q.slope(q.unit(1)) == 0
    assert q.slope(q.unit(3)) == 1
    assert q.slope((1, 1, 1)) * 3 == 1
    assert q.slope((2, 2, 2)) == q.slope((1, 1, 1))
    assert q.reduction((1, 1, 1)) == (1, 2)
    assert q2().reduction((1, 1, 1, 1, 1)) == (2, 3)
    assert q.reduction(q.zero()) == (0, 0)
    with pytest.raises(QuiverError):
        q.slope(q.zero())


def test_index():
    assert ind((2, 4)) == 2
    assert ind((2, 3)) == 1
    q = q1()
    d = (2, 0, 2)
    assert ind(d) == 2
    assert ind(q.reduction(d)) == 2
    assert primitive_part((2, 0, 2)) == (2, (1, 0, 1))
    with pytest.raises(QuiverError):
        ind((0, 0))
    # ind(d) <= ind(reduction(d)) on random non-negative vectors
    rng = random.Random(5)
    for _ in range(100):
        d = tuple(rng.randrange(0, 5) for _ in range(3))
        if not any(d):
            continue
        assert ind(d) <= ind(q.reduction(d))


def test_euler_form_positivity_m2():
    # for 2-Kronecker fragments: e(d,d) >= 1, equality only for 0/1 entries
    for quiver in fragment_shapes(2, 5):
        n = quiver.n_vertices

        def rec(i, d):
            if i == n:
                if any(d):
                    e = quiver.euler_form(tuple(d), tuple(d))
                    assert e >= 1
                    if e == 1:
                        assert all(x in (0, 1) for x in d)
                return
            for x in range(0, 3):
                rec(i + 1, d + [x])

        rec(0, [])


# ------------------------------------------------------------- classes

def test_compatible_classes_q1():
    q = q1()
    assert len(enumerate_compatible_classes(q, (1, 1))) == 2
    # (1,2): the all-ones vector plus the two entry-2 single-arrow patterns
    classes = enumerate_compatible_classes(q, (1, 2))
    assert len(classes) == 3
    assert (1, 1, 1) in [cls.rep for cls in classes]
    # every class representative has the right reduction and connected support
    for dbar in ((2, 1), (2, 2)):
        for cls in enumerate_compatible_classes(q, dbar):
            assert q.reduction(cls.rep) == dbar


def test_class_key_separates_translation_types():
    # the two single-arrow patterns on Q1 are genuinely different classes
    q = q1()
    a = labeled_class_key(q, (1, 0, 1))
    b = labeled_class_key(q, (0, 1, 1))
    assert a != b
    classes = enumerate_compatible_classes(q, (1, 1))
    assert sorted(cls.rep for cls in classes) == [(0, 1, 1), (1, 0, 1)]
    assert classes[0].key() != classes[1].key()
    with pytest.raises(QuiverError):
        labeled_class_key(q, (0, 0, 0))


def test_class_shape_counts():
    # single arrow with unit weights: m classes (one per arrow color)
    for m in (2, 3):
        arrow = make_quiver(m, [(2, 1)])
        assert count_classes_of_shape(arrow, (1, 1)) == m
    # the Q1 shape with unit weights: colorings {12},{21} swap: one class
    assert count_classes_of_shape(q1(), (1, 1, 1)) == 1
    shapes = class_shapes(2, (1, 1))
    assert sum(n for _, _, n in shapes) == 2


def test_subquiver_and_padding():
    q = q2()
    sub, old2new = subquiver(q, {2, 4, 5})
    assert sub.n_sinks == 1 and sub.n_sources == 2
    assert sorted(old2new) == [2, 4, 5]
    padded, mapping = pad_to_sink_boundary(sub)
    assert all(padded.is_sink(v) for v in padded.boundary())
    # original vertices survive the padding map
    assert len(mapping) == sub.n_vertices
