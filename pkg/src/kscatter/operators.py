"""Elementary Poisson automorphisms of the quiver torus algebra.

An operator acts by x_p -> x_p * (1 + c * u_I * x^(r*d))^<d,p> with d
primitive.  Naive mode drops the auxiliary variables (c = 1, r = 1, I empty,
d arbitrary non-negative); its binomial expansions are infinite through
inverse powers, so applying a naive operator to a series requires a total
degree cap.  Nilpotent mode truncates structurally: u_I^2 = 0.

The brute-force product of a list of operators is the ground truth every
sorting/curve computation is checked against.  Composition convention:
ops[0] o ops[1] o ... applied to x means ops[-1]'s substitution first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .quiver import Quiver, QuiverError, ind, primitive_part, vadd, vscale
from .series import SeriesRing, SeriesError, TruncSeries

NAIVE = "naive"
NIL = "nil"


class AssumptionViolation(Exception):
    """A naive commutator fell outside the pentagon-identity regime.

    Carries the two vectors and their bracket; `step` is filled in by the
    sorting engine with the index of the diagram being built.
    """

    def __init__(self, d1, d2, bracket, step=None):
        self.d1 = tuple(d1)
        self.d2 = tuple(d2)
        self.bracket = bracket
        self.step = step
        where = f" while building diagram {step}" if step else ""
        super().__init__(
            f"<d1,d2> = {bracket} not in {{0,1}}{where}: d1={self.d1}, d2={self.d2}")


@dataclass(frozen=True, eq=False)
class ElemAuto:
    """One elementary automorphism.  Instances have identity semantics so a
    diagram can track genealogy; compare values via .key().

    `lineages` maps each leg set the operator's commutator trees can carry
    (a frozenset of (vertex, level-subset) pairs) to the total quiver
    multiplicity of the trees with those legs.  A fresh commutator has the
    single leg set inherited from its parents; combining two factors with
    the same index set (which may carry different leg decompositions of that
    set) adds the bags.  The coefficient satisfies
    c = r * sum over lineages of mult * leg_factor(legs), so factors whose
    coefficients cancel have theta-invisible lineage bags.
    """

    mode: str
    c: object            # int or Fraction, nonzero
    mask: int            # u-monomial bits; 0 in naive mode
    r: int
    d: tuple             # primitive in nil mode; raw vector in naive mode
    exp: tuple           # r * d
    slope: Fraction
    lineages: tuple = ()  # ((legs, mult), ...) sorted, mult != 0

    def key(self):
        return (self.mode, Fraction(self.c), self.mask, self.r, self.d)

    @property
    def mult(self):
        """Total tree multiplicity over all lineages."""
        return sum(m for _, m in self.lineages)

    @property
    def legs(self):
        """Leg set of the primary (genealogy-carried) lineage."""
        return self.lineages[0][0] if self.lineages else frozenset()

    def __repr__(self):
        tag = f" c={self.c} r={self.r} I={mask_bits(self.mask)}" if self.mode == NIL else ""
        dd = "+".join(f"{x}*i{v+1}" if x != 1 else f"i{v+1}"
                      for v, x in enumerate(self.d) if x)
        return f"T[{dd}]{tag}"


def mask_bits(mask, k=None):
    """Mask -> sorted (vertex, level) pairs; needs the level count k."""
    if k is None:
        return [i for i in range(mask.bit_length()) if mask >> i & 1]
    return [(i // k + 1, i % k + 1)
            for i in range(mask.bit_length()) if mask >> i & 1]


def level_mask(pairs, k):
    mask = 0
    for q, j in pairs:
        if not 1 <= j <= k:
            raise QuiverError(f"level {j} outside 1..{k}")
        mask |= 1 << ((q - 1) * k + (j - 1))
    return mask


def _bag(pairs):
    """Normalize a legs -> mult mapping into a sorted lineage tuple."""
    out = {}
    for legs, mult in pairs:
        out[legs] = out.get(legs, 0) + mult
    return tuple(sorted(((legs, m) for legs, m in out.items() if m),
                        key=lambda lm: sorted(lm[0])))


def naive_op(quiver: Quiver, d, lineages=None) -> ElemAuto:
    d = tuple(d)
    if any(x < 0 for x in d) or not any(d):
        raise QuiverError("naive operator needs a nonzero non-negative vector")
    if lineages is None:
        legs = frozenset((v + 1, ()) for v, x in enumerate(d) if x)
        lineages = ((legs, 1),)
    return ElemAuto(NAIVE, 1, 0, 1, d, d, quiver.slope(d), lineages)


def nil_op(quiver: Quiver, c, mask, r, d, lineages) -> ElemAuto:
    d = tuple(d)
    if ind(d) != 1:
        raise QuiverError("nil operator direction must be primitive")
    if mask == 0:
        raise QuiverError("nil operator needs a nonempty index set")
    if c == 0 or r < 1:
        raise QuiverError("nil operator needs c != 0, r >= 1")
    c = int(c) if Fraction(c).denominator == 1 else Fraction(c)
    return ElemAuto(NIL, c, mask, r, d, vscale(r, d), quiver.slope(d), lineages)


def subsets_in_order(k):
    """Nonempty subsets of {1..k} in increasing-bitmask order:
    {1},{2},{1,2},{3},{1,3},..."""
    for bits in range(1, 1 << k):
        yield tuple(j + 1 for j in range(k) if bits >> j & 1)


def factor_initial(quiver: Quiver, q, k) -> list:
    """The factors of the initial operator at vertex q over the square-free
    ring with k levels: one factor per nonempty level subset J, with
    coefficient (-1)^(#J-1) (#J-1)!, power #J, direction the unit at q."""
    if k < 1:
        raise QuiverError("k must be >= 1")
    unit = quiver.unit(q)
    out = []
    for J in subsets_in_order(k):
        j = len(J)
        c = (-1) ** (j - 1) * math.factorial(j - 1)
        mask = level_mask([(q, lvl) for lvl in J], k)
        lineages = ((frozenset({(q, J)}), 1),)
        out.append(nil_op(quiver, c, mask, j, unit, lineages))
    return out


def commutator(quiver: Quiver, a1: ElemAuto, a2: ElemAuto):
    """A2^-1 o A1 o A2 o A1^-1 for nilpotent-mode operators.

    Returns None (identity) when the bracket vanishes or the index sets
    overlap; otherwise the closed-form operator with coefficient
    c1*c2*ind(r1 d1 + r2 d2)*<d1,d2>, index set I1 u I2, and the combined
    exponent split into primitive part and index.
    """
    if a1.mode != NIL or a2.mode != NIL:
        raise QuiverError("commutator needs nilpotent-mode operators")
    if a1.mask & a2.mask:
        return None
    bracket = quiver.dsz(a1.d, a2.d)
    if bracket == 0:
        return None
    total = vadd(a1.exp, a2.exp)
    r, d = primitive_part(total)
    c = a1.c * a2.c * r * bracket
    vertex_mult = quiver.dsz(a1.exp, a2.exp)
    lineages = _bag(((l1 | l2, m1 * m2 * vertex_mult)
                     for l1, m1 in a1.lineages
                     for l2, m2 in a2.lineages))
    return nil_op(quiver, c, a1.mask | a2.mask, r, d, lineages)


def merge_ops(quiver: Quiver, a1: ElemAuto, a2: ElemAuto):
    """Compose two factors with the same index set (hence the same exponent)
    into one: coefficients add and the lineage bags combine.  None when the
    coefficients cancel: such a factor acts trivially, and its lineage
    contributions are invisible to the theta series."""
    if a1.mode != NIL or a1.mask != a2.mask or a1.exp != a2.exp:
        raise QuiverError("only same-index-set factors merge")
    c = a1.c + a2.c
    if c == 0:
        return None
    return nil_op(quiver, c, a1.mask, a1.r, a1.d,
                  _bag(a1.lineages + a2.lineages))


def commute_past(quiver: Quiver, a1: ElemAuto, a2: ElemAuto) -> bool:
    """Whether a1 and a2 commute (overlapping index sets or zero bracket)."""
    if a1.mask & a2.mask:
        return True
    return quiver.dsz_cached(a1.d, a2.d) == 0


def naive_commutator(quiver: Quiver, a1: ElemAuto, a2: ElemAuto):
    """Naive-mode commutator: identity for bracket 0, T_{d1+d2} for bracket 1
    (the pentagon identity), otherwise an AssumptionViolation value."""
    if a1.mode != NAIVE or a2.mode != NAIVE:
        raise QuiverError("naive_commutator needs naive-mode operators")
    bracket = quiver.dsz(a1.d, a2.d)
    if bracket == 0:
        return None
    if bracket == 1:
        lineages = _bag(((l1 | l2, m1 * m2)
                         for l1, m1 in a1.lineages
                         for l2, m2 in a2.lineages))
        return naive_op(quiver, vadd(a1.d, a2.d), lineages)
    return AssumptionViolation(a1.d, a2.d, bracket)


# ------------------------------------------------------------ application

def _binomial(n, j):
    # C(n, j) for any integer n, including negative
    if n >= 0:
        return math.comb(n, j)
    return (-1) ** j * math.comb(-n + j - 1, j)


def apply_op(quiver: Quiver, op: ElemAuto, series: TruncSeries, sign=1) -> TruncSeries:
    """Substitute x_p -> x_p (1 + c u_I x^(rd))^(sign*<d,p>) into `series`.

    A monomial x^e picks up the factor (1 + c u_I x^(rd))^(sign*<d,e>); the
    exponent vector rd is fixed by the operator itself (the bracket is
    antisymmetric), which is what makes sign=-1 the exact inverse.
    """
    ring = series.ring
    if op.mode == NAIVE and ring.total_cap is None:
        raise SeriesError("naive operators need a total degree cap")
    out_terms = dict(series.terms)
    out = TruncSeries(ring, out_terms)
    bracket = quiver.dsz_cached
    op_d, op_exp, op_mask, op_c = op.d, op.exp, op.mask, op.c
    if op.mode == NIL:
        iadd = out._iadd
        keeps = ring.keeps
        for (exp, mask), co in series.terms.items():
            if mask & op_mask:
                continue
            b = bracket(op_d, exp)
            if b == 0:
                continue
            new_exp = vadd(exp, op_exp)
            if keeps(new_exp):
                iadd((new_exp, mask | op_mask), co * b * sign * op_c)
    else:
        for (exp, mask), co in series.terms.items():
            b = bracket(op_d, exp) * sign
            if b == 0:
                continue
            j = 0
            new_exp = exp
            while True:
                j += 1
                new_exp = vadd(new_exp, op_exp)
                if not ring.keeps(new_exp):
                    break
                out._iadd((new_exp, mask), co * _binomial(b, j))
    return out


def compose_on_generator(quiver: Quiver, ops, p, ring: SeriesRing,
                         signs=None) -> TruncSeries:
    """Image of x_p under ops[0] o ops[1] o ...: rightmost substitution first."""
    series = ring.x(p)
    if signs is None:
        signs = [1] * len(ops)
    for op, sign in zip(reversed(ops), reversed(list(signs))):
        series = apply_op(quiver, op, series, sign)
    return series


def brute_force_product(quiver: Quiver, ops, ring: SeriesRing) -> dict:
    """Ground-truth images of every generator under the full composition."""
    return {p: compose_on_generator(quiver, ops, p, ring)
            for p in range(1, quiver.n_vertices + 1)}


def cofactor(series: TruncSeries, p) -> TruncSeries:
    """Divide an operator image by x_p; every term must be divisible."""
    ring = series.ring
    out = ring.zero()
    for (exp, mask), co in series.terms.items():
        if exp[p - 1] < 1:
            raise SeriesError(f"term {exp} not divisible by x_{p}")
        new = tuple(x - (1 if i == p - 1 else 0) for i, x in enumerate(exp))
        out._iadd((new, mask), co)
    return out


# --------------------------------------------------- same-slope composition

@dataclass(frozen=True)
class WeightFunction:
    """A term alpha * u_I * x^exp of the log of a same-slope composition.

    For a single operator this is (c/r) u_I x^(rd); longer tuples accumulate
    one iterated half-bracket per extension.
    """

    alpha: Fraction
    mask: int
    exp: tuple
    ops: tuple

    @property
    def r(self):
        return ind(self.exp)

    @property
    def d(self):
        return primitive_part(self.exp)[1]

    def term(self, ring: SeriesRing) -> TruncSeries:
        return ring.monomial(self.alpha, self.exp, self.mask)


def elementary_weight(op: ElemAuto) -> WeightFunction:
    return WeightFunction(Fraction(op.c, op.r), op.mask, op.exp, (op,))


def extend_weight(quiver: Quiver, wf: WeightFunction, op: ElemAuto):
    """One inductive step: f -> (1/2) <exp_f, exp_op> alpha_f alpha_op
    u_{I u I'} x^{exp_f + exp_op}.  None when it vanishes."""
    if wf.mask & op.mask:
        return None
    bracket = quiver.dsz(wf.exp, op.exp)
    if bracket == 0:
        return None
    alpha = Fraction(1, 2) * bracket * wf.alpha * Fraction(op.c, op.r)
    return WeightFunction(alpha, wf.mask | op.mask, vadd(wf.exp, op.exp),
                          wf.ops + (op,))


def compose_same_slope(quiver: Quiver, ops) -> list:
    """Weight functions of all subsequences with pairwise-disjoint index sets
    and nonvanishing iterated half-bracket; their sum is the log of the
    composed same-slope block."""
    ops = list(ops)
    if not ops:
        return []
    mu = ops[0].slope
    for op in ops:
        if op.mode != NIL:
            raise QuiverError("compose_same_slope needs nilpotent-mode operators")
        if op.slope != mu:
            raise QuiverError("compose_same_slope needs equal slopes")
    out = []

    def grow(wf, start):
        out.append(wf)
        for i in range(start, len(ops)):
            nxt = extend_weight(quiver, wf, ops[i])
            if nxt is not None:
                grow(nxt, i + 1)

    for i, op in enumerate(ops):
        grow(elementary_weight(op), i + 1)
    return out


def log_of_block(quiver: Quiver, ops, ring: SeriesRing) -> TruncSeries:
    """Sum of the weight functions, as a series."""
    out = ring.zero()
    for wf in compose_same_slope(quiver, ops):
        out = out + wf.term(ring)
    return out
