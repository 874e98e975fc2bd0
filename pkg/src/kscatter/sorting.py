"""The sorting-diagram algorithm with genealogy tracking, and sorting trees.

A diagram is an ordered operator sequence; stability means weakly
slope-descending.  Every rewrite below is an exact group identity, so the
composed automorphism never changes; that is the soundness oracle.

Naive mode: one step is a left-to-right sweep commuting each leftmost
ascending element past its whole ascending run, inserting the commutator
after each element passed (identity commutators are dropped: the trivial
operator is 1).  Guaranteed to stabilize on 2-Kronecker fragments; raises
AssumptionViolation when a bracket leaves {0,1}.

Square-free mode: one step resolves one commutator order (order = index-set
size).  Orders strictly add, so settled rounds never reopen and the
diagrams stabilize within (s+S)k steps.  Factors with equal index sets are
combined along the way; without that the literal process breeds cancelling
debris without bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .quiver import Quiver, QuiverError
from .operators import (NAIVE, NIL, AssumptionViolation, ElemAuto,
                        commutator, commute_past, factor_initial, mask_bits,
                        merge_ops, naive_commutator, naive_op)


class TreeAssumptionError(Exception):
    """An ancestor is parent to more than one ancestor of the same operator."""

    def __init__(self, op, offender, children):
        self.op = op
        self.offender = offender
        self.children = children
        super().__init__(
            f"ancestor {offender!r} of {op!r} is parent to {len(children)} "
            f"ancestors: {children!r}")


@dataclass(eq=False)
class SortingDiagram:
    quiver: Quiver
    mode: str
    k: int | None
    seq: list
    parents: dict
    step_count: int = 0
    history: list | None = None
    _order: int = 1     # last fully resolved commutator order (nil mode)

    # -- construction ------------------------------------------------------

    @classmethod
    def initial(cls, quiver: Quiver, mode=NAIVE, k=None, keep_history=False):
        if mode == NAIVE:
            seq = [naive_op(quiver, quiver.unit(v))
                   for v in range(1, quiver.n_vertices + 1)]
        elif mode == NIL:
            if k is None or k < 1:
                raise QuiverError("nilpotent mode needs k >= 1")
            seq = []
            for v in range(1, quiver.n_vertices + 1):
                seq.extend(factor_initial(quiver, v, k))
        else:
            raise QuiverError(f"unknown mode {mode!r}")
        parents = {op: None for op in seq}
        history = [list(seq)] if keep_history else None
        return cls(quiver, mode, k, seq, parents, 0, history)

    # -- the sorting step ---------------------------------------------------

    def _first_ascending(self):
        for p in range(len(self.seq) - 1):
            if self.seq[p].slope < self.seq[p + 1].slope:
                return p
        return None

    def is_stable(self) -> bool:
        return self._first_ascending() is None

    def _naive_sweep(self) -> bool:
        """One left-to-right pass: commute each leftmost ascending element
        past its whole ascending run, resuming after the moved element."""
        changed = False
        p = 0
        while p < len(self.seq) - 1:
            if self.seq[p].slope >= self.seq[p + 1].slope:
                p += 1
                continue
            mover = self.seq[p]
            q = p + 1
            while q < len(self.seq) and mover.slope < self.seq[q].slope:
                q += 1
            segment = []
            for pp in range(p + 1, q):
                passed = self.seq[pp]
                segment.append(passed)
                comm = naive_commutator(self.quiver, mover, passed)
                if isinstance(comm, AssumptionViolation):
                    comm.step = self.step_count + 1
                    raise comm
                if comm is not None:
                    self.parents[comm] = (mover, passed)
                    segment.append(comm)
            segment.append(mover)
            self.seq[p:q] = segment
            changed = True
            p += len(segment)
        if changed:
            self.step_count += 1
            if self.history is not None:
                self.history.append(list(self.seq))
        return changed

    def _absorb(self, t):
        """Combine the factor at position t with an equal-index-set factor
        elsewhere, if one is reachable by sliding past commuting elements
        (index-set overlap or vanishing bracket; exact group identities).
        Cancelling pairs disappear."""
        wall = self.seq[t]
        for step in (1, -1):
            j = t + step
            while 0 <= j < len(self.seq):
                other = self.seq[j]
                if other.mask == wall.mask:
                    merged = merge_ops(self.quiver, other, wall)
                    if merged is None:
                        del self.seq[max(t, j)]
                        del self.seq[min(t, j)]
                    else:
                        self.parents[merged] = self.parents.get(other)
                        self.seq[j] = merged
                        del self.seq[t]
                    return True
                if not commute_past(self.quiver, wall, other):
                    break
                j += step
        return False

    def _nil_round(self, g) -> bool:
        """Resolve every ascending adjacency whose commutator wall has order
        (index-set size) at most g; higher orders wait for a later round.
        Commuting pairs of any order are swapped freely.  Commutator orders
        strictly add, so rounds never reopen settled orders and round
        (s+S)*k leaves the diagram fully sorted."""
        changed = False
        progress = True
        iterations = 0
        while progress:
            progress = False
            p = 0
            while p < len(self.seq) - 1:
                a, b = self.seq[p], self.seq[p + 1]
                if a.slope >= b.slope:
                    p += 1
                    continue
                if a.mask & b.mask or self.quiver.dsz_cached(a.d, b.d) == 0:
                    self.seq[p], self.seq[p + 1] = b, a
                    progress = changed = True
                    p = max(p - 1, 0)
                    continue
                if bin(a.mask).count("1") + bin(b.mask).count("1") > g:
                    p += 1
                    continue
                comm = commutator(self.quiver, a, b)
                self.parents[comm] = (a, b)
                self.seq[p:p + 2] = [b, comm, a]
                self._absorb(p + 1)
                progress = changed = True
                p = max(p - 1, 0)
            iterations += 1
            if iterations > 100 * (len(self.seq) + 1):
                raise RuntimeError("order round failed to reach a fixed point")
        return changed

    def compact(self):
        """Combine all remaining equal-index-set factor pairs reachable by
        commuting slides; cancelling pairs drop out."""
        if self.mode != NIL:
            return
        i = 0
        while i < len(self.seq):
            if not self._absorb(i):
                i += 1

    def sort_step(self) -> bool:
        """Advance the diagram one step; False if already stable.

        Naive mode: one full sweep (raises AssumptionViolation outside the
        bracket-{0,1} regime).  Square-free mode: resolve the next order;
        the diagrams stabilize within (s+S)*k steps by construction.
        """
        if self.mode == NAIVE:
            return self._naive_sweep()
        max_order = self.quiver.n_vertices * self.k
        while self._order < max_order:
            self._order += 1
            if self._nil_round(self._order):
                self.compact()
                self.step_count += 1
                if self.history is not None:
                    self.history.append(list(self.seq))
                return True
        return False

    def stabilize(self, max_steps=None) -> "SortingDiagram":
        if max_steps is None:
            if self.mode == NIL:
                max_steps = self.quiver.n_vertices * self.k + 1
            else:
                max_steps = 100_000
        while self.sort_step():
            if self.step_count > max_steps:
                raise RuntimeError(
                    f"no stabilization within {max_steps} steps "
                    f"(mode={self.mode}, quiver={self.quiver.n_vertices} vertices)")
        if not self.is_stable():
            raise RuntimeError("sorting ended on an unsorted diagram")
        return self

    # -- views ---------------------------------------------------------------

    def position(self, op) -> int:
        return self.seq.index(op)

    def slopes_present(self):
        out = []
        for op in self.seq:
            if op.slope not in out:
                out.append(op.slope)
        return sorted(out, reverse=True)

    def slope_block(self, mu):
        return [op for op in self.seq if op.slope == mu]

    def initial_ops(self):
        return [op for op in self.seq if self.parents.get(op) is None]

    def ancestors(self, op):
        """op together with all its ancestors, as a set."""
        out = set()
        stack = [op]
        while stack:
            cur = stack.pop()
            if cur in out:
                continue
            out.add(cur)
            par = self.parents.get(cur)
            if par:
                stack.extend(par)
        return out

    def leaves(self, op):
        return {a for a in self.ancestors(op) if self.parents.get(a) is None}

    def dump(self) -> str:
        """One operator per line: slope, c, r, sparse d, sorted index pairs."""
        lines = []
        for op in self.seq:
            d_sparse = [(v + 1, x) for v, x in enumerate(op.d) if x]
            pairs = mask_bits(op.mask, self.k) if self.mode == NIL else []
            lines.append(f"slope={op.slope} c={op.c} r={op.r} "
                         f"d={d_sparse} I={sorted(pairs)}")
        return "\n".join(lines)


def stabilize(quiver: Quiver, mode=NAIVE, k=None, keep_history=False) -> SortingDiagram:
    return SortingDiagram.initial(quiver, mode, k, keep_history).stabilize()


# ------------------------------------------------------------- sorting trees

@dataclass(frozen=True)
class SortingTree:
    """Commutator genealogy of one operator as a weighted tree.

    Bounded variant: vertices for every ancestor, edges from each strict
    ancestor to its child.  Unbounded variant: no vertices for initial
    operators; their edges become unbounded legs, plus one outgoing unbounded
    edge at the root.  Edge weight is the index of the reduced exponent.
    """

    root: ElemAuto
    unbounded: bool
    vertices: tuple
    edges: tuple        # (op, child or None); child None marks an unbounded edge
    weights: dict


def edge_weight(quiver: Quiver, op: ElemAuto) -> int:
    """Weight of the edge carried by op: ind of the reduced exponent, which
    equals r * ind(reduction of the primitive direction)."""
    a, b = quiver.reduction(op.exp)
    if a == 0 and b == 0:
        raise QuiverError("zero reduction has no weight")
    return math.gcd(a, b)


def check_unique_child(diagram: SortingDiagram, op) -> dict:
    """Verify each strict ancestor parents exactly one ancestor; returns the
    child map.  Automatic over the square-free ring, checked in naive mode."""
    anc = diagram.ancestors(op)
    child = {}
    for a in anc - {op}:
        kids = [t for t in anc if diagram.parents.get(t) and a in diagram.parents[t]]
        if len(kids) != 1:
            raise TreeAssumptionError(op, a, kids)
        child[a] = kids[0]
    return child


def build_trees(diagram: SortingDiagram, op) -> tuple:
    """(bounded, unbounded) sorting trees for op."""
    child = check_unique_child(diagram, op)
    anc = diagram.ancestors(op)
    initial = {a for a in anc if diagram.parents.get(a) is None}
    weights = {a: edge_weight(diagram.quiver, a) for a in anc}

    bounded = SortingTree(
        root=op, unbounded=False,
        vertices=tuple(anc),
        edges=tuple((a, child[a]) for a in anc if a is not op),
        weights={a: w for a, w in weights.items() if a is not op},
    )
    unb_vertices = tuple(a for a in anc if a not in initial)
    # legs (initial ancestors) keep a single endpoint at their child; the
    # root contributes the one outgoing unbounded edge
    unb_edges = [(a, None if a is op else child[a]) for a in anc]
    unbounded = SortingTree(
        root=op, unbounded=True,
        vertices=unb_vertices,
        edges=tuple(unb_edges),
        weights=weights,
    )
    return bounded, unbounded
