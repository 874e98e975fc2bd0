"""Exact truncated series with square-free auxiliary variables.

Terms are keyed by (exponent vector, auxiliary monomial bitmask).  The
auxiliary variables square to zero, so any product with overlapping masks
vanishes; that is the only truncation needed in nilpotent mode.  Optional
caps truncate by total degree (naive mode) or per-vertex degree (the
t-graded series used for coefficient extraction).

Coefficients are ints or Fractions; arithmetic stays exact throughout.
"""

from __future__ import annotations

from fractions import Fraction


class SeriesError(ArithmeticError):
    pass


class SeriesRing:
    __slots__ = ("n", "total_cap", "vertex_cap")

    def __init__(self, n, total_cap=None, vertex_cap=None):
        self.n = n
        self.total_cap = total_cap
        self.vertex_cap = vertex_cap

    def keeps(self, exp) -> bool:
        if self.total_cap is not None and sum(exp) > self.total_cap:
            return False
        if self.vertex_cap is not None and any(x > self.vertex_cap for x in exp):
            return False
        return True

    def __eq__(self, other):
        return (isinstance(other, SeriesRing)
                and (self.n, self.total_cap, self.vertex_cap)
                == (other.n, other.total_cap, other.vertex_cap))

    def __hash__(self):
        return hash((self.n, self.total_cap, self.vertex_cap))

    # constructors
    def zero(self):
        return TruncSeries(self, {})

    def one(self):
        return TruncSeries(self, {((0,) * self.n, 0): 1})

    def x(self, v):
        exp = tuple(1 if i == v - 1 else 0 for i in range(self.n))
        return TruncSeries(self, {(exp, 0): 1})

    def monomial(self, coeff, exp, mask=0):
        if not self.keeps(exp):
            return self.zero()
        return TruncSeries(self, {(tuple(exp), mask): coeff} if coeff else {})


class TruncSeries:
    __slots__ = ("ring", "terms")

    def __init__(self, ring, terms):
        self.ring = ring
        self.terms = terms

    # -- basics ----------------------------------------------------------

    def copy(self):
        return TruncSeries(self.ring, dict(self.terms))

    def is_zero(self):
        return not self.terms

    def constant_term(self):
        return self.terms.get(((0,) * self.ring.n, 0), 0)

    def coefficient(self, exp, mask=0):
        return self.terms.get((tuple(exp), mask), 0)

    def min_degree(self):
        return min((sum(e) + bin(m).count("1") for (e, m) in self.terms), default=None)

    def __eq__(self, other):
        return isinstance(other, TruncSeries) and self.terms == other.terms

    def __hash__(self):
        raise TypeError("TruncSeries is not hashable")

    # -- arithmetic --------------------------------------------------------

    def _iadd(self, key, coeff):
        cur = self.terms.get(key, 0)
        cur += coeff
        if cur:
            self.terms[key] = cur
        else:
            self.terms.pop(key, None)

    def __add__(self, other):
        out = self.copy()
        for key, c in other.terms.items():
            out._iadd(key, c)
        return out

    def __sub__(self, other):
        out = self.copy()
        for key, c in other.terms.items():
            out._iadd(key, -c)
        return out

    def scale(self, factor):
        if not factor:
            return self.ring.zero()
        return TruncSeries(self.ring, {k: c * factor for k, c in self.terms.items()})

    def __mul__(self, other):
        ring = self.ring
        out = ring.zero()
        if len(self.terms) > len(other.terms):
            a, b = other, self
        else:
            a, b = self, other
        for (e1, m1), c1 in a.terms.items():
            for (e2, m2), c2 in b.terms.items():
                if m1 & m2:
                    continue
                exp = tuple(x + y for x, y in zip(e1, e2))
                if not ring.keeps(exp):
                    continue
                out._iadd((exp, m1 | m2), c1 * c2)
        return out

    def power(self, n: int):
        if n < 0:
            return self.inverse().power(-n)
        result = self.ring.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def _split_unit(self):
        c0 = self.constant_term()
        if c0 != 1:
            raise SeriesError(f"series must have constant term 1, got {c0}")
        rest = self.copy()
        rest._iadd(((0,) * self.ring.n, 0), -1)
        if rest.terms and rest.min_degree() == 0:
            raise SeriesError("non-constant part has a degree-0 term")
        return rest

    def inverse(self):
        """(1 + a)^-1 = sum (-a)^j; terminates by truncation/nilpotency."""
        a = self._split_unit()
        out = self.ring.one()
        p = self.ring.one()
        while True:
            p = p * a
            if p.is_zero():
                return out
            p = p.scale(-1)
            out = out + p

    def log(self):
        """log(1 + a) = sum (-1)^(j-1) a^j / j."""
        a = self._split_unit()
        out = self.ring.zero()
        p = self.ring.one()
        j = 0
        while True:
            p = p * a
            j += 1
            if p.is_zero():
                return out
            out = out + p.scale(Fraction((-1) ** (j - 1), j))

    def exp(self):
        """exp(a) for a with zero constant term."""
        if self.constant_term() != 0:
            raise SeriesError("exp needs zero constant term")
        if self.terms and self.min_degree() == 0:
            raise SeriesError("exp needs positive-degree argument")
        out = self.ring.one()
        p = self.ring.one()
        j = 0
        while True:
            p = p * self
            j += 1
            if p.is_zero():
                return out
            out = out + p.scale(Fraction(1, _factorial(j)))

    # -- display -----------------------------------------------------------

    def items_sorted(self):
        return sorted(self.terms.items(), key=lambda kv: (sum(kv[0][0]), kv[0]))

    def dump(self) -> str:
        """Bit-exact structured text: exponent vector, mask bits, num/den."""
        lines = []
        for (exp, mask), c in self.items_sorted():
            frac = Fraction(c)
            bits = [i for i in range(mask.bit_length()) if mask >> i & 1]
            lines.append(f"exp={list(exp)} u={bits} coeff={frac.numerator}/{frac.denominator}")
        return "\n".join(lines)

    def __repr__(self):
        if not self.terms:
            return "TruncSeries(0)"
        parts = []
        for (exp, mask), c in self.items_sorted()[:8]:
            parts.append(f"{c}*x^{exp}" + (f"*u[{mask:b}]" if mask else ""))
        more = "" if len(self.terms) <= 8 else f" ... ({len(self.terms)} terms)"
        return "TruncSeries(" + " + ".join(parts) + more + ")"


def _factorial(j):
    out = 1
    for i in range(2, j + 1):
        out *= i
    return out
