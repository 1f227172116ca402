"""Exact graded-commutative polynomial algebra.

Generators carry an integer degree; odd-degree generators anticommute
(Koszul sign rule) and square to zero, even ones behave classically.
Every polynomial is kept in a canonical normal form: monomials are
ordered by the generators' declaration index, the reordering sign is
the parity of the number of odd-odd transpositions, and zero
coefficients are never stored.  Coefficients live in the Gaussian
rationals (exact ``Fraction`` pairs); a formal ``hbar`` is modelled,
where needed, as an ordinary central even generator of degree 0, so
identities automatically hold order by order in hbar.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence, Union

__all__ = [
    "GaussRat",
    "Generator",
    "GradedAlgebra",
    "GradedPoly",
    "ParseError",
]

ScalarLike = Union[int, Fraction, "GaussRat"]


class GaussRat:
    """A Gaussian rational re + im*i with exact Fraction parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    @staticmethod
    def coerce(value) -> "GaussRat":
        if isinstance(value, GaussRat):
            return value
        if isinstance(value, (int, Fraction)):
            return GaussRat(value)
        raise TypeError("cannot use %r as an exact scalar" % (value,))

    def __add__(self, other):
        other = GaussRat.coerce(other)
        return GaussRat(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussRat(-self.re, -self.im)

    def __sub__(self, other):
        return self + (-GaussRat.coerce(other))

    def __rsub__(self, other):
        return GaussRat.coerce(other) + (-self)

    def __mul__(self, other):
        other = GaussRat.coerce(other)
        return GaussRat(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = GaussRat.coerce(other)
        n = other.re * other.re + other.im * other.im
        if n == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        return self * GaussRat(other.re / n, -other.im / n)

    def __eq__(self, other):
        try:
            other = GaussRat.coerce(other)
        except TypeError:
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return self.re != 0 or self.im != 0

    def abs_norm(self) -> float:
        """Crude magnitude |re| + |im| as a float, for report residuals."""
        return float(abs(self.re) + abs(self.im))

    def __repr__(self):
        return "GaussRat(%s, %s)" % (self.re, self.im)


GR_ZERO = GaussRat(0)
GR_ONE = GaussRat(1)
GR_I = GaussRat(0, 1)


class Generator:
    __slots__ = ("name", "degree", "index", "parity")

    def __init__(self, name: str, degree: int, index: int):
        self.name = name
        self.degree = degree
        self.index = index
        self.parity = degree % 2

    def __repr__(self):
        return "Generator(%r, degree=%d)" % (self.name, self.degree)


# A monomial is a tuple of (generator index, exponent) pairs, strictly
# increasing in the index; odd generators never carry exponent > 1.
Monomial = tuple


def _mono_mul(gens: Sequence[Generator], m1: Monomial, m2: Monomial):
    """Multiply canonical monomials.  Returns (sign, monomial) or None."""
    if not m1:
        return 1, m2
    if not m2:
        return 1, m1
    sign = 1
    # Count odd-odd crossings: every odd factor of m2 that ends up left
    # of an odd factor of m1 with a larger index contributes one swap.
    odd1 = [g for g, e in m1 if gens[g].parity]
    if odd1:
        for g2, _e2 in m2:
            if gens[g2].parity:
                crossings = sum(1 for g1 in odd1 if g1 > g2)
                if crossings & 1:
                    sign = -sign
    # Merge, rejecting odd squares.
    out = []
    i = j = 0
    n1, n2 = len(m1), len(m2)
    while i < n1 and j < n2:
        g1, e1 = m1[i]
        g2, e2 = m2[j]
        if g1 < g2:
            out.append((g1, e1))
            i += 1
        elif g2 < g1:
            out.append((g2, e2))
            j += 1
        else:
            if gens[g1].parity:
                return None  # odd generator squared
            out.append((g1, e1 + e2))
            i += 1
            j += 1
    out.extend(m1[i:])
    out.extend(m2[j:])
    return sign, tuple(out)


def _mono_partial(gens: Sequence[Generator], m: Monomial, idx: int):
    """Left derivative of a canonical monomial by generator ``idx``.

    Returns (integer prefactor, monomial) or None when the derivative
    vanishes.  The prefactor carries both the exponent rule and the
    Koszul sign picked up moving the differentiated factor to the front.
    """
    pos = None
    for k, (g, _e) in enumerate(m):
        if g == idx:
            pos = k
            break
    if pos is None:
        return None
    g_par = gens[idx].parity
    sign = 1
    if g_par:
        crossings = sum(e for g, e in m[:pos] if gens[g].parity)
        if crossings & 1:
            sign = -1
    g, e = m[pos]
    coeff = sign * e
    if e == 1:
        rest = m[:pos] + m[pos + 1 :]
    else:
        rest = m[:pos] + ((g, e - 1),) + m[pos + 1 :]
    return coeff, rest


def _mono_degree(gens: Sequence[Generator], m: Monomial) -> int:
    return sum(gens[g].degree * e for g, e in m)


def _mono_wordlen(m: Monomial) -> int:
    return sum(e for _g, e in m)


class GradedAlgebra:
    """A free graded-commutative polynomial algebra over Q(i)."""

    def __init__(self, gens: Iterable):
        self.gens: list = []
        self.by_name: dict = {}
        for spec in gens:
            name, degree = spec
            self._add_gen(name, degree)

    def _add_gen(self, name: str, degree: int):
        if name in self.by_name:
            raise ValueError("duplicate generator %r" % name)
        if name == "i":
            raise ValueError("'i' is reserved for the imaginary unit")
        g = Generator(name, int(degree), len(self.gens))
        self.gens.append(g)
        self.by_name[name] = g

    def extend(self, extra: Iterable) -> "GradedAlgebra":
        """New algebra with the same generators plus ``extra`` appended."""
        return GradedAlgebra(
            [(g.name, g.degree) for g in self.gens] + list(extra)
        )

    # -- constructors -------------------------------------------------

    def zero(self) -> "GradedPoly":
        return GradedPoly(self, {})

    def one(self) -> "GradedPoly":
        return self.scalar(1)

    def scalar(self, c) -> "GradedPoly":
        c = GaussRat.coerce(c)
        return GradedPoly(self, {(): c} if c else {})

    def gen(self, name: str) -> "GradedPoly":
        g = self.by_name.get(name)
        if g is None:
            raise KeyError("no generator %r" % name)
        return GradedPoly(self, {((g.index, 1),): GR_ONE})

    def poly(self, terms: Iterable) -> "GradedPoly":
        """Build and normalize a polynomial from raw terms.

        Each term is (coeff, factors) with factors an iterable of
        generator names or (name, exponent) pairs, in any order.
        """
        acc: dict = {}
        for coeff, factors in terms:
            coeff = GaussRat.coerce(coeff)
            sign = 1
            mono: Monomial = ()
            dead = False
            for f in factors:
                if isinstance(f, str):
                    name, e = f, 1
                else:
                    name, e = f
                if e < 0:
                    raise ValueError("negative exponent on %r" % name)
                if e == 0:
                    continue
                g = self.by_name[name]
                if g.parity and e > 1:
                    dead = True
                    break
                step = _mono_mul(self.gens, mono, ((g.index, e),))
                if step is None:
                    dead = True
                    break
                s, mono = step
                sign *= s
            if dead or not coeff:
                continue
            c = coeff * sign
            prev = acc.get(mono)
            tot = c if prev is None else prev + c
            if tot:
                acc[mono] = tot
            elif prev is not None:
                del acc[mono]
        return GradedPoly(self, acc)

    def transfer(self, p: "GradedPoly", target: "GradedAlgebra") -> "GradedPoly":
        """Reinterpret ``p`` in ``target`` by matching generator names."""
        out: dict = {}
        for mono, c in p.terms.items():
            factors = []
            for g, e in mono:
                name = self.gens[g].name
                tg = target.by_name.get(name)
                if tg is None:
                    raise KeyError("generator %r missing from target" % name)
                if tg.degree != self.gens[g].degree:
                    raise ValueError("degree changed for %r" % name)
                factors.append((tg.index, e))
            mono2: Monomial = ()
            sign = 1
            for f in factors:
                step = _mono_mul(target.gens, mono2, (f,))
                if step is None:  # pragma: no cover - degrees preserved
                    sign = 0
                    break
                s, mono2 = step
                sign *= s
            if sign == 0:
                continue
            prev = out.get(mono2, GR_ZERO)
            tot = prev + c * sign
            if tot:
                out[mono2] = tot
            elif mono2 in out:
                del out[mono2]
        return GradedPoly(target, out)

    def parse(self, text: str) -> "GradedPoly":
        return _Parser(self, text).parse()

    def __repr__(self):
        return "GradedAlgebra(%d generators)" % len(self.gens)


class GradedPoly:
    """Canonical-form polynomial in a GradedAlgebra.  Immutable by use."""

    __slots__ = ("alg", "terms")

    def __init__(self, alg: GradedAlgebra, terms: dict):
        self.alg = alg
        self.terms = terms

    # -- ring operations ----------------------------------------------

    def _check(self, other: "GradedPoly"):
        if self.alg is not other.alg:
            raise ValueError("polynomials from different algebras")

    def __add__(self, other):
        if isinstance(other, (int, Fraction, GaussRat)):
            other = self.alg.scalar(other)
        self._check(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            prev = out.get(m)
            tot = c if prev is None else prev + c
            if tot:
                out[m] = tot
            elif prev is not None:
                del out[m]
        return GradedPoly(self.alg, out)

    __radd__ = __add__

    def __neg__(self):
        return GradedPoly(self.alg, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, Fraction, GaussRat)):
            other = self.alg.scalar(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, GaussRat)):
            c = GaussRat.coerce(other)
            if not c:
                return self.alg.zero()
            return GradedPoly(
                self.alg, {m: v * c for m, v in self.terms.items()}
            )
        self._check(other)
        gens = self.alg.gens
        out: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                step = _mono_mul(gens, m1, m2)
                if step is None:
                    continue
                sign, m = step
                c = c1 * c2
                if sign < 0:
                    c = -c
                prev = out.get(m)
                tot = c if prev is None else prev + c
                if tot:
                    out[m] = tot
                elif prev is not None:
                    del out[m]
        return GradedPoly(self.alg, out)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction, GaussRat)):
            return self * other
        return NotImplemented

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power of a polynomial")
        out = self.alg.one()
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, GaussRat)):
            other = self.alg.scalar(other)
        if not isinstance(other, GradedPoly):
            return NotImplemented
        return self.alg is other.alg and self.terms == other.terms

    def __hash__(self):
        return hash((id(self.alg), frozenset(self.terms.items())))

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    # -- structure ----------------------------------------------------

    def degree(self):
        """Ghost degree if homogeneous, else None.  Zero poly: None."""
        degs = {_mono_degree(self.alg.gens, m) for m in self.terms}
        if len(degs) == 1:
            return degs.pop()
        return None

    def parity_parts(self):
        """Split into (even, odd) by degree parity."""
        ev: dict = {}
        od: dict = {}
        gens = self.alg.gens
        for m, c in self.terms.items():
            (od if _mono_degree(gens, m) % 2 else ev)[m] = c
        return GradedPoly(self.alg, ev), GradedPoly(self.alg, od)

    def max_word_length(self) -> int:
        return max((_mono_wordlen(m) for m in self.terms), default=0)

    def truncate(self, max_degree: int) -> "GradedPoly":
        """Drop all terms of total polynomial degree above ``max_degree``."""
        return GradedPoly(
            self.alg,
            {m: c for m, c in self.terms.items() if _mono_wordlen(m) <= max_degree},
        )

    def partial(self, name: str) -> "GradedPoly":
        """Left partial derivative with respect to a generator."""
        g = self.alg.by_name[name]
        out: dict = {}
        for m, c in self.terms.items():
            step = _mono_partial(self.alg.gens, m, g.index)
            if step is None:
                continue
            k, rest = step
            prev = out.get(rest, GR_ZERO)
            tot = prev + c * k
            if tot:
                out[rest] = tot
            elif rest in out:
                del out[rest]
        return GradedPoly(self.alg, out)

    def substitute(self, images: Mapping[str, "GradedPoly"]) -> "GradedPoly":
        """Algebra morphism sending each named generator to its image.

        Every image must be degree-homogeneous of the generator's
        degree (odd images square to zero automatically, so the
        substitution is well defined on the quotient).
        """
        for name, img in images.items():
            g = self.alg.by_name[name]
            if not img.is_zero() and img.degree() != g.degree:
                raise ValueError(
                    "substitution image for %r has degree %r, expected %d"
                    % (name, img.degree(), g.degree)
                )
        out = self.alg.zero()
        for m, c in self.terms.items():
            piece = self.alg.scalar(c)
            for g, e in m:
                name = self.alg.gens[g].name
                base = images.get(name)
                if base is None:
                    base = GradedPoly(self.alg, {((g, 1),): GR_ONE})
                for _ in range(e):
                    piece = piece * base
                if piece.is_zero():
                    break
            out = out + piece
        return out

    def coeff_norm(self) -> float:
        """Max |re|+|im| over coefficients; 0.0 for the zero polynomial."""
        return max((c.abs_norm() for c in self.terms.values()), default=0.0)

    def evaluate(self, env: Mapping[str, complex]) -> complex:
        """Numeric evaluation of the canonical form.

        Odd generators are substituted as plain numbers (body-level
        semantics: the sign bookkeeping already happened in the normal
        form, the caller supplies one number per generator).
        """
        total = 0j
        for m, c in self.terms.items():
            val = complex(c.re) + 1j * complex(c.im)
            for g, e in m:
                val *= env[self.alg.gens[g].name] ** e
            total += val
        return total

    def iter_terms(self) -> Iterator:
        """Yield (coeff, [(name, exp), ...]) in canonical order."""
        for m in sorted(self.terms):
            yield self.terms[m], [(self.alg.gens[g].name, e) for g, e in m]

    # -- text form ----------------------------------------------------

    def to_text(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for m in sorted(self.terms, key=lambda m: (_mono_wordlen(m), m)):
            c = self.terms[m]
            body = " ".join(
                self.alg.gens[g].name + ("^%d" % e if e > 1 else "")
                for g, e in m
            )
            neg, ctext = _fmt_coeff(c)
            if body:
                ctext = ctext + " * " + body
            parts.append((neg, ctext))
        first_neg, first = parts[0]
        out = ("-" if first_neg else "") + first
        for neg, text in parts[1:]:
            out += (" - " if neg else " + ") + text
        return out

    def __repr__(self):
        return "<GradedPoly %s>" % self.to_text()


def _fmt_coeff(c: GaussRat):
    """Return (is_negative, text-without-leading-sign)."""
    if c.im == 0:
        return c.re < 0, _fmt_frac(abs(c.re))
    if c.re == 0:
        return c.im < 0, _fmt_imag(abs(c.im))
    # mixed coefficient, parenthesized so it survives round trips
    im = c.im
    sign = "+" if im > 0 else "-"
    return False, "(%s %s %s)" % (_fmt_frac(c.re), sign, _fmt_imag(abs(im)))


def _fmt_frac(f: Fraction) -> str:
    return str(f)


def _fmt_imag(f: Fraction) -> str:
    if f == 1:
        return "i"
    return "%s i" % f


def iter_monomials(alg: GradedAlgebra, max_wordlen: int, degree=None):
    """All canonical monomial keys with total word length <= the bound.

    Word length counts exponents; odd generators contribute at most one
    factor.  With ``degree`` given, only monomials of that ghost degree
    are yielded.  Order is deterministic (lexicographic in the keys).
    """

    n = len(alg.gens)

    def rec(start: int, budget: int, acc: list):
        yield tuple(acc)
        for g in range(start, n):
            cap = 1 if alg.gens[g].parity else budget
            for e in range(1, cap + 1):
                if e > budget:
                    break
                acc.append((g, e))
                yield from rec(g + 1, budget - e, acc)
                acc.pop()

    for mono in rec(0, max_wordlen, []):
        if degree is None or _mono_degree(alg.gens, mono) == degree:
            yield mono


class ParseError(ValueError):
    def __init__(self, message: str, pos: int):
        super().__init__("%s (at offset %d)" % (message, pos))
        self.pos = pos


class _Parser:
    """Recursive-descent parser for the textual polynomial format.

    Grammar (whitespace-separated factors multiply):
        poly   := term (('+' | '-') term)*
        term   := factor (('*')? factor)*
        factor := rational | 'i' | ident ('^' int)? | '(' poly ')' ('^' int)?
    """

    def __init__(self, alg: GradedAlgebra, text: str):
        self.alg = alg
        self.text = text
        self.pos = 0

    def parse(self) -> GradedPoly:
        p = self.parse_poly()
        self.skip_ws()
        if self.pos != len(self.text):
            raise ParseError("trailing input", self.pos)
        return p

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self):
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def parse_poly(self) -> GradedPoly:
        acc = self.parse_term()
        while True:
            ch = self.peek()
            if ch == "+":
                self.pos += 1
                acc = acc + self.parse_term()
            elif ch == "-":
                self.pos += 1
                acc = acc - self.parse_term()
            else:
                return acc

    def parse_term(self) -> GradedPoly:
        sign = 1
        while self.peek() in ("+", "-"):
            if self.text[self.pos] == "-":
                sign = -sign
            self.pos += 1
        acc = self.parse_factor()
        while True:
            ch = self.peek()
            if ch == "*":
                self.pos += 1
                acc = acc * self.parse_factor()
            elif ch and (ch.isalnum() or ch == "_" or ch == "("):
                acc = acc * self.parse_factor()
            else:
                break
        return acc * sign if sign < 0 else acc

    def parse_factor(self) -> GradedPoly:
        ch = self.peek()
        if ch == "(":
            self.pos += 1
            inner = self.parse_poly()
            if self.peek() != ")":
                raise ParseError("expected ')'", self.pos)
            self.pos += 1
            return self._maybe_pow(inner)
        if ch.isdigit():
            num = self._read_int()
            if self.peek() == "/":
                self.pos += 1
                den = self._read_int()
                val = self.alg.scalar(Fraction(num, den))
            else:
                val = self.alg.scalar(num)
            # a bare rational immediately followed by 'i' is imaginary
            if self.peek() == "i" and not self._ident_continues(self.pos + 1):
                self.pos += 1
                return val * GR_I
            return val
        if ch.isalpha() or ch == "_":
            name = self._read_ident()
            if name == "i":
                return self.alg.scalar(GR_I)
            if name not in self.alg.by_name:
                raise ParseError("unknown generator %r" % name, self.pos)
            return self._maybe_pow(self.alg.gen(name))
        raise ParseError("unexpected character %r" % ch, self.pos)

    def _maybe_pow(self, base: GradedPoly) -> GradedPoly:
        if self.peek() == "^":
            self.pos += 1
            return base ** self._read_int()
        return base

    def _read_int(self) -> int:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if start == self.pos:
            raise ParseError("expected an integer", self.pos)
        return int(self.text[start : self.pos])

    def _read_ident(self) -> str:
        start = self.pos
        while self._ident_continues(self.pos):
            self.pos += 1
        return self.text[start : self.pos]

    def _ident_continues(self, pos: int) -> bool:
        if pos >= len(self.text):
            return False
        ch = self.text[pos]
        return ch.isalnum() or ch == "_"
