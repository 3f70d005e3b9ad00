"""Exact multivariate polynomials and rational functions over Q.

Polynomials are sparse: a map from exponent tuples to nonzero Fractions,
ordered graded-lexicographically where an order is needed.  Rational
functions canonicalize by content extraction, common-monomial removal and
(for small operands) a full primitive-PRS gcd; equality never relies on the
gcd having run, it always falls back to cross-multiplication.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd as int_gcd
from typing import Iterable, Mapping, Sequence

from .errors import (
    ExpressionSyntaxError,
    PoleError,
    UnknownVariableError,
    ZeroDenominatorError,
)

Exponents = tuple[int, ...]

# Full-gcd guard: the primitive PRS can blow up on many-variable operands,
# so normalization only attempts it for few active variables or small
# operands (content and monomial reduction always run; equality never
# depends on the gcd having fired).
GCD_TERM_LIMIT = 60
GCD_ACTIVE_VARS_LIMIT = 2


def _grlex(e: Exponents) -> tuple[int, Exponents]:
    return (sum(e), e)


class Polynomial:
    """Sparse multivariate polynomial with Fraction coefficients."""

    __slots__ = ("vars", "terms")

    def __init__(self, variables: Sequence[str], terms: Mapping[Exponents, Fraction] | None = None):
        self.vars = tuple(variables)
        clean: dict[Exponents, Fraction] = {}
        if terms:
            n = len(self.vars)
            for exps, coeff in terms.items():
                if len(exps) != n:
                    raise ValueError(f"exponent arity {len(exps)} != variable count {n}")
                if coeff:
                    clean[tuple(exps)] = Fraction(coeff)
        self.terms = clean

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls, variables: Sequence[str]) -> "Polynomial":
        return cls(variables)

    @classmethod
    def const(cls, variables: Sequence[str], value) -> "Polynomial":
        value = Fraction(value)
        if not value:
            return cls(variables)
        return cls(variables, {(0,) * len(variables): value})

    @classmethod
    def variable(cls, variables: Sequence[str], name: str) -> "Polynomial":
        variables = tuple(variables)
        if name not in variables:
            raise UnknownVariableError(f"unknown variable {name!r}")
        e = [0] * len(variables)
        e[variables.index(name)] = 1
        return cls(variables, {tuple(e): Fraction(1)})

    # -- basic queries ------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(sum(e) == 0 for e in self.terms)

    def constant_value(self) -> Fraction:
        if self.is_zero:
            return Fraction(0)
        if not self.is_constant():
            raise ValueError("polynomial is not constant")
        return next(iter(self.terms.values()))

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def degree_in(self, index: int) -> int:
        return max((e[index] for e in self.terms), default=0)

    def leading(self) -> tuple[Exponents, Fraction]:
        e = max(self.terms, key=_grlex)
        return e, self.terms[e]

    def _check(self, other: "Polynomial") -> None:
        if self.vars != other.vars:
            raise ValueError(f"variable mismatch: {self.vars} vs {other.vars}")

    # -- ring operations ----------------------------------------------

    def __add__(self, other: "Polynomial") -> "Polynomial":
        self._check(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out.get(e, 0) + c
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        p = Polynomial.__new__(Polynomial)
        p.vars, p.terms = self.vars, out
        return p

    def __neg__(self) -> "Polynomial":
        p = Polynomial.__new__(Polynomial)
        p.vars = self.vars
        p.terms = {e: -c for e, c in self.terms.items()}
        return p

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def __mul__(self, other) -> "Polynomial":
        if isinstance(other, (int, Fraction)):
            return self.scale(Fraction(other))
        self._check(other)
        out: dict[Exponents, Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                s = out.get(e, 0) + c1 * c2
                if s:
                    out[e] = s
                else:
                    out.pop(e, None)
        p = Polynomial.__new__(Polynomial)
        p.vars, p.terms = self.vars, out
        return p

    __rmul__ = __mul__

    def scale(self, c: Fraction) -> "Polynomial":
        if not c:
            return Polynomial(self.vars)
        p = Polynomial.__new__(Polynomial)
        p.vars = self.vars
        p.terms = {e: c * v for e, v in self.terms.items()}
        return p

    def __pow__(self, n: int) -> "Polynomial":
        if n < 0:
            raise ValueError("negative power of a polynomial")
        result = Polynomial.const(self.vars, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    def __eq__(self, other) -> bool:
        return isinstance(other, Polynomial) and self.vars == other.vars and self.terms == other.terms

    def __hash__(self):
        return hash((self.vars, frozenset(self.terms.items())))

    # -- calculus / evaluation -----------------------------------------

    def derivative(self, name: str) -> "Polynomial":
        i = self.vars.index(name)
        out: dict[Exponents, Fraction] = {}
        for e, c in self.terms.items():
            if e[i]:
                d = list(e)
                d[i] -= 1
                out[tuple(d)] = c * e[i]
        p = Polynomial.__new__(Polynomial)
        p.vars, p.terms = self.vars, out
        return p

    def evaluate(self, point: Mapping[str, Fraction]) -> Fraction:
        vals = [Fraction(point[v]) for v in self.vars]
        total = Fraction(0)
        for e, c in self.terms.items():
            term = c
            for v, k in zip(vals, e):
                if k:
                    term *= v**k
            total += term
        return total

    def substitute(self, mapping: Mapping[str, "Polynomial"]) -> "Polynomial":
        """Substitute polynomials for variables (all over the target ring)."""
        target = next(iter(mapping.values()))
        one = Polynomial.const(target.vars, 1)
        images = [mapping[v] for v in self.vars]
        total = Polynomial.zero(target.vars)
        for e, c in self.terms.items():
            term = one.scale(c)
            for img, k in zip(images, e):
                for _ in range(k):
                    term = term * img
            total = total + term
        return total

    # -- content and gcd ------------------------------------------------

    def content(self) -> Fraction:
        """Positive rational c with self = c * (primitive integer polynomial)."""
        if self.is_zero:
            return Fraction(1)
        num = 0
        den = 1
        for c in self.terms.values():
            num = int_gcd(num, c.numerator)
            den = den * c.denominator // int_gcd(den, c.denominator)
        return Fraction(num, den)

    def monomial_content(self) -> Exponents:
        mins = None
        for e in self.terms:
            mins = e if mins is None else tuple(map(min, mins, e))
            if not any(mins):
                break
        return mins or (0,) * len(self.vars)

    def divide_monomial(self, m: Exponents) -> "Polynomial":
        if not any(m):
            return self
        p = Polynomial.__new__(Polynomial)
        p.vars = self.vars
        p.terms = {tuple(a - b for a, b in zip(e, m)): c for e, c in self.terms.items()}
        return p

    def __repr__(self):
        return f"Polynomial({format_polynomial(self)!r})"


def _gcd_worthwhile(num: Polynomial, den: Polynomial) -> bool:
    if len(num.terms) + len(den.terms) <= GCD_TERM_LIMIT:
        return True
    den_active: set[int] = set()
    for e in den.terms:
        den_active.update(i for i, k in enumerate(e) if k)
    if len(den_active) <= 1:
        # common factors live in the denominator's single variable, so the
        # PRS runs univariately with few, shallow content recursions
        return True
    # otherwise only attempt the PRS when the joint support is small;
    # beyond that the content recursion dominates everything
    active = set(den_active)
    for e in num.terms:
        active.update(i for i, k in enumerate(e) if k)
    return len(active) <= GCD_ACTIVE_VARS_LIMIT


def exact_divide(a: Polynomial, b: Polynomial) -> Polynomial:
    """Quotient a/b when b divides a exactly; raises ValueError otherwise."""
    a._check(b)
    if b.is_zero:
        raise ZeroDenominatorError("division by zero polynomial")
    q = Polynomial.zero(a.vars)
    r = a
    eb, cb = b.leading()
    while not r.is_zero:
        er, cr = r.leading()
        diff = tuple(x - y for x, y in zip(er, eb))
        if any(d < 0 for d in diff):
            raise ValueError("inexact polynomial division")
        t = Polynomial(a.vars, {diff: cr / cb})
        q = q + t
        r = r - t * b
    return q


def _coeffs_in(p: Polynomial, i: int) -> dict[int, Polynomial]:
    """View p as univariate in variable i with polynomial coefficients."""
    out: dict[int, dict[Exponents, Fraction]] = {}
    for e, c in p.terms.items():
        k = e[i]
        rest = list(e)
        rest[i] = 0
        out.setdefault(k, {})[tuple(rest)] = c
    return {k: Polynomial(p.vars, t) for k, t in out.items()}


def _from_coeffs(coeffs: Mapping[int, Polynomial], i: int, variables) -> Polynomial:
    terms: dict[Exponents, Fraction] = {}
    for k, poly in coeffs.items():
        for e, c in poly.terms.items():
            d = list(e)
            d[i] += k
            terms[tuple(d)] = c
    return Polynomial(variables, terms)


def _poly_content_gcd(polys: Iterable[Polynomial]) -> Polynomial:
    acc = None
    for p in polys:
        if p.is_zero:
            continue
        acc = p if acc is None else polynomial_gcd(acc, p)
        if acc.is_constant():
            break
    if acc is None:
        raise ValueError("gcd of zero polynomials")
    return acc


def polynomial_gcd(a: Polynomial, b: Polynomial) -> Polynomial:
    """Primitive gcd via the subresultant-free primitive PRS.

    Exact but potentially slow for large inputs; callers gate it by size.
    Result is primitive with positive leading coefficient (grlex).
    """
    a._check(b)
    if a.is_zero and b.is_zero:
        raise ValueError("gcd(0, 0)")
    one = Polynomial.const(a.vars, 1)
    if a.is_zero or b.is_zero:
        g = b if a.is_zero else a
        return _make_primitive(g)
    if a.is_constant() or b.is_constant():
        return one
    # a nonconstant common factor only involves shared variables
    used = [i for i in range(len(a.vars)) if a.degree_in(i) and b.degree_in(i)]
    if not used:
        return one
    # main variable: smallest combined degree keeps the PRS short
    i = min(used, key=lambda j: a.degree_in(j) + b.degree_in(j))
    ca = _coeffs_in(a, i)
    cb = _coeffs_in(b, i)
    if len(ca) == 1 and 0 in ca:
        return polynomial_gcd(ca[0], _poly_content_gcd(cb.values()))
    if len(cb) == 1 and 0 in cb:
        return polynomial_gcd(cb[0], _poly_content_gcd(ca.values()))
    cont_a = _poly_content_gcd(ca.values())
    cont_b = _poly_content_gcd(cb.values())
    g_cont = polynomial_gcd(cont_a, cont_b)
    f = _primitive_in(a, i, cont_a)
    g = _primitive_in(b, i, cont_b)
    if f.degree_in(i) < g.degree_in(i):
        f, g = g, f
    while True:
        r = _pseudo_remainder(f, g, i)
        if r.is_zero:
            break
        r = _primitive_in(r, i, None)
        f, g = g, r
        if g.degree_in(i) == 0:
            g = one
            break
    return _make_primitive(g_cont * _make_primitive(g))


def _make_primitive(p: Polynomial) -> Polynomial:
    if p.is_zero:
        return p
    c = p.content()
    p = p.scale(1 / c)
    if p.leading()[1] < 0:
        p = -p
    return p


def _primitive_in(p: Polynomial, i: int, cont: Polynomial | None) -> Polynomial:
    coeffs = _coeffs_in(p, i)
    if cont is None:
        cont = _poly_content_gcd(coeffs.values())
    if cont.is_constant():
        return _make_primitive(p)
    reduced = {k: exact_divide(c, cont) for k, c in coeffs.items()}
    return _make_primitive(_from_coeffs(reduced, i, p.vars))


def _pseudo_remainder(f: Polynomial, g: Polynomial, i: int) -> Polynomial:
    df, dg = f.degree_in(i), g.degree_in(i)
    if df < dg:
        return f
    gc = _coeffs_in(g, i)
    lc = gc[dg]
    xi = Polynomial.variable(f.vars, f.vars[i])
    r = f
    while not r.is_zero and r.degree_in(i) >= dg:
        dr = r.degree_in(i)
        rc = _coeffs_in(r, i)[dr]
        r = lc * r - rc * (xi ** (dr - dg)) * g
    return r


class RationalFunction:
    """Quotient of two Polynomials, canonicalized on construction.

    Canonical policy: denominator is integer-primitive with positive grlex
    leading coefficient; common rational content and common monomial factors
    are removed; a full gcd reduction runs when both operands are small.
    Equality is decided by cross-multiplication, so it does not depend on
    whether the full gcd ran.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: Polynomial, den: Polynomial, reduce: bool = True):
        num._check(den)
        if den.is_zero:
            raise ZeroDenominatorError("zero denominator polynomial")
        if num.is_zero:
            self.num = num
            self.den = Polynomial.const(num.vars, 1)
            return
        m_num = num.monomial_content()
        m_den = den.monomial_content()
        m = tuple(map(min, m_num, m_den))
        if any(m):
            num = num.divide_monomial(m)
            den = den.divide_monomial(m)
        if reduce and not den.is_constant() and _gcd_worthwhile(num, den):
            g = polynomial_gcd(num, den)
            if not g.is_constant():
                num = exact_divide(num, g)
                den = exact_divide(den, g)
        cd = den.content()
        den = den.scale(1 / cd)
        if den.leading()[1] < 0:
            den = -den
            cd = -cd
        # all scalar factors fold into the numerator
        self.num = num.scale(1 / cd)
        self.den = den

    # -- constructors ---------------------------------------------------

    @classmethod
    def from_polynomial(cls, p: Polynomial) -> "RationalFunction":
        return cls(p, Polynomial.const(p.vars, 1), reduce=False)

    @classmethod
    def const(cls, variables: Sequence[str], value) -> "RationalFunction":
        return cls.from_polynomial(Polynomial.const(variables, value))

    @classmethod
    def variable(cls, variables: Sequence[str], name: str) -> "RationalFunction":
        return cls.from_polynomial(Polynomial.variable(variables, name))

    @property
    def vars(self) -> tuple[str, ...]:
        return self.num.vars

    @property
    def is_zero(self) -> bool:
        return self.num.is_zero

    def is_constant(self) -> bool:
        return self.num.is_constant() and self.den.is_constant()

    def constant_value(self) -> Fraction:
        return self.num.constant_value() / self.den.constant_value()

    def is_polynomial(self) -> bool:
        return self.den.is_constant()

    # -- field operations ------------------------------------------------

    def _coerce(self, other) -> "RationalFunction":
        if isinstance(other, RationalFunction):
            return other
        if isinstance(other, Polynomial):
            return RationalFunction.from_polynomial(other)
        return RationalFunction.const(self.vars, other)

    def __add__(self, other) -> "RationalFunction":
        other = self._coerce(other)
        if self.den == other.den:
            return RationalFunction(self.num + other.num, self.den)
        return RationalFunction(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self) -> "RationalFunction":
        out = RationalFunction.__new__(RationalFunction)
        out.num = -self.num
        out.den = self.den
        return out

    def __sub__(self, other) -> "RationalFunction":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "RationalFunction":
        return self._coerce(other) + (-self)

    def __mul__(self, other) -> "RationalFunction":
        other = self._coerce(other)
        return RationalFunction(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "RationalFunction":
        other = self._coerce(other)
        if other.is_zero:
            raise ZeroDenominatorError("division by zero rational function")
        return RationalFunction(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other) -> "RationalFunction":
        return self._coerce(other) / self

    def __pow__(self, n: int) -> "RationalFunction":
        if n < 0:
            return RationalFunction.const(self.vars, 1) / self ** (-n)
        return RationalFunction(self.num**n, self.den**n, reduce=False)

    def __eq__(self, other) -> bool:
        if not isinstance(other, (RationalFunction, Polynomial, int, Fraction)):
            return NotImplemented
        other = self._coerce(other)
        if self.num == other.num and self.den == other.den:
            return True
        return (self.num * other.den) == (other.num * self.den)

    def __hash__(self):
        raise TypeError("RationalFunction is unhashable; compare with ==")

    # -- calculus / evaluation --------------------------------------------

    def derivative(self, name: str) -> "RationalFunction":
        dn = self.num.derivative(name)
        dd = self.den.derivative(name)
        if dd.is_zero:
            return RationalFunction(dn, self.den)
        return RationalFunction(dn * self.den - self.num * dd, self.den * self.den)

    def evaluate(self, point: Mapping[str, Fraction]) -> Fraction:
        d = self.den.evaluate(point)
        if d == 0:
            raise PoleError(f"denominator vanishes at {dict(point)}")
        return self.num.evaluate(point) / d

    def normalize(self) -> "RationalFunction":
        """Force the full gcd reduction regardless of size limits."""
        g = polynomial_gcd(self.num, self.den)
        if g.is_constant():
            return self
        return RationalFunction(exact_divide(self.num, g), exact_divide(self.den, g), reduce=False)

    def __repr__(self):
        return f"RationalFunction({format_rational_function(self)!r})"


# ---------------------------------------------------------------------------
# formatting (canonical, parseable back by parse_expression)
# ---------------------------------------------------------------------------


def _format_fraction(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def format_polynomial(p: Polynomial) -> str:
    if p.is_zero:
        return "0"
    parts = []
    for e in sorted(p.terms, key=_grlex, reverse=True):
        c = p.terms[e]
        factors = [f"{v}^{k}" if k > 1 else v for v, k in zip(p.vars, e) if k]
        if not factors:
            body = _format_fraction(abs(c))
        else:
            mono = "*".join(factors)
            body = mono if abs(c) == 1 else f"{_format_fraction(abs(c))}*{mono}"
        parts.append(("-" if c < 0 else "+", body))
    sign, first = parts[0]
    text = ("-" if sign == "-" else "") + first
    for sign, body in parts[1:]:
        text += f" {sign} {body}"
    return text


def format_rational_function(f: RationalFunction) -> str:
    if f.den.is_constant() and f.den.constant_value() == 1:
        return format_polynomial(f.num)
    num = format_polynomial(f.num)
    den = format_polynomial(f.den)
    if len(f.num.terms) > 1:
        num = f"({num})"
    # the denominator binds the whole trailing factor: parenthesize unless
    # it is a single positive power of one variable or a plain integer
    if len(f.den.terms) > 1 or any(ch in den for ch in "*/-"):
        den = f"({den})"
    return f"{num}/{den}"


# ---------------------------------------------------------------------------
# expression parser
# ---------------------------------------------------------------------------

class _Token:
    __slots__ = ("kind", "text", "pos")

    def __init__(self, kind, text, pos):
        self.kind, self.text, self.pos = kind, text, pos


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(_Token("int", text[i:j], i))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(_Token("name", text[i:j], i))
            i = j
            continue
        if ch in "+-*/^()":
            tokens.append(_Token("op", ch, i))
            i += 1
            continue
        raise ExpressionSyntaxError(f"unexpected character {ch!r}", i)
    tokens.append(_Token("end", "", n))
    return tokens


class _Parser:
    """Recursive descent over: expr := term (± term)*, term := factor (*,/ factor)*,
    factor := (±)* atom (^ nat)*, atom := INT | NAME | ( expr )."""

    def __init__(self, text: str, variables: Sequence[str]):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.vars = tuple(variables)

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def next(self) -> _Token:
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def expect_op(self, op: str) -> None:
        t = self.next()
        if t.kind != "op" or t.text != op:
            found = repr(t.text) if t.text else "end of input"
            raise ExpressionSyntaxError(f"expected {op!r}, found {found}", t.pos)

    def parse(self) -> RationalFunction:
        value = self.expr()
        t = self.peek()
        if t.kind != "end":
            raise ExpressionSyntaxError(f"unexpected trailing input {t.text!r}", t.pos)
        return value

    def expr(self) -> RationalFunction:
        value = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.next().text
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self) -> RationalFunction:
        value = self.factor()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.next().text
            rhs = self.factor()
            if op == "*":
                value = value * rhs
            else:
                if rhs.is_zero:
                    raise ZeroDenominatorError("division by zero in expression")
                value = value / rhs
        return value

    def factor(self) -> RationalFunction:
        sign = 1
        while self.peek().kind == "op" and self.peek().text in "+-":
            if self.next().text == "-":
                sign = -sign
        value = self.atom()
        while self.peek().kind == "op" and self.peek().text == "^":
            self.next()
            t = self.next()
            if t.kind != "int":
                raise ExpressionSyntaxError("exponent must be a non-negative integer", t.pos)
            value = value ** int(t.text)
        return value if sign > 0 else -value

    def atom(self) -> RationalFunction:
        t = self.next()
        if t.kind == "int":
            return RationalFunction.const(self.vars, int(t.text))
        if t.kind == "name":
            if t.text not in self.vars:
                raise UnknownVariableError(f"unknown variable {t.text!r} (at position {t.pos})")
            return RationalFunction.variable(self.vars, t.text)
        if t.kind == "op" and t.text == "(":
            value = self.expr()
            self.expect_op(")")
            return value
        found = repr(t.text) if t.text else "end of input"
        raise ExpressionSyntaxError(f"unexpected token {found}", t.pos)


def parse_expression(text: str, variables: Sequence[str]) -> RationalFunction:
    """Parse an expression over the given variables into canonical form."""
    return _Parser(text, variables).parse()


def differentiate(f: RationalFunction, coordinate: str) -> RationalFunction:
    if coordinate not in f.vars:
        raise UnknownVariableError(f"unknown coordinate {coordinate!r}")
    return f.derivative(coordinate)


def evaluate(f: RationalFunction, point: Mapping[str, Fraction]) -> Fraction:
    return f.evaluate(point)
