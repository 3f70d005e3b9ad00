"""Truncated power series (jets) with exact rational coefficients.

An MJet stores terms up to a *total-degree* validity bound ``order``:
coefficients of total degree <= order are exact, everything above is
unknown and never stored.  All operations propagate the bound
conservatively, so exactness never has to be re-derived by the caller.

LaurentJet adds a finite pole in one distinguished variable: the value is
s^shift * (regular jet).  This is what division by quantities vanishing
like s^k produces (e.g. det(S_t - S_tau) ~ s^4).
"""

from __future__ import annotations

from fractions import Fraction
from math import isqrt
from typing import Callable, Mapping, Sequence

from .errors import OrderError, PoleError
from .ratfunc import Polynomial, RationalFunction

Exponents = tuple[int, ...]


def fraction_sqrt(c: Fraction) -> Fraction | None:
    """Exact square root of a rational, or None if it is not a square."""
    if c < 0:
        return None
    rn = isqrt(c.numerator)
    rd = isqrt(c.denominator)
    if rn * rn != c.numerator or rd * rd != c.denominator:
        return None
    return Fraction(rn, rd)


class MJet:
    """Multivariate truncated power series over Q."""

    __slots__ = ("vars", "order", "terms")

    def __init__(self, variables: Sequence[str], order: int, terms: Mapping[Exponents, Fraction] | None = None):
        self.vars = tuple(variables)
        self.order = int(order)
        clean: dict[Exponents, Fraction] = {}
        if terms:
            for e, c in terms.items():
                if c and sum(e) <= self.order:
                    clean[tuple(e)] = Fraction(c)
        self.terms = clean

    # -- constructors ---------------------------------------------------

    @classmethod
    def zero(cls, variables: Sequence[str], order: int) -> "MJet":
        return cls(variables, order)

    @classmethod
    def const(cls, variables: Sequence[str], value, order: int) -> "MJet":
        value = Fraction(value)
        if not value:
            return cls(variables, order)
        return cls(variables, order, {(0,) * len(variables): value})

    @classmethod
    def variable(cls, variables: Sequence[str], name: str, order: int) -> "MJet":
        e = [0] * len(variables)
        e[tuple(variables).index(name)] = 1
        return cls(variables, order, {tuple(e): Fraction(1)})

    # -- queries ----------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def constant_term(self) -> Fraction:
        return self.terms.get((0,) * len(self.vars), Fraction(0))

    def coefficient(self, exps: Exponents) -> Fraction:
        if sum(exps) > self.order:
            raise OrderError(f"coefficient {exps} beyond jet order {self.order}")
        return self.terms.get(tuple(exps), Fraction(0))

    def min_total_degree(self) -> int | None:
        """Smallest total degree with a nonzero coefficient, or None if zero jet."""
        return min((sum(e) for e in self.terms), default=None)

    def require_order(self, order: int) -> "MJet":
        if self.order < order:
            raise OrderError(f"jet order {self.order} < required {order}")
        return self

    def _check(self, other: "MJet") -> None:
        if self.vars != other.vars:
            raise ValueError(f"jet variable mismatch: {self.vars} vs {other.vars}")

    # -- arithmetic --------------------------------------------------------

    def truncate(self, order: int) -> "MJet":
        if order >= self.order:  # cannot gain validity, only drop it
            return self
        return MJet(self.vars, order, {e: c for e, c in self.terms.items() if sum(e) <= order})

    def __add__(self, other) -> "MJet":
        if isinstance(other, (int, Fraction)):
            other = MJet.const(self.vars, other, self.order)
        self._check(other)
        order = min(self.order, other.order)
        out = {e: c for e, c in self.terms.items() if sum(e) <= order}
        for e, c in other.terms.items():
            if sum(e) <= order:
                s = out.get(e, 0) + c
                if s:
                    out[e] = s
                else:
                    out.pop(e, None)
        j = MJet.__new__(MJet)
        j.vars, j.order, j.terms = self.vars, order, out
        return j

    __radd__ = __add__

    def __neg__(self) -> "MJet":
        j = MJet.__new__(MJet)
        j.vars, j.order = self.vars, self.order
        j.terms = {e: -c for e, c in self.terms.items()}
        return j

    def __sub__(self, other) -> "MJet":
        if isinstance(other, (int, Fraction)):
            other = MJet.const(self.vars, other, self.order)
        return self + (-other)

    def __rsub__(self, other) -> "MJet":
        return (-self) + other

    def __mul__(self, other) -> "MJet":
        if isinstance(other, (int, Fraction)):
            return self.scale(Fraction(other))
        self._check(other)
        order = min(self.order, other.order)
        out: dict[Exponents, Fraction] = {}
        for e1, c1 in self.terms.items():
            d1 = sum(e1)
            if d1 > order:
                continue
            for e2, c2 in other.terms.items():
                if d1 + sum(e2) > order:
                    continue
                e = tuple(a + b for a, b in zip(e1, e2))
                s = out.get(e, 0) + c1 * c2
                if s:
                    out[e] = s
                else:
                    out.pop(e, None)
        j = MJet.__new__(MJet)
        j.vars, j.order, j.terms = self.vars, order, out
        return j

    __rmul__ = __mul__

    def __truediv__(self, other) -> "MJet":
        if isinstance(other, (int, Fraction)):
            return self.scale(Fraction(1, 1) / Fraction(other))
        return self * other.invert()

    def scale(self, c) -> "MJet":
        c = Fraction(c)
        j = MJet.__new__(MJet)
        j.vars, j.order = self.vars, self.order
        j.terms = {} if not c else {e: c * v for e, v in self.terms.items()}
        return j

    def __pow__(self, n: int) -> "MJet":
        if n < 0:
            raise ValueError("negative jet power; use invert")
        result = MJet.const(self.vars, 1, self.order)
        for _ in range(n):
            result = result * self
        return result

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = MJet.const(self.vars, other, self.order)
        return isinstance(other, MJet) and self.vars == other.vars and self.terms == other.terms

    def __hash__(self):
        raise TypeError("MJet is unhashable")

    # -- calculus -----------------------------------------------------------

    def derivative(self, name: str) -> "MJet":
        i = self.vars.index(name)
        out: dict[Exponents, Fraction] = {}
        for e, c in self.terms.items():
            if e[i]:
                d = list(e)
                d[i] -= 1
                out[tuple(d)] = c * e[i]
        j = MJet.__new__(MJet)
        j.vars, j.order, j.terms = self.vars, self.order - 1, out
        return j

    def integrate(self, name: str) -> "MJet":
        """Antiderivative with zero constant term."""
        i = self.vars.index(name)
        out: dict[Exponents, Fraction] = {}
        for e, c in self.terms.items():
            d = list(e)
            d[i] += 1
            out[tuple(d)] = c / d[i]
        return MJet(self.vars, self.order + 1, out)

    def invert(self) -> "MJet":
        c0 = self.constant_term()
        if c0 == 0:
            raise PoleError("cannot invert a jet with zero constant term")
        n = (self.scale(1 / c0)) - 1
        inv = MJet.const(self.vars, 1, self.order)
        one = MJet.const(self.vars, 1, self.order)
        for _ in range(self.order):
            inv = one - n * inv
            if n.is_zero:
                break
        return inv.scale(1 / c0)

    def sqrt(self) -> "MJet":
        """Square root of a unit jet whose constant term is a rational square."""
        c0 = self.constant_term()
        s0 = fraction_sqrt(c0)
        if s0 is None or s0 == 0:
            raise PoleError(f"jet constant term {c0} is not a nonzero rational square")
        x = self.scale(1 / c0) - 1
        y = MJet.zero(self.vars, self.order)
        for _ in range(self.order + 1):
            y = (x - y * y).scale(Fraction(1, 2))
        return (y + 1).scale(s0)

    def compose(self, images: Mapping[str, "MJet"]) -> "MJet":
        """Substitute jets (with zero constant term) for this jet's variables."""
        target = next(iter(images.values()))
        order = min([self.order] + [img.order for img in images.values()])
        for v in self.vars:
            if images[v].constant_term() != 0:
                raise ValueError("composition image must have zero constant term")
        powers: dict[str, list[MJet]] = {}

        def power(v: str, k: int) -> MJet:
            cache = powers.setdefault(v, [MJet.const(target.vars, 1, order), images[v].truncate(order)])
            while len(cache) <= k:
                cache.append(cache[-1] * cache[1])
            return cache[k]

        total = MJet.zero(target.vars, order)
        for e, c in self.terms.items():
            if sum(e) > order:
                continue
            term = MJet.const(target.vars, c, order)
            for v, k in zip(self.vars, e):
                if k:
                    term = term * power(v, k)
            total = total + term
        return total

    def exp(self) -> "MJet":
        if self.constant_term() != 0:
            raise ValueError("exp needs zero constant term")
        result = MJet.const(self.vars, 1, self.order)
        term = MJet.const(self.vars, 1, self.order)
        for k in range(1, self.order + 1):
            term = term * self.scale(Fraction(1, k))
            if term.is_zero:
                break
            result = result + term
        return result

    def evaluate(self, point: Mapping[str, Fraction]) -> Fraction:
        total = Fraction(0)
        vals = [Fraction(point[v]) for v in self.vars]
        for e, c in self.terms.items():
            term = c
            for v, k in zip(vals, e):
                if k:
                    term *= v**k
            total += term
        return total

    def map_coefficients(self, fn: Callable[[Fraction], Fraction]) -> "MJet":
        return MJet(self.vars, self.order, {e: fn(c) for e, c in self.terms.items()})

    def __repr__(self):
        inner = " + ".join(
            f"{c}*" + "*".join(f"{v}^{k}" for v, k in zip(self.vars, e) if k)
            for e, c in sorted(self.terms.items())
        )
        return f"MJet[{','.join(self.vars)}; O({self.order})]({inner or '0'})"


def jet_of_rational(f: RationalFunction, point: Mapping[str, Fraction], order: int,
                    offset_names: Sequence[str] | None = None) -> MJet:
    """Taylor-expand a rational function at a non-pole point.

    The returned jet is in offset variables (x_i - point_i); by default they
    keep the original coordinate names.
    """
    names = tuple(offset_names) if offset_names is not None else f.vars
    num = _shift_polynomial(f.num, point, names, order)
    den = _shift_polynomial(f.den, point, names, order)
    if den.constant_term() == 0:
        raise PoleError(f"pole at {dict(point)}")
    return num * den.invert()


def _shift_polynomial(p: Polynomial, point: Mapping[str, Fraction], names: Sequence[str], order: int) -> MJet:
    jet = MJet.const(names, 0, order)
    powers: dict[int, list[MJet]] = {}

    def power(i: int, k: int) -> MJet:
        base = MJet(names, order, {
            (0,) * len(names): Fraction(point[p.vars[i]]),
            tuple(1 if j == i else 0 for j in range(len(names))): Fraction(1),
        })
        cache = powers.setdefault(i, [MJet.const(names, 1, order), base])
        while len(cache) <= k:
            cache.append(cache[-1] * cache[1])
        return cache[k]

    for e, c in p.terms.items():
        term = MJet.const(names, c, order)
        for i, k in enumerate(e):
            if k:
                term = term * power(i, k)
        jet = jet + term
    return jet


class LaurentJet:
    """s^shift * (regular MJet), Laurent in the first jet variable only."""

    __slots__ = ("shift", "jet")

    def __init__(self, shift: int, jet: MJet, normalize: bool = True):
        self.shift = int(shift)
        self.jet = jet
        if normalize:
            self._normalize()

    def _normalize(self) -> None:
        if self.jet.is_zero:
            self.shift = 0
            return
        m = min(e[0] for e in self.jet.terms)
        if m:
            terms = {(e[0] - m,) + e[1:]: c for e, c in self.jet.terms.items()}
            self.jet = MJet(self.jet.vars, self.jet.order - m, terms)
            self.shift += m

    # -- constructors -----------------------------------------------------

    @classmethod
    def from_jet(cls, jet: MJet) -> "LaurentJet":
        return cls(0, jet)

    @property
    def svar(self) -> str:
        return self.jet.vars[0]

    @property
    def is_zero(self) -> bool:
        return self.jet.is_zero

    def order_of_pole(self) -> int:
        """Lowest s-power present (negative means an actual pole)."""
        if self.jet.is_zero:
            raise ValueError("zero Laurent jet has no pole order")
        return self.shift + min(e[0] for e in self.jet.terms)

    def _raised(self, d: int) -> MJet:
        """Multiply the regular part by s^d (d >= 0), keeping exactness."""
        if d == 0:
            return self.jet
        terms = {(e[0] + d,) + e[1:]: c for e, c in self.jet.terms.items()}
        return MJet(self.jet.vars, self.jet.order + d, terms)

    # -- arithmetic ---------------------------------------------------------

    def _coerce(self, other) -> "LaurentJet":
        if isinstance(other, LaurentJet):
            return other
        if isinstance(other, MJet):
            return LaurentJet.from_jet(other)
        return LaurentJet.from_jet(MJet.const(self.jet.vars, other, self.jet.order))

    def __add__(self, other) -> "LaurentJet":
        other = self._coerce(other)
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        shift = min(self.shift, other.shift)
        a = self._raised(self.shift - shift)
        b = other._raised(other.shift - shift)
        return LaurentJet(shift, a + b)

    __radd__ = __add__

    def __neg__(self) -> "LaurentJet":
        return LaurentJet(self.shift, -self.jet, normalize=False)

    def __sub__(self, other) -> "LaurentJet":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "LaurentJet":
        return self._coerce(other) + (-self)

    def __mul__(self, other) -> "LaurentJet":
        if isinstance(other, (int, Fraction)):
            return LaurentJet(self.shift, self.jet.scale(other), normalize=False)
        other = self._coerce(other)
        return LaurentJet(self.shift + other.shift, self.jet * other.jet)

    __rmul__ = __mul__

    def invert(self) -> "LaurentJet":
        if self.is_zero:
            raise PoleError("cannot invert zero Laurent jet")
        if self.jet.constant_term() == 0:
            raise PoleError("regular part is not a unit (mixed-variable leading term)")
        return LaurentJet(-self.shift, self.jet.invert())

    def __truediv__(self, other) -> "LaurentJet":
        return self * self._coerce(other).invert()

    def sqrt(self) -> "LaurentJet":
        if self.shift % 2:
            raise PoleError("Laurent jet of odd order has no series square root")
        return LaurentJet(self.shift // 2, self.jet.sqrt())

    def derivative_s(self) -> "LaurentJet":
        terms: dict[Exponents, Fraction] = {}
        for e, c in self.jet.terms.items():
            k = self.shift + e[0]
            if k:
                terms[e] = c * k
        return LaurentJet(self.shift - 1, MJet(self.jet.vars, self.jet.order, terms))

    # -- extraction -----------------------------------------------------------

    def coefficient_of_spower(self, power: int) -> MJet:
        """Coefficient of s^power as a jet in the remaining variables."""
        rel = power - self.shift
        rest_vars = self.jet.vars[1:]
        order = self.jet.order - max(rel, 0)
        if rel < 0:
            return MJet.zero(rest_vars, self.jet.order)
        terms = {e[1:]: c for e, c in self.jet.terms.items() if e[0] == rel}
        return MJet(rest_vars, order, terms)

    def to_mjet(self) -> MJet:
        if self.is_zero:
            return self.jet
        if self.shift < 0:
            raise PoleError(f"Laurent jet has a pole of order {-self.order_of_pole()}")
        return self._raised(self.shift)

    def truncate_spowers(self, max_power: int) -> "LaurentJet":
        terms = {e: c for e, c in self.jet.terms.items() if self.shift + e[0] <= max_power}
        return LaurentJet(self.shift, MJet(self.jet.vars, self.jet.order, terms), normalize=False)

    def __repr__(self):
        return f"Laurent(s^{self.shift} * {self.jet!r})"


def laurent_split(jet: MJet) -> tuple[int, MJet]:
    """Split a jet in its first variable as s^k * unit; returns (k, unit part).

    The unit part has a nonzero constant term.  Raises OrderError when the
    jet vanishes identically to its stated order.
    """
    if jet.is_zero:
        raise OrderError("jet is zero to its stated order; vanishing order unknown")
    lj = LaurentJet.from_jet(jet)
    if lj.jet.constant_term() == 0:
        raise OrderError("leading s-coefficient vanishes at the expansion center")
    return lj.shift, lj.jet


def series_arith(a: MJet, b: MJet, op: str) -> MJet:
    """Convenience dispatcher for +, -, *, / on jets of matching kind."""
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        return a * b.invert()
    raise ValueError(f"unknown series operation {op!r}")


def series_invert_unit(a: MJet) -> MJet:
    return a.invert()


def series_compose(a: MJet, b: MJet) -> MJet:
    """Compose a univariate jet with a (zero constant term) univariate jet."""
    if len(a.vars) != 1:
        raise ValueError("series_compose expects a univariate outer jet")
    return a.compose({a.vars[0]: b})
