"""Cotangent-fiber layer over an adapted frame.

Quasi-impulses u_i = p(X_i) serve as fiber coordinates.  With the sign
convention sigma = -sum(du_i ^ omega^i + u_i d omega^i) the Hamiltonian
lift of u_m is X_m + sum_j (sum_i c(j,m,i) u_i) d/du_j, which fixes the
Poisson table {u_i, u_j} = sum_k c(j,i,k) u_k and the closed form of the
characteristic derivation h = u4*lift(u2) - u5*lift(u1).  Everything past
the lifts is computed on the locus u1 = u2 = u3 = 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .errors import ConventionError, TangencyError
from .fields import Frame, StructuralFunctions, VectorField, structural_functions
from .ratfunc import Polynomial, RationalFunction

UVARS = ("u1", "u2", "u3", "u4", "u5")
UExp = tuple[int, int, int, int, int]


def _rf_zero(coords: Sequence[str]) -> RationalFunction:
    return RationalFunction.const(coords, 0)


class FiberPolynomial:
    """Polynomial in u1..u5 with rational-function base coefficients."""

    __slots__ = ("coords", "terms")

    def __init__(self, coords: Sequence[str], terms: Mapping[UExp, RationalFunction] | None = None):
        self.coords = tuple(coords)
        clean: dict[UExp, RationalFunction] = {}
        if terms:
            for e, c in terms.items():
                if len(e) != 5:
                    raise ValueError("fiber exponents are 5-tuples over u1..u5")
                if not c.is_zero:
                    clean[tuple(e)] = c
        self.terms = clean

    # -- constructors -----------------------------------------------------

    @classmethod
    def zero(cls, coords: Sequence[str]) -> "FiberPolynomial":
        return cls(coords)

    @classmethod
    def u_var(cls, coords: Sequence[str], i: int) -> "FiberPolynomial":
        e = [0] * 5
        e[i - 1] = 1
        return cls(coords, {tuple(e): RationalFunction.const(coords, 1)})

    @classmethod
    def from_u45(cls, coords: Sequence[str], table: Mapping[tuple[int, int], RationalFunction]) -> "FiberPolynomial":
        return cls(coords, {(0, 0, 0, a, b): c for (a, b), c in table.items()})

    @classmethod
    def scalar(cls, coords: Sequence[str], value) -> "FiberPolynomial":
        c = value if isinstance(value, RationalFunction) else RationalFunction.const(coords, value)
        return cls(coords, {(0, 0, 0, 0, 0): c})

    # -- ring operations -----------------------------------------------------

    def __add__(self, other: "FiberPolynomial") -> "FiberPolynomial":
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out[e] + c if e in out else c
            if s.is_zero:
                out.pop(e, None)
            else:
                out[e] = s
        p = FiberPolynomial.__new__(FiberPolynomial)
        p.coords, p.terms = self.coords, out
        return p

    def __neg__(self) -> "FiberPolynomial":
        p = FiberPolynomial.__new__(FiberPolynomial)
        p.coords = self.coords
        p.terms = {e: -c for e, c in self.terms.items()}
        return p

    def __sub__(self, other: "FiberPolynomial") -> "FiberPolynomial":
        return self + (-other)

    def __mul__(self, other) -> "FiberPolynomial":
        if isinstance(other, (int, Fraction, RationalFunction)):
            return self.scale(other)
        out: dict[UExp, RationalFunction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                prod = c1 * c2
                if e in out:
                    s = out[e] + prod
                    if s.is_zero:
                        del out[e]
                    else:
                        out[e] = s
                elif not prod.is_zero:
                    out[e] = prod
        p = FiberPolynomial.__new__(FiberPolynomial)
        p.coords, p.terms = self.coords, out
        return p

    __rmul__ = __mul__

    def scale(self, f) -> "FiberPolynomial":
        if not isinstance(f, RationalFunction):
            f = RationalFunction.const(self.coords, f)
        if f.is_zero:
            return FiberPolynomial(self.coords)
        p = FiberPolynomial.__new__(FiberPolynomial)
        p.coords = self.coords
        p.terms = {e: f * c for e, c in self.terms.items()}
        return p

    def __eq__(self, other) -> bool:
        if not isinstance(other, FiberPolynomial):
            return NotImplemented
        zero = _rf_zero(self.coords)
        keys = set(self.terms) | set(other.terms)
        return all(self.terms.get(e, zero) == other.terms.get(e, zero) for e in keys)

    def __hash__(self):
        raise TypeError("FiberPolynomial is unhashable")

    # -- structure ----------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def restrict(self) -> "FiberPolynomial":
        """Drop every monomial containing u1, u2 or u3."""
        return FiberPolynomial(self.coords, {e: c for e, c in self.terms.items() if e[0] == e[1] == e[2] == 0})

    def is_restricted(self) -> bool:
        return all(e[0] == e[1] == e[2] == 0 for e in self.terms)

    def u_degrees(self) -> set[int]:
        return {sum(e) for e in self.terms}

    def is_homogeneous(self, degree: int) -> bool:
        return self.is_zero or self.u_degrees() == {degree}

    def coefficient_u45(self, a: int, b: int) -> RationalFunction:
        return self.terms.get((0, 0, 0, a, b), _rf_zero(self.coords))

    def du(self, i: int) -> "FiberPolynomial":
        """Partial derivative in u_i (1-based)."""
        out: dict[UExp, RationalFunction] = {}
        for e, c in self.terms.items():
            if e[i - 1]:
                d = list(e)
                d[i - 1] -= 1
                out[tuple(d)] = c * e[i - 1]
        return FiberPolynomial(self.coords, out)

    def base_derive(self, x: VectorField) -> "FiberPolynomial":
        """Apply a base vector field to every coefficient."""
        out = {e: x.apply(c) for e, c in self.terms.items()}
        return FiberPolynomial(self.coords, {e: c for e, c in out.items() if not c.is_zero})

    def substitute_u(self, matrix: Sequence[Sequence[Fraction]]) -> "FiberPolynomial":
        """Linear substitution on (u4, u5): u4 -> m00 u4 + m01 u5, u5 -> m10 u4 + m11 u5.

        Only valid on restricted polynomials.
        """
        if not self.is_restricted():
            raise ValueError("substitute_u needs a restricted polynomial")
        u4 = FiberPolynomial.from_u45(self.coords, {
            (1, 0): RationalFunction.const(self.coords, matrix[0][0]),
            (0, 1): RationalFunction.const(self.coords, matrix[0][1]),
        })
        u5 = FiberPolynomial.from_u45(self.coords, {
            (1, 0): RationalFunction.const(self.coords, matrix[1][0]),
            (0, 1): RationalFunction.const(self.coords, matrix[1][1]),
        })
        total = FiberPolynomial.zero(self.coords)
        for e, c in self.terms.items():
            term = FiberPolynomial.scalar(self.coords, c)
            for _ in range(e[3]):
                term = term * u4
            for _ in range(e[4]):
                term = term * u5
            total = total + term
        return total

    def evaluate(self, point: Mapping[str, Fraction], uvals: Sequence[Fraction]) -> Fraction:
        """Value at a base point and fiber values (u1..u5 or just (u4, u5))."""
        if len(uvals) == 2:
            uvals = (Fraction(0), Fraction(0), Fraction(0), *uvals)
        total = Fraction(0)
        for e, c in self.terms.items():
            v = c.evaluate(point)
            for u, k in zip(uvals, e):
                if k:
                    v *= Fraction(u) ** k
            total += v
        return total

    def __repr__(self):
        from .ratfunc import format_rational_function

        bits = []
        for e in sorted(self.terms, key=lambda e: (sum(e), e), reverse=True):
            mono = "*".join(f"{v}^{k}" if k > 1 else v for v, k in zip(UVARS, e) if k)
            bits.append(f"({format_rational_function(self.terms[e])})" + (f"*{mono}" if mono else ""))
        return " + ".join(bits) or "0"


def poisson_bracket(i: int, j: int, c: StructuralFunctions) -> FiberPolynomial:
    """{u_i, u_j} = sum_k c(j, i, k) u_k (unrestricted)."""
    coords = c.frame.coords
    acc = FiberPolynomial.zero(coords)
    for k in range(1, 6):
        coeff = c.c(j, i, k)
        if not coeff.is_zero:
            acc = acc + FiberPolynomial.u_var(coords, k).scale(coeff)
    return acc


def poisson_bracket_restricted(i: int, j: int, c: StructuralFunctions) -> FiberPolynomial:
    """{u_i, u_j} on the locus u1=u2=u3=0: only the u4, u5 rows contribute."""
    coords = c.frame.coords
    acc = FiberPolynomial.zero(coords)
    for k in (4, 5):
        coeff = c.c(j, i, k)
        if not coeff.is_zero:
            acc = acc + FiberPolynomial.u_var(coords, k).scale(coeff)
    return acc


@dataclass
class EulerField:
    """Fiber dilation u4 d/du4 + u5 d/du5 on the restricted chart."""

    coords: tuple[str, ...]

    def apply(self, f: FiberPolynomial) -> FiberPolynomial:
        u4 = FiberPolynomial.u_var(self.coords, 4)
        u5 = FiberPolynomial.u_var(self.coords, 5)
        return u4 * f.du(4) + u5 * f.du(5)


class HField:
    """Characteristic derivation on the annihilator of the square of D.

    Acts on restricted fiber polynomials as
    h(f) = u4 X2(f) - u5 X1(f) + p4 * df/du4 + p5 * df/du5,
    with p4, p5 the closed-form quadratic fiber components.
    """

    def __init__(self, frame: Frame, ctable: StructuralFunctions):
        self.frame = frame
        self.ctable = ctable
        coords = frame.coords
        c = ctable.c
        u4sq = FiberPolynomial.from_u45(coords, {(2, 0): RationalFunction.const(coords, 1)})
        u4u5 = FiberPolynomial.from_u45(coords, {(1, 1): RationalFunction.const(coords, 1)})
        u5sq = FiberPolynomial.from_u45(coords, {(0, 2): RationalFunction.const(coords, 1)})
        self.p4 = (u4sq.scale(c(4, 2, 4)) + u4u5.scale(c(4, 2, 5) - c(4, 1, 4)) - u5sq.scale(c(4, 1, 5)))
        self.p5 = (u4sq.scale(c(5, 2, 4)) + u4u5.scale(c(5, 2, 5) - c(5, 1, 4)) - u5sq.scale(c(5, 1, 5)))
        self._self_check()

    def _self_check(self) -> None:
        # tangency to the locus u1=u2=u3=0: h(u_m) must restrict to zero
        coords = self.frame.coords
        with self.ctable.paused():
            for m in (1, 2, 3):
                hum = (FiberPolynomial.u_var(coords, 4) * poisson_bracket(2, m, self.ctable)
                       - FiberPolynomial.u_var(coords, 5) * poisson_bracket(1, m, self.ctable))
                if not hum.restrict().is_zero:
                    raise TangencyError(
                        f"h(u{m}) does not vanish on the locus; frame is not adapted or a convention broke"
                    )

    def apply(self, f: FiberPolynomial) -> FiberPolynomial:
        if not f.is_restricted():
            raise ValueError("h acts on restricted fiber polynomials")
        u4 = FiberPolynomial.u_var(self.frame.coords, 4)
        u5 = FiberPolynomial.u_var(self.frame.coords, 5)
        out = u4 * f.base_derive(self.frame.field(2)) - u5 * f.base_derive(self.frame.field(1))
        out = out + self.p4 * f.du(4) + self.p5 * f.du(5)
        return out.restrict()

    def apply_n(self, f: FiberPolynomial, n: int) -> FiberPolynomial:
        for _ in range(n):
            f = self.apply(f)
        return f


def h_field(frame: Frame, ctable: StructuralFunctions | None = None) -> HField:
    if ctable is None:
        ctable = structural_functions(frame)
    return HField(frame, ctable)


def h_apply(h: HField, f: FiberPolynomial) -> FiberPolynomial:
    return h.apply(f)


def alpha(i: int, c: StructuralFunctions) -> FiberPolynomial:
    """Quadratic fiber coefficient: c_52^i u4^2 - (c_42^i + c_51^i) u4 u5 + c_41^i u5^2."""
    coords = c.frame.coords
    return FiberPolynomial.from_u45(coords, {
        (2, 0): c.c(5, 2, i),
        (1, 1): -(c.c(4, 2, i) + c.c(5, 1, i)),
        (0, 2): c.c(4, 1, i),
    })


def b_scalars(c: StructuralFunctions) -> tuple[FiberPolynomial, FiberPolynomial]:
    """(b, b1): the degree-1 scalars of the moving-frame normalization."""
    coords = c.frame.coords
    third = Fraction(1, 3)
    b = FiberPolynomial.from_u45(coords, {
        (1, 0): (c.c(4, 2, 4) + c.c(5, 2, 5)) * third,
        (0, 1): -(c.c(4, 1, 4) + c.c(5, 1, 5)) * third,
    })
    b1 = FiberPolynomial.from_u45(coords, {
        (1, 0): c.c(3, 2, 3),
        (0, 1): -c.c(3, 1, 3),
    })
    return b, b1


def b_from_gamma(frame: Frame, ctable: StructuralFunctions, branch: str) -> FiberPolynomial:
    """Recompute b from its normalization-dependent definition.

    branch "u5": gamma4 = 1/u5, gamma5 = 0;  branch "u4": gamma4 = 0,
    gamma5 = -1/u4.  Both must reproduce the closed linear form.  The
    computation runs in the rational-function field over (base, u4, u5).
    """
    coords = frame.coords
    ext = coords + ("u4", "u5")

    def lift_rf(f: RationalFunction) -> RationalFunction:
        num = Polynomial(ext, {e + (0, 0): c for e, c in f.num.terms.items()})
        den = Polynomial(ext, {e + (0, 0): c for e, c in f.den.terms.items()})
        return RationalFunction(num, den, reduce=False)

    def lift_fp(f: FiberPolynomial) -> RationalFunction:
        acc = RationalFunction.const(ext, 0)
        u4 = RationalFunction.variable(ext, "u4")
        u5 = RationalFunction.variable(ext, "u5")
        for e, c in f.terms.items():
            if e[0] or e[1] or e[2]:
                raise ValueError("restricted polynomial required")
            acc = acc + lift_rf(c) * u4 ** e[3] * u5 ** e[4]
        return acc

    h = h_field(frame, ctable)
    p4 = lift_fp(h.p4)
    p5 = lift_fp(h.p5)
    x1 = frame.field(1)
    x2 = frame.field(2)

    def h_ext(f: RationalFunction) -> RationalFunction:
        u4 = RationalFunction.variable(ext, "u4")
        u5 = RationalFunction.variable(ext, "u5")
        base = RationalFunction.const(ext, 0)
        for comp, name in zip(x2.comps, coords):
            base = base + lift_rf(comp) * f.derivative(name) * u4
        for comp, name in zip(x1.comps, coords):
            base = base - lift_rf(comp) * f.derivative(name) * u5
        return base + p4 * f.derivative("u4") + p5 * f.derivative("u5")

    u4 = RationalFunction.variable(ext, "u4")
    u5 = RationalFunction.variable(ext, "u5")
    one = RationalFunction.const(ext, 1)
    if branch == "u5":
        g4, g5 = one / u5, RationalFunction.const(ext, 0)
    elif branch == "u4":
        g4, g5 = RationalFunction.const(ext, 0), -(one / u4)
    else:
        raise ValueError("branch must be 'u4' or 'u5'")
    if not (g4 * u5 - g5 * u4) == one:
        raise ConventionError("gamma normalization failed")
    a4 = lift_fp(alpha(4, ctable).restrict())
    a5 = lift_fp(alpha(5, ctable).restrict())
    b_ext = -(h_ext(g4) * u5 - h_ext(g5) * u4 + a4 * g4 + a5 * g5) * Fraction(1, 3)

    # result is linear in (u4, u5): read the two coefficients back off
    coeff4 = b_ext.derivative("u4")
    coeff5 = b_ext.derivative("u5")
    for cf in (coeff4, coeff5):
        if not (cf.derivative("u4").is_zero and cf.derivative("u5").is_zero):
            raise ConventionError("b from the gamma branch is not linear in (u4, u5)")

    def subst_u(p: Polynomial, a: Fraction, b: Fraction) -> Polynomial:
        terms: dict[tuple[int, ...], Fraction] = {}
        for e, c in p.terms.items():
            val = c * a ** e[-2] * b ** e[-1]
            if val:
                key = e[:-2]
                s = terms.get(key, 0) + val
                if s:
                    terms[key] = s
                else:
                    terms.pop(key, None)
        return Polynomial(coords, terms)

    def drop(f: RationalFunction) -> RationalFunction:
        # f is independent of (u4, u5); evaluate them at any non-pole pair
        for a, b in ((Fraction(0), Fraction(0)), (Fraction(1), Fraction(1)),
                     (Fraction(1), Fraction(0)), (Fraction(0), Fraction(1)),
                     (Fraction(2), Fraction(3)), (Fraction(3), Fraction(5))):
            den = subst_u(f.den, a, b)
            if not den.is_zero:
                return RationalFunction(subst_u(f.num, a, b), den)
        raise ConventionError("could not eliminate fiber variables from a constant-in-u function")

    return FiberPolynomial.from_u45(coords, {(1, 0): drop(coeff4), (0, 1): drop(coeff5)})


def pi_theta_omega(frame: Frame, ctable: StructuralFunctions) -> tuple[FiberPolynomial, FiberPolynomial, FiberPolynomial]:
    """The three remaining density ingredients (degrees 2, 4, 4)."""
    coords = frame.coords
    c = ctable.c
    big_pi = FiberPolynomial.from_u45(coords, {
        (2, 0): c(3, 2, 1) + c(5, 3, 4),
        (1, 1): c(3, 2, 2) - c(3, 1, 1) - c(4, 3, 4) + c(5, 3, 5),
        (0, 2): -(c(3, 1, 2) + c(4, 3, 5)),
    })
    a4 = alpha(4, ctable)
    a5 = alpha(5, ctable)
    x4 = frame.field(4)
    x5 = frame.field(5)
    u4sq = FiberPolynomial.from_u45(coords, {(2, 0): RationalFunction.const(coords, 1)})
    u4u5 = FiberPolynomial.from_u45(coords, {(1, 1): RationalFunction.const(coords, 1)})
    u5sq = FiberPolynomial.from_u45(coords, {(0, 2): RationalFunction.const(coords, 1)})
    big_theta = (a4.base_derive(x5) * u4sq
                 + (a5.base_derive(x5) - a4.base_derive(x4)) * u4u5
                 - a5.base_derive(x4) * u5sq)
    u4 = FiberPolynomial.u_var(coords, 4)
    u5 = FiberPolynomial.u_var(coords, 5)
    big_omega = FiberPolynomial.zero(coords)
    for i in (1, 2, 3):
        weight = u5 * poisson_bracket_restricted(i, 4, ctable) - u4 * poisson_bracket_restricted(i, 5, ctable)
        big_omega = big_omega + weight * alpha(i, ctable)
    return big_pi, big_theta.restrict(), big_omega.restrict()


# Structural-function entries that are allowed to appear in invariant
# outputs; everything else signals a formula bug.
ALLOWED_C_ENTRIES = frozenset(
    [(3, 1, k) for k in (1, 2, 3)]
    + [(3, 2, k) for k in (1, 2, 3)]
    + [(i, j, k) for i in (4, 5) for j in (1, 2) for k in (1, 2, 3, 4, 5)]
    + [(i, 3, k) for i in (4, 5) for k in (4, 5)]
)
