"""Structure-equation coframes, their verifier, and the quartic extraction.

A candidate coframe is 12 one-forms (omega_1..omega_5, obar_1..obar_7);
the verifier checks the five classical structure equations symbolically.
From a verified coframe the dual (index-reversed) frame is adapted to
D = ker(omega_1, omega_2, omega_3); its structural functions feed the
closed-form density, a drastically simplified expression for it, and the
quartic coefficients whose combination reproduces the invariant with the
exact factor -35.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .density import (
    FramePipeline,
    QuarticForm,
    density_fiber_coefficients,
    fundamental_density,
    tangential_form,
)
from .errors import ConventionError, DegenerateFrameError
from .fiber import FiberPolynomial
from .fields import (
    Frame,
    OneForm,
    TwoForm,
    VectorField,
    exterior_derivative,
    structural_functions,
    wedge,
)
from .ratfunc import RationalFunction, parse_expression

Point = Mapping[str, Fraction]


@dataclass
class CartanCoframe:
    omegas: tuple[OneForm, ...]  # 5
    obars: tuple[OneForm, ...]  # 7

    def __post_init__(self):
        if len(self.omegas) != 5 or len(self.obars) != 7:
            raise ValueError("a coframe consists of 5 omega and 7 obar one-forms")

    @property
    def coords(self) -> tuple[str, ...]:
        return self.omegas[0].coords

    def omega(self, i: int) -> OneForm:
        return self.omegas[i - 1]

    def obar(self, j: int) -> OneForm:
        return self.obars[j - 1]

    @classmethod
    def from_expressions(cls, coords: Sequence[str], omega_rows: Sequence[Sequence[str]],
                         obar_rows: Sequence[Sequence[str]]) -> "CartanCoframe":
        def form(row):
            return OneForm.from_components(coords, [parse_expression(t, coords) for t in row])

        return cls(tuple(form(r) for r in omega_rows), tuple(form(r) for r in obar_rows))


def structure_equation_rhs(cf: CartanCoframe) -> list[TwoForm]:
    """Right-hand sides of the five structure equations."""
    w = cf.omega
    o = cf.obar
    ft = Fraction(4, 3)
    return [
        wedge(w(1), o(1).scale(2) + o(4)) + wedge(w(2), o(2)) + wedge(w(3), w(4)),
        wedge(w(1), o(3)) + wedge(w(2), o(1) + o(4).scale(2)) + wedge(w(3), w(5)),
        wedge(w(1), o(5)) + wedge(w(2), o(6)) + wedge(w(3), o(1) + o(4)) + wedge(w(4), w(5)),
        wedge(w(1), o(7)) + wedge(w(3), o(6)).scale(ft) + wedge(w(4), o(1)) + wedge(w(5), o(2)),
        wedge(w(2), o(7)) - wedge(w(3), o(5)).scale(ft) + wedge(w(4), o(3)) + wedge(w(5), o(4)),
    ]


@dataclass
class StructureResidualReport:
    residuals: list[TwoForm]

    @property
    def ok(self) -> bool:
        return all(r.is_zero() for r in self.residuals)

    def nonzero_equations(self) -> list[int]:
        return [i + 1 for i, r in enumerate(self.residuals) if not r.is_zero()]


def verify_structure_equations(cf: CartanCoframe) -> StructureResidualReport:
    rhs = structure_equation_rhs(cf)
    residuals = [exterior_derivative(cf.omega(i + 1)) - rhs[i] for i in range(5)]
    return StructureResidualReport(residuals)


def cartan_frame(cf: CartanCoframe) -> Frame:
    """Dual frame with reversed indices; comes out adapted to D."""
    frame_tilde = _dual_fields(cf)
    fields = tuple(frame_tilde[5 - k] for k in range(1, 6))  # X_k = Xtilde_{6-k}
    frame = Frame(fields, tag="cartan")
    ct = structural_functions(frame)
    one = RationalFunction.const(cf.coords, 1)
    zero = RationalFunction.const(cf.coords, 0)
    expected = {(2, 1, 3): one, (2, 1, 4): zero, (2, 1, 5): zero,
                (3, 1, 4): one, (3, 1, 5): zero, (3, 2, 4): zero, (3, 2, 5): one}
    with ct.paused():
        for (a, b, k), want in expected.items():
            if not ct.c(a, b, k) == want:
                raise ConventionError(
                    f"dual frame of the coframe is not adapted: c({a},{b},{k}) != {'1' if want == one else '0'}"
                )
    return frame


def _dual_fields(cf: CartanCoframe) -> list[VectorField]:
    coords = cf.coords
    matrix = [list(cf.omega(i + 1).comps) for i in range(5)]
    from .linalg import invert_matrix, rf_pivotable

    zero = RationalFunction.const(coords, 0)
    one = RationalFunction.const(coords, 1)
    try:
        minv = invert_matrix(matrix, zero, one, rf_pivotable)
    except DegenerateFrameError as exc:
        raise DegenerateFrameError("coframe is singular as a rational matrix") from exc
    # omega-rows act on dx; dual field k has components column k of the inverse
    return [VectorField.from_components(coords, [minv[a][k] for a in range(5)]) for k in range(5)]


def derived_bracket_relations(cf: CartanCoframe, frame: Frame) -> dict[str, bool]:
    """Bracket coefficients computed from the frame versus the expressions
    the structure equations force through the duality identity."""
    ct = structural_functions(frame)
    o = cf.obar
    x = frame.field
    checks: dict[str, bool] = {}

    def val(form: OneForm, i: int) -> RationalFunction:
        return form(x(i))

    with ct.paused():
        ft = Fraction(4, 3)
        # [X1, X3] row
        checks["c31^1"] = ct.c(3, 1, 1) == -(val(o(5), 1) * ft + val(o(4), 3))
        checks["c31^2"] = ct.c(3, 1, 2) == (val(o(6), 1) * ft - val(o(2), 3))
        checks["c31^3"] = ct.c(3, 1, 3) == (val(o(1), 1) + val(o(4), 1))
        # [X2, X3] row
        checks["c32^1"] = ct.c(3, 2, 1) == -(val(o(5), 2) * ft + val(o(3), 3))
        checks["c32^2"] = ct.c(3, 2, 2) == (val(o(6), 2) * ft - val(o(1), 3))
        checks["c32^3"] = ct.c(3, 2, 3) == (val(o(1), 2) + val(o(4), 2))
        # [X1, X4]
        checks["c41^1"] = ct.c(4, 1, 1) == (val(o(7), 1) - val(o(4), 4))
        checks["c41^2"] = ct.c(4, 1, 2) == -val(o(2), 4)
        checks["c41^3"] = ct.c(4, 1, 3) == val(o(6), 1)
        checks["c41^4"] = ct.c(4, 1, 4) == (val(o(1), 1) + 2 * val(o(4), 1))
        checks["c41^5"] = ct.c(4, 1, 5) == val(o(2), 1)
        # [X1, X5]
        checks["c51^1"] = ct.c(5, 1, 1) == -val(o(4), 5)
        checks["c51^2"] = ct.c(5, 1, 2) == (val(o(7), 1) - val(o(2), 5))
        checks["c51^3"] = ct.c(5, 1, 3) == val(o(5), 1)
        checks["c51^4"] = ct.c(5, 1, 4) == val(o(3), 1)
        checks["c51^5"] = ct.c(5, 1, 5) == (2 * val(o(1), 1) + val(o(4), 1))
        # [X2, X4]
        checks["c42^1"] = ct.c(4, 2, 1) == (val(o(7), 2) - val(o(3), 4))
        checks["c42^2"] = ct.c(4, 2, 2) == -val(o(1), 4)
        checks["c42^3"] = ct.c(4, 2, 3) == val(o(6), 2)
        checks["c42^4"] = ct.c(4, 2, 4) == (val(o(1), 2) + 2 * val(o(4), 2))
        checks["c42^5"] = ct.c(4, 2, 5) == val(o(2), 2)
        # [X2, X5]
        checks["c52^1"] = ct.c(5, 2, 1) == -val(o(3), 5)
        checks["c52^2"] = ct.c(5, 2, 2) == (val(o(7), 2) - val(o(1), 5))
        checks["c52^3"] = ct.c(5, 2, 3) == val(o(5), 2)
        checks["c52^4"] = ct.c(5, 2, 4) == val(o(3), 2)
        checks["c52^5"] = ct.c(5, 2, 5) == (2 * val(o(1), 2) + val(o(4), 2))
        # [X3, X4], [X3, X5] modulo span(X1, X2, X3)
        checks["c43^4"] = ct.c(4, 3, 4) == (val(o(1), 3) + 2 * val(o(4), 3))
        checks["c43^5"] = ct.c(4, 3, 5) == val(o(2), 3)
        checks["c53^4"] = ct.c(5, 3, 4) == val(o(3), 3)
        checks["c53^5"] = ct.c(5, 3, 5) == (2 * val(o(1), 3) + val(o(4), 3))
    return checks


@dataclass
class IdentityReport:
    b_matches_coframe_form: bool
    b1_equals_b: bool
    pi_equals_alpha3_rule: bool

    @property
    def ok(self) -> bool:
        return self.b_matches_coframe_form and self.b1_equals_b and self.pi_equals_alpha3_rule


def cartan_identities(cf: CartanCoframe, frame: Frame | None = None,
                      pipeline: FramePipeline | None = None) -> IdentityReport:
    frame = frame if frame is not None else cartan_frame(cf)
    pipe = pipeline if pipeline is not None else FramePipeline(frame)
    coords = cf.coords
    s1 = cf.obar(1)(frame.field(2)) + cf.obar(4)(frame.field(2))
    s2 = cf.obar(1)(frame.field(1)) + cf.obar(4)(frame.field(1))
    b_coframe = FiberPolynomial.from_u45(coords, {(1, 0): s1, (0, 1): -s2})
    b_ok = b_coframe == pipe.b
    b1_ok = pipe.b1 == pipe.b
    pi_ok = pipe.big_pi == pipe.alphas[3].scale(Fraction(-4, 3))
    return IdentityReport(b_ok, b1_ok, pi_ok)


@dataclass
class QuarticReport:
    coefficients: list[RationalFunction]  # A1..A5
    quartic: QuarticForm  # F on the basis (X1, X2) at the point
    tangential: QuarticForm  # 35 * invariant quartic on the same basis
    residual: QuarticForm  # F + 35 * tangential invariant

    @property
    def ok(self) -> bool:
        return self.residual.is_zero()


@dataclass
class SimplifiedDensityReport:
    density: FiberPolynomial
    simplified_matches_master: bool
    theta_sum_matches: bool
    xi_combination_matches: bool
    coefficients: list[RationalFunction]  # A1..A5 as functions

    @property
    def ok(self) -> bool:
        return self.simplified_matches_master and self.theta_sum_matches and self.xi_combination_matches


def _s_operator(form: OneForm, v1: VectorField, v2: VectorField) -> RationalFunction:
    """V1 omega(V2) - V2 omega(V1)."""
    return v1.apply(form(v2)) - v2.apply(form(v1))


def _u_weighted_pairs(cf: CartanCoframe):
    """The quadratic-coefficient one-form: u4^2 obar3 + u4 u5 (obar1 - obar4) - u5^2 obar2."""
    return [((2, 0), cf.obar(3)), ((1, 1), cf.obar(1) - cf.obar(4)), ((0, 2), -cf.obar(2))]


def _quartic_weights(frame: Frame):
    x = frame.field
    return [((2, 0), (x(5), x(2))), ((1, 1), (x(1), x(5))), ((1, 1), (x(2), x(4))), ((0, 2), (x(4), x(1)))]


def density_simplified(cf: CartanCoframe, frame: Frame | None = None) -> SimplifiedDensityReport:
    frame = frame if frame is not None else cartan_frame(cf)
    coords = cf.coords
    pipe = FramePipeline(frame)
    h = pipe.h
    s_lin = pipe.s_linear()
    a_master = fundamental_density(frame, pipeline=pipe)
    a_simpl = (pipe.big_theta + h.apply(s_lin) - pipe.big_omega
               - (s_lin * pipe.b).scale(6)).scale(Fraction(1, 35))
    simpl_ok = a_simpl == a_master

    # split of the derivative terms through the coframe
    x1, x2 = frame.field(1), frame.field(2)
    u4sq = FiberPolynomial.from_u45(coords, {(2, 0): RationalFunction.const(coords, 1)})
    u4u5 = FiberPolynomial.from_u45(coords, {(1, 1): RationalFunction.const(coords, 1)})
    u5sq = FiberPolynomial.from_u45(coords, {(0, 2): RationalFunction.const(coords, 1)})
    a1, a2 = pipe.alphas[1], pipe.alphas[2]
    theta1 = (a1.base_derive(x2) * u4sq + (a2.base_derive(x2) - a1.base_derive(x1)) * u4u5
              - a2.base_derive(x1) * u5sq)
    w_pairs = _u_weighted_pairs(cf)
    weights = _quartic_weights(frame)
    s_sum = FiberPolynomial.zero(coords)
    b_poly = FiberPolynomial.zero(coords)
    for (wu, (va, vb)) in weights:
        mono = FiberPolynomial.from_u45(coords, {wu: RationalFunction.const(coords, 1)})
        s_acc = FiberPolynomial.zero(coords)
        d_acc = FiberPolynomial.zero(coords)
        for (eu, form) in w_pairs:
            piece = FiberPolynomial.from_u45(coords, {eu: _s_operator(form, va, vb)})
            s_acc = s_acc + piece
            dpiece = FiberPolynomial.from_u45(coords, {eu: exterior_derivative(form)(va, vb)})
            d_acc = d_acc + dpiece
        s_sum = s_sum + mono * s_acc
        b_poly = b_poly + mono * d_acc
    theta_ok = (pipe.big_theta + theta1) == s_sum

    xi_pairs = [
        ((2, 0), wedge(cf.obar(3), cf.obar(1) - cf.obar(4))),
        ((1, 1), wedge(cf.obar(3), cf.obar(2)).scale(-2)),
        ((0, 2), wedge(cf.obar(2), cf.obar(1) - cf.obar(4))),
    ]
    xi_comb = FiberPolynomial.zero(coords)
    for (wu, (va, vb)) in weights:
        mono = FiberPolynomial.from_u45(coords, {wu: RationalFunction.const(coords, 1)})
        acc = FiberPolynomial.zero(coords)
        for (eu, two) in xi_pairs:
            acc = acc + FiberPolynomial.from_u45(coords, {eu: two(va, vb)})
        xi_comb = xi_comb + mono * acc
    xi_ok = (a_master.scale(35) - b_poly) == xi_comb

    total = b_poly + xi_comb  # = 35 A = -(A1 u4^4 - 4 A2 u4^3 u5 + ...)
    coeffs = extract_quartic_coefficients(total)
    return SimplifiedDensityReport(a_master, simpl_ok, theta_ok, xi_ok, coeffs)


def extract_quartic_coefficients(total: FiberPolynomial) -> list[RationalFunction]:
    """A1..A5 from 35A = -(A1 u4^4 - 4 A2 u4^3 u5 + 6 A3 u4^2 u5^2 - 4 A4 u4 u5^3 + A5 u5^4)."""
    c40 = total.coefficient_u45(4, 0)
    c31 = total.coefficient_u45(3, 1)
    c22 = total.coefficient_u45(2, 2)
    c13 = total.coefficient_u45(1, 3)
    c04 = total.coefficient_u45(0, 4)
    return [-c40, c31 * Fraction(1, 4), -c22 * Fraction(1, 6), c13 * Fraction(1, 4), -c04]


def encode_quartic_coefficients(coords: Sequence[str], a: Sequence[RationalFunction]) -> FiberPolynomial:
    """Inverse of extract_quartic_coefficients (the 35A encoding)."""
    return FiberPolynomial.from_u45(tuple(coords), {
        (4, 0): -a[0],
        (3, 1): a[1] * 4,
        (2, 2): -a[2] * 6,
        (1, 3): a[3] * 4,
        (0, 4): -a[4],
    })


def compare_theorem(cf: CartanCoframe, point: Point, frame: Frame | None = None,
                    report: SimplifiedDensityReport | None = None) -> QuarticReport:
    """Evaluate the quartic F on D(q) and the tangential invariant; their
    exact relation is F = -35 * invariant."""
    frame = frame if frame is not None else cartan_frame(cf)
    report = report if report is not None else density_simplified(cf, frame)
    point = {k: Fraction(v) for k, v in point.items()}
    a_vals = [c.evaluate(point) for c in report.coefficients]
    # F(s X1 + t X2): by duality omega4(v) = t, omega5(v) = s
    f_quartic = QuarticForm((a_vals[4], 4 * a_vals[3], 6 * a_vals[2], 4 * a_vals[1], a_vals[0]))
    tang = tangential_form(frame.field(1), frame.field(2), point)
    # cross-check: the same quartic from the cartan frame's own density
    cs = density_fiber_coefficients(report.density, point)
    out = [Fraction(0)] * 5
    for j, c in enumerate(cs):
        out[4 - j] += c * (-1) ** j
    if tuple(out) != tang.coeffs:
        raise ConventionError("tangential quartic differs between the literal and coframe frames")
    residual = QuarticForm(tuple(f + 35 * t for f, t in zip(f_quartic.coeffs, tang.coeffs)))
    return QuarticReport(report.coefficients, f_quartic, tang, residual)


def perturbed(cf: CartanCoframe, obar_index: int, delta: OneForm) -> CartanCoframe:
    """Coframe with one obar replaced by obar + delta (negative controls)."""
    obars = list(cf.obars)
    obars[obar_index - 1] = obars[obar_index - 1] + delta
    return CartanCoframe(cf.omegas, tuple(obars))
