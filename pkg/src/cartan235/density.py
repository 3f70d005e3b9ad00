"""Closed-form pipeline for the Ricci density and the degree-4 density.

Given an adapted frame, the moving-frame coefficients are assembled from
structural functions, and the two invariants come out as fiber polynomials:
rho homogeneous of degree 2 and the density homogeneous of degree 4 in
(u4, u5).  The generic jet extractor (invariants_from_structural_jets)
implements the same two formulas on one-variable jets, with ' = d/dt.

Sign pin: the expanded density carries -1/12 h(h(b*b1 + h(b) - a3/3)).
That coefficient is forced by substituting a21 = -(b*b1 + h(b) - a3/3)
into the jet formulas (+1/12 a21''), and the jet-space pipeline holds it
to exact equality at rational points.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .errors import ConventionError, OrderError, SpanError
from .fiber import (
    FiberPolynomial,
    alpha,
    b_scalars,
    h_field,
    pi_theta_omega,
)
from .fields import Frame, StructuralFunctions, VectorField, adapted_frame, express_in_plane, structural_functions
from .jets import MJet
from .linalg import det_fractions
from .ratfunc import RationalFunction

Point = Mapping[str, Fraction]


@dataclass
class MovingFrameCoeffs:
    """Structural-equation entries of the completed canonical frame at t=0."""

    a21: FiberPolynomial
    a22: FiberPolynomial
    a31: FiberPolynomial
    a41: FiberPolynomial
    a42: FiberPolynomial

    def check_homogeneity(self) -> None:
        expected = {"a21": 2, "a22": 1, "a31": 4, "a41": 3, "a42": 2}
        for name, deg in expected.items():
            poly: FiberPolynomial = getattr(self, name)
            if not poly.is_homogeneous(deg):
                raise ConventionError(f"{name} is not homogeneous of degree {deg}")


class FramePipeline:
    """Caches the per-frame ingredients shared by all invariant formulas."""

    def __init__(self, frame: Frame, ctable: StructuralFunctions | None = None):
        self.frame = frame
        self.ctable = ctable if ctable is not None else structural_functions(frame)
        with self.ctable.recording() as log:
            self.h = h_field(frame, self.ctable)
            self.b, self.b1 = b_scalars(self.ctable)
            self.alphas = {i: alpha(i, self.ctable).restrict() for i in range(1, 6)}
            self.big_pi, self.big_theta, self.big_omega = pi_theta_omega(frame, self.ctable)
        self.log = set(log)

    # -- ingredient helpers -------------------------------------------------

    def s_linear(self) -> FiberPolynomial:
        """alpha1*u4 + alpha2*u5."""
        coords = self.frame.coords
        u4 = FiberPolynomial.u_var(coords, 4)
        u5 = FiberPolynomial.u_var(coords, 5)
        return self.alphas[1] * u4 + self.alphas[2] * u5

    def a21_core(self) -> FiberPolynomial:
        """b*b1 + h(b) - alpha3/3 (the negative of a21)."""
        return self.b * self.b1 + self.h.apply(self.b) - self.alphas[3].scale(Fraction(1, 3))

    def ricci_core(self) -> FiberPolynomial:
        """alpha3 - Pi/2 - h(b1)/2 - 9/2 h(b) + b1^2/2 + 9/2 b^2."""
        h = self.h
        return (self.alphas[3]
                - self.big_pi.scale(Fraction(1, 2))
                - h.apply(self.b1).scale(Fraction(1, 2))
                - h.apply(self.b).scale(Fraction(9, 2))
                + (self.b1 * self.b1).scale(Fraction(1, 2))
                + (self.b * self.b).scale(Fraction(9, 2)))


def coeffs_a(frame: Frame, ctable: StructuralFunctions | None = None) -> MovingFrameCoeffs:
    pipe = FramePipeline(frame, ctable)
    return coeffs_a_from_pipeline(pipe)


def coeffs_a_from_pipeline(pipe: FramePipeline) -> MovingFrameCoeffs:
    b, b1 = pipe.b, pipe.b1
    s = pipe.s_linear()
    core = pipe.a21_core()
    quarter = Fraction(1, 4)
    a21 = -core
    a22 = -(b1 + b.scale(3))
    a42 = -pipe.big_pi.scale(quarter)
    a41 = -(pipe.big_pi * b).scale(quarter) + s.scale(Fraction(1, 12))
    a31 = ((pipe.big_omega - pipe.big_theta).scale(Fraction(1, 36))
           + (s * b).scale(Fraction(1, 6))
           - (pipe.big_pi * (b * b)).scale(quarter))
    coeffs = MovingFrameCoeffs(a21=a21, a22=a22, a31=a31, a41=a41, a42=a42)
    coeffs.check_homogeneity()
    return coeffs


def ricci_density(frame: Frame, ctable: StructuralFunctions | None = None,
                  pipeline: FramePipeline | None = None) -> FiberPolynomial:
    """Degree-2 generalized Ricci density in (u4, u5)."""
    pipe = pipeline if pipeline is not None else FramePipeline(frame, ctable)
    rho = pipe.ricci_core().scale(Fraction(-4, 15))
    if not rho.is_homogeneous(2):
        raise ConventionError("Ricci density is not homogeneous of degree 2")
    return rho


def fundamental_density(frame: Frame, ctable: StructuralFunctions | None = None,
                        pipeline: FramePipeline | None = None) -> FiberPolynomial:
    """Degree-4 density of the curve invariant in the h-parametrization."""
    pipe = pipeline if pipeline is not None else FramePipeline(frame, ctable)
    h = pipe.h
    b, b1 = pipe.b, pipe.b1
    s = pipe.s_linear()
    core = pipe.a21_core()
    r = pipe.ricci_core()
    total = (pipe.big_theta - pipe.big_omega).scale(Fraction(1, 36))
    total = total - (s * b).scale(Fraction(1, 6))
    total = total + (pipe.big_pi * (b * b)).scale(Fraction(1, 4))
    total = total + (r * r).scale(Fraction(1, 100))
    total = total - h.apply_n(r, 2).scale(Fraction(1, 60))
    total = total - (core * core).scale(Fraction(1, 4))
    total = total + h.apply(s).scale(Fraction(1, 36))
    total = total - h.apply(pipe.big_pi * b).scale(Fraction(1, 12))
    total = total - h.apply_n(core, 2).scale(Fraction(1, 12))
    total = total + h.apply(core * (b1 + b.scale(3))).scale(Fraction(1, 12))
    density = total.scale(Fraction(36, 35))
    if not density.is_homogeneous(4):
        raise ConventionError("density is not homogeneous of degree 4 in (u4, u5)")
    return density


def invariants_via_jet_formula(frame: Frame, ctable: StructuralFunctions | None = None
                               ) -> tuple[FiberPolynomial, FiberPolynomial]:
    """Same two invariants, assembled by substituting h for d/dt in the jet
    formulas; a redundant route used for cross-validation."""
    pipe = FramePipeline(frame, ctable)
    cf = coeffs_a_from_pipeline(pipe)
    h = pipe.h

    def d(f: FiberPolynomial) -> FiberPolynomial:
        return h.apply(f)

    rho = -(cf.a21.scale(3) + cf.a42.scale(2)
            + d(cf.a22).scale(Fraction(1, 2))
            + (cf.a22 * cf.a22).scale(Fraction(1, 2))).scale(Fraction(4, 15))
    density = ((-cf.a31)
               + (rho * rho).scale(Fraction(9, 64))
               + d(d(rho)).scale(Fraction(1, 16))
               - (cf.a21 * cf.a21).scale(Fraction(1, 4))
               + d(cf.a41).scale(Fraction(1, 3))
               + d(d(cf.a21)).scale(Fraction(1, 12))
               + d(cf.a21 * cf.a22).scale(Fraction(1, 12))).scale(Fraction(36, 35))
    return rho, density


@dataclass(frozen=True)
class QuarticForm:
    """Homogeneous quartic on a 2-plane: value(s, t) = sum c_k s^(4-k) t^k
    on v = s*basis[0] + t*basis[1]."""

    coeffs: tuple[Fraction, Fraction, Fraction, Fraction, Fraction]
    basis_label: str = "(X1, X2)"

    def value(self, s: Fraction, t: Fraction) -> Fraction:
        s, t = Fraction(s), Fraction(t)
        return sum(c * s ** (4 - k) * t**k for k, c in enumerate(self.coeffs))

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def scale(self, f: Fraction) -> "QuarticForm":
        return QuarticForm(tuple(f * c for c in self.coeffs), self.basis_label)

    def __add__(self, other: "QuarticForm") -> "QuarticForm":
        return QuarticForm(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)), self.basis_label)

    def __sub__(self, other: "QuarticForm") -> "QuarticForm":
        return QuarticForm(tuple(a - b for a, b in zip(self.coeffs, other.coeffs)), self.basis_label)

    def change_basis(self, m: Sequence[Sequence[Fraction]], label: str = "changed") -> "QuarticForm":
        """Coefficients on a new basis (w1, w2) = (m[0][0] v1 + m[0][1] v2, ...)."""
        out = [Fraction(0)] * 5
        # expand value(s*m00 + t*m10-style) symbolically via binomials
        for k, c in enumerate(self.coeffs):
            if not c:
                continue
            # term c * A^(4-k) * B^k with A = m00 s + m10 t, B = m01 s + m11 t
            poly_a = _binomial_pow(Fraction(m[0][0]), Fraction(m[1][0]), 4 - k)
            poly_b = _binomial_pow(Fraction(m[0][1]), Fraction(m[1][1]), k)
            for i, ca in enumerate(poly_a):
                for j, cb in enumerate(poly_b):
                    out[i + j] += c * ca * cb
        return QuarticForm(tuple(out), label)


def _binomial_pow(a: Fraction, b: Fraction, n: int) -> list[Fraction]:
    """Coefficients of (a*s + b*t)^n by t-degree."""
    from math import comb

    return [comb(n, k) * a ** (n - k) * b**k for k in range(n + 1)]


def density_fiber_coefficients(density: FiberPolynomial, point: Point) -> list[Fraction]:
    """[u4^4, u4^3 u5, u4^2 u5^2, u4 u5^3, u5^4] coefficients at a point."""
    return [density.coefficient_u45(4 - k, k).evaluate(point) for k in range(5)]


def tangential_form(x1: VectorField, x2: VectorField, point: Point,
                    mode: str = "adapted") -> QuarticForm:
    """Degree-4 homogeneous polynomial on D(q), via u4 = t, u5 = -s for
    v = s*x1 + t*x2 (the lift condition along the characteristic direction)."""
    frame = adapted_frame(x1, x2, point, mode=mode)
    density = fundamental_density(frame)
    cs = density_fiber_coefficients(density, point)
    # value(s,t) = sum_j cs[j] * u4^(4-j) u5^j with u4 = t, u5 = -s
    out = [Fraction(0)] * 5
    for j, c in enumerate(cs):
        # u4^(4-j) u5^j = t^(4-j) (-s)^j -> contributes to s^j t^(4-j): k = 4-j
        out[4 - j] += c * (-1) ** j
    return QuarticForm(tuple(out))


@dataclass
class FrameChangeReport:
    transition_at_point: list[list[Fraction]]
    det: Fraction
    fiber_factor: Fraction  # (det M)^2 per unit of fiber degree; enters A as its 4th power
    fiber_scaling_ok: bool
    tangential_invariant: bool

    @property
    def ok(self) -> bool:
        return self.fiber_scaling_ok and self.tangential_invariant


def frame_change_check(x1: VectorField, x2: VectorField,
                       y1: VectorField, y2: VectorField, point: Point) -> FrameChangeReport:
    """Covariance of the density under a change of basis of D.

    The characteristic field rescales by (det M)^2 under the basis change,
    so the fiber restriction of the degree-4 density picks up that factor
    once per fiber degree: A_Y(T u) = ((det M)^2)^4 A_X(u) with
    T = det(M) * M the induced map on fiber coordinates, equivalently
    A_Y = A_X o adj(M).  The tangential quartic is absolutely invariant.
    """
    coords = x1.coords
    m11, m12 = express_in_plane(coords, (x1, x2), y1)
    m21, m22 = express_in_plane(coords, (x1, x2), y2)
    m_at = [[m11.evaluate(point), m12.evaluate(point)],
            [m21.evaluate(point), m22.evaluate(point)]]
    det = det_fractions(m_at)
    if det == 0:
        raise SpanError("transition matrix is singular at the point")

    frame_x = adapted_frame(x1, x2, point)
    frame_y = adapted_frame(y1, y2, point)
    dens_x = fundamental_density(frame_x)
    dens_y = fundamental_density(frame_y)

    # Same covector: u_Yk(p) = sum_j u_Xj(p) * omega_X^j(Y-frame field k);
    # on the locus only the (4,5) block survives.  Computed from the exact
    # coframe pairing so non-constant transitions are handled too.
    from .fields import dual_coframe

    co_x = dual_coframe(frame_x)
    ty = [[co_x.form(4)(frame_y.field(4)).evaluate(point), co_x.form(5)(frame_y.field(4)).evaluate(point)],
          [co_x.form(4)(frame_y.field(5)).evaluate(point), co_x.form(5)(frame_y.field(5)).evaluate(point)]]
    cs_x = density_fiber_coefficients(dens_x, point)
    dens_y_point = FiberPolynomial.from_u45(coords, {
        (4 - k, k): RationalFunction.const(coords, c) for k, c in enumerate(density_fiber_coefficients(dens_y, point))
    })
    subbed = dens_y_point.substitute_u(ty)
    cs_y_in_x = [subbed.coefficient_u45(4 - k, k).evaluate(point) for k in range(5)]
    unit_factor = det * det
    fiber_ok = all(cy == unit_factor**4 * cx for cy, cx in zip(cs_y_in_x, cs_x))

    q_x = tangential_form(x1, x2, point)
    q_y = tangential_form(y1, y2, point)
    # v = s x1 + t x2 expressed on the Y basis uses M^{-1}
    minv = _inv2(m_at)
    q_y_on_x = q_y.change_basis(minv, label=q_x.basis_label)
    tangential_ok = (q_y_on_x - q_x).is_zero()
    return FrameChangeReport(m_at, det, unit_factor, fiber_ok, tangential_ok)


def _inv2(m: Sequence[Sequence[Fraction]]) -> list[list[Fraction]]:
    det = m[0][0] * m[1][1] - m[0][1] * m[1][0]
    return [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]]


def invariants_from_structural_jets(a21: MJet, a22: MJet, a31: MJet, a41: MJet, a42: MJet) -> tuple[MJet, MJet]:
    """(rho, density) jets from arbitrary-completion structural coefficients.

    Orders: a22 must carry >= 3 valid orders (rho'' needs a22'''), a21 >= 2,
    a41 >= 1, a31 >= 0.
    """
    if a22.order < 3 or a21.order < 2 or a41.order < 1:
        raise OrderError("insufficient jet orders for the invariant extraction")
    t = a21.vars[0]

    def d(j: MJet) -> MJet:
        return j.derivative(t)

    rho = (a21.scale(3) + a42.scale(2) + d(a22).scale(Fraction(1, 2))
           + (a22 * a22).scale(Fraction(1, 2))).scale(Fraction(-4, 15))
    density = ((-a31)
               + (rho * rho).scale(Fraction(9, 64))
               + d(d(rho)).scale(Fraction(1, 16))
               - (a21 * a21).scale(Fraction(1, 4))
               + d(a41).scale(Fraction(1, 3))
               + d(d(a21)).scale(Fraction(1, 12))
               + d(a21 * a22).scale(Fraction(1, 12)))
    return rho, density.scale(Fraction(36, 35))


def dependency_scan(frame: Frame) -> set[tuple[int, int, int]]:
    """Structural-function entries consumed by the invariant outputs."""
    pipe = FramePipeline(frame)
    with pipe.ctable.recording() as log:
        fundamental_density(frame, pipeline=pipe)
        ricci_density(frame, pipeline=pipe)
        coeffs_a_from_pipeline(pipe)
    return set(log) | set(pipe.log)
