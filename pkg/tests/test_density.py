from __future__ import annotations

import random
from fractions import Fraction

import pytest

from cartan235.density import (
    QuarticForm,
    coeffs_a,
    density_fiber_coefficients,
    dependency_scan,
    frame_change_check,
    fundamental_density,
    invariants_via_jet_formula,
    invariants_from_structural_jets,
    ricci_density,
    tangential_form,
)
from cartan235.errors import OrderError
from cartan235.fiber import ALLOWED_C_ENTRIES, FiberPolynomial
from cartan235.fields import VectorField, adapted_frame
from cartan235.jets import MJet
from cartan235.ratfunc import parse_expression

from conftest import MONGE, monge_pair, pt, rf


def u45(table):
    return FiberPolynomial.from_u45(MONGE, {k: parse_expression(v, MONGE) for k, v in table.items()})


class TestMovingFrameCoeffs:
    def test_flat_all_zero(self, flat_frame):
        cf = coeffs_a(flat_frame)
        for name in ("a21", "a22", "a31", "a41", "a42"):
            assert getattr(cf, name).is_zero

    def test_q3_values(self, q3_frame):
        cf = coeffs_a(q3_frame)
        assert cf.a22 == u45({(0, 1): "1/q"})
        assert cf.a21 == u45({(0, 2): "1/(3*q^2)"})
        assert cf.a42.is_zero and cf.a41.is_zero and cf.a31.is_zero

    def test_homogeneity_is_asserted(self, model_frames):
        for name, (frame, _) in model_frames.items():
            coeffs_a(frame).check_homogeneity()


class TestDensities:
    def test_flat_identically_zero(self, flat_frame):
        assert ricci_density(flat_frame).is_zero
        assert fundamental_density(flat_frame).is_zero

    def test_q3_golden(self, q3_frame):
        assert ricci_density(q3_frame) == u45({(0, 2): "-8/(15*q^2)"})
        assert fundamental_density(q3_frame) == u45({(0, 4): "8/(125*q^4)"})

    def test_flat_vs_q3_distinguishes(self, flat_frame, q3_frame):
        point = pt(q=1)
        assert fundamental_density(flat_frame).evaluate(point, (Fraction(0), Fraction(1))) == 0
        assert fundamental_density(q3_frame).evaluate(point, (Fraction(0), Fraction(1))) != 0

    def test_jet_formula_route_agrees(self, model_frames):
        for name, (frame, _) in model_frames.items():
            rho, dens = invariants_via_jet_formula(frame)
            assert rho == ricci_density(frame), name
            assert dens == fundamental_density(frame), name

    def test_homogeneity(self, model_frames):
        for name, (frame, _) in model_frames.items():
            assert ricci_density(frame).is_homogeneous(2), name
            assert fundamental_density(frame).is_homogeneous(4), name

    def test_strongly_adapted_frames_are_rejected(self, model_frames):
        # the strongly adapted extension flips X5, so u4 lift(u2) - u5 lift(u1)
        # is no longer the characteristic combination; the tangency self-check
        # must catch it rather than compute a wrong invariant
        from cartan235.errors import TangencyError
        from cartan235.fiber import h_field

        frame, point = model_frames["q3"]
        strong = adapted_frame(frame.field(1), frame.field(2), point, mode="strongly-adapted")
        with pytest.raises(TangencyError):
            h_field(strong)

    def test_dependency_scan(self, model_frames):
        for name, (frame, _) in model_frames.items():
            assert dependency_scan(frame) <= set(ALLOWED_C_ENTRIES), name


class TestStructuralJetExtraction:
    def mk(self, coeffs, order=6):
        return MJet(("t",), order, {(k,): Fraction(c) for k, c in enumerate(coeffs)})

    def test_all_zero(self):
        z = self.mk([0])
        rho, dens = invariants_from_structural_jets(z, z, z, z, z)
        assert rho.is_zero and dens.is_zero

    def test_constant_a21(self):
        kappa = Fraction(3, 2)
        z = self.mk([0])
        rho, dens = invariants_from_structural_jets(self.mk([kappa]), z, z, z, z)
        assert rho.constant_term() == Fraction(-4, 5) * kappa
        expected = Fraction(36, 35) * (Fraction(9, 64) * (Fraction(16, 25) * kappa**2) - kappa**2 / 4)
        assert dens.constant_term() == expected

    def test_order_guard(self):
        z = self.mk([0], order=2)
        with pytest.raises(OrderError):
            invariants_from_structural_jets(z, z, z, z, z)

    def test_against_symbolic_substitution(self, q3_frame):
        # jets of the symbolic coefficients along the characteristic flow
        # must reproduce the symbolic invariants' jets
        from cartan235.density import FramePipeline, coeffs_a_from_pipeline

        pipe = FramePipeline(q3_frame)
        cf = coeffs_a_from_pipeline(pipe)
        point = pt(q=1)
        u = (Fraction(1), Fraction(2))
        order = 5

        def jet_of(fp):
            vals = []
            cur = fp
            for k in range(order + 1):
                vals.append(cur.evaluate(point, u))
                cur = pipe.h.apply(cur)
            fact = Fraction(1)
            out = {}
            for k, v in enumerate(vals):
                if k:
                    fact /= k
                out[(k,)] = v * fact
            return MJet(("t",), order, out)

        rho, dens = invariants_from_structural_jets(jet_of(cf.a21), jet_of(cf.a22), jet_of(cf.a31), jet_of(cf.a41), jet_of(cf.a42))
        rho_sym = ricci_density(q3_frame, pipeline=pipe)
        dens_sym = fundamental_density(q3_frame, pipeline=pipe)
        # the symbolic Ricci along the flow: rho(t) = sum h^k(rho)/k! t^k
        rho_jet = jet_of(rho_sym)
        dens_jet = jet_of(dens_sym)
        assert rho.truncate(3) == rho_jet.truncate(3)
        assert dens.truncate(2) == dens_jet.truncate(2)


class TestTangentialForm:
    def test_flat_zero(self):
        x1, x2 = monge_pair("q^2")
        q = tangential_form(x1, x2, pt())
        assert q.is_zero()

    def test_homogeneity(self, q3_frame):
        x1, x2 = q3_frame.field(1), q3_frame.field(2)
        q = tangential_form(x1, x2, pt(q=1))
        s, t = Fraction(2), Fraction(-3)
        assert q.value(2 * s, 2 * t) == 16 * q.value(s, t)
        assert q.value(Fraction(0), Fraction(0)) == 0

    def test_substitution_consistency(self, q3_frame):
        # value at v = X1 equals the density at (u4, u5) = (0, -1)
        x1, x2 = q3_frame.field(1), q3_frame.field(2)
        point = pt(q=1)
        q = tangential_form(x1, x2, point)
        dens = fundamental_density(q3_frame)
        assert q.value(Fraction(1), Fraction(0)) == dens.evaluate(point, (Fraction(0), Fraction(-1)))
        assert q.value(Fraction(0), Fraction(1)) == dens.evaluate(point, (Fraction(1), Fraction(0)))


class TestFrameChange:
    def test_scaling(self, q3_frame):
        x1, x2 = q3_frame.field(1), q3_frame.field(2)
        y1 = x1.scale(parse_expression("2", MONGE))
        rep = frame_change_check(x1, x2, y1, x2, pt(q=1))
        assert rep.det == 2
        assert rep.fiber_factor == 4  # squared determinant, per unit fiber degree
        assert rep.ok

    def test_swap(self, q3_frame):
        x1, x2 = q3_frame.field(1), q3_frame.field(2)
        rep = frame_change_check(x1, x2, x2, x1, pt(q=1))
        assert rep.det == -1 and rep.fiber_factor == 1
        assert rep.ok

    def test_nonconstant_shear(self, q3_frame):
        x1, x2 = q3_frame.field(1), q3_frame.field(2)
        y2 = x2 + x1.scale(parse_expression("x", MONGE))
        rep = frame_change_check(x1, x2, x1, y2, pt(x=Fraction(1), q=1))
        assert rep.det == 1
        assert rep.ok

    def test_unimodular_shear_in_x1(self, q3_frame):
        x1, x2 = q3_frame.field(1), q3_frame.field(2)
        y2 = x2 + x1.scale(parse_expression("q", MONGE))
        rep = frame_change_check(x1, x2, x1, y2, pt(q=1))
        assert rep.det == 1 and rep.ok
