from __future__ import annotations

import random
from fractions import Fraction

import pytest

from cartan235.errors import DegenerateFrameError, GrowthVectorError
from cartan235.fields import (
    Coframe,
    Frame,
    OneForm,
    VectorField,
    adapted_frame,
    dual_coframe,
    eval_form,
    exterior_derivative,
    growth_vector,
    lie_bracket,
    structural_functions,
    wedge,
)
from cartan235.ratfunc import Polynomial, RationalFunction, parse_expression

from conftest import MONGE, monge_pair, pt, rf

XV = ("x1", "x2", "x3", "x4", "x5")


def xf(*texts):
    return VectorField.from_components(XV, [parse_expression(t, XV) for t in texts])


def _random_field(rng):
    def poly_text():
        terms = []
        for _ in range(rng.randint(1, 2)):
            v = rng.choice(XV)
            k = rng.randint(0, 2)
            c = rng.randint(-3, 3)
            terms.append(f"({c})*{v}^{k}")
        return "+".join(terms)

    return xf(*[poly_text() for _ in range(5)])


class TestBracket:
    def test_coordinate_translation(self):
        v = xf("1", "0", "0", "0", "0")
        w = xf("0", "x1", "0", "0", "0")
        assert lie_bracket(v, w) == xf("0", "1", "0", "0", "0")

    def test_self_bracket_vanishes(self):
        v = xf("x1^2", "x2*x3", "1", "0", "x5")
        assert lie_bracket(v, v).is_zero()

    def test_flat_model_bracket(self):
        x1, x2 = monge_pair("q^2")
        # [d/dq, X2] = d/dp + 2q d/dz
        assert lie_bracket(x1, x2) == VectorField.from_components(
            MONGE, [rf("0"), rf("0"), rf("1"), rf("0"), rf("2*q")]
        )

    def test_jacobi_identity_random(self):
        rng = random.Random(5)
        for _ in range(6):
            u, v, w = (_random_field(rng) for _ in range(3))
            total = (
                lie_bracket(lie_bracket(u, v), w)
                + lie_bracket(lie_bracket(v, w), u)
                + lie_bracket(lie_bracket(w, u), v)
            )
            assert total.is_zero()


class TestExteriorCalculus:
    def test_d_of_x1_dx2(self):
        omega = OneForm.from_components(XV, [parse_expression(t, XV) for t in ("0", "x1", "0", "0", "0")])
        d = exterior_derivative(omega)
        assert d.component(0, 1) == parse_expression("1", XV)
        assert all(d.component(i, j).is_zero for i in range(5) for j in range(5) if (i, j) != (0, 1) and (i, j) != (1, 0))

    def test_d_squared_zero(self):
        f = parse_expression("x1*x3", XV)
        df = OneForm.from_components(XV, [f.derivative(v) for v in XV])
        assert exterior_derivative(df).is_zero()

    def test_wedge_antisymmetry(self):
        a = OneForm.from_components(XV, [parse_expression(t, XV) for t in ("x1", "0", "1", "0", "0")])
        b = OneForm.from_components(XV, [parse_expression(t, XV) for t in ("0", "x3", "0", "2", "0")])
        w1 = wedge(a, b)
        w2 = wedge(b, a)
        assert (w1 + w2).is_zero()

    def test_cartan_bracket_identity_random(self):
        # d omega (V, W) = V omega(W) - W omega(V) - omega([V, W])
        rng = random.Random(9)
        for _ in range(5):
            omega = OneForm.from_components(XV, [_random_field(rng).comps[0] for _ in range(5)])
            v, w = _random_field(rng), _random_field(rng)
            lhs = eval_form(exterior_derivative(omega), v, w)
            rhs = v.apply(omega(w)) - w.apply(omega(v)) - omega(lie_bracket(v, w))
            assert lhs == rhs


class TestDualCoframe:
    def test_coordinate_frame(self):
        frame = Frame(tuple(VectorField.coordinate(XV, v) for v in XV))
        co = dual_coframe(frame)
        for i in range(1, 6):
            comps = co.form(i).comps
            assert comps[i - 1] == parse_expression("1", XV)
            assert sum(0 if c.is_zero else 1 for c in comps) == 1

    def test_shear(self):
        fields = [VectorField.coordinate(XV, v) for v in XV]
        fields[1] = fields[1] + fields[0]  # X2 -> X2 + X1
        co = dual_coframe(Frame(tuple(fields)))
        # omega^1 = dx1 - dx2
        assert co.form(1).comps[0] == parse_expression("1", XV)
        assert co.form(1).comps[1] == parse_expression("-1", XV)

    def test_duality_for_adapted_frame(self, flat_frame):
        co = dual_coframe(flat_frame)
        for i in range(1, 6):
            for k in range(1, 6):
                value = co.form(i)(flat_frame.field(k))
                assert value == RationalFunction.const(MONGE, 1 if i == k else 0)

    def test_singular_frame_rejected(self):
        fields = [VectorField.coordinate(XV, v) for v in XV]
        fields[4] = fields[0]
        with pytest.raises(DegenerateFrameError):
            dual_coframe(Frame(tuple(fields)))


class TestStructuralFunctions:
    def test_coordinate_frame_all_zero(self):
        frame = Frame(tuple(VectorField.coordinate(XV, v) for v in XV))
        ct = structural_functions(frame)
        for i in range(1, 6):
            for j in range(i + 1, 6):
                assert all(c.is_zero for c in ct.bracket_in_frame(i, j))

    def test_single_bracket(self):
        fields = [VectorField.coordinate(XV, v) for v in XV]
        fields[1] = fields[1] + VectorField.coordinate(XV, "x3").scale(parse_expression("x1", XV))
        ct = structural_functions(Frame(tuple(fields)))
        assert ct.c(2, 1, 3) == parse_expression("1", XV)
        for k in (1, 2, 4, 5):
            assert ct.c(2, 1, k).is_zero

    def test_flat_adapted_table(self, flat_frame):
        ct = structural_functions(flat_frame)
        one = RationalFunction.const(MONGE, 1)
        assert ct.c(2, 1, 3) == one
        assert ct.c(3, 1, 4) == one
        assert ct.c(3, 2, 5) == one
        # everything touching the top layer vanishes for the flat model
        for (a, b) in ((4, 1), (4, 2), (5, 1), (5, 2), (4, 3), (5, 3), (5, 4)):
            for k in range(1, 6):
                assert ct.c(a, b, k).is_zero

    def test_antisymmetry_and_roundtrip(self, q3_frame):
        ct = structural_functions(q3_frame)
        for i in range(1, 6):
            for j in range(i + 1, 6):
                br = lie_bracket(q3_frame.field(i), q3_frame.field(j))
                recon = VectorField.from_components(MONGE, [rf("0")] * 5)
                for k in range(1, 6):
                    recon = recon + q3_frame.field(k).scale(ct.c(j, i, k))
                assert (br - recon).is_zero()
                assert ct.c(j, i, 1) == -ct.c(i, j, 1)


class TestGrowthVector:
    def test_flat_model(self):
        x1, x2 = monge_pair("q^2")
        assert growth_vector(x1, x2, pt()) == (2, 3, 5)

    def test_commuting_fields(self):
        x1 = VectorField.coordinate(XV, "x1")
        x2 = VectorField.coordinate(XV, "x2")
        point = {v: Fraction(0) for v in XV}
        assert growth_vector(x1, x2, point) == (2, 2, 2)

    def test_q3_at_unit_point(self):
        x1, x2 = monge_pair("q^3")
        assert growth_vector(x1, x2, pt(q=1)) == (2, 3, 5)
        # singular at q=0: X4 = 6q d/dz degenerates
        assert growth_vector(x1, x2, pt()) != (2, 3, 5)


class TestAdaptedFrame:
    def test_flat_extension(self, flat_frame):
        assert flat_frame.field(3) == VectorField.from_components(
            MONGE, [rf("0"), rf("0"), rf("1"), rf("0"), rf("2*q")]
        )
        assert flat_frame.field(4) == VectorField.from_components(
            MONGE, [rf("0"), rf("0"), rf("0"), rf("0"), rf("2")]
        )
        assert flat_frame.field(5) == VectorField.from_components(
            MONGE, [rf("0"), rf("-1"), rf("0"), rf("0"), rf("0")]
        )

    def test_q3_x4_field(self, q3_frame):
        assert q3_frame.field(4) == VectorField.from_components(
            MONGE, [rf("0"), rf("0"), rf("0"), rf("0"), rf("6*q")]
        )

    def test_strongly_adapted_sign(self):
        x1, x2 = monge_pair("q^2")
        strong = adapted_frame(x1, x2, pt(), mode="strongly-adapted")
        assert strong.field(5) == VectorField.from_components(
            MONGE, [rf("0"), rf("1"), rf("0"), rf("0"), rf("0")]
        )

    def test_degenerate_rejected(self):
        x1 = VectorField.coordinate(XV, "x1")
        x2 = VectorField.coordinate(XV, "x2")
        with pytest.raises(GrowthVectorError):
            adapted_frame(x1, x2, {v: Fraction(0) for v in XV})
