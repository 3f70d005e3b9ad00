from __future__ import annotations

import random
from fractions import Fraction

import pytest

from cartan235.density import fundamental_density, ricci_density
from cartan235.errors import ConventionError, GrowthVectorError
from cartan235.jets import LaurentJet, MJet
from cartan235.oracle import (
    BIVARS,
    CurveChart,
    JacobiData,
    OracleConfig,
    canonical_invariants,
    chainrule_g,
    completion_invariants,
    curve_jets,
    g_function,
    oracle_invariants,
    projective_density,
    reduced_space,
    reparametrized_g,
    ricci_from_g,
    schwarzian,
    velocity_factor,
    weight,
)
from cartan235.oracle import _jet_eq

from conftest import monge_pair, pt


@pytest.fixture(scope="module")
def q3_data(q3_frame):
    space = reduced_space(q3_frame, pt(q=1), (Fraction(1), Fraction(1)))
    chart = curve_jets(space, OracleConfig())
    return JacobiData(chart, OracleConfig())


class TestReducedSpace:
    def test_construction_and_selftests(self, model_frames):
        # construction runs sigma(lift(u_i), .) = du_i and the kernel check
        for name, (frame, point) in model_frames.items():
            space = reduced_space(frame, point, (Fraction(0), Fraction(1)))
            assert len(space.wbasis) == 4
            std = [[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]]
            assert space.gram == [[Fraction(x) for x in row] for row in std]

    def test_zero_covector_rejected(self, flat_frame):
        with pytest.raises(GrowthVectorError):
            reduced_space(flat_frame, pt(), (Fraction(0), Fraction(0)))


class TestCurveChart:
    def test_chart_normalization(self, q3_data):
        s = q3_data.chart.smatrix
        assert s[0][0].constant_term() == 0
        assert s[0][1] == s[1][0]

    def test_weight_is_four(self, q3_data):
        assert weight(q3_data.chart) == 4

    def test_weight_synthetic_diagonal(self, q3_data):
        t = MJet.variable(("t",), "t", 8)
        synthetic = CurveChart(
            q3_data.space, 8, q3_data.chart.plane0, q3_data.chart.transversal,
            q3_data.chart.chart_basis, [[t, MJet.zero(("t",), 8)], [MJet.zero(("t",), 8), t ** 3]],
            q3_data.chart.generators_w,
        )
        assert weight(synthetic) == 4

    def test_velocity_rank_one_at_zero(self, q3_data):
        sd = q3_data.chart.sdot()
        m = [[e.constant_term() for e in row] for row in sd]
        det = m[0][0] * m[1][1] - m[0][1] * m[1][0]
        assert det == 0
        assert any(any(x != 0 for x in row) for row in m)

    def test_velocity_factorization(self, q3_data):
        z, sign = velocity_factor(q3_data.chart)
        assert sign == -1
        sd = q3_data.chart.sdot()
        assert _jet_eq(z[0] * z[0], -sd[0][0])
        assert _jet_eq(z[0] * z[1], -sd[0][1])
        assert _jet_eq(z[1] * z[1], -sd[1][1])


class TestCanonicalBasis:
    def test_pole_order_two(self, q3_data):
        w = q3_data.w_vector()
        assert w.pole_order == 2

    def test_e1_matches_fiber_lift(self, q3_data):
        # the leading coefficient must be the class of 6(g4 d/du4 + g5 d/du5)
        # with g4 u5 - g5 u4 = 1, up to overall sign of the pair
        space = q3_data.space
        u4, u5 = space.u45
        g4, g5 = (1 / u5, Fraction(0)) if u5 != 0 else (Fraction(0), -1 / u4)
        eps1_7 = [Fraction(0)] * 5 + [6 * g4, 6 * g5]
        target = space.project(eps1_7)
        from cartan235.linalg import invert_matrix

        chart_inv = invert_matrix(q3_data.chart.chart_basis, Fraction(0), Fraction(1))
        target_chart = [sum(chart_inv[r][c] * target[c] for c in range(4)) for r in range(4)]
        cb = q3_data.canonical_basis()
        e1_0 = [j.constant_term() for j in cb.e1]
        assert e1_0 == target_chart or e1_0 == [-x for x in target_chart]

    def test_first_structural_row(self, q3_data):
        cb = q3_data.canonical_basis()
        for a, b in zip(cb.e1, cb.e2):
            assert _jet_eq(a.derivative("tau"), b.scale(3))

    def test_sign_flip_invariance(self, q3_data):
        from cartan235.oracle import WVector, structural_matrix

        w = q3_data.w_vector()
        flipped = WVector([-c for c in w.comps], w.pole_order)
        cb1 = q3_data.canonical_basis(w)
        cb2 = q3_data.canonical_basis(flipped)
        full1 = q3_data.canonical_completion(cb1)
        full2 = q3_data.canonical_completion(cb2)
        c1 = structural_matrix([full1.e1, full1.e2, full1.f1, full1.f2])
        c2 = structural_matrix([full2.e1, full2.e2, full2.f1, full2.f2])
        for i in range(4):
            for j in range(4):
                assert _jet_eq(c1[i][j], c2[i][j])


class TestDerivativeCurve:
    def test_duality_and_pattern(self, q3_data):
        report = canonical_invariants(q3_data)
        assert report.pattern_ok
        # entry (3,1) recovers the density through the canonical pattern
        assert report.rho0 == Fraction(-8, 15)

    def test_completion_independence(self, q3_data):
        base = canonical_invariants(q3_data)
        rng = random.Random(41)
        for _ in range(3):
            a = Fraction(rng.randint(-3, 3), rng.randint(1, 3))
            b = Fraction(rng.randint(-3, 3), rng.randint(1, 3))
            c = Fraction(rng.randint(-3, 3), rng.randint(1, 3))
            rho, dens = completion_invariants(q3_data, [[a, b], [b, c]])
            assert rho.constant_term() == base.rho0
            assert dens.constant_term() == base.density0
            assert _jet_eq(rho, base.rho)
            assert _jet_eq(dens, base.density)

    def test_asymmetric_completion_rejected(self, q3_data):
        with pytest.raises(ValueError):
            completion_invariants(q3_data, [[Fraction(0), Fraction(1)], [Fraction(2), Fraction(0)]])


class TestGFunction:
    def test_flat_g_vanishes(self, flat_frame):
        space = reduced_space(flat_frame, pt(), (Fraction(0), Fraction(1)))
        data = JacobiData(curve_jets(space, OracleConfig()), OracleConfig())
        assert g_function(data).is_zero

    def test_diagonal_matches_canonical(self, q3_data):
        rho_g = ricci_from_g(g_function(q3_data))
        report = canonical_invariants(q3_data)
        assert _jet_eq(rho_g, report.rho)

    def test_reparametrization_identities(self, q3_data):
        # chain rule and the diagonal rule with the Schwarzian, for random
        # polynomial reparametrizations fixing the origin
        g = g_function(q3_data)
        report = canonical_invariants(q3_data)
        rng = random.Random(57)
        order = q3_data.chart.t_order
        for _ in range(5):
            c1 = Fraction(rng.choice([1, 2, -1, 3]), rng.choice([1, 2]))
            c2 = Fraction(rng.randint(-2, 2), 2)
            c3 = Fraction(rng.randint(-2, 2), 3)
            phi = MJet(("t",), order, {(1,): c1, (2,): c2, (3,): c3})
            g_direct = reparametrized_g(q3_data, phi)
            g_chain = chainrule_g(q3_data, g, phi)
            assert _jet_eq(g_direct, g_chain)
            # diagonal rule: rho_phi = phi'^2 rho(phi) + (4/3) S(phi)
            rho_phi = ricci_from_g(g_direct)
            dphi = phi.derivative("t")
            rho_uni = MJet(("t",), report.rho.order, dict(report.rho.terms))
            rhs = dphi * dphi * rho_uni.compose({"t": phi}) + schwarzian(phi).scale(Fraction(4, 3))
            common = min(rho_phi.order, rhs.order)
            assert rho_phi.truncate(common).terms == rhs.truncate(common).terms

    def test_projective_density_identity_parameter(self, flat_frame):
        # rho == 0 already projective: transport factor 1, density 0
        space = reduced_space(flat_frame, pt(), (Fraction(1), Fraction(1)))
        data = JacobiData(curve_jets(space, OracleConfig()), OracleConfig())
        assert projective_density(data) == 0


class TestOracleEndToEnd:
    def test_flat_zero_everywhere(self, flat_frame, oracle_cache):
        for u in ((Fraction(0), Fraction(1)), (Fraction(1), Fraction(1))):
            res = oracle_cache.get("flat", flat_frame, pt(), u)
            assert (res.rho0, res.density0) == (0, 0)
            assert res.weight == 4 and res.velocity_sign == -1

    def test_q3_exact_values(self, q3_frame, oracle_cache):
        res = oracle_cache.get("q3", q3_frame, pt(q=1), (Fraction(0), Fraction(1)))
        assert res.rho0 == Fraction(-8, 15)
        assert res.density0 == Fraction(8, 125)
        assert len(set(res.paths.values())) == 1

    def test_oracle_matches_formula_on_sheared_basis(self, q3_frame):
        # shear mixes every structural-function family into the formulas
        from cartan235.fields import adapted_frame
        from cartan235.ratfunc import parse_expression
        from conftest import MONGE

        x1, x2 = q3_frame.field(1), q3_frame.field(2)
        y2 = x2 + x1.scale(parse_expression("q", MONGE))
        frame = adapted_frame(x1, y2, pt(q=1))
        u = (Fraction(1), Fraction(2))
        res = oracle_invariants(frame, pt(q=1), u)
        rho = ricci_density(frame)
        dens = fundamental_density(frame)
        assert res.rho0 == rho.evaluate(pt(q=1), u)
        assert res.density0 == dens.evaluate(pt(q=1), u)

    def test_homogeneity_transport(self, q3_frame, oracle_cache):
        r1 = oracle_cache.get("q3", q3_frame, pt(q=1), (Fraction(1), Fraction(1)))
        r2 = oracle_cache.get("q3", q3_frame, pt(q=1), (Fraction(2), Fraction(2)))
        assert r2.rho0 == 4 * r1.rho0
        assert r2.density0 == 16 * r1.density0
