from __future__ import annotations

import random
from fractions import Fraction

import pytest

from cartan235.cartan import (
    CartanCoframe,
    cartan_frame,
    cartan_identities,
    compare_theorem,
    density_simplified,
    derived_bracket_relations,
    encode_quartic_coefficients,
    extract_quartic_coefficients,
    perturbed,
    verify_structure_equations,
)
from cartan235.coframes import (
    NILPOTENT_COORDS,
    flat_coframe,
    flat_coframe_mixed,
    flat_coframe_nontrivial,
    flat_coframe_scaled,
    nu_transformed,
    solve_auxiliary_forms,
)
from cartan235.density import FramePipeline, fundamental_density, tangential_form
from cartan235.errors import ConventionError
from cartan235.fields import Frame, OneForm, adapted_frame, growth_vector, structural_functions
from cartan235.ratfunc import RationalFunction, parse_expression

C = NILPOTENT_COORDS


def origin():
    return {c: Fraction(0) for c in C}


def oneform(*texts):
    return OneForm.from_components(C, [parse_expression(t, C) for t in texts])


@pytest.fixture(scope="module")
def coframes():
    return flat_coframe(), flat_coframe_nontrivial()


@pytest.fixture(scope="module")
def rich_coframes():
    return flat_coframe_scaled(), flat_coframe_mixed()


class TestVerifier:
    def test_flat_solutions_verify(self, coframes):
        for cf in coframes:
            assert verify_structure_equations(cf).ok

    def test_more_transforms_verify(self, coframes):
        cf = nu_transformed(coframes[0], "x1*x5", "x2^2 - x4")
        assert verify_structure_equations(cf).ok

    def test_self_consistency_harness(self, coframes):
        # recomputing d(omega_i) and subtracting its own decomposition is zero
        from cartan235.cartan import structure_equation_rhs
        from cartan235.fields import exterior_derivative

        cf = coframes[1]
        rhs = structure_equation_rhs(cf)
        for i in range(5):
            assert (exterior_derivative(cf.omega(i + 1)) - rhs[i]).is_zero()

    def test_single_perturbation_detected(self, coframes):
        cf = perturbed(coframes[0], 2, oneform("1", "0", "0", "0", "0"))
        rep = verify_structure_equations(cf)
        assert not rep.ok
        assert 1 in rep.nonzero_equations()  # obar2 enters the first equation

    def test_ten_random_perturbations_detected(self, coframes):
        rng = random.Random(71)
        detected = 0
        for _ in range(10):
            j = rng.randint(1, 7)
            comps = ["0"] * 5
            comps[rng.randint(0, 4)] = rng.choice(["1", "x1", "x4", "2*x3", "x5^2"])
            cf = perturbed(coframes[1], j, oneform(*comps))
            if not verify_structure_equations(cf).ok:
                detected += 1
        assert detected == 10


class TestCartanFrame:
    def test_duality(self, coframes):
        cf = coframes[1]
        frame = cartan_frame(cf)
        # X_k = dual field 6-k: omega_i(X_k) = delta_{i, 6-k}
        for i in range(1, 6):
            for k in range(1, 6):
                want = RationalFunction.const(C, 1 if i == 6 - k else 0)
                assert cf.omega(i)(frame.field(k)) == want

    def test_growth_and_adaptedness(self, coframes):
        frame = cartan_frame(coframes[0])
        assert growth_vector(frame.field(1), frame.field(2), origin()) == (2, 3, 5)

    def test_printed_bracket_coefficients(self, coframes):
        for cf in coframes:
            frame = cartan_frame(cf)
            checks = derived_bracket_relations(cf, frame)
            assert all(checks.values()), [k for k, v in checks.items() if not v]


class TestIdentities:
    def test_flat_chain(self, coframes):
        for cf in coframes:
            frame = cartan_frame(cf)
            ids = cartan_identities(cf, frame)
            assert ids.b_matches_coframe_form
            assert ids.b1_equals_b
            assert ids.pi_equals_alpha3_rule

    def test_identities_with_nonzero_ingredients(self, rich_coframes):
        # the transformed sections have nonzero b and quartic ingredients,
        # so these identities compare genuinely nonzero polynomials
        for cf in rich_coframes:
            assert verify_structure_equations(cf).ok
            frame = cartan_frame(cf)
            pipe = FramePipeline(frame)
            assert not pipe.b.is_zero
            ids = cartan_identities(cf, frame, pipe)
            assert ids.ok
            checks = derived_bracket_relations(cf, frame)
            assert all(checks.values())

    def test_mixed_section_activates_bracket_quartic(self, rich_coframes):
        pipe = FramePipeline(cartan_frame(rich_coframes[1]))
        assert not pipe.big_omega.is_zero
        assert not pipe.big_theta.is_zero
        assert not pipe.alphas[1].is_zero

    def test_solver_rejects_non_solutions(self):
        # base forms failing the forced wedge coefficients admit no completion
        cf = flat_coframe()
        omegas = list(cf.omegas)
        omegas[2] = omegas[2].scale(parse_expression("2", C))  # breaks w4^w5 coefficient
        assert solve_auxiliary_forms(tuple(omegas)) is None

    def test_negative_control_rescaled_basis(self, coframes):
        # an adapted frame that is not a coframe dual: rescale X1
        cf = coframes[1]
        frame = cartan_frame(cf)
        scale = parse_expression("1 + x3", C)
        y1 = frame.field(1).scale(scale)
        new_frame = adapted_frame(y1, frame.field(2), origin())
        pipe = FramePipeline(new_frame)
        assert not (pipe.b1 == pipe.b)


class TestSimplifiedDensity:
    def test_identity_chain(self, coframes):
        for cf in coframes:
            frame = cartan_frame(cf)
            rep = density_simplified(cf, frame)
            assert rep.simplified_matches_master
            assert rep.theta_sum_matches
            assert rep.xi_combination_matches
            assert rep.density.is_zero  # flat geometry

    def test_identity_chain_nonzero_ingredients(self, rich_coframes):
        for cf in rich_coframes:
            frame = cartan_frame(cf)
            rep = density_simplified(cf, frame)
            assert rep.simplified_matches_master
            assert rep.theta_sum_matches
            assert rep.xi_combination_matches
            assert rep.density.is_zero
            qr = compare_theorem(cf, origin(), frame, rep)
            assert qr.ok

    def test_synthetic_coefficient_roundtrip(self):
        rng = random.Random(77)
        for _ in range(5):
            coeffs = [RationalFunction.const(C, Fraction(rng.randint(-9, 9), rng.randint(1, 4))) for _ in range(5)]
            encoded = encode_quartic_coefficients(C, coeffs)
            decoded = extract_quartic_coefficients(encoded)
            assert all(a == b for a, b in zip(coeffs, decoded))


class TestTheorem:
    def test_flat_zero_equals_zero(self, coframes):
        for cf in coframes:
            frame = cartan_frame(cf)
            rep = density_simplified(cf, frame)
            qr = compare_theorem(cf, origin(), frame, rep)
            assert qr.ok
            assert qr.quartic.is_zero() and qr.tangential.is_zero()

    def test_second_point(self, coframes):
        cf = coframes[1]
        point = {c: Fraction(v) for c, v in zip(C, (1, -1, Fraction(1, 2), 1, 2))}
        qr = compare_theorem(cf, point)
        assert qr.ok

    def test_degree_and_basis_independence(self, coframes):
        cf = coframes[1]
        frame = cartan_frame(cf)
        qr = compare_theorem(cf, origin(), frame)
        # both sides transform tensorially: comparing on a random constant
        # basis of D(q) preserves the (zero) residual
        m = [[Fraction(2), Fraction(1)], [Fraction(1), Fraction(1)]]
        f2 = qr.quartic.change_basis(m)
        t2 = qr.tangential.change_basis(m)
        residual = tuple(f + 35 * t for f, t in zip(f2.coeffs, t2.coeffs))
        assert all(c == 0 for c in residual)

    def test_homogeneous_quartics(self, coframes):
        cf = coframes[1]
        qr = compare_theorem(cf, origin())
        s, t = Fraction(3), Fraction(-2)
        assert qr.quartic.value(2 * s, 2 * t) == 16 * qr.quartic.value(s, t)
        assert qr.tangential.value(2 * s, 2 * t) == 16 * qr.tangential.value(s, t)


class TestOracleOnNilpotentModel:
    def test_oracle_agrees_on_coframe_distribution(self, coframes):
        # end to end: the coframe's plane field through both pipelines
        from cartan235.oracle import oracle_invariants

        cf = coframes[1]
        frame = cartan_frame(cf)
        dens = fundamental_density(frame)
        res = oracle_invariants(frame, origin(), (Fraction(1), Fraction(1)))
        assert res.rho0 == 0 and res.density0 == 0
        assert dens.is_zero
