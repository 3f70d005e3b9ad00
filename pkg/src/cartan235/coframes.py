"""Shipped structure-equation coframes.

The base solution realizes the flat (2,3,5) geometry on the nilpotent
model: with the five base forms below all seven auxiliary forms can be
taken to vanish and the structure equations close exactly.  A two-function
transformation family produces further valid coframes over the same base
forms, which makes the downstream identity checks non-trivial.
"""

from __future__ import annotations

from .cartan import CartanCoframe
from .fields import OneForm
from .ratfunc import parse_expression

NILPOTENT_COORDS = ("x1", "x2", "x3", "x4", "x5")


def _form(coords, texts) -> OneForm:
    return OneForm.from_components(coords, [parse_expression(t, coords) for t in texts])


def flat_coframe() -> CartanCoframe:
    """Flat-model coframe with every auxiliary form zero.

    Base forms: w1 = dx1 - x4 dx3 - x4^2/2 dx5, w2 = dx2 - x5 dx3,
    w3 = dx3 + x4 dx5, w4 = dx4, w5 = dx5.  Then dw1 = w3^w4,
    dw2 = w3^w5, dw3 = w4^w5, dw4 = dw5 = 0, which is the structure system
    with all obar_j = 0.  D = ker(w1, w2, w3) has growth (2, 3, 5).
    """
    coords = NILPOTENT_COORDS
    omegas = (
        _form(coords, ("1", "0", "-x4", "0", "-x4^2/2")),
        _form(coords, ("0", "1", "-x5", "0", "0")),
        _form(coords, ("0", "0", "1", "0", "x4")),
        _form(coords, ("0", "0", "0", "1", "0")),
        _form(coords, ("0", "0", "0", "0", "1")),
    )
    obars = tuple(OneForm.zero(coords) for _ in range(7))
    return CartanCoframe(omegas, obars)


def nu_transformed(cf: CartanCoframe, nu1_text: str, nu2_text: str) -> CartanCoframe:
    """Two-function symmetry of the structure system:

    obar1 += nu1 w1, obar2 += nu2 w1, obar3 += nu1 w2, obar4 += nu2 w2,
    obar5 += nu1 w3, obar6 += nu2 w3, obar7 += nu1 w4 + nu2 w5.

    Every substitution cancels pairwise in the structure equations, so the
    transformed tuple is again a valid coframe for the same base forms.
    """
    coords = cf.coords
    nu1 = parse_expression(nu1_text, coords)
    nu2 = parse_expression(nu2_text, coords)
    w = cf.omega
    o = cf.obar
    obars = (
        o(1) + w(1).scale(nu1),
        o(2) + w(1).scale(nu2),
        o(3) + w(2).scale(nu1),
        o(4) + w(2).scale(nu2),
        o(5) + w(3).scale(nu1),
        o(6) + w(3).scale(nu2),
        o(7) + w(4).scale(nu1) + w(5).scale(nu2),
    )
    return CartanCoframe(cf.omegas, obars)


def flat_coframe_nontrivial() -> CartanCoframe:
    """Flat-model coframe with non-vanishing auxiliary forms."""
    return nu_transformed(flat_coframe(), "x4", "x1 - x3")


# (base-form index, auxiliary-form index, coefficient) triples of the five
# structure equations, plus their auxiliary-free wedge terms
_EQUATION_TERMS = (
    ((1, 1, "2"), (1, 4, "1"), (2, 2, "1")),
    ((1, 3, "1"), (2, 1, "1"), (2, 4, "2")),
    ((1, 5, "1"), (2, 6, "1"), (3, 1, "1"), (3, 4, "1")),
    ((1, 7, "1"), (3, 6, "4/3"), (4, 1, "1"), (5, 2, "1")),
    ((2, 7, "1"), (3, 5, "-4/3"), (4, 3, "1"), (5, 4, "1")),
)
_CONSTANT_WEDGES = ((3, 4), (3, 5), (4, 5), None, None)


def solve_auxiliary_forms(omegas) -> tuple[OneForm, ...] | None:
    """Auxiliary forms completing five base forms to a structure-equation
    solution, or None when the base forms admit none.

    For fixed base forms the five equations are linear in the 35 auxiliary
    components, so this is one exact Gaussian elimination over the
    rational-function field.  Free components are set to zero (the known
    two-function residual freedom).
    """
    from fractions import Fraction

    from .fields import exterior_derivative, wedge
    from .ratfunc import RationalFunction

    coords = omegas[0].coords
    zero = RationalFunction.const(coords, 0)

    def unknown(j: int, c: int) -> int:
        return (j - 1) * 5 + c

    rows: list[list[RationalFunction]] = []
    for i in range(5):
        d_target = exterior_derivative(omegas[i])
        if _CONSTANT_WEDGES[i] is not None:
            f, g = _CONSTANT_WEDGES[i]
            d_target = d_target - wedge(omegas[f - 1], omegas[g - 1])
        for a in range(5):
            for b in range(a + 1, 5):
                row = [zero] * 35 + [d_target.component(a, b)]
                for (f, j, coef) in _EQUATION_TERMS[i]:
                    w = omegas[f - 1]
                    scale = Fraction(coef) if "/" not in coef else Fraction(int(coef.split("/")[0]), int(coef.split("/")[1]))
                    row[unknown(j, b)] = row[unknown(j, b)] + w.comps[a] * scale
                    row[unknown(j, a)] = row[unknown(j, a)] - w.comps[b] * scale
                rows.append(row)

    # exact row reduction over the function field
    pivots: list[tuple[int, int]] = []
    r = 0
    for col in range(35):
        pivot = next((k for k in range(r, len(rows)) if not rows[k][col].is_zero), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        p = rows[r][col]
        rows[r] = [x / p for x in rows[r]]
        for k in range(len(rows)):
            if k != r and not rows[k][col].is_zero:
                f = rows[k][col]
                rows[k] = [x - f * y for x, y in zip(rows[k], rows[r])]
        pivots.append((r, col))
        r += 1
    for k in range(r, len(rows)):
        if not rows[k][35].is_zero:
            return None
    solution = [zero] * 35
    for row_idx, col in pivots:
        solution[col] = rows[row_idx][35]
    return tuple(
        OneForm.from_components(coords, solution[(j - 1) * 5:(j - 1) * 5 + 5]) for j in range(1, 8)
    )


def scaled_flat_coframe(d_text: str = "1 + x1", e_text: str = "1") -> CartanCoframe:
    """Flat-model coframe with rescaled base forms and solved auxiliaries.

    Scaling (w1, w2, w3, w4, w5) by (d^2 e, d e^2, d e, d, e) preserves the
    forced wedge coefficients of the structure system for any nonvanishing
    functions d, e; the auxiliary forms then come out of the linear solver
    and are generically nonzero, which makes every downstream identity
    check substantive.
    """
    base = flat_coframe()
    coords = base.coords
    d = parse_expression(d_text, coords)
    e = parse_expression(e_text, coords)
    scales = (d * d * e, d * e * e, d * e, d, e)
    omegas = tuple(base.omega(i + 1).scale(scales[i]) for i in range(5))
    obars = solve_auxiliary_forms(omegas)
    if obars is None:
        raise ValueError("scaled base forms admit no auxiliary completion")
    return CartanCoframe(omegas, obars)


def transformed_flat_coframe(n11: str, n12: str, n21: str, n22: str) -> CartanCoframe:
    """Flat-model coframe transformed by an invertible 2x2 function block N.

    The base forms move as (w1, w2) -> det(N) N (w1, w2), w3 -> det(N) w3,
    (w4, w5) -> N (w4, w5), which preserves the forced wedge coefficients of
    the structure system; the auxiliary forms come from the linear solver.
    """
    base = flat_coframe()
    coords = base.coords
    n = [[parse_expression(t, coords) for t in (n11, n12)],
         [parse_expression(t, coords) for t in (n21, n22)]]
    det = n[0][0] * n[1][1] - n[0][1] * n[1][0]
    if det.is_zero:
        raise ValueError("the block must be invertible")
    w = base.omega
    omegas = (
        (w(1).scale(n[0][0]) + w(2).scale(n[0][1])).scale(det),
        (w(1).scale(n[1][0]) + w(2).scale(n[1][1])).scale(det),
        w(3).scale(det),
        w(4).scale(n[0][0]) + w(5).scale(n[0][1]),
        w(4).scale(n[1][0]) + w(5).scale(n[1][1]),
    )
    obars = solve_auxiliary_forms(omegas)
    if obars is None:
        raise ValueError("transformed base forms admit no auxiliary completion")
    return CartanCoframe(omegas, obars)


def flat_coframe_scaled() -> CartanCoframe:
    """Scaled flat coframe whose auxiliary forms pair nontrivially with D.

    Activates the linear scalar, two of the quadratic coefficients and the
    derivative quartic, so the downstream identity chain is substantive.
    """
    return scaled_flat_coframe("1 + x1", "1")


def flat_coframe_mixed() -> CartanCoframe:
    """Block-mixed flat coframe: additionally activates the bracket-weighted
    quartic and the first quadratic coefficient."""
    return transformed_flat_coframe("1", "x3", "x2", "1")
