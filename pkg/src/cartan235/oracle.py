"""Jet-space recomputation of the invariants from the reduced curve of
Lagrangian planes.

The computation never touches the closed-form density: it builds the
symplectic reduction at a working covector, pushes the natural rank-4
distribution along the characteristic flow with iterated brackets on
truncated multivariate jets, reads the moving-plane curve in a fixed
chart, and extracts the invariants three independent ways (canonical
moving frame, arbitrary symplectic completion, projective
reparametrization).  Everything is exact rational arithmetic, so
agreement between this module and the closed-form pipeline is an
equality of Fractions, not a tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .errors import ConventionError, DegenerateFrameError, GrowthVectorError, OrderError
from .fiber import h_field
from .fields import Frame, StructuralFunctions, dual_coframe, exterior_derivative, structural_functions
from .jets import LaurentJet, MJet, jet_of_rational, laurent_split
from .linalg import (
    det_fractions,
    invert_matrix,
    jet_pivotable,
    nullspace_fractions,
    rank_fractions,
    solve_fractions,
)
from .ratfunc import RationalFunction

Point = Mapping[str, Fraction]


@dataclass
class OracleConfig:
    t_order: int = 12
    tau_order: int = 5
    base_degree: int | None = None

    def resolved_base_degree(self) -> int:
        return self.base_degree if self.base_degree is not None else self.t_order + 2


@dataclass
class ReducedSpace:
    """Working covector, tangent data of the constraint manifold, and the
    4-dimensional symplectic quotient with a Darboux basis."""

    frame: Frame
    ctable: StructuralFunctions
    point: dict[str, Fraction]
    u45: tuple[Fraction, Fraction]
    sigma7: list[list[Fraction]]  # restricted 2-form on (dx1..dx5, du4, du5)
    h0: list[Fraction]
    e0: list[Fraction]
    wbasis: list[list[Fraction]]  # 4 representatives in the 7-chart
    gram: list[list[Fraction]]  # skew form on wbasis (standard Darboux)

    def project(self, v7: Sequence[Fraction]) -> list[Fraction]:
        cols = list(zip(*(self.wbasis + [self.h0, self.e0])))
        sol = solve_fractions([list(r) for r in cols], list(v7))
        return sol[:4]

    def skew(self, a: Sequence[Fraction], b: Sequence[Fraction]) -> Fraction:
        return sum(
            Fraction(x) * self.gram[i][j] * Fraction(y)
            for i, x in enumerate(a)
            for j, y in enumerate(b)
            if self.gram[i][j]
        )


def _sigma_blocks(frame: Frame, point: Point, uvals: Sequence[Fraction]):
    """Pointwise pieces of sigma = -sum(du_i ^ omega^i + u_i d omega^i)."""
    co = dual_coframe(frame)
    omega_at = [[co.form(i + 1).comps[a].evaluate(point) for a in range(5)] for i in range(5)]
    dsum = [[Fraction(0)] * 5 for _ in range(5)]
    for i in range(5):
        if uvals[i] == 0:
            continue
        dw = exterior_derivative(co.form(i + 1))
        for a in range(5):
            for b in range(a + 1, 5):
                v = dw.component(a, b).evaluate(point) * uvals[i]
                dsum[a][b] += v
                dsum[b][a] -= v
    return omega_at, dsum


def _sigma_matrix(omega_at, dsum, fiber_indices: Sequence[int]) -> list[list[Fraction]]:
    """Gram of sigma on (dx1..dx5, du_j for j in fiber_indices), 0-based j."""
    n = 5 + len(fiber_indices)
    m = [[Fraction(0)] * n for _ in range(n)]
    for a in range(5):
        for b in range(5):
            m[a][b] = -dsum[a][b]
    for idx, j in enumerate(fiber_indices):
        for a in range(5):
            m[a][5 + idx] = omega_at[j][a]
            m[5 + idx][a] = -omega_at[j][a]
    return m


def reduced_space(frame: Frame, point: Point, u45: Sequence[Fraction],
                  ctable: StructuralFunctions | None = None) -> ReducedSpace:
    u4, u5 = Fraction(u45[0]), Fraction(u45[1])
    if u4 == 0 and u5 == 0:
        raise GrowthVectorError("the working covector must have (u4, u5) != (0, 0)")
    if ctable is None:
        ctable = structural_functions(frame)
    point = {k: Fraction(v) for k, v in point.items()}
    frame.check_invertible_at(point)
    uvals = [Fraction(0), Fraction(0), Fraction(0), u4, u5]
    omega_at, dsum = _sigma_blocks(frame, point, uvals)

    # ambient self-test: sigma(lift(u_i), .) = du_i on the full 10-basis
    sigma10 = _sigma_matrix(omega_at, dsum, [0, 1, 2, 3, 4])
    for i in range(1, 6):
        lift = [frame.field(i).comps[a].evaluate(point) for a in range(5)]
        for j in range(1, 6):
            lift.append(sum(ctable.c(j, i, k).evaluate(point) * uvals[k - 1] for k in (4, 5)))
        row = [sum(lift[a] * sigma10[a][b] for a in range(10)) for b in range(10)]
        expected = [Fraction(1) if b == 4 + i else Fraction(0) for b in range(10)]
        if row != expected:
            raise ConventionError(f"sigma(lift(u{i}), .) != du{i}; symplectic realization is inconsistent")

    sigma7 = _sigma_matrix(omega_at, dsum, [3, 4])
    x1 = frame.field(1).evaluate(point)
    x2 = frame.field(2).evaluate(point)
    hf = h_field(frame, ctable)
    h0 = [u4 * b - u5 * a for a, b in zip(x1, x2)]
    h0 += [hf.p4.evaluate(point, (u4, u5)), hf.p5.evaluate(point, (u4, u5))]
    e0 = [Fraction(0)] * 5 + [u4, u5]

    # h spans the kernel of the restricted form
    if any(sum(h0[a] * sigma7[a][b] for a in range(7)) != 0 for b in range(7)):
        raise ConventionError("characteristic vector is not in the kernel of the restricted form")

    efun = [sum(e0[a] * sigma7[a][b] for a in range(7)) for b in range(7)]
    null = nullspace_fractions([efun])
    if len(null) != 6:
        raise DegenerateFrameError("skew-orthogonal complement of the dilation direction has wrong dimension")
    chosen: list[list[Fraction]] = [h0, e0]
    for cand in null:
        if rank_fractions(chosen + [cand]) > len(chosen):
            chosen.append(cand)
        if len(chosen) == 6:
            break
    if len(chosen) != 6:
        raise DegenerateFrameError("could not complete (h, e) to a basis of the complement")
    reps = chosen[2:]

    def skew_raw(a, b):
        return sum(a[i] * sigma7[i][j] * b[j] for i in range(7) for j in range(7) if sigma7[i][j])

    # Darboux normalization of the induced form on the 4 representatives
    v1 = reps[0]
    partner = next((r for r in reps[1:] if skew_raw(v1, r) != 0), None)
    if partner is None:
        raise DegenerateFrameError("degenerate reduced symplectic form")
    c = skew_raw(v1, partner)
    v2 = [x / c for x in partner]
    rest = []
    for r in reps[1:]:
        if r is partner:
            continue
        s1 = skew_raw(v1, r)
        s2 = skew_raw(v2, r)
        rest.append([x - s1 * y + s2 * z for x, y, z in zip(r, v2, v1)])
    v3 = rest[0]
    c2 = skew_raw(v3, rest[1])
    if c2 == 0:
        raise DegenerateFrameError("degenerate reduced symplectic form")
    v4 = [x / c2 for x in rest[1]]
    wbasis = [v1, v2, v3, v4]
    gram = [[skew_raw(a, b) for b in wbasis] for a in wbasis]
    expected = [[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]]
    if gram != [[Fraction(x) for x in row] for row in expected]:
        raise ConventionError("Darboux normalization failed")
    return ReducedSpace(frame, ctable, point, (u4, u5), sigma7, h0, e0, wbasis, gram)


# ---------------------------------------------------------------------------
# pushforward of the rank-4 distribution along the characteristic flow
# ---------------------------------------------------------------------------


class _BracketEngine:
    """Vector fields on the 7-chart with truncated-jet coefficients."""

    def __init__(self, space: ReducedSpace, degree: int):
        frame = space.frame
        coords = frame.coords
        self.names = tuple(coords) + ("u4", "u5")
        self.degree = degree
        point = space.point

        def jx(f: RationalFunction) -> MJet:
            base = jet_of_rational(f, point, degree)
            return MJet(self.names, degree, {e + (0, 0): c for e, c in base.terms.items()})

        self.jx = jx
        u4c, u5c = space.u45
        self.u4 = MJet(self.names, degree, {(0,) * 5 + (0, 0): u4c, (0,) * 5 + (1, 0): Fraction(1)})
        self.u5 = MJet(self.names, degree, {(0,) * 5 + (0, 0): u5c, (0,) * 5 + (0, 1): Fraction(1)})
        hf = h_field(frame, space.ctable)

        def fiberpoly(fp) -> MJet:
            total = MJet.zero(self.names, degree)
            for e, c in fp.terms.items():
                term = jx(c)
                for _ in range(e[3]):
                    term = term * self.u4
                for _ in range(e[4]):
                    term = term * self.u5
                total = total + term
            return total

        self.fiberpoly = fiberpoly
        x1 = [jx(c) for c in frame.field(1).comps]
        x2 = [jx(c) for c in frame.field(2).comps]
        self.h = [self.u4 * b - self.u5 * a for a, b in zip(x1, x2)]
        self.h += [fiberpoly(hf.p4), fiberpoly(hf.p5)]
        self._dh = [[comp.derivative(n) for n in self.names] for comp in self.h]

    def zero_field(self) -> list[MJet]:
        return [MJet.zero(self.names, self.degree) for _ in range(7)]

    def ad_h(self, v: list[MJet]) -> list[MJet]:
        """[h, v] on the 7-chart."""
        dv = [[comp.derivative(n) for n in self.names] for comp in v]
        out = []
        for k in range(7):
            acc = MJet.zero(self.names, self.degree)
            for b in range(7):
                if not self.h[b].is_zero:
                    acc = acc + self.h[b] * dv[k][b]
                if not v[b].is_zero:
                    acc = acc - v[b] * self._dh[k][b]
            out.append(acc)
        return out

    def value_at_center(self, v: list[MJet]) -> list[Fraction]:
        for comp in v:
            comp.require_order(0)
        return [comp.constant_term() for comp in v]


def _generators(space: ReducedSpace, eng: _BracketEngine) -> list[list[MJet]]:
    """Fields spanning the rank-4 distribution along the constraint manifold:
    the two fiber directions and the tangentially corrected impulse lifts."""
    frame = space.frame
    c = space.ctable.c
    gens = []
    for idx in (5, 6):  # du4, du5
        g = eng.zero_field()
        g[idx] = MJet.const(eng.names, 1, eng.degree)
        gens.append(g)
    for m in (1, 2):
        g = [eng.jx(comp) for comp in frame.field(m).comps]
        with space.ctable.paused():
            du4 = eng.jx(c(4, m, 4)) * eng.u4 + eng.jx(c(4, m, 5)) * eng.u5
            du5 = eng.jx(c(5, m, 4)) * eng.u4 + eng.jx(c(5, m, 5)) * eng.u5
        g += [du4, du5]
        gens.append(g)
    return gens


@dataclass
class CurveChart:
    """Moving-plane curve in a fixed symplectic chart."""

    space: ReducedSpace
    t_order: int
    plane0: list[list[Fraction]]  # a1, a2 (the plane at t=0)
    transversal: list[list[Fraction]]  # b1, b2 with skew(a_i, b_j) = delta
    chart_basis: list[list[Fraction]]  # columns a1 a2 b1 b2 in W coordinates
    smatrix: list[list[MJet]]  # symmetric 2x2, univariate in t, S(0) = 0
    generators_w: list[list[MJet]]  # the four generator curves, W-coordinates

    def sdot(self) -> list[list[MJet]]:
        t = self.smatrix[0][0].vars[0]
        return [[e.derivative(t) for e in row] for row in self.smatrix]


def _project_curve(space: ReducedSpace, eng: _BracketEngine, gen: list[MJet], order: int) -> list[MJet]:
    """t-jet of the pushforward of a generator, projected to W coordinates."""
    tvars = ("t",)
    coeffs: list[list[Fraction]] = []
    cur = gen
    fact = Fraction(1)
    efun = [sum(space.e0[a] * space.sigma7[a][b] for a in range(7)) for b in range(7)]
    for k in range(order + 1):
        if k:
            fact /= k
        val = eng.value_at_center(cur)
        if sum(f * v for f, v in zip(efun, val)) != 0:
            raise ConventionError("pushforward left the skew-orthogonal complement of the dilation")
        coeffs.append([x * fact for x in space.project(val)])
        if k < order:
            cur = eng.ad_h(cur)
    comps = []
    for i in range(4):
        comps.append(MJet(tvars, order, {(k,): coeffs[k][i] for k in range(order + 1)}))
    return comps


def _plane_from_bivector(b0: list[Fraction]) -> list[list[Fraction]]:
    """Span of a decomposable 2-vector in R^4; components ordered
    (01, 02, 03, 12, 13, 23)."""
    idx = {(0, 1): 0, (0, 2): 1, (0, 3): 2, (1, 2): 3, (1, 3): 4, (2, 3): 5}

    def b(i, j):
        if i == j:
            return Fraction(0)
        return b0[idx[(i, j)]] if i < j else -b0[idx[(j, i)]]

    rows = []
    import itertools

    for a, bb, c in itertools.combinations(range(4), 3):
        # (v ^ B)_{a b c} = v_a B_{bc} - v_b B_{ac} + v_c B_{ab}
        row = [Fraction(0)] * 4
        row[a] += b(bb, c)
        row[bb] -= b(a, c)
        row[c] += b(a, bb)
        rows.append(row)
    plane = nullspace_fractions(rows)
    if len(plane) != 2:
        raise ConventionError("leading 2-vector of the curve is not decomposable")
    return plane


def _wedge4(u: Sequence[Fraction], v: Sequence[Fraction]) -> list[Fraction]:
    out = []
    for i in range(4):
        for j in range(i + 1, 4):
            out.append(u[i] * v[j] - u[j] * v[i])
    return out


def curve_jets(space: ReducedSpace, config: OracleConfig | None = None) -> CurveChart:
    config = config or OracleConfig()
    order = config.t_order
    eng = _BracketEngine(space, config.resolved_base_degree())
    gens = _generators(space, eng)
    curves = [_project_curve(space, eng, g, order) for g in gens]

    # plane at t=0 from the leading decomposable 2-vector of the best pair
    best = None
    for i in range(4):
        for j in range(i + 1, 4):
            wedge_jets = [
                curves[i][a] * curves[j][b] - curves[i][b] * curves[j][a]
                for a in range(4)
                for b in range(a + 1, 4)
            ]
            ords = [w.min_total_degree() for w in wedge_jets if w.min_total_degree() is not None]
            if not ords:
                continue
            o = min(ords)
            if best is None or o < best[0]:
                best = (o, i, j, wedge_jets)
    if best is None:
        raise GrowthVectorError("generator curves never span a plane; curve is degenerate")
    o, bi, bj, wedge_jets = best
    b0 = [w.terms.get((o,), Fraction(0)) for w in wedge_jets]
    plane0 = _plane_from_bivector(b0)
    a1, a2 = plane0
    if space.skew(a1, a2) != 0:
        raise ConventionError("plane at t=0 is not isotropic")

    # symplectically dual transversal: skew(a_i, b_j) = delta_ij, Lagrangian
    def solve_dual(c1: Fraction, c2: Fraction) -> list[Fraction]:
        rows = [[space.skew(a1, e) for e in _unit4()], [space.skew(a2, e) for e in _unit4()]]
        return solve_fractions(rows, [c1, c2])

    b1 = solve_dual(Fraction(1), Fraction(0))
    b2 = solve_dual(Fraction(0), Fraction(1))
    # skew(b1, a1) = -1, so adding skew(b1, b2) * a1 clears the pairing
    b2 = [x + space.skew(b1, b2) * y for x, y in zip(b2, a1)]
    if space.skew(b1, b2) != 0 or space.skew(a1, b1) != 1 or space.skew(a2, b2) != 1 \
            or space.skew(a1, b2) != 0 or space.skew(a2, b1) != 0:
        raise ConventionError("chart basis is not symplectically normalized")

    chart = [list(col) for col in zip(a1, a2, b1, b2)]
    chart_inv = invert_matrix(chart, Fraction(0), Fraction(1))
    curves_chart = []
    for comp in curves:
        curves_chart.append([
            _lincomb(chart_inv[r], comp) for r in range(4)
        ])

    # select two generator columns with the least-vanishing a-block determinant
    best_cols = None
    for i in range(4):
        for j in range(i + 1, 4):
            det = curves_chart[i][0] * curves_chart[j][1] - curves_chart[i][1] * curves_chart[j][0]
            mo = det.min_total_degree()
            if mo is None:
                continue
            if best_cols is None or mo < best_cols[0]:
                best_cols = (mo, i, j, det)
    if best_cols is None:
        raise GrowthVectorError("curve stays inside the plane at t=0")
    mo, ci, cj, det = best_cols
    k, unit = laurent_split(det)
    unit_inv = unit.invert()
    p = [[curves_chart[ci][0], curves_chart[cj][0]], [curves_chart[ci][1], curves_chart[cj][1]]]
    q = [[curves_chart[ci][2], curves_chart[cj][2]], [curves_chart[ci][3], curves_chart[cj][3]]]
    adj = [[p[1][1], -p[0][1]], [-p[1][0], p[0][0]]]
    s = [[MJet.zero(("t",), order - k) for _ in range(2)] for _ in range(2)]
    for r in range(2):
        for c_ in range(2):
            num = q[r][0] * adj[0][c_] + q[r][1] * adj[1][c_]
            s[r][c_] = _divide_tpower(num, k) * unit_inv

    if not _jet_eq(s[0][1], s[1][0]):
        raise ConventionError("chart curve is not self-adjoint; the symplectic pairing broke")
    if s[0][0].constant_term() != 0 or s[0][1].constant_term() != 0 or s[1][1].constant_term() != 0:
        raise ConventionError("chart curve does not pass through the plane at t=0")
    for idx in range(4):
        if idx in (ci, cj):
            continue
        lhs0 = s[0][0] * curves_chart[idx][0] + s[0][1] * curves_chart[idx][1]
        lhs1 = s[1][0] * curves_chart[idx][0] + s[1][1] * curves_chart[idx][1]
        if not (_jet_eq(lhs0, curves_chart[idx][2]) and _jet_eq(lhs1, curves_chart[idx][3])):
            raise ConventionError("generator curve leaves the graph of the chart matrix")
    return CurveChart(space, order, plane0, [b1, b2], chart, s, curves_chart)


def _unit4():
    return [[Fraction(1 if i == j else 0) for j in range(4)] for i in range(4)]


def _lincomb(coeffs: Sequence[Fraction], jets: Sequence[MJet]) -> MJet:
    acc = MJet.zero(jets[0].vars, jets[0].order)
    for c, j in zip(coeffs, jets):
        if c:
            acc = acc + j.scale(c)
    return acc


def _divide_tpower(jet: MJet, k: int) -> MJet:
    if k == 0:
        return jet
    terms = {}
    for e, c in jet.terms.items():
        if e[0] < k:
            raise ConventionError("jet not divisible by the expected power of t")
        terms[(e[0] - k,) + e[1:]] = c
    return MJet(jet.vars, jet.order - k, terms)


def _jet_eq(a: MJet, b: MJet) -> bool:
    order = min(a.order, b.order)
    return a.truncate(order) == b.truncate(order)


def weight(chart: CurveChart) -> int:
    det = (chart.smatrix[0][0] * chart.smatrix[1][1]
           - chart.smatrix[0][1] * chart.smatrix[1][0])
    k, _ = laurent_split(det)
    return k


def velocity_factor(chart: CurveChart) -> tuple[list[MJet], int]:
    """Rational z(t) with dS/dt = -z z^T, plus the constant velocity sign.

    Existence of the rational factorization is exactly the statement that
    the velocity is rank 1 with constant sign (nondecreasing for the minus
    convention used here).
    """
    sd = chart.sdot()
    det = sd[0][0] * sd[1][1] - sd[0][1] * sd[1][0]
    if not det.is_zero:
        raise ConventionError("velocity determinant does not vanish: rank > 1")

    def try_factor(sign: int) -> list[MJet] | None:
        m00 = sd[0][0].scale(-sign)
        m11 = sd[1][1].scale(-sign)
        m01 = sd[0][1].scale(-sign)
        if m00.is_zero and m11.is_zero:
            return None
        lead, other = (m00, m11) if not m00.is_zero else (m11, m00)
        try:
            k, unit = laurent_split(lead)
            if k % 2:
                return None
            z1 = _raise_tpower(unit.sqrt(), k // 2)
        except Exception:
            return None
        num = m01
        k1, u1 = laurent_split(z1)
        try:
            if num.is_zero:
                z2 = MJet.zero(num.vars, num.order)
            else:
                k2, u2 = laurent_split(num)
                if k2 < k1:
                    return None
                z2 = _raise_tpower(u2 * u1.invert(), k2 - k1)
        except Exception:
            return None
        pair = [z1, z2] if not m00.is_zero else [z2, z1]
        checks = [(pair[0] * pair[0], sd[0][0].scale(-sign)),
                  (pair[0] * pair[1], sd[0][1].scale(-sign)),
                  (pair[1] * pair[1], sd[1][1].scale(-sign))]
        for lhs, rhs in checks:
            if not _jet_eq(lhs, rhs):
                return None
        return pair

    z = try_factor(+1)
    if z is not None:
        return z, -1  # dS/dt = -(z z^T): nonpositive chart velocity
    z = try_factor(-1)
    if z is not None:
        raise ConventionError("velocity sign is opposite to the fixed convention")
    if sd[0][0].is_zero and sd[1][1].is_zero and sd[0][1].is_zero:
        raise GrowthVectorError("velocity vanishes identically; curve is constant")
    raise ConventionError("velocity is not a rational rank-1 square; sign is not constant")


def _raise_tpower(jet: MJet, k: int) -> MJet:
    if k == 0:
        return jet
    terms = {(e[0] + k,) + e[1:]: c for e, c in jet.terms.items()}
    return MJet(jet.vars, jet.order + k, terms)


# ---------------------------------------------------------------------------
# bivariate phase: Laurent data around the moving parameter
# ---------------------------------------------------------------------------

BIVARS = ("s", "tau")


def _to_bivariate(jet: MJet) -> MJet:
    """t-jet -> jet in (s, tau) via t = tau + s."""
    image = MJet(BIVARS, jet.order, {(1, 0): Fraction(1), (0, 1): Fraction(1)})
    return jet.compose({jet.vars[0]: image})


def _at_tau(jet: MJet) -> MJet:
    """t-jet -> s-free jet in (s, tau) via t = tau."""
    image = MJet(BIVARS, jet.order, {(0, 1): Fraction(1)})
    return jet.compose({jet.vars[0]: image})


def _mat2(fn, m):
    return [[fn(m[0][0]), fn(m[0][1])], [fn(m[1][0]), fn(m[1][1])]]


def _mat2_mul(a, b):
    return [[a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
            [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]]]


def _mat2_vec(a, v):
    return [a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]]


@dataclass
class WVector:
    """Laurent expansion data of the distinguished velocity square root."""

    comps: list[LaurentJet]  # 4 W-coordinates, Laurent in s, jets in tau
    pole_order: int


@dataclass
class CanonicalJet:
    e1: list[MJet]  # 4 W-coordinates, jets in tau
    e2: list[MJet]
    f1: list[MJet] | None = None
    f2: list[MJet] | None = None


class JacobiData:
    """All bivariate objects derived from one curve chart."""

    def __init__(self, chart: CurveChart, config: OracleConfig | None = None):
        self.chart = chart
        self.config = config or OracleConfig()
        self.space = chart.space
        s = chart.smatrix
        sd = chart.sdot()
        self.s_biv = _mat2(_to_bivariate, s)
        self.s_tau = _mat2(_at_tau, s)
        self.sd_tau = _mat2(_at_tau, sd)
        self.d = [[self.s_biv[i][j] - self.s_tau[i][j] for j in range(2)] for i in range(2)]
        det_d = self.d[0][0] * self.d[1][1] - self.d[0][1] * self.d[1][0]
        det_l = LaurentJet.from_jet(det_d)
        if det_l.is_zero:
            raise OrderError("det(S_t - S_tau) vanishes to the available order")
        if det_l.jet.constant_term() == 0:
            raise ConventionError("weight is not constant near the base parameter")
        self.weight = det_l.shift
        inv_det = det_l.invert()
        adj = [[LaurentJet.from_jet(self.d[1][1]), LaurentJet.from_jet(-self.d[0][1])],
               [LaurentJet.from_jet(-self.d[1][0]), LaurentJet.from_jet(self.d[0][0])]]
        self.k = [[adj[i][j] * inv_det for j in range(2)] for i in range(2)]
        self._z: list[MJet] | None = None
        self._velocity_sign: int | None = None

    # the rational square root of the velocity exists for the geometric
    # parametrization but not for arbitrary reparametrized charts, so it is
    # computed on demand
    @property
    def z(self) -> list[MJet]:
        if self._z is None:
            self._z, self._velocity_sign = velocity_factor(self.chart)
        return self._z

    @property
    def velocity_sign(self) -> int:
        if self._velocity_sign is None:
            self._z, self._velocity_sign = velocity_factor(self.chart)
        return self._velocity_sign

    # -- w-vector and canonical basis --------------------------------------

    def w_vector(self) -> WVector:
        z_biv = [LaurentJet.from_jet(_to_bivariate(z)) for z in self.z]
        y = [self.k[0][0] * z_biv[0] + self.k[0][1] * z_biv[1],
             self.k[1][0] * z_biv[0] + self.k[1][1] * z_biv[1]]
        st = [[LaurentJet.from_jet(e) for e in row] for row in self.s_tau]
        w4 = [y[0], y[1],
              st[0][0] * y[0] + st[0][1] * y[1],
              st[1][0] * y[0] + st[1][1] * y[1]]
        sign = self._leading_sign(w4)
        if sign < 0:
            w4 = [-c for c in w4]
        pole = min(c.order_of_pole() for c in w4 if not c.is_zero)
        if pole != -2:
            raise ConventionError(f"velocity square root has pole order {-pole}, expected 2")
        return WVector(w4, -pole)

    @staticmethod
    def _leading_sign(comps: list[LaurentJet]) -> int:
        best = None
        for ci, c in enumerate(comps):
            if c.is_zero:
                continue
            for e in sorted(c.jet.terms, key=lambda e: (e[0], e[1])):
                cand = (c.shift + e[0], e[1], ci)
                val = c.jet.terms[e]
                if best is None or cand < best[0]:
                    best = (cand, val)
                break
        if best is None:
            raise ConventionError("zero velocity square root")
        return 1 if best[1] > 0 else -1

    def canonical_basis(self, w: WVector | None = None) -> CanonicalJet:
        w = w or self.w_vector()
        e1 = [c.coefficient_of_spower(-2) for c in w.comps]
        e2 = [c.coefficient_of_spower(-1) for c in w.comps]
        order = min(j.order for j in e1 + e2)
        # first structural row: de1/dtau = 3 e2
        for a, b in zip(e1, e2):
            if not _jet_eq(a.derivative("tau"), b.scale(3)):
                raise ConventionError("leading Laurent coefficients violate the first structural row")
        m = [[e1[0].coefficient((0,)), e1[1].coefficient((0,))],
             [e2[0].coefficient((0,)), e2[1].coefficient((0,))]]
        if det_fractions(m) == 0:
            raise ConventionError("canonical pair does not span the moving plane")
        return CanonicalJet(e1, e2)

    # -- derivative curve and canonical completion ---------------------------

    def derivative_curve(self) -> list[list[MJet]]:
        """Free term of the Laurent expansion of the curve in the chart:
        a 2x2 tau-jet matrix H; the plane is {(H d, S_tau H d + d)}."""
        return [[self.k[i][j].coefficient_of_spower(0) for j in range(2)] for i in range(2)]

    # Gram of the form in chart coordinates (a1, a2, b1, b2); the chart
    # construction asserts skew(a_i, b_j) = delta_ij and isotropy of both
    # planes, so this is constant.
    CHART_GRAM = ((0, 0, 1, 0), (0, 0, 0, 1), (-1, 0, 0, 0), (0, -1, 0, 0))

    def skew_jets(self, a: list[MJet], b: list[MJet]) -> MJet:
        acc = MJet.zero(("tau",), min(x.order for x in a + b))
        for i in range(4):
            for j in range(4):
                g = self.CHART_GRAM[i][j]
                if g:
                    acc = acc + (a[i] * b[j]).scale(g)
        return acc

    def _plane_vector(self, h: list[list[MJet]], c: list[MJet]) -> list[MJet]:
        """(H c, S_tau H c + c) as a 4-vector of tau-jets in W coordinates."""
        hc = _mat2_vec(h, c)
        st = [[_drop_s(e) for e in row] for row in self.s_tau]
        top = _mat2_vec(st, hc)
        return [hc[0], hc[1], top[0] + c[0], top[1] + c[1]]

    def canonical_completion(self, canon: CanonicalJet) -> CanonicalJet:
        h = self.derivative_curve()
        order = min(j.order for j in canon.e1 + canon.e2)
        units = [[MJet.const(("tau",), 1 if i == j else 0, order) for j in range(2)] for i in range(2)]
        cols = []
        for k in range(2):
            fk = self._plane_vector(h, units[k])
            cols.append(fk)
        # pairing matrix M[j][k] = skew(f(unit_k), e_j)
        m = [[self.skew_jets(cols[k], canon.e1) for k in range(2)],
             [self.skew_jets(cols[k], canon.e2) for k in range(2)]]
        minv = invert_matrix(m, MJet.zero(("tau",), order), MJet.const(("tau",), 1, order), jet_pivotable)
        f = []
        for i in range(2):
            c = [minv[0][i], minv[1][i]]
            f.append(self._plane_vector(h, c))
        f1, f2 = f
        if not _jet_eq(self.skew_jets(f1, f2), MJet.zero(("tau",), order)):
            raise ConventionError("derivative plane is not isotropic")
        for fi, label in ((f1, 1), (f2, 2)):
            for ej, labj in ((canon.e1, 1), (canon.e2, 2)):
                want = MJet.const(("tau",), 1 if label == labj else 0, order)
                if not _jet_eq(self.skew_jets(fi, ej), want):
                    raise ConventionError("dual-basis normalization failed")
        return CanonicalJet(canon.e1, canon.e2, f1, f2)


def _drop_s(jet: MJet) -> MJet:
    """(s, tau)-jet with no s-dependence -> tau-jet."""
    terms = {}
    for e, c in jet.terms.items():
        if e[0]:
            raise ValueError("jet depends on s")
        terms[(e[1],)] = c
    return MJet(("tau",), jet.order, terms)


def structural_matrix(frame_rows: list[list[MJet]]) -> list[list[MJet]]:
    """C with d(row_i)/dtau = sum_j C[i][j] row_j for a frame of tau-jets."""
    order = min(j.order for row in frame_rows for j in row)
    r = [[e.truncate(order) for e in row] for row in frame_rows]
    rp = [[e.derivative("tau") for e in row] for row in r]
    rinv = invert_matrix(r, MJet.zero(("tau",), order), MJet.const(("tau",), 1, order), jet_pivotable)
    return [[_sum_jets([rp[i][k] * rinv[k][j] for k in range(4)]) for j in range(4)] for i in range(4)]


def _sum_jets(jets: list[MJet]) -> MJet:
    acc = jets[0]
    for j in jets[1:]:
        acc = acc + j
    return acc


@dataclass
class StructuralReport:
    c: list[list[MJet]]
    rho: MJet
    density: MJet
    rho0: Fraction
    density0: Fraction
    pattern_ok: bool


def canonical_invariants(data: JacobiData) -> StructuralReport:
    """rho and the density from the canonical moving frame's structural
    equations; every forced entry of the pattern is asserted."""
    canon = data.canonical_completion(data.canonical_basis())
    rows = [canon.e1, canon.e2, canon.f1, canon.f2]
    c = structural_matrix(rows)
    rho = c[1][0].scale(4)
    ok = True
    checks = [
        (c[0][0], None, 0), (c[0][1], None, 3), (c[0][2], None, 0), (c[0][3], None, 0),
        (c[1][1], None, 0), (c[1][2], None, 0), (c[1][3], None, 4),
        (c[2][2], None, 0), (c[3][2], None, -3), (c[3][3], None, 0),
        (c[2][3], rho.scale(Fraction(-1, 4)), None),
        (c[3][1], rho.scale(Fraction(-9, 4)), None),
        (c[3][0], rho.derivative("tau").scale(Fraction(-7, 16)), None),
        (c[2][1], rho.derivative("tau").scale(Fraction(-7, 16)), None),
    ]
    for got, jet_want, const_want in checks:
        want = jet_want if jet_want is not None else MJet.const(("tau",), const_want, got.order)
        if not _jet_eq(got, want):
            ok = False
    if not ok:
        raise ConventionError("canonical structural equations violate the forced pattern")
    rho2 = rho.derivative("tau").derivative("tau")
    density = (-c[2][0] + (rho * rho).scale(Fraction(1, 8)) - rho2.scale(Fraction(1, 16))).scale(Fraction(36, 35))
    return StructuralReport(c, rho, density, rho.coefficient((0,)), density.coefficient((0,)), ok)


def completion_invariants(data: JacobiData, mu: Sequence[Sequence[Fraction]]) -> tuple[MJet, MJet]:
    """rho and density via an arbitrary symplectic completion
    f~_i = f_i + mu_i1 e1 + mu_i2 e2 (mu symmetric), through the generic
    jet extraction formulas."""
    from .density import invariants_from_structural_jets

    if mu[0][1] != mu[1][0]:
        raise ValueError("completion parameters must be symmetric")
    canon = data.canonical_completion(data.canonical_basis())
    e1, e2, f1, f2 = canon.e1, canon.e2, canon.f1, canon.f2
    ft1 = [a + b.scale(mu[0][0]) + c.scale(mu[0][1]) for a, b, c in zip(f1, e1, e2)]
    ft2 = [a + b.scale(mu[1][0]) + c.scale(mu[1][1]) for a, b, c in zip(f2, e1, e2)]
    rows = [e1, e2, ft1, ft2]
    c = structural_matrix(rows)
    # forced entries of the generic completed frame
    order = c[0][0].order
    forced = [
        (c[0][0], 0), (c[0][1], 3), (c[0][2], 0), (c[0][3], 0),
        (c[1][2], 0), (c[1][3], 4), (c[2][2], 0), (c[3][2], -3),
    ]
    for got, want in forced:
        if not _jet_eq(got, MJet.const(("tau",), want, order)):
            raise ConventionError("completed frame violates the forced structural pattern")
    if not _jet_eq(c[2][1], c[3][0]):
        raise ConventionError("completed frame is not symplectic (off-diagonal symmetry)")
    if not _jet_eq(c[2][3], -c[1][0]):
        raise ConventionError("completed frame violates the trace constraint")
    if not _jet_eq(c[3][3], -c[1][1]):
        raise ConventionError("completed frame violates the trace constraint")
    a21, a22, a31, a41, a42 = c[1][0], c[1][1], c[2][0], c[2][1], c[3][1]
    return invariants_from_structural_jets(a21, a22, a31, a41, a42)


# ---------------------------------------------------------------------------
# generating-function route
# ---------------------------------------------------------------------------


def g_function(data: JacobiData) -> MJet:
    """Regularized trace of the composed affine-chart derivatives.

    The composed operator trace is -k/s^2 - g.  It equals
    d/ds tr(D^{-1} Sdot_tau) with D = S_{tau+s} - S_tau, which costs a
    single matrix inverse and so keeps two more valid jet orders than the
    literal double product."""
    st = [[LaurentJet.from_jet(e) for e in row] for row in data.sd_tau]
    k = data.k
    m1 = _mat2_mul(k, st)
    tr2 = m1[0][0] + m1[1][1]
    trace = tr2.derivative_s()  # = tr((op2) o (op1)): d/ds of tr(D^{-1} Sdot_tau)
    g = -trace - LaurentJet(-2, MJet.const(BIVARS, data.weight, trace.jet.order + 2), normalize=False)
    if g.is_zero:
        return MJet.zero(BIVARS, trace.jet.order)
    if g.order_of_pole() < 0:
        raise ConventionError("trace asymptotics have a non-removable singular part")
    return g.to_mjet()


def ricci_from_g(g: MJet) -> MJet:
    """Diagonal restriction of the generating function as a tau-jet."""
    terms = {(e[1],): c for e, c in g.terms.items() if e[0] == 0}
    return MJet(("tau",), g.order, terms)


def reparametrized_g(data: JacobiData, phi: MJet, config: OracleConfig | None = None) -> MJet:
    """g of the reparametrized curve, recomputed from scratch on S(phi(t))."""
    t = phi.vars[0]
    if phi.constant_term() != 0:
        raise ValueError("reparametrization must fix t=0")
    s_new = _mat2(lambda e: e.compose({e.vars[0]: phi}), data.chart.smatrix)
    chart = CurveChart(data.space, min(phi.order, data.chart.t_order), data.chart.plane0,
                       data.chart.transversal, data.chart.chart_basis, s_new, data.chart.generators_w)
    return g_function(JacobiData(chart, config or data.config))


def chainrule_g(data: JacobiData, g: MJet, phi: MJet) -> MJet:
    """g of the reparametrized curve predicted by the chain rule."""
    k = data.weight
    phi_biv0 = phi.compose({phi.vars[0]: MJet(BIVARS, phi.order, {(1, 0): Fraction(1), (0, 1): Fraction(1)})})
    phi_biv1 = phi.compose({phi.vars[0]: MJet(BIVARS, phi.order, {(0, 1): Fraction(1)})})
    dphi = phi.derivative(phi.vars[0])
    dphi0 = dphi.compose({phi.vars[0]: MJet(BIVARS, dphi.order, {(1, 0): Fraction(1), (0, 1): Fraction(1)})})
    dphi1 = dphi.compose({phi.vars[0]: MJet(BIVARS, dphi.order, {(0, 1): Fraction(1)})})
    diff = phi_biv0 - phi_biv1
    psi = _divide_spower(diff, 1)  # divided difference: diff = s * psi, psi unit
    g_comp = g.compose({"s": diff, "tau": phi_biv1})
    prod = dphi0 * dphi1
    bracket_num = prod - psi * psi
    bracket = LaurentJet.from_jet(bracket_num) * LaurentJet(-2, (psi * psi).invert(), normalize=False)
    if not bracket.is_zero and bracket.order_of_pole() < 0:
        raise ConventionError("chain-rule correction is singular")
    return prod * g_comp + (bracket.to_mjet() if not bracket.is_zero else MJet.zero(BIVARS, g.order)).scale(k)


def _divide_spower(jet: MJet, k: int) -> MJet:
    terms = {}
    for e, c in jet.terms.items():
        if e[0] < k:
            raise ConventionError("jet is not divisible by the expected power of s")
        terms[(e[0] - k,) + e[1:]] = c
    return MJet(jet.vars, jet.order - k, terms)


def schwarzian(phi: MJet) -> MJet:
    t = phi.vars[0]
    d1 = phi.derivative(t)
    d2 = d1.derivative(t)
    d3 = d2.derivative(t)
    inv = d1.invert()
    return d3 * inv.scale(Fraction(1, 2)) - (d2 * inv * d2 * inv).scale(Fraction(3, 4))


def projective_parameter(rho: MJet, order: int) -> MJet:
    """phi with phi(0)=0, phi'(0)=1 making the reparametrized Ricci vanish:
    S(phi) = -(3/4) phi'^2 rho(phi) for weight 4."""
    t = "t"
    rho_t = MJet(("t",), rho.order, {e: c for e, c in rho.terms.items()})
    eta = MJet.zero(("t",), order)
    phi = MJet.variable(("t",), t, order)
    for _ in range(order + 2):
        dphi = eta.scale(2).integrate(t).truncate(order).exp()
        phi = dphi.integrate(t).truncate(order)
        target = (dphi * dphi * rho_t.compose({"t": phi})).scale(Fraction(-3, 4))
        eta = (target + eta * eta).integrate(t).truncate(order)
    check = schwarzian(phi) + (phi.derivative(t) ** 2 * rho_t.compose({"t": phi})).scale(Fraction(3, 4))
    if not check.is_zero:
        raise ConventionError("projective parameter did not converge")
    return phi


def projective_density(data: JacobiData, g: MJet | None = None,
                       rho: MJet | None = None,
                       rho_reference: MJet | None = None) -> Fraction:
    """Density at the base point via a zero-Ricci parametrization.

    The projective parameter is solved from the diagonal reparametrization
    rule; the off-diagonal transport uses the chain rule for the generating
    function (its agreement with a from-scratch recomputation is a separate
    test at polynomial reparametrizations)."""
    g = g if g is not None else g_function(data)
    rho = rho if rho is not None else ricci_from_g(g)
    # prefer a longer Ricci jet when the caller has one from another path
    if rho_reference is not None and rho_reference.order > rho.order:
        if not _jet_eq(rho_reference, rho):
            raise ConventionError("supplied Ricci jet disagrees with the generating function")
        rho = rho_reference
    order = min(rho.order + 1, data.chart.t_order - 2)
    phi = projective_parameter(rho, order)
    g_phi = chainrule_g(data, g, phi)
    diag = ricci_from_g(g_phi)
    diag.require_order(0)
    if not diag.is_zero:
        raise ConventionError("reparametrized Ricci does not vanish in the projective parameter")
    # d/dt1 at fixed t0 is (d_tau - d_s) in the (s, tau) chart
    h1 = g_phi.derivative("tau") - g_phi.derivative("s")
    h2 = h1.derivative("tau") - h1.derivative("s")
    val = h2.coefficient((0, 0))
    dphi0 = phi.derivative("t").constant_term()
    return Fraction(1, 2) * val / dphi0**4


# ---------------------------------------------------------------------------
# top level
# ---------------------------------------------------------------------------


@dataclass
class OracleResult:
    rho0: Fraction
    density0: Fraction
    weight: int
    velocity_sign: int
    rho_jet: MJet
    density_jet: MJet
    paths: dict[str, tuple[Fraction, Fraction]]
    chart: CurveChart
    data: JacobiData


def oracle_invariants(frame: Frame, point: Point, u45: Sequence[Fraction],
                      config: OracleConfig | None = None,
                      completion_seed: Sequence[Sequence[Fraction]] | None = None) -> OracleResult:
    """Exact (rho, density) at the working covector, by three routes that
    must agree: canonical frame, arbitrary completion, projective
    reparametrization."""
    config = config or OracleConfig()
    space = reduced_space(frame, point, u45)
    chart = curve_jets(space, config)
    k = weight(chart)
    if k != 4:
        raise GrowthVectorError(f"curve weight {k} != 4")
    data = JacobiData(chart, config)
    if data.weight != 4:
        raise GrowthVectorError(f"bivariate weight {data.weight} != 4")
    report = canonical_invariants(data)
    mu = completion_seed or [[Fraction(1), Fraction(1, 2)], [Fraction(1, 2), Fraction(-2)]]
    rho_c, dens_c = completion_invariants(data, mu)
    g = g_function(data)
    rho_g = ricci_from_g(g)
    dens_p = projective_density(data, g, rho_g, rho_reference=report.rho)
    paths = {
        "canonical": (report.rho0, report.density0),
        "completion": (rho_c.coefficient((0,)), dens_c.coefficient((0,))),
        "projective": (rho_g.coefficient((0,)), dens_p),
    }
    values = set(paths.values())
    if len(values) != 1:
        raise ConventionError(f"oracle paths disagree: {paths}")
    if not _jet_eq(report.rho, rho_c) or not _jet_eq(report.rho, rho_g):
        raise ConventionError("oracle Ricci jets disagree between paths")
    if not _jet_eq(report.density, dens_c):
        raise ConventionError("oracle density jets disagree between paths")
    if report.rho.order < 2:
        raise OrderError("Ricci jet carries fewer than 2 transverse orders; raise t_order")
    return OracleResult(
        rho0=report.rho0,
        density0=report.density0,
        weight=k,
        velocity_sign=data.velocity_sign,
        rho_jet=report.rho.truncate(config.tau_order),
        density_jet=report.density.truncate(config.tau_order),
        paths=paths,
        chart=chart,
        data=data,
    )
