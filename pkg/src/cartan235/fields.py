"""Vector fields, differential forms and frames on a 5-dimensional chart.

Everything is exact: components are rational functions of the five base
coordinates.  The bracket coefficient table follows the convention
[X_i, X_j] = sum_k c[j][i][k] X_k, i.e. the first lower index of c is the
*second* bracket argument.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Mapping, Sequence

from .errors import DegenerateFrameError, GrowthVectorError, SpanError
from .linalg import invert_matrix, rank_fractions, rf_pivotable
from .ratfunc import RationalFunction

Point = Mapping[str, Fraction]


def _zero(coords: Sequence[str]) -> RationalFunction:
    return RationalFunction.const(coords, 0)


@dataclass(frozen=True)
class VectorField:
    """First-order derivation: sum_a comps[a] * d/dx_a."""

    coords: tuple[str, ...]
    comps: tuple[RationalFunction, ...]

    def __post_init__(self):
        if len(self.comps) != len(self.coords):
            raise ValueError("component count must match coordinate count")

    @classmethod
    def from_components(cls, coords: Sequence[str], comps: Sequence[RationalFunction]) -> "VectorField":
        return cls(tuple(coords), tuple(comps))

    @classmethod
    def coordinate(cls, coords: Sequence[str], name: str) -> "VectorField":
        comps = [RationalFunction.const(coords, 1 if c == name else 0) for c in coords]
        return cls(tuple(coords), tuple(comps))

    def apply(self, f: RationalFunction) -> RationalFunction:
        """Directional derivative of a scalar."""
        acc = _zero(self.coords)
        for comp, x in zip(self.comps, self.coords):
            if not comp.is_zero:
                acc = acc + comp * f.derivative(x)
        return acc

    def __add__(self, other: "VectorField") -> "VectorField":
        return VectorField(self.coords, tuple(a + b for a, b in zip(self.comps, other.comps)))

    def __sub__(self, other: "VectorField") -> "VectorField":
        return VectorField(self.coords, tuple(a - b for a, b in zip(self.comps, other.comps)))

    def __neg__(self) -> "VectorField":
        return VectorField(self.coords, tuple(-a for a in self.comps))

    def scale(self, f) -> "VectorField":
        if not isinstance(f, (RationalFunction, int, Fraction)):
            raise TypeError("scale by a scalar or rational function")
        return VectorField(self.coords, tuple(f * a for a in self.comps))

    def is_zero(self) -> bool:
        return all(c.is_zero for c in self.comps)

    def evaluate(self, point: Point) -> list[Fraction]:
        return [c.evaluate(point) for c in self.comps]

    def __eq__(self, other) -> bool:
        return isinstance(other, VectorField) and self.coords == other.coords and all(
            a == b for a, b in zip(self.comps, other.comps)
        )


def lie_bracket(v: VectorField, w: VectorField) -> VectorField:
    """[V, W]^k = sum_j (V^j d_j W^k - W^j d_j V^k)."""
    if v.coords != w.coords:
        raise ValueError("bracket of fields over different coordinates")
    comps = []
    for k in range(len(v.coords)):
        acc = v.apply(w.comps[k]) - w.apply(v.comps[k])
        comps.append(acc)
    return VectorField(v.coords, tuple(comps))


@dataclass(frozen=True)
class OneForm:
    coords: tuple[str, ...]
    comps: tuple[RationalFunction, ...]  # omega = sum comps[a] dx_a

    @classmethod
    def from_components(cls, coords: Sequence[str], comps: Sequence[RationalFunction]) -> "OneForm":
        return cls(tuple(coords), tuple(comps))

    @classmethod
    def zero(cls, coords: Sequence[str]) -> "OneForm":
        return cls(tuple(coords), tuple(_zero(coords) for _ in coords))

    def __add__(self, other: "OneForm") -> "OneForm":
        return OneForm(self.coords, tuple(a + b for a, b in zip(self.comps, other.comps)))

    def __sub__(self, other: "OneForm") -> "OneForm":
        return OneForm(self.coords, tuple(a - b for a, b in zip(self.comps, other.comps)))

    def __neg__(self) -> "OneForm":
        return OneForm(self.coords, tuple(-a for a in self.comps))

    def scale(self, f) -> "OneForm":
        return OneForm(self.coords, tuple(f * a for a in self.comps))

    def __call__(self, v: VectorField) -> RationalFunction:
        acc = _zero(self.coords)
        for a, b in zip(self.comps, v.comps):
            acc = acc + a * b
        return acc

    def is_zero(self) -> bool:
        return all(c.is_zero for c in self.comps)


@dataclass(frozen=True)
class TwoForm:
    """Antisymmetric 2-form; stores components (i<j) of sum_{i<j} c_ij dx_i^dx_j."""

    coords: tuple[str, ...]
    comps: dict[tuple[int, int], RationalFunction] = field(default_factory=dict)

    @classmethod
    def zero(cls, coords: Sequence[str]) -> "TwoForm":
        return cls(tuple(coords), {})

    def component(self, i: int, j: int) -> RationalFunction:
        """Coefficient of dx_i ^ dx_j (0-based indices, any order)."""
        if i == j:
            return _zero(self.coords)
        if i < j:
            return self.comps.get((i, j), _zero(self.coords))
        return -self.comps.get((j, i), _zero(self.coords))

    def _map(self, other: "TwoForm", op) -> "TwoForm":
        keys = set(self.comps) | set(other.comps)
        out = {}
        for k in keys:
            v = op(self.comps.get(k, _zero(self.coords)), other.comps.get(k, _zero(self.coords)))
            if not v.is_zero:
                out[k] = v
        return TwoForm(self.coords, out)

    def __add__(self, other: "TwoForm") -> "TwoForm":
        return self._map(other, lambda a, b: a + b)

    def __sub__(self, other: "TwoForm") -> "TwoForm":
        return self._map(other, lambda a, b: a - b)

    def __neg__(self) -> "TwoForm":
        return TwoForm(self.coords, {k: -v for k, v in self.comps.items()})

    def scale(self, f) -> "TwoForm":
        out = {k: f * v for k, v in self.comps.items()}
        return TwoForm(self.coords, {k: v for k, v in out.items() if not v.is_zero})

    def __call__(self, v: VectorField, w: VectorField) -> RationalFunction:
        acc = _zero(self.coords)
        for (i, j), c in self.comps.items():
            acc = acc + c * (v.comps[i] * w.comps[j] - v.comps[j] * w.comps[i])
        return acc

    def is_zero(self) -> bool:
        return all(c.is_zero for c in self.comps.values())


def exterior_derivative(omega: OneForm) -> TwoForm:
    """(d omega)_{ij} = d_i omega_j - d_j omega_i."""
    coords = omega.coords
    comps = {}
    for i in range(len(coords)):
        for j in range(i + 1, len(coords)):
            c = omega.comps[j].derivative(coords[i]) - omega.comps[i].derivative(coords[j])
            if not c.is_zero:
                comps[(i, j)] = c
    return TwoForm(coords, comps)


def wedge(omega: OneForm, eta: OneForm) -> TwoForm:
    coords = omega.coords
    comps = {}
    for i in range(len(coords)):
        for j in range(i + 1, len(coords)):
            c = omega.comps[i] * eta.comps[j] - omega.comps[j] * eta.comps[i]
            if not c.is_zero:
                comps[(i, j)] = c
    return TwoForm(coords, comps)


def eval_form(form, *fields_: VectorField) -> RationalFunction:
    """Contract a one- or two-form with vector fields."""
    return form(*fields_)


@dataclass(frozen=True)
class Frame:
    """Ordered basis of 5 vector fields; invertible at generic points."""

    fields: tuple[VectorField, ...]
    tag: str = "raw"

    def __post_init__(self):
        if len(self.fields) != 5:
            raise ValueError("a frame has exactly 5 fields")

    @property
    def coords(self) -> tuple[str, ...]:
        return self.fields[0].coords

    def field(self, i: int) -> VectorField:
        """1-based accessor: field(1) is X_1."""
        return self.fields[i - 1]

    def component_matrix(self) -> list[list[RationalFunction]]:
        return [list(x.comps) for x in self.fields]

    def matrix_at(self, point: Point) -> list[list[Fraction]]:
        return [x.evaluate(point) for x in self.fields]

    def check_invertible_at(self, point: Point) -> None:
        from .linalg import det_fractions

        if det_fractions(self.matrix_at(point)) == 0:
            raise DegenerateFrameError(f"frame is singular at {dict(point)}")

    def __iter__(self) -> Iterator[VectorField]:
        return iter(self.fields)


@dataclass(frozen=True)
class Coframe:
    forms: tuple[OneForm, ...]

    def form(self, i: int) -> OneForm:
        return self.forms[i - 1]


def dual_coframe(frame: Frame) -> Coframe:
    """Coframe with omega^i(X_k) = delta_ik, by exact matrix inversion."""
    m = frame.component_matrix()
    coords = frame.coords
    zero = _zero(coords)
    one = RationalFunction.const(coords, 1)
    try:
        minv = invert_matrix(m, zero, one, rf_pivotable)
    except DegenerateFrameError as exc:
        raise DegenerateFrameError("frame component matrix is singular as a rational matrix") from exc
    forms = []
    for i in range(5):
        comps = tuple(minv[j][i] for j in range(5))
        forms.append(OneForm(coords, comps))
    return Coframe(tuple(forms))


class StructuralFunctions:
    """Bracket coefficient table of a frame: [X_i, X_j] = sum_k c(j, i, k) X_k.

    Accesses can be recorded (see ``recording``) so callers can assert which
    entries a derived quantity actually consumed.
    """

    def __init__(self, frame: Frame, table: dict[tuple[int, int], list[RationalFunction]]):
        self.frame = frame
        self._table = table  # keyed by (i, j) with i < j, value k -> coeff of [X_i, X_j]
        self._log: set[tuple[int, int, int]] | None = None

    def c(self, a: int, b: int, k: int) -> RationalFunction:
        """c_{ab}^k: coefficient of X_k in [X_b, X_a]."""
        if self._log is not None and a != b:
            hi, lo = (a, b) if a > b else (b, a)
            self._log.add((hi, lo, k))
        if a == b:
            return _zero(self.frame.coords)
        if b < a:
            return self._table[(b, a)][k - 1]
        return -self._table[(a, b)][k - 1]

    def recording(self):
        return _AccessLog(self)

    def paused(self):
        return _PausedLog(self)

    def bracket_in_frame(self, i: int, j: int) -> list[RationalFunction]:
        """Coefficients of [X_i, X_j] in the frame basis (1-based i < j)."""
        return list(self._table[(i, j)])


class _AccessLog:
    def __init__(self, sf: StructuralFunctions):
        self.sf = sf
        self.entries: set[tuple[int, int, int]] = set()

    def __enter__(self) -> set[tuple[int, int, int]]:
        self._saved = self.sf._log
        self.sf._log = self.entries
        return self.entries

    def __exit__(self, *exc):
        self.sf._log = self._saved
        return False


class _PausedLog:
    """Temporarily disable access recording (for self-checks)."""

    def __init__(self, sf: StructuralFunctions):
        self.sf = sf

    def __enter__(self):
        self._saved = self.sf._log
        self.sf._log = None
        return None

    def __exit__(self, *exc):
        self.sf._log = self._saved
        return False


def structural_functions(frame: Frame) -> StructuralFunctions:
    """Expand every bracket [X_i, X_j], i<j, in the frame basis."""
    coords = frame.coords
    m = frame.component_matrix()
    zero = _zero(coords)
    one = RationalFunction.const(coords, 1)
    minv = invert_matrix(m, zero, one, rf_pivotable)
    # solve (M^T) c = bracket-components  =>  c = (M^{-1})^T bracket
    minv_t = [[minv[j][i] for j in range(5)] for i in range(5)]
    table: dict[tuple[int, int], list[RationalFunction]] = {}
    for i in range(1, 6):
        for j in range(i + 1, 6):
            br = lie_bracket(frame.field(i), frame.field(j))
            coeffs = []
            for k in range(5):
                acc = _zero(coords)
                for a in range(5):
                    acc = acc + minv_t[k][a] * br.comps[a]
                coeffs.append(acc)
            table[(i, j)] = coeffs
    return StructuralFunctions(frame, table)


def growth_vector(x1: VectorField, x2: VectorField, point: Point) -> tuple[int, int, int]:
    """(dim D, dim D^2, dim D^3) at the point, D = span(x1, x2)."""
    x3 = lie_bracket(x1, x2)
    x4 = lie_bracket(x1, x3)
    x5 = lie_bracket(x2, x3)
    rows = [f.evaluate(point) for f in (x1, x2, x3, x4, x5)]
    d1 = rank_fractions(rows[:2])
    d2 = rank_fractions(rows[:3])
    d3 = rank_fractions(rows)
    return (d1, d2, d3)


def adapted_frame(x1: VectorField, x2: VectorField, point: Point, mode: str = "adapted") -> Frame:
    """Canonical frame extension of a basis of D.

    mode "adapted":           X3=[X1,X2], X4=[X1,X3], X5=[X2,X3]
    mode "strongly-adapted":  X3=[X1,X2], X4=[X1,X3], X5=[X3,X2]
    """
    if mode not in ("adapted", "strongly-adapted"):
        raise ValueError(f"unknown frame mode {mode!r}")
    gv = growth_vector(x1, x2, point)
    if gv != (2, 3, 5):
        raise GrowthVectorError(f"growth vector {gv} at {dict(point)}; need (2, 3, 5)")
    x3 = lie_bracket(x1, x2)
    x4 = lie_bracket(x1, x3)
    x5 = lie_bracket(x2, x3) if mode == "adapted" else lie_bracket(x3, x2)
    frame = Frame((x1, x2, x3, x4, x5), tag=mode)
    frame.check_invertible_at(point)
    return frame


def express_in_plane(coords: Sequence[str], basis: tuple[VectorField, VectorField],
                     target: VectorField) -> tuple[RationalFunction, RationalFunction]:
    """Write target = a*basis[0] + b*basis[1]; raises SpanError if impossible."""
    v1, v2 = basis
    # pick two coordinate slots where the 2x2 minor is generically invertible
    n = len(coords)
    for i in range(n):
        for j in range(i + 1, n):
            det = v1.comps[i] * v2.comps[j] - v1.comps[j] * v2.comps[i]
            if det.is_zero:
                continue
            a = (target.comps[i] * v2.comps[j] - target.comps[j] * v2.comps[i]) / det
            b = (v1.comps[i] * target.comps[j] - v1.comps[j] * target.comps[i]) / det
            residual = target - v1.scale(a) - v2.scale(b)
            if residual.is_zero():
                return a, b
            raise SpanError("field does not lie in the span of the given pair")
    raise SpanError("basis pair is degenerate")
