from __future__ import annotations

from fractions import Fraction

import pytest

from cartan235.density import FramePipeline
from cartan235.fields import VectorField, adapted_frame
from cartan235.models import builtin_model
from cartan235.oracle import OracleConfig, oracle_invariants
from cartan235.ratfunc import parse_expression

MONGE = ("x", "y", "p", "q", "z")


def rf(text, coords=MONGE):
    return parse_expression(text, coords)


def monge_pair(f_text):
    x1 = VectorField.from_components(MONGE, [rf("0"), rf("0"), rf("0"), rf("1"), rf("0")])
    x2 = VectorField.from_components(MONGE, [rf("1"), rf("p"), rf("q"), rf("0"), rf(f_text)])
    return x1, x2


def pt(**kwargs):
    base = {c: Fraction(0) for c in MONGE}
    for k, v in kwargs.items():
        base[k] = Fraction(v)
    return base


@pytest.fixture(scope="session")
def flat_frame():
    x1, x2 = monge_pair("q^2")
    return adapted_frame(x1, x2, pt())


@pytest.fixture(scope="session")
def q3_frame():
    x1, x2 = monge_pair("q^3")
    return adapted_frame(x1, x2, pt(q=1))


@pytest.fixture(scope="session")
def q4_frame():
    x1, x2 = monge_pair("q^4")
    return adapted_frame(x1, x2, pt(q=1))


@pytest.fixture(scope="session")
def model_frames(flat_frame, q3_frame, q4_frame):
    x1, x2 = monge_pair("q^2+p^2")
    q2p2 = adapted_frame(x1, x2, pt(q=1))
    y1, y2 = monge_pair("q^3+y^2")
    q3y2 = adapted_frame(y1, y2, pt(q=1, y=Fraction(1, 2), p=Fraction(1, 3)))
    return {
        "flat": (flat_frame, pt()),
        "q3": (q3_frame, pt(q=1)),
        "q4": (q4_frame, pt(q=1)),
        "q2p2": (q2p2, pt(q=1)),
        "q3y2": (q3y2, pt(q=1, y=Fraction(1, 2), p=Fraction(1, 3))),
    }


@pytest.fixture(scope="session")
def pipelines(model_frames):
    return {name: FramePipeline(frame) for name, (frame, _) in model_frames.items()}


class OracleCache:
    def __init__(self):
        self.store = {}

    def get(self, name, frame, point, u, t_order=12):
        key = (name, tuple(sorted((k, v) for k, v in point.items())), tuple(u), t_order)
        if key not in self.store:
            self.store[key] = oracle_invariants(frame, point, u, OracleConfig(t_order=t_order))
        return self.store[key]


@pytest.fixture(scope="session")
def oracle_cache():
    return OracleCache()
