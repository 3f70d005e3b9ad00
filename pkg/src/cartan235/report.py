"""Machine-readable reports for the command-line front end.

All rationals are serialized as strings "p/q"; coefficient polynomials
become canonical expression strings that the package parser reads back.
Reports are deterministic for a fixed model and orders (timings are
opt-in and excluded from the deterministic surface).
"""

from __future__ import annotations

import json
import time
from typing import Any

from .cartan import (
    cartan_frame,
    cartan_identities,
    compare_theorem,
    density_simplified,
    verify_structure_equations,
)
from .density import (
    FramePipeline,
    fundamental_density,
    ricci_density,
    tangential_form,
)
from .errors import Cartan235Error, GrowthVectorError
from .fields import adapted_frame, growth_vector, structural_functions
from .models import ModelSpec, WorkingPoint, rational_str
from .oracle import OracleConfig, oracle_invariants
from .ratfunc import format_rational_function


def _oracle_config(model: ModelSpec, overrides: dict[str, int]) -> OracleConfig:
    orders = dict(model.orders)
    orders.update({k: v for k, v in overrides.items() if v is not None})
    return OracleConfig(
        t_order=orders.get("t_order", 12),
        tau_order=orders.get("tau_order", 5),
        base_degree=orders.get("base_degree"),
    )


class ReportBuilder:
    """Assembles per-command report documents over a model's points."""

    def __init__(self, model: ModelSpec, overrides: dict[str, int] | None = None,
                 timings: bool = False):
        self.model = model
        self.config = _oracle_config(model, overrides or {})
        self.timings = timings
        self._frame = None
        self._pipeline = None

    # -- shared lazily-built objects ---------------------------------------

    def frame_at(self, point: WorkingPoint):
        if self._frame is None:
            self._frame = adapted_frame(self.model.x1, self.model.x2, point.base, mode=self.model.mode)
        else:
            self._frame.check_invertible_at(point.base)
        return self._frame

    def pipeline_at(self, point: WorkingPoint) -> FramePipeline:
        frame = self.frame_at(point)
        if self._pipeline is None:
            self._pipeline = FramePipeline(frame)
        return self._pipeline

    def _timed(self, fn):
        t0 = time.monotonic()
        value = fn()
        return value, time.monotonic() - t0

    def _banner(self, command: str) -> dict[str, Any]:
        doc: dict[str, Any] = {
            "command": command,
            "model": self.model.name,
            "fingerprint": self.model.fingerprint(),
            "mode": self.model.mode,
            "orders": {
                "t_order": self.config.t_order,
                "tau_order": self.config.tau_order,
                "base_degree": self.config.resolved_base_degree(),
            },
        }
        return doc

    # -- commands -------------------------------------------------------------

    def check(self) -> dict[str, Any]:
        doc = self._banner("check")
        results = []
        ok = True
        for pt in self.model.points:
            gv = growth_vector(self.model.x1, self.model.x2, pt.base)
            good = gv == (2, 3, 5)
            ok = ok and good
            results.append({
                "point": [rational_str(pt.base[c]) for c in self.model.coords],
                "u": [rational_str(v) for v in pt.u],
                "growth_vector": list(gv),
                "ok": good,
            })
        doc["points"] = results
        doc["ok"] = ok
        if not ok:
            raise GrowthVectorError(json.dumps(doc, sort_keys=True))
        return doc

    def frame(self) -> dict[str, Any]:
        doc = self._banner("frame")
        pt = self.model.points[0]
        frame = self.frame_at(pt)
        ct = structural_functions(frame)
        doc["frame"] = {
            f"X{i}": [format_rational_function(c) for c in frame.field(i).comps]
            for i in range(1, 6)
        }
        table = {}
        with ct.paused():
            for i in range(1, 6):
                for j in range(i + 1, 6):
                    for k in range(1, 6):
                        val = ct.c(j, i, k)
                        if not val.is_zero:
                            table[f"c[{j}{i}]^{k}"] = format_rational_function(val)
        doc["structural_functions"] = dict(sorted(table.items()))
        doc["ok"] = True
        return doc

    def invariants(self) -> dict[str, Any]:
        doc = self._banner("invariants")
        pt0 = self.model.points[0]
        pipe = self.pipeline_at(pt0)
        frame = pipe.frame
        rho = ricci_density(frame, pipeline=pipe)
        dens = fundamental_density(frame, pipeline=pipe)
        doc["ricci_coefficients"] = {
            f"u4^{2-k}*u5^{k}": format_rational_function(rho.coefficient_u45(2 - k, k)) for k in range(3)
        }
        doc["density_coefficients"] = {
            f"u4^{4-k}*u5^{k}": format_rational_function(dens.coefficient_u45(4 - k, k)) for k in range(5)
        }
        results = []
        for pt in self.model.points:
            results.append({
                "point": [rational_str(pt.base[c]) for c in self.model.coords],
                "u": [rational_str(v) for v in pt.u],
                "ricci": rational_str(rho.evaluate(pt.base, pt.u)),
                "density": rational_str(dens.evaluate(pt.base, pt.u)),
            })
        doc["points"] = results
        doc["ok"] = True
        return doc

    def tangential(self) -> dict[str, Any]:
        doc = self._banner("tangential")
        results = []
        for pt in self.model.points:
            q = tangential_form(self.model.x1, self.model.x2, pt.base, mode=self.model.mode)
            results.append({
                "point": [rational_str(pt.base[c]) for c in self.model.coords],
                "basis": "(X1, X2)",
                "quartic_coefficients": [rational_str(c) for c in q.coeffs],
            })
        doc["points"] = results
        doc["ok"] = True
        return doc

    def oracle(self) -> dict[str, Any]:
        doc = self._banner("oracle")
        results = []
        ok = True
        for pt in self.model.points:
            pipe = self.pipeline_at(pt)
            frame = pipe.frame
            rho = ricci_density(frame, pipeline=pipe)
            dens = fundamental_density(frame, pipeline=pipe)
            entry: dict[str, Any] = {
                "point": [rational_str(pt.base[c]) for c in self.model.coords],
                "u": [rational_str(v) for v in pt.u],
            }
            res, elapsed = self._timed(lambda: oracle_invariants(frame, pt.base, pt.u, self.config))
            closed = (rho.evaluate(pt.base, pt.u), dens.evaluate(pt.base, pt.u))
            equal = closed == (res.rho0, res.density0)
            ok = ok and equal
            entry.update({
                "formula": {"ricci": rational_str(closed[0]), "density": rational_str(closed[1])},
                "oracle": {"ricci": rational_str(res.rho0), "density": rational_str(res.density0)},
                "oracle_paths": {
                    name: {"ricci": rational_str(r), "density": rational_str(a)}
                    for name, (r, a) in sorted(res.paths.items())
                },
                "weight": res.weight,
                "velocity_sign": res.velocity_sign,
                "verdict": "equal" if equal else "unequal",
            })
            if self.timings:
                entry["seconds"] = round(elapsed, 3)
            results.append(entry)
        doc["points"] = results
        doc["ok"] = ok
        return doc

    def cartan(self) -> dict[str, Any]:
        doc = self._banner("cartan")
        if self.model.coframe is None:
            raise Cartan235Error("model has no coframe block")
        cf = self.model.coframe
        ver = verify_structure_equations(cf)
        doc["structure_equations_ok"] = ver.ok
        if not ver.ok:
            doc["failing_equations"] = ver.nonzero_equations()
            doc["ok"] = False
            return doc
        frame = cartan_frame(cf)
        ids = cartan_identities(cf, frame)
        doc["identities"] = {
            "b_from_coframe": ids.b_matches_coframe_form,
            "b1_equals_b": ids.b1_equals_b,
            "pi_rule": ids.pi_equals_alpha3_rule,
        }
        sd = density_simplified(cf, frame)
        doc["simplified_density"] = {
            "matches_master_formula": sd.simplified_matches_master,
            "theta_sum_identity": sd.theta_sum_matches,
            "xi_combination_identity": sd.xi_combination_matches,
        }
        results = []
        ok = ver.ok and ids.ok and sd.ok
        for pt in self.model.points:
            qr = compare_theorem(cf, pt.base, frame, sd)
            ok = ok and qr.ok
            results.append({
                "point": [rational_str(pt.base[c]) for c in self.model.coords],
                "quartic_coefficients": [rational_str(c) for c in qr.quartic.coeffs],
                "tangential_coefficients": [rational_str(c) for c in qr.tangential.coeffs],
                "residual": [rational_str(c) for c in qr.residual.coeffs],
                "verdict": "equal" if qr.ok else "unequal",
            })
        doc["points"] = results
        doc["ok"] = ok
        return doc

    def full_report(self) -> dict[str, Any]:
        doc = self._banner("report")
        doc["check"] = self.check()
        doc["frame"] = self.frame()
        doc["invariants"] = self.invariants()
        doc["tangential"] = self.tangential()
        doc["oracle"] = self.oracle()
        if self.model.coframe is not None:
            doc["cartan"] = self.cartan()
        doc["ok"] = all(doc[k]["ok"] for k in ("check", "oracle") if k in doc) and (
            doc.get("cartan", {"ok": True})["ok"]
        )
        return doc


def render(doc: dict[str, Any]) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"
