from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

import pytest

from cartan235.cli import run
from cartan235.errors import ModelError
from cartan235.models import (
    BUILTIN_DOCS,
    builtin_model,
    load_model,
    model_from_json,
    parse_rational,
    rational_str,
)


def write_model(tmp_path: Path, doc: dict) -> str:
    path = tmp_path / "model.json"
    path.write_text(json.dumps(doc))
    return str(path)


class TestModelParsing:
    def test_builtin_models_load(self):
        for name in BUILTIN_DOCS:
            model = builtin_model(name)
            assert len(model.coords) == 5
            assert model.points

    def test_rational_literals(self):
        assert parse_rational("3/4") == Fraction(3, 4)
        assert parse_rational("-2") == Fraction(-2)
        assert parse_rational(5) == Fraction(5)
        with pytest.raises(ModelError):
            parse_rational("3/0")
        with pytest.raises(ModelError):
            parse_rational("a/b")

    def test_schema_rejects_unknown_keys(self):
        doc = dict(BUILTIN_DOCS["flat"])
        doc["plot"] = True
        with pytest.raises(ModelError) as err:
            model_from_json(doc)
        assert "plot" in str(err.value) or "additional" in str(err.value).lower()

    def test_schema_path_in_message(self):
        doc = json.loads(json.dumps(BUILTIN_DOCS["flat"]))
        doc["points"][0]["u"] = ["0"]
        with pytest.raises(ModelError) as err:
            model_from_json(doc)
        assert "points/0/u" in str(err.value)

    def test_fields_and_monge_mutually_exclusive(self):
        doc = json.loads(json.dumps(BUILTIN_DOCS["flat"]))
        doc["fields"] = {"x1": ["0"] * 5, "x2": ["1"] * 5}
        doc["coordinates"] = ["x", "y", "p", "q", "z"]
        with pytest.raises(ModelError):
            model_from_json(doc)

    def test_bad_expression_reported(self, tmp_path):
        doc = {
            "name": "bad",
            "coordinates": ["a", "b", "c", "d", "e"],
            "fields": {"x1": ["1", "0", "0", "0", "+"], "x2": ["0", "1", "0", "0", "0"]},
            "points": [{"q": ["0"] * 5, "u": ["0", "1"]}],
        }
        assert run(["check", "--model", write_model(tmp_path, doc)]) == 2

    def test_missing_file_is_input_error(self):
        assert run(["check", "--model", "/nonexistent/model.json"]) == 2


class TestExitCodes:
    def test_check_flat_ok(self, capsys):
        assert run(["check", "--builtin", "flat"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["ok"] is True
        assert doc["points"][0]["growth_vector"] == [2, 3, 5]

    def test_check_degenerate_exits_3(self, tmp_path, capsys):
        doc = {
            "name": "involutive",
            "coordinates": ["a", "b", "c", "d", "e"],
            "fields": {"x1": ["1", "0", "0", "0", "0"], "x2": ["0", "1", "0", "0", "0"]},
            "points": [{"q": ["0"] * 5, "u": ["0", "1"]}],
        }
        assert run(["check", "--model", write_model(tmp_path, doc)]) == 3
        out = json.loads(capsys.readouterr().out)
        assert out["points"][0]["growth_vector"] == [2, 2, 2]

    def test_oracle_builtin_flat(self, capsys):
        assert run(["oracle", "--builtin", "flat"]) == 0
        doc = json.loads(capsys.readouterr().out)
        for entry in doc["points"]:
            assert entry["verdict"] == "equal"
            assert entry["formula"]["density"] == "0/1"

    def test_point_override(self, capsys):
        code = run(["invariants", "--builtin", "q3", "--point", "0,0,0,2,0;0,1"])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["points"][0]["ricci"] == rational_str(Fraction(-8, 15) / 4)

    def test_cartan_command(self, capsys):
        assert run(["cartan", "--builtin", "flat-coframe-nu"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["structure_equations_ok"] is True
        assert doc["identities"] == {"b_from_coframe": True, "b1_equals_b": True, "pi_rule": True}
        assert all(p["verdict"] == "equal" for p in doc["points"])

    def test_cartan_without_coframe_fails(self):
        assert run(["cartan", "--builtin", "q3"]) == 1


class TestDeterminism:
    def test_byte_identical_reports(self, tmp_path):
        out1 = tmp_path / "a.json"
        out2 = tmp_path / "b.json"
        assert run(["invariants", "--builtin", "q3", "--output", str(out1)]) == 0
        assert run(["invariants", "--builtin", "q3", "--output", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_rationals_roundtrip(self, capsys):
        assert run(["invariants", "--builtin", "q3"]) == 0
        doc = json.loads(capsys.readouterr().out)
        for entry in doc["points"]:
            for key in ("ricci", "density"):
                parse_rational(entry[key])

    def test_frame_command_structural_functions(self, capsys):
        assert run(["frame", "--builtin", "q3"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["structural_functions"]["c[21]^3"] == "1"
        assert doc["structural_functions"]["c[41]^4"] == "1/q"

    def test_tangential_command(self, capsys):
        assert run(["tangential", "--builtin", "flat"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["points"][0]["quartic_coefficients"] == ["0/1"] * 5
