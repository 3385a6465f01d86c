"""CLI tests: verbs, exit codes, determinism, and round trips."""

import json
import subprocess
import sys

import pytest

from filtk.caselib import load_matrix_a, load_shape
from filtk.ckk import filtered_k
from filtk.cli import main
from filtk.diagram import DiagramModule


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture()
def matrix_a_file(tmp_path):
    path = tmp_path / "A.json"
    path.write_text(json.dumps(load_matrix_a().to_doc()))
    return str(path)


@pytest.fixture()
def module_file(tmp_path):
    module = filtered_k(load_matrix_a(), load_shape("csp"))
    path = tmp_path / "m.json"
    path.write_text(json.dumps(module.to_doc(shape_ref="csp")))
    return str(path)


class TestSnf:
    def test_identity(self, capsys, tmp_path):
        path = tmp_path / "m.json"
        path.write_text("[[1,0,0],[0,1,0],[0,0,1]]")
        code, out, _ = run_cli(capsys, "snf", "--in", str(path), "--json")
        assert code == 0
        doc = json.loads(out)
        assert doc["S"] == [[1, 0, 0], [0, 1, 0], [0, 0, 1]]

    def test_bad_json(self, capsys, tmp_path):
        path = tmp_path / "m.json"
        path.write_text("[[1,")
        code, _, err = run_cli(capsys, "snf", "--in", str(path))
        assert code == 2
        assert "input error" in err

    def test_non_integer_entry(self, capsys, tmp_path):
        path = tmp_path / "m.json"
        path.write_text('[[1, "x"]]')
        code, _, err = run_cli(capsys, "snf", "--in", str(path))
        assert code == 2
        assert "[0][1]" in err


class TestCkK:
    def test_featured_table(self, capsys, matrix_a_file):
        code, out, _ = run_cli(capsys, "ck-k", "--space", "CSP",
                               "--matrix", matrix_a_file, "--json")
        assert code == 0
        doc = json.loads(out)
        assert doc["groups"]["1234_0"] == "Z_2 + Z_2 + Z"
        assert doc["groups"]["1234_1"] == "Z"
        assert doc["groups"]["4_0"] == "Z_2"
        assert doc["groups"]["1_1"] == "Z"

    def test_module_payload_round_trips(self, capsys, matrix_a_file, tmp_path):
        out_path = tmp_path / "module.json"
        code, out, _ = run_cli(capsys, "ck-k", "--space", "CSP",
                               "--matrix", matrix_a_file, "--json", "--out", str(out_path))
        assert code == 0
        payload = json.loads(out_path.read_text())
        module = DiagramModule.from_doc(payload["module"],
                                        shape_lookup=lambda n: load_shape(n))
        assert module.group("1234", 0).describe() == "Z_2 + Z_2 + Z"

    def test_missing_fields(self, capsys, tmp_path):
        path = tmp_path / "A.json"
        path.write_text("{}")
        code, _, err = run_cli(capsys, "ck-k", "--space", "CSP", "--matrix", str(path))
        assert code == 2
        assert "blocks" in err


class TestChecks:
    def test_check_exact_pass(self, capsys, module_file):
        code, out, _ = run_cli(capsys, "check-exact", "--module", module_file, "--json")
        assert code == 0
        assert json.loads(out)["ok"] is True

    def test_check_rrz_pass(self, capsys, module_file):
        code, out, _ = run_cli(capsys, "check-rrz", "--module", module_file)
        assert code == 0
        assert "PASS" in out

    def test_check_exact_fail_exit_code(self, capsys, tmp_path, module_file):
        doc = json.loads(open(module_file).read())
        key = "d:1>234@1"
        rows = doc["maps"][key]
        rows[0][0] += 1
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(doc))
        code, out, _ = run_cli(capsys, "check-exact", "--module", str(path))
        assert code == 1

    def test_reduced_and_unit_group(self, capsys, module_file):
        code, out, _ = run_cli(capsys, "reduced", "--module", module_file, "--json")
        assert code == 0
        doc = json.loads(out)
        assert doc["groups"]["1"]["odd"] == "Z"
        code, out, _ = run_cli(capsys, "unit-group", "--module", module_file, "--json")
        assert code == 0
        doc = json.loads(out)
        assert doc["free_rank"] == 1 and doc["torsion"] == [2, 2]


class TestVerifyHom:
    def test_alpha_via_cli(self, capsys, tmp_path):
        from filtk.caselib import load_alpha

        hom_doc = {
            "src": "csp_N",
            "dst": "csp_N",
            "fill": "identity",
            "components": {f"{c}_{d}": mat.to_lists()
                           for (c, d), mat in load_alpha().items()},
        }
        path = tmp_path / "alpha.json"
        path.write_text(json.dumps(hom_doc))
        code, out, _ = run_cli(capsys, "verify-hom", "--hom", str(path), "--json")
        assert code == 0
        doc = json.loads(out)
        assert doc["ok"] is True and doc["isomorphism"] is True


class TestSolveHom:
    def test_feasible_identity(self, capsys, module_file):
        code, out, _ = run_cli(capsys, "solve-hom", "--module", module_file,
                               "--module", module_file, "--json")
        assert code == 0
        assert json.loads(out)["feasible"] is True

    def test_infeasible_pins(self, capsys, module_file, tmp_path):
        pins = {"123_1": [[1]], "1234_1": [[0]]}
        pin_path = tmp_path / "pins.json"
        pin_path.write_text(json.dumps(pins))
        code, out, _ = run_cli(capsys, "solve-hom", "--module", module_file,
                               "--module", module_file, "--pins", str(pin_path), "--json")
        assert code == 1
        assert "certificate" in json.loads(out)


class TestDrivers:
    def test_verify_counterexample(self, capsys):
        code, out, _ = run_cli(capsys, "verify-counterexample", "--json")
        assert code == 0
        doc = json.loads(out)
        assert doc["ok"] is True
        assert "(1,2,0)^t" in doc["certificate"]

    def test_counterexample_text_mentions_certificate(self, capsys):
        code, out, _ = run_cli(capsys, "verify-counterexample")
        assert code == 0
        assert "certificate" in out

    def test_verify_pseudocircle_seeded(self, capsys):
        code, out, _ = run_cli(capsys, "verify-pseudocircle", "--seed", "3",
                               "--count", "2", "--json")
        assert code == 0
        assert json.loads(out)["ok"] is True


class TestDumpShape:
    def test_round_trip(self, capsys):
        from filtk.diagram import DiagramShape

        code, out, _ = run_cli(capsys, "dump-shape", "--space", "S21", "--json")
        assert code == 0
        doc = json.loads(out)
        assert len(doc["shape"]["arrows"]) == 24
        reloaded = DiagramShape.from_doc(doc["shape"])
        assert reloaded.to_doc() == doc["shape"]

    def test_generic_space(self, capsys, tmp_path):
        path = tmp_path / "space.json"
        path.write_text(json.dumps({"points": ["a", "b"], "opens": [[], ["a"], ["a", "b"]]}))
        code, out, _ = run_cli(capsys, "dump-shape", "--space", str(path), "--json")
        assert code == 0


class TestDeterminism:
    def test_byte_identical_reports(self, capsys, module_file):
        outputs = set()
        for _ in range(2):
            code, out, _ = run_cli(capsys, "check-exact", "--module", module_file, "--json")
            assert code == 0
            outputs.add(out)
        assert len(outputs) == 1

    def test_counterexample_deterministic(self, capsys):
        outputs = set()
        for _ in range(2):
            _, out, _ = run_cli(capsys, "verify-counterexample", "--json")
            outputs.add(out)
        assert len(outputs) == 1


def test_entry_point_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "filtk.cli", "verify-counterexample", "--json"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["ok"] is True
