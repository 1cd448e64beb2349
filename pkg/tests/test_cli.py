import json
from pathlib import Path

import pytest

from main import CommandRunner, load_spec, main
from models import ReportDocument

KITE = {"canonical": {"case": "GenericQuadrilateral", "alpha": [2, 3], "beta": [0, 1], "c": [1, -1, -1, 1]}}
SQUARE = {"canonical": {"case": "Parallelogram", "alpha": [0, 1], "beta": [0, 1], "c": [1, -1, -1, 1]}}
RAW_SQUARE = {
    "polytope": {
        "vertices": [[0, 0], [2, 0], [2, 2], [0, 2]],
        "normals": [[0, 1], [-1, 0], [0, -1], [1, 0]],
    }
}


@pytest.fixture(autouse=True)
def workspace(tmp_path, monkeypatch):
    monkeypatch.setenv("TORICSOLITON_LOG_FILE", str(tmp_path / "toric_soliton.log"))
    monkeypatch.chdir(tmp_path)
    return tmp_path


def _run(workspace, command, document, *flags):
    spec = workspace / "spec.json"
    spec.write_text(json.dumps(document), encoding="utf-8")
    out = workspace / "report.json"
    code = main([command, str(spec), "--out", str(out), *flags])
    return code, json.loads(out.read_text(encoding="utf-8"))


def test_solve_kite_reports_no_orthotoric(workspace):
    code, report = _run(workspace, "solve", KITE)
    assert code == 2
    assert report["exit_code"] == 2
    assert report["status"] == "NoOrthotoricSoliton"
    assert report["rate_a"] == pytest.approx(-0.5, abs=1e-10)
    assert report["rate_b"] == pytest.approx(0.5, abs=1e-10)
    assert report["residual"] is None


def test_family_solve(workspace):
    family = {"family": {"r": -1, "k": 1, "l": 2, "p": 3, "bracket": [0.6, 0.7]}}
    code, report = _run(workspace, "family-solve", family, "--grid", "12")
    assert code == 0
    assert 0.6 < report["extra"]["beta_star"] < 0.7
    assert report["passed"] is True


def test_wpp_ortho(workspace):
    code, report = _run(workspace, "wpp-ortho", {"wpp": {"weights": [1, 2, 3]}}, "--grid", "12")
    assert code == 0
    assert report["classification"] == "OrthoSimplex"
    assert report["status"] == "Soliton"
    assert report["passed"] is True
    assert report["equipoised"] is None


def test_classify_raw_square(workspace):
    code, report = _run(workspace, "classify", RAW_SQUARE)
    assert code == 0
    assert report["classification"] == "Parallelogram"
    assert report["scal_bar"] == pytest.approx(report["lambda"] * 4)
    assert report["monotone"] is True
    assert report["delzant"] is True


def test_classify_accepts_exact_rationals(workspace):
    document = {
        "polytope": {
            "vertices": [["0", "0"], ["1/2", "0"], ["1/2", "1/3"], ["0", "1/3"]],
            "normals": [[0, 1], [-1, 0], [0, -1], [1, 0]],
        }
    }
    code, report = _run(workspace, "classify", document)
    assert code == 0
    assert report["classification"] == "Parallelogram"


def test_classify_canonical_round_trip(workspace):
    code, report = _run(workspace, "classify", SQUARE)
    assert code == 0
    canonical = report["canonical"]
    assert canonical["case"] == "Parallelogram"
    assert canonical["alpha"] == [0.0, 1.0]
    assert canonical["beta"] == [0.0, 1.0]
    assert canonical["c"] == [1.0, -1.0, -1.0, 1.0]
    assert report["scal_bar"] == pytest.approx(8.0)


def test_two_variants_are_rejected(workspace):
    document = {**SQUARE, "wpp": {"weights": [1, 1, 1]}}
    code, report = _run(workspace, "solve", document)
    assert code == 1
    assert report["extra"]["errors"]


def test_variant_must_match_command(workspace):
    code, report = _run(workspace, "solve", {"wpp": {"weights": [1, 2, 3]}})
    assert code == 1
    assert report["extra"]["error_type"] == "UnsupportedError"


def test_calabi_ansatz_violation_exit_code(workspace):
    document = {"canonical": {"case": "Trapezoid", "alpha": [1, 2], "beta": [0, 1], "c": [1, -1, -1, 2]}}
    code, report = _run(workspace, "solve", document)
    assert code == 2
    assert report["extra"]["error_type"] == "NoSolutionForAnsatzError"


def test_verify_writes_csv_tables(workspace):
    code, report = _run(workspace, "verify", SQUARE, "--grid", "10", "--csv", "tablas")
    assert code == 0
    assert report["residual"]["passed"] is True
    folder = workspace / "tablas"
    for name, header in (
        ("profile_A.csv", "t,value,d1,d2"),
        ("profile_B.csv", "t,value,d1,d2"),
        ("residual.csv", "mu1,mu2,scal_fd,laplacian,residual"),
    ):
        lines = (folder / name).read_text(encoding="utf-8").splitlines()
        assert lines[0] == header
        assert len(lines) > 1


def test_missing_input_file(workspace):
    out = workspace / "report.json"
    code = main(["classify", str(workspace / "nada.json"), "--out", str(out)])
    assert code == 1
    assert json.loads(out.read_text(encoding="utf-8"))["exit_code"] == 1


@pytest.mark.parametrize("path", sorted((Path(__file__).parent.parent / "ejemplos").glob("*.json")), ids=lambda p: p.stem)
def test_bundled_examples_are_valid(path):
    assert load_spec(str(path)).variant


def test_wpp_ortho_report_carries_csc_flags(workspace):
    code, report = _run(workspace, "wpp-ortho", {"wpp": {"weights": [1, 2, 3]}}, "--grid", "8")
    assert code == 0
    csc = report["extra"]["csc"]
    assert isinstance(csc["rate_a_zero"], bool)
    assert isinstance(csc["rate_b_zero"], bool)


def test_unserializable_report_exits_with_error(workspace, monkeypatch):
    def broken(self, command, spec):
        return ReportDocument(command=command, input={}, extra={"objeto": object()}), None, None

    monkeypatch.setattr(CommandRunner, "execute", broken)
    code, report = _run(workspace, "classify", SQUARE)
    assert code == 1
    assert report["exit_code"] == 1
    assert report["extra"]["errors"]
