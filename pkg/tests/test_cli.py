"""Command-line surface: exit codes, schemas, determinism."""

import hashlib
import io
import json
import os

import pytest

from chemflood.cli import run

MODEL_DOC = {
    "flux": {"family": "corey", "m": {"family": "quad", "base": 1.0, "amp": 2.0}},
    "adsorption": {"family": "langmuir", "b": 1.0, "scale": 1.0},
}

BAD_MODEL_DOC = {
    "flux": {"family": "corey", "m": {"family": "linear", "base": 1.0, "slope": 1.0}},
    "adsorption": {"family": "langmuir", "b": 1.0},
}


@pytest.fixture()
def model_file(tmp_path):
    path = tmp_path / "model.json"
    path.write_text(json.dumps(MODEL_DOC))
    return str(path)


def _run(argv, capsys):
    code = run(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_validate_reference(model_file, capsys):
    code, out, err = _run(["validate", "--model", model_file], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["passed"] and doc["c_star"] == pytest.approx(0.5, abs=1e-10)


def test_validate_counterexample(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(BAD_MODEL_DOC))
    code, out, err = _run(["validate", "--model", str(path)], capsys)
    assert code == 2
    doc = json.loads(out)
    assert not doc["passed"]


def test_solve_scs(model_file, capsys):
    code, out, err = _run(
        ["solve", "--model", model_file, "--left", "1,0.8", "--right", "0,0.2",
         "--kappa", "1"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["structure"] == "scs"
    kinds = [w["kind"] for w in doc["waves"]]
    assert "CShock" in kinds


def test_solve_unsupported_corner(model_file, capsys):
    code, out, err = _run(
        ["solve", "--model", model_file, "--left", "0,0.8", "--right", "0.5,0.2"],
        capsys)
    assert code == 3
    doc = json.loads(err)
    assert doc["error"] == "UnsupportedCaseError"


def test_usage_error(model_file, capsys):
    code, out, err = _run(["solve", "--model", model_file, "--left", "1,0.8",
                           "--right", "nonsense"], capsys)
    assert code == 3  # malformed state -> domain error channel


def test_missing_model_file(capsys):
    code, out, err = _run(["validate", "--model", "/nonexistent/m.json"], capsys)
    assert code == 1


def test_profile_csv_schema_and_determinism(model_file, tmp_path, capsys):
    outdir = str(tmp_path / "out1")
    argv = ["solve", "--model", model_file, "--left", "1,0.8", "--right", "0,0.2",
            "--profile", "--resolution", "201", "--output-dir", outdir]
    code, _, _ = _run(argv, capsys)
    assert code == 0
    body1 = open(os.path.join(outdir, "profile.csv"), "rb").read()
    header = body1.splitlines()[0].decode()
    assert header == "xi,s,c"

    outdir2 = str(tmp_path / "out2")
    argv2 = argv[:-1] + [outdir2]
    code, _, _ = _run(argv2, capsys)
    body2 = open(os.path.join(outdir2, "profile.csv"), "rb").read()
    assert hashlib.sha256(body1).hexdigest() == hashlib.sha256(body2).hexdigest()


def test_locus_and_saddle(model_file, tmp_path, capsys):
    code, out, _ = _run(["saddle", "--model", model_file], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["mu_plus"] > 0 > doc["mu_minus"]

    outdir = str(tmp_path / "locus")
    os.makedirs(outdir, exist_ok=True)
    code, out, _ = _run(["locus", "--model", model_file, "--count", "11",
                         "--output-dir", outdir], capsys)
    assert code == 0
    lines = open(os.path.join(outdir, "locus.csv")).read().splitlines()
    assert lines[0] == "c,s"
    assert len(lines) == 12


def test_curves_csv(model_file, tmp_path, capsys):
    outdir = str(tmp_path / "curves")
    code, out, _ = _run(["curves", "--model", model_file, "--separatrices",
                         "--through", "0.3,0.1", "--output-dir", outdir], capsys)
    assert code == 0
    doc = json.loads(out)
    assert len(doc["written"]) == 5
    first = open(doc["written"][0]).read().splitlines()
    assert first[0] == "c,s,lambda_c,side"


def test_layout_csv(model_file, tmp_path, capsys):
    outdir = str(tmp_path / "layout")
    code, out, _ = _run(["layout", "--model", model_file, "--c-left", "0.8",
                         "--c-right", "0.2", "--grid", "24",
                         "--output-dir", outdir], capsys)
    assert code == 0
    doc = json.loads(out)
    assert set(doc["counts"]) == {"U_cs", "U_sc", "U_scs"}
    lines = open(os.path.join(outdir, "layout.csv")).read().splitlines()
    assert lines[0] == "s_L,s_R,label"
    assert len(lines) == 1 + 24 * 24
