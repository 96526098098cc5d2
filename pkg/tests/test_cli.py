import json
import os

import pytest

import main as cli
from database import RunLog, get_session_scope, init_db, recent_runs
from enums import Subcommand
from errors import BadParameters
from holo import HoloFn
from main import main, parse_function


@pytest.fixture
def rotation_file(json_file):
    return json_file("rotation.json", {"kind": "rotation", "phi": 1.5707963267948966})


@pytest.fixture
def matrix_file(json_file):
    def _create(name, diag):
        n = len(diag)
        re = [[diag[i] if i == j else 0.0 for j in range(n)] for i in range(n)]
        return json_file(name, {"n": n, "re": re})
    return _create


def read_report(out_dir):
    with open(os.path.join(out_dir, "report.json"), encoding="utf-8") as fh:
        return json.load(fh)


def ledger_rows(out_dir):
    Session = init_db(f"sqlite:///{out_dir}/ledger.db")
    with get_session_scope(Session) as session:
        return [(r.subcommand, r.exit_code, r.status) for r in recent_runs(session)]


def test_verify_identities_writes_report_and_ledger(out_dir):
    assert main(["verify-identities", "--out", out_dir, "--suite", "lemma", "--K", "500"]) == 0
    report = read_report(out_dir)
    assert report["schema_version"] == 1
    assert report["subcommand"] == "verify-identities"
    assert report["result"]["all_verified"] is True
    assert ledger_rows(out_dir) == [("verify-identities", 0, "ok")]


def test_diagnose_rotation(out_dir, rotation_file):
    argv = ["diagnose", "--out", out_dir, "--op", rotation_file, "--power-horizon", "50", "--dd-horizon", "50"]
    assert main(argv) == 0
    result = read_report(out_dir)["result"]
    assert result["diagnostics"]["classification"] == "PowerBoundedNotRitt"
    assert result["operator_id"] == "rotation(phi=1.5708)@p=2"
    assert os.path.exists(os.path.join(out_dir, "resolvent_grid.csv"))


def test_calc_on_diagonal(out_dir, matrix_file):
    op = matrix_file("diag.json", [0.5, -0.2])
    assert main(["calc", "--out", out_dir, "--op", op, "--f", "poly:1,-1", "--theta", "3"]) == 0
    result = read_report(out_dir)["result"]
    assert result["calc"]["method"] == "contour"
    assert result["calc"]["value"]["re"][0][0] == pytest.approx(0.5, abs=1e-8)
    assert result["calc"]["value"]["re"][1][1] == pytest.approx(1.2, abs=1e-8)
    assert os.path.exists(os.path.join(out_dir, "contour.csv"))


def test_calc_outside_contour_is_numerical_failure(out_dir, matrix_file):
    op = matrix_file("diag.json", [0.5, -0.9])
    assert main(["calc", "--out", out_dir, "--op", op, "--f", "poly:1,-1", "--theta", "2"]) == 2
    assert ledger_rows(out_dir) == [("calc", 2, "numerical_error")]
    assert not os.path.exists(os.path.join(out_dir, "report.json"))


def test_missing_arguments_are_config_errors(out_dir):
    assert main([]) == 1
    assert main(["calc", "--out", out_dir]) == 1
    assert main(["frobnicate", "--out", out_dir]) == 1


def test_unknown_operator_key(out_dir, json_file):
    op = json_file("bad.json", {"kind": "rotation", "angle": 1.0})
    assert main(["diagnose", "--out", out_dir, "--op", op, "--no-ledger"]) == 1
    assert not os.path.exists(os.path.join(out_dir, "ledger.db"))


def test_missing_operator_file_is_io_error(out_dir, tmp_path):
    missing = str(tmp_path / "nowhere.json")
    assert main(["diagnose", "--out", out_dir, "--op", missing]) == 3
    assert ledger_rows(out_dir) == [("diagnose", 3, "io_error")]


def test_unexpected_failure_is_recorded(out_dir, monkeypatch):
    def broken(args, settings):
        raise ValueError("operands could not be broadcast together")

    monkeypatch.setitem(cli.RUNNERS, Subcommand.VERIFY_IDENTITIES, broken)
    assert main(["verify-identities", "--out", out_dir, "--K", "50"]) == cli.EXIT_INTERNAL == 4
    assert ledger_rows(out_dir) == [("verify-identities", 4, "internal_error")]
    assert not os.path.exists(os.path.join(out_dir, "report.json"))


def test_flags_override_config(out_dir, json_file):
    config = json_file("config.json", {"K": 50, "suite": "rising"})
    assert main(["verify-identities", "--out", out_dir, "--config", config, "--suite", "lemma"]) == 0
    result = read_report(out_dir)["result"]
    assert result["suite"] == "lemma"
    assert result["K"] == 50
    assert [r["name"] for r in result["reports"]] == ["lemma_shifted"]


def test_unknown_config_key(out_dir, json_file):
    config = json_file("config.json", {"K": 50, "colour": "blue"})
    assert main(["verify-identities", "--out", out_dir, "--config", config]) == 1


def test_sqf_report_independent_of_threads(tmp_path, matrix_file):
    op = matrix_file("diag.json", [0.5, 0.3])
    texts = []
    for threads in (1, 4):
        out = str(tmp_path / f"out{threads}")
        argv = ["sqf", "--out", out, "--op", op, "--method", "gaussian_mc", "--probes", "2",
                "--mc-samples", "256", "--threads", str(threads), "--no-ledger"]
        assert main(argv) == 0
        with open(os.path.join(out, "report.json"), "rb") as fh:
            texts.append(fh.read())
    assert texts[0] == texts[1]


def test_plot_renders_png(out_dir, rotation_file):
    argv = ["diagnose", "--out", out_dir, "--op", rotation_file, "--power-horizon", "20", "--dd-horizon", "20",
            "--plot", "--no-ledger"]
    assert main(argv) == 0
    with open(os.path.join(out_dir, "resolvent_grid.png"), "rb") as fh:
        assert fh.read(4) == b"\x89PNG"


def test_equivalence_needs_operators(out_dir):
    assert main(["equivalence", "--out", out_dir, "--no-ledger"]) == 1


def test_explicit_ledger_url(out_dir, tmp_path):
    url = f"sqlite:///{tmp_path}/runs.db"
    assert main(["verify-identities", "--out", out_dir, "--suite", "step2", "--K", "100", "--ledger", url]) == 0
    Session = init_db(url)
    with get_session_scope(Session) as session:
        [run] = session.query(RunLog).all()
        assert run.report_digest and len(run.report_digest) == 64
        assert run.report_path.endswith("report.json")


@pytest.mark.parametrize("text,z,expected", [
    ("poly:1,-1", 0.5, 0.5),
    ("poly:0,1i", 2.0, 2j),
    ("rational:1,-1/1,1", 0.5, 1.0 / 3.0),
    ("monomial:3", 0.5, 0.125),
    ("cayley", 0.0, 1.0),
])
def test_parse_function(text, z, expected):
    assert parse_function(text)(z) == pytest.approx(expected)


@pytest.mark.parametrize("text", ["poly:", "exp:1", "monomial:x", "rational:1,2", "poly:1,foo"])
def test_parse_function_rejects(text):
    with pytest.raises(BadParameters):
        parse_function(text)


def test_parse_function_kinds():
    assert parse_function("cayley").kind == HoloFn.cayley().kind
