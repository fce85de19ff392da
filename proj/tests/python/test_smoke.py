import json
import math
import os
from pathlib import Path

import pytest

import solderlab

FIXTURES = Path(os.environ.get("SOLDERLAB_FIXTURES", Path(__file__).resolve().parents[2] / "fixtures"))
CORPUS = FIXTURES / "corpus"


def test_commands_listed():
    names = solderlab.command_names()
    assert "check" in names and "report-all" in names


def test_evaluate():
    assert solderlab.evaluate("x^2*y + sin(0)", ["x", "y"], [3.0, 2.0]) == 18.0
    with pytest.raises(solderlab.ParseError):
        solderlab.evaluate("x +", ["x"], [1.0])


def test_flat_puzzle():
    p = solderlab.Puzzle.load(str(CORPUS / "f1_flat.puzzle"))
    assert (p.dim, p.rank, p.degree) == (2, 2, 1)
    assert p.integrability_residual() == 0.0
    assert p.classify()["classification"] == "isomorphism"
    m = p.solder_matrix([0.1, 0.2])
    assert m.shape == (2, 2) and m[0, 0] == 1.0


def test_contact_residual_and_kernel():
    p = solderlab.Puzzle.load(str(CORPUS / "contact.puzzle"))
    assert math.isclose(p.integrability_residual(), 1.0, abs_tol=1e-12)
    k = p.kernel([0.1, 0.5, 0.0])
    assert len(k) == 2
    for v in k:
        assert abs(-0.5 * v[0] + v[2]) < 1e-12


def test_projection_classification():
    p = solderlab.Puzzle.load(str(CORPUS / "f3_projection.puzzle"))
    c = p.classify()
    assert c["classification"] == "surjective" and c["kernel_dim"] == 1
    report = p.run("observable")
    assert report["pass"]


def test_parse_errors():
    with pytest.raises(solderlab.FormatError, match="omega.1.3"):
        solderlab.Puzzle.parse(
            "[chart]\ncoords = x, y\ndomain.x = -1, 1\ndomain.y = -1, 1\n[bundle]\nrank = 2\n[connection]\nomega.1.3 = 0, 0\n[solder]\nphi.1.0 = 1\n"
        )


def test_run_cli_exit_codes():
    code, report = solderlab.run("report-all", str(CORPUS))
    assert code == 0 and report["pass"]
    code, _ = solderlab.run("report-all", str(FIXTURES / "negative"))
    assert code == 1
    code, report = solderlab.run("check", str(FIXTURES / "malformed" / "bad_index.puzzle"))
    assert code == 2 and report["errors"]


def test_reports_deterministic():
    path = str(CORPUS / "f6_exponential.puzzle")
    a = json.dumps(solderlab.run("report-all", path, seed=5)[1])
    b = json.dumps(solderlab.run("report-all", path, seed=5)[1])
    assert a == b
