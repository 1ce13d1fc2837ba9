import json
import subprocess
import sys
from pathlib import Path

import pytest

from crossedcohom import io
from crossedcohom.cli import main
from crossedcohom.groups import symmetric

FIX = Path(__file__).resolve().parents[1] / "fixtures"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_h1_reports_two_classes(capsys):
    code, out, _ = run(capsys, "h1", f"site={FIX / 'pseudo-circle.json'}", f"group={FIX / 'Z2-const.json'}")
    assert code == 0
    assert "2 classes" in out


def test_verify_exact_all_pass(capsys):
    code, out, _ = run(capsys, "verify-exact", f"seq={FIX / 'Z2-Z4-Z2.json'}", f"site={FIX / 'pt.json'}")
    assert code == 0
    assert "verdict: all pass" in out


def test_malformed_fixture_exit_2_with_location(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"points": ["a",\n ]}')
    code, _, err = run(capsys, "validate-site", f"site={bad}")
    assert code == 2
    assert f"{bad}:2:2" in err


def test_bound_refusal_exit_3(capsys):
    code, _, err = run(capsys, "h2", "site=pseudo-circle", "group=S3", "--bound", "50")
    assert code == 3
    assert "exceeds bound 50" in err


def test_bound_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("CROSSED_COHOM_BOUND", "50")
    code, _, _ = run(capsys, "h1", "site=pseudo-circle", "group=S3")
    assert code == 3
    monkeypatch.setenv("CROSSED_COHOM_BOUND", "many")
    code, _, _ = run(capsys, "h1", "site=pseudo-circle", "group=S3")
    assert code == 2


def test_failing_verification_exit_1(capsys, tmp_path):
    G = symmetric(3)
    crossed = {
        "constant": {
            "A": "S3",
            "Pi": "1",
            "rho": [[io.jsonable(g), 0] for g in G],
            "phi": [[0, io.jsonable(g), io.jsonable(g)] for g in G],
        }
    }
    path = tmp_path / "bad-crossed.json"
    path.write_text(json.dumps(crossed))
    code, out, _ = run(capsys, "check-crossed", "site=pt", f"crossed={path}")
    assert code == 1
    assert "[FAIL] Peiffer" in out


def test_json_output_and_determinism(capsys):
    args = ("h2", f"site={FIX / 'pseudo-circle.json'}", f"crossed={FIX / 'S3-int.json'}", "--cover", "abc,abd", "--json")
    code, out1, _ = run(capsys, *args)
    assert code == 0
    data = json.loads(out1)
    assert data["ok"] and data["data"]["classes"] == 1
    assert data["data"]["representatives"]
    _, out2, _ = run(capsys, *args)
    assert out1 == out2


def test_oracle_flag(capsys):
    code, out, _ = run(capsys, "h2", "site=sphere2", "group=Z2", "--oracle")
    assert code == 0
    assert "[PASS] oracle: cardinalities agree" in out
    code, out, _ = run(capsys, "h1", "site=pseudo-circle", "group=Z4", "--oracle", "--cover", "abc,abd")
    assert code == 0
    assert "[PASS] agrees with Cech H1 over the cover" in out


@pytest.mark.parametrize(
    "argv",
    [
        ("validate-site", "site=tetra-sphere"),
        ("check-sheaf", "site=sphere2", "group=S3"),
        ("check-crossed", "site=pseudo-circle", "group=S3"),
        ("h0", "site=pseudo-circle", "group=S3"),
        ("coboundary1", "site=pseudo-circle", "seq=Z2-Z4-Z2", "s=1"),
        ("coboundary2", "site=pseudo-circle", "seq=Z2-Z4-Z2", "class=1", "seed=4"),
        ("verify-naturality", "site=pt", f"diagram={FIX / 'naturality.json'}"),
        ("compare-abelian", "site=pseudo-circle", "group=Z3"),
        ("compare-giraud", "site=pt", "group=S3"),
    ],
    ids=lambda a: a[0],
)
def test_commands_succeed(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, out + err


def test_bad_cover_is_input_error(capsys):
    code, _, err = run(capsys, "h2", "site=pseudo-circle", "group=Z2", "--cover", "abc")
    assert code == 2 and "does not cover" in err


def test_console_script_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "crossedcohom.cli", "h0", "site=pt", "group=Z3"], capture_output=True, text=True
    )
    assert proc.returncode == 0
    assert "order 3" in proc.stdout
