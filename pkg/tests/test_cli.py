import cmath
import json
import math
from pathlib import Path

import pytest

from painleve_lax.cli import UsageError, main, parse_complex, resolve_theta

GOLDEN = Path(__file__).parent / "golden"


@pytest.mark.parametrize("text, value", [
    ("2", 2), ("2i", 2j), ("i", 1j), ("1+2i", 1 + 2j), ("-0.5-1.5i", -0.5 - 1.5j),
    ("exp(2i*pi/3)", cmath.exp(2j * math.pi / 3)), ("2*exp(i*pi)", -2), ("1e-3i", 1e-3j),
    ("sqrt(-4)", 2j), ("2^3", 8),
])
def test_complex_literals(text, value):
    assert parse_complex(text) == pytest.approx(value, abs=1e-15)


@pytest.mark.parametrize("text", ["__import__('os')", "exp(1, 2)", "x", "1 +", "[1]"])
def test_complex_literals_reject_other_syntax(text):
    with pytest.raises(UsageError):
        parse_complex(text)


def test_theta_alpha_consistency():
    assert resolve_theta(None, "0.25") == 0.25
    assert resolve_theta("0.5", "0") == 0.5
    with pytest.raises(UsageError):
        resolve_theta("0.5", "0.3")


def _run(tmp_path, *argv):
    out = tmp_path / "report.json"
    code = main([*argv, "--format", "json", "--out", str(out)])
    d = json.loads(out.read_text())
    for r in d["records"]:
        r.pop("timing")
    return code, d


@pytest.mark.parametrize("argv, golden", [
    (("verify", "--pair", "JM2", "--pair", "dJKT1"), "verify_JM2_dJKT1.json"),
    (("diagram", "--figure", "1"), "diagram_figure1.json"),
])
def test_golden_reports(tmp_path, argv, golden):
    code, d = _run(tmp_path, *argv)
    assert code == 0
    assert d == json.loads((GOLDEN / golden).read_text())


def test_verify_all_pairs(tmp_path):
    code, d = _run(tmp_path, "verify")
    assert code == 0 and d["summary"]["FAIL"] == 0 and len(d["records"]) >= 18


def test_unknown_pair_exit_code(capsys):
    assert main(["verify", "--pair", "NOPE"]) == 2
    assert "UnknownPair" in capsys.readouterr().err


def test_bad_figure_is_a_usage_error():
    with pytest.raises(SystemExit) as info:
        main(["diagram", "--figure", "3"])
    assert info.value.code == 2


def test_figure2_with_negative_control(tmp_path):
    code, d = _run(tmp_path, "diagram", "--figure", "2", "--negative-control")
    assert code == 0
    names = [r["name"] for r in d["records"]]
    assert any(n.startswith("commutativity") for n in names)
    assert "Fabri HTW -> FN" in names


@pytest.mark.parametrize("argv", [
    ("laplace", "--pair", "JKT2", "--expect", "dJKT2_3"),
    ("laplace", "--pair", "JKT1", "--direction", "inverse", "--expect", "dJKT1"),
    ("transform", "--pair", "JM1", "--spec", "fabri_p1", "--expect", "JM1F"),
    ("reduce", "--pair", "dJKT1", "--reduction", "reduce_djkt1", "--expect", "JM1"),
    ("scalar",),
])
def test_symbolic_commands(tmp_path, argv):
    code, d = _run(tmp_path, *argv)
    assert code == 0, d


def test_wrong_expectation_fails(tmp_path):
    code, d = _run(tmp_path, "laplace", "--pair", "JKT2", "--expect", "dJKT2_2")
    assert code == 1 and d["records"][0]["status"] == "FAIL"


def test_mu_outside_wedge(capsys):
    assert main(["theorem31", "--theta", "0.5", "--mu", "1", "--mu", "2", "--k", "0"]) == 2
    assert "admissible k: [1]" in capsys.readouterr().err


def test_theorem_quick_and_self_test(tmp_path):
    code, d = _run(tmp_path, "theorem31", "--theta", "0.5", "--quick")
    assert code == 0
    code, d = _run(tmp_path, "theorem31", "--theta", "0.5", "--quick", "--self-test", "corrupt-kernel")
    assert code == 1 and d["records"][0]["residual"] > 1e-2


def test_theta_zero_note(tmp_path):
    code, d = _run(tmp_path, "theorem31", "--theta", "0", "--quick")
    assert code == 0 and "theta=0 power twist trivial" in d["records"][0]["notes"]


def test_plot_export(tmp_path):
    out = tmp_path / "w.txt"
    assert main(["plot-export", "--what", "transform", "--theta", "0.5", "--mu", "exp(2i*pi/3)",
                 "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("# mu_re mu_im W11_re")
    assert len(lines[1].split()) == 10
