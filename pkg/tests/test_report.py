import json

import numpy as np
import pytest

from painleve_lax.report import FAIL, PASS, Record, Report, numeric, symbolic


def _sample():
    rep = Report({"command": "demo", "mu": ["1+2i"]})
    rep.add(symbolic("exact check", True, "JM2 pair", ["note"], {"k": 1}, timing=0.2))
    rep.add(numeric("float check", 3e-9, 1e-6, "quadrature", data={"W": np.eye(2) * (1 + 1j)}))
    rep.add(numeric("negative control", 50.0, 1e-2, larger_is_pass=True))
    return rep


def test_json_round_trip():
    rep = _sample()
    back = Report.from_json(rep.to_json())
    assert back.to_json() == rep.to_json()
    assert [r.status for r in back.records] == [PASS, PASS, PASS]


def test_timing_can_be_left_out():
    d = _sample().to_dict(with_timing=False)
    assert all("timing" not in r for r in d["records"])


def test_exit_code_follows_statuses():
    rep = _sample()
    assert rep.exit_code == 0
    rep.add(numeric("too big", 1.0, 1e-6))
    assert rep.records[-1].status == FAIL and rep.exit_code == 1
    assert rep.summary() == {"PASS": 3, "FAIL": 1, "ERROR": 0}


def test_symbolic_records_never_carry_floats():
    with pytest.raises(ValueError):
        Record("x", "symbolic", PASS, 0.0, True)
    with pytest.raises(ValueError):
        Record("x", "numeric", "MAYBE", 0.0, None)


def test_unknown_schema_is_rejected():
    d = json.loads(_sample().to_json())
    d["schema"] = "fgpair-report/0"
    with pytest.raises(ValueError):
        Report.from_json(json.dumps(d))


def test_text_form():
    text = _sample().to_text()
    assert "[PASS] exact check (symbolic) exact_zero=true" in text
    assert text.rstrip().endswith("summary: 3 passed, 0 failed, 0 errors")
