import csv
import io
import json
import math
from pathlib import Path

import numpy as np
import pytest

from conftest import CONFIGS
from lpext.cli import main
from lpext.report import SWEEP_COLUMNS, RunReport

GOLDEN = Path(__file__).parent / "golden" / "sweep_disc_weighted.csv"


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_solve_disc_reports_pi(tmp_path, capsys):
    out = tmp_path / "r.json"
    code, _, _ = run(["solve", CONFIGS / "disc_p1.cfg", "--out", out], capsys)
    assert code == 0
    rep = RunReport.from_json(out.read_text())
    assert [o.method for o in rep.outputs] == ["direct", "irls"]
    for o in rep.outputs:
        assert o.objective == pytest.approx(math.pi, rel=1e-6)


def test_solve_p2_solvers_coincide(tmp_path, capsys):
    cfg = (CONFIGS / "polydisc.cfg").read_text().replace("p = 1.0", "p = 2")
    path = tmp_path / "p2.cfg"
    path.write_text(cfg)
    code, out, _ = run(["solve", path], capsys)
    assert code == 0
    rep = RunReport.from_json(out)
    a, b = (o.coefficient_array() for o in rep.outputs)
    np.testing.assert_array_equal(a, b)
    assert rep.outputs[0].objective == pytest.approx(1.5 * math.pi ** 2, rel=1e-12)


def test_report_json_round_trip(capsys):
    code, out, _ = run(["solve", CONFIGS / "points.cfg", "--method", "irls"], capsys)
    assert code == 0
    rep = RunReport.from_json(out)
    assert RunReport.from_json(rep.to_json()) == rep
    assert rep.to_json() + "\n" == out


def test_solve_csv_format(capsys):
    code, out, _ = run(["solve", CONFIGS / "disc_p1.cfg", "--format", "csv"], capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    kinds = {r["kind"] for r in rows}
    assert code == 0 and kinds == {"trace", "summary"}


def test_output_directory_from_environment(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("LPEXT_OUTPUT_DIR", str(tmp_path))
    code, out, _ = run(["solve", CONFIGS / "disc_p1.cfg", "--method", "direct"], capsys)
    assert code == 0 and out == ""
    assert (tmp_path / "disc_p1.solve.json").exists()


def test_verify_passes_and_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run(["verify", CONFIGS / "disc_weighted.cfg", "--out", a], capsys)[0] == 0
    assert run(["verify", CONFIGS / "disc_weighted.cfg", "--out", b], capsys)[0] == 0
    la, lb = (json.loads(p.read_text())["ledger"] for p in (a, b))
    assert la == lb


def test_verify_zero_tolerance_exits_1(tmp_path, capsys):
    path = tmp_path / "strict.cfg"
    path.write_text((CONFIGS / "disc_weighted.cfg").read_text() + "\n[tolerances]\ndefault = 0\n")
    code, _, err = run(["verify", path, "--out", tmp_path / "o.json"], capsys)
    assert code == 1 and "FAIL" in err


def test_bad_p_exits_2(tmp_path, capsys):
    path = tmp_path / "bad.cfg"
    path.write_text((CONFIGS / "disc_p1.cfg").read_text().replace("p = 1.0", "p = -1"))
    code, _, err = run(["verify", path], capsys)
    assert code == 2 and "[solve] p" in err


def test_missing_file_exits_2(capsys):
    assert run(["solve", CONFIGS / "nope.cfg"], capsys)[0] == 2


def test_usage_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["solve"])
    assert exc.value.code == 2
    assert run(["sweep", CONFIGS / "disc_p1.cfg", "--p", "--D", "4"], capsys)[0] == 2
    assert run(["sweep", CONFIGS / "disc_p1.cfg", "--p", "2", "--D", "4"], capsys)[0] == 2
    assert run(["sweep", CONFIGS / "disc_p1.cfg", "--p", "1", "--D", "1.5"], capsys)[0] == 2


def test_solver_failure_exits_3(tmp_path, capsys):
    path = tmp_path / "tight.cfg"
    path.write_text((CONFIGS / "points.cfg").read_text().replace("seed = 0", "max_iter = 2"))
    code, _, err = run(["solve", path], capsys)
    assert code == 3 and '"trace"' in err


def test_sweep_single_pair(capsys):
    code, out, _ = run(["sweep", CONFIGS / "disc_p1.cfg", "--p", "1", "--D", "3"], capsys)
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0 and len(rows) == 2


def test_sweep_matches_golden(capsys):
    code, out, _ = run(["sweep", CONFIGS / "disc_weighted.cfg", "--p", "1.5,0.5,1", "--D", "8",
                        "4"], capsys)
    assert code == 0
    got = list(csv.reader(io.StringIO(out)))
    want = list(csv.reader(io.StringIO(GOLDEN.read_text())))
    assert got[0] == want[0] == list(SWEEP_COLUMNS)
    assert len(got) == len(want) == 7
    for g, w in zip(got[1:], want[1:]):
        assert g[:2] == w[:2] and g[5] == w[5]
        np.testing.assert_allclose([float(x) for x in g[2:5] + g[6:]],
                                   [float(x) for x in w[2:5] + w[6:]], rtol=0, atol=1e-8)
    assert all(float(r[4]) <= 1e-4 for r in got[1:])
    m = math.pi * (1 - math.exp(-1))
    assert all(abs(float(r[2]) - m) <= 1e-6 * m for r in got[1:])
