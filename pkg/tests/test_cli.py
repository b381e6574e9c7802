import csv
import io
import json
from pathlib import Path

import pytest

from acsigma.cli import EXIT_INVALID, EXIT_OK, EXIT_RESOURCE, run_command

PROBLEMS = Path(__file__).resolve().parent.parent / "problems"


def run(argv):
    out, err = io.StringIO(), io.StringIO()
    code = run_command(argv, out, err)
    return code, out.getvalue(), err.getvalue()


def write(tmp_path, doc, name="p.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def test_norm_sharp_example():
    code, out, _ = run(["norm", "--in", str(PROBLEMS / "sharp3.json"), "--mode", "exact"])
    body = json.loads(out)
    assert code == EXIT_OK
    assert body["lower"] == 3 and body["upper"] == 3 and body["exact"] is True
    assert body["certificate"]["vf"] >= 1


def test_norm_replay(tmp_path):
    _, out, _ = run(["norm", "--in", str(PROBLEMS / "sharp3.json")])
    cert = write(tmp_path, json.loads(out), "cert.json")
    code, out, _ = run(["norm", "--in", str(PROBLEMS / "sharp3.json"), "--replay", cert])
    assert code == EXIT_OK and json.loads(out)["verified"] is True
    doc = json.loads(Path(cert).read_text())
    doc["certificate"]["product"] = 5.0
    bad = write(tmp_path, doc, "bad.json")
    code, _, err = run(["norm", "--in", str(PROBLEMS / "sharp3.json"), "--replay", bad])
    assert code == EXIT_INVALID and "reproduce" in err


def test_vf_segment():
    code, out, _ = run(["vf", "--in", str(PROBLEMS / "segment.json")])
    body = json.loads(out)
    assert code == EXIT_OK and {k: body[k] for k in ("vf", "rho")} == {"vf": 1, "rho": "1/1"}


def test_vf_comb():
    _, out, _ = run(["vf", "--in", str(PROBLEMS / "comb.json")])
    assert json.loads(out)["vf"] == 4


def test_counterexample_table():
    code, out, _ = run(["counterexample", "--kmax", "6"])
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == EXIT_OK and [int(r["k"]) for r in rows] == [2, 3, 4, 5, 6]
    for r in rows:
        assert float(r["chi_norm_lb"]) >= int(r["k"])
        assert float(r["gap_lb"]) >= 0.5


@pytest.mark.parametrize("argv", [
    ["norm", "--in", "sharp3.json", "--mode", "bnb"],
    ["spoke", "--in", "sharp3.json"],
    ["cutoff", "--in", "cutoff5.json"],
    ["order", "--in", "cutoff5.json"],
    ["operator", "validate", "--in", "two_rays.json"],
    ["operator", "trace", "--in", "real_line.json", "--order", "modulus"],
    ["operator", "split", "--in", "two_rays.json"],
    ["operator", "rearrange", "--in", "real_line.json"],
])
def test_output_is_deterministic(argv):
    argv = [str(PROBLEMS / a) if a.endswith(".json") else a for a in argv]
    first = run(argv)
    assert first[0] == EXIT_OK and first[1]
    assert run(argv) == first


def test_threads_do_not_change_output():
    base = ["norm", "--in", str(PROBLEMS / "sharp3.json")]
    a = run(["--threads", "1"] + base)[1]
    b = run(["--threads", "3"] + base)[1]
    assert json.loads(a)["certificate"] == json.loads(b)["certificate"]
    assert json.loads(a)["lower"] == json.loads(b)["lower"]


def test_csv_header_always_emitted(tmp_path):
    p = write(tmp_path, {"points": [["0", "0"]], "params": {"r_seq": [], "eps_seq": []}})
    code, out, _ = run(["cutoff", "--in", p])
    assert code == EXIT_OK and out.splitlines() == ["n,r,eps,g_norm,err_x,err_y,err_lambda,bound,exact,ok"]


@pytest.mark.parametrize("doc", [
    {"points": [["0", "0"]], "colour": "red"},
    {"points": [["0.1", "x"]]},
    {"points": [[0.5, 1]]},
    {"points": [["0", "0"]], "params": {"mode": "fast"}},
])
def test_schema_violations(tmp_path, doc):
    code, out, err = run(["norm", "--in", write(tmp_path, doc)])
    assert code == EXIT_INVALID and not out and err.startswith("error:")


def test_semantic_errors(tmp_path):
    dup = write(tmp_path, {"points": [["0", "0"], ["0.0", "0"]], "values": [["1", "0"], ["0", "0"]]})
    assert run(["norm", "--in", dup])[0] == EXIT_INVALID
    assert run(["norm", "--in", str(tmp_path / "missing.json")])[0] == EXIT_INVALID
    assert run(["operator", "validate", "--in", str(PROBLEMS / "sharp3.json")])[0] == EXIT_INVALID


def test_unknown_flag_exits_2():
    with pytest.raises(SystemExit) as exc:
        run(["norm", "--in", "x.json", "--bogus"])
    assert exc.value.code == 2


def test_resource_limit_exit_code(tmp_path):
    pts = [[str(k), str(k * k % 7)] for k in range(6)]
    vals = [[str(k % 3), "0"] for k in range(6)]
    p = write(tmp_path, {"points": pts, "values": vals, "params": {"lmax": 14}})
    code, out, err = run(["norm", "--in", p, "--mode", "exact"])
    assert code == EXIT_RESOURCE and not out and "node limit" in err


def test_precision_limit_exit_code(monkeypatch):
    import acsigma.cli as cli
    from acsigma.counterexample import PrecisionError

    def refuse(*args, **kw):
        raise PrecisionError("still failing")

    monkeypatch.setattr(cli, "counterexample_build", refuse)
    code, _, err = run(["counterexample", "--kmax", "8"])
    assert code == EXIT_RESOURCE and "precision" in err
