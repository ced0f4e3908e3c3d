import csv
import json
import re

import pytest
from fastapi.testclient import TestClient

from porverif import cli
from porverif.service import app
from fixtures import PROTOCOLS

PA = f"{PROTOCOLS}/private_auth.spv"
NULL = "frame E = [].\nlet Z = 0.\nquery equiv reduced { Z } E ~ { Z } E.\n"


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_check_private_auth(capsys):
    code, out, _ = run(capsys, "check", PA)
    assert code == 1
    assert "NOT EQUIVALENT" in out and "witness: in(cB,aenc(pair(w1,w1),w2)).out(cB,w3)" in out
    records = [json.loads(l) for l in out.splitlines() if l.startswith("{")]
    assert [r["verdict"] for r in records] == ["NOT EQUIVALENT", "EQUIVALENT"]
    assert {r["mode"] for r in records} == {"reduced"}


def test_report_is_stable_modulo_time(capsys):
    strip = lambda s: re.sub(r'wall_ms"?[=:] ?[0-9.]+', "wall_ms", s)
    _, a, _ = run(capsys, "check", PA, "--mode", "compressed")
    _, b, _ = run(capsys, "check", PA, "--mode", "compressed")
    assert strip(a) == strip(b)


def test_malformed_file_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.spv"
    bad.write_text("let A = in(c,x) junk\n")
    code, _, err = run(capsys, "check", str(bad))
    assert code == 2 and "error:" in err
    code, _, _ = run(capsys, "check", str(tmp_path / "missing.spv"))
    assert code == 2


def test_bad_arguments_exit_2(capsys):
    with pytest.raises(SystemExit) as e:
        cli.main(["check", PA, "--depth", "0"])
    assert e.value.code == 2


def test_bench_csv(tmp_path, capsys):
    out = tmp_path / "toy.csv"
    code, _, _ = run(capsys, "bench", "toy", "--n-max", "2", "--modes", "compressed,reduced", "--out", str(out))
    assert code == 0
    run(capsys, "bench", "toy", "--n-max", "1", "--modes", "reduced", "--out", str(out))
    rows = list(csv.reader(out.open()))
    assert rows[0] == cli.CSV_FIELDS
    assert len(rows) == 1 + 4 + 1
    assert [r[3] for r in rows[1:5]] == ["1", "1", "2", "1"]
    assert all(re.fullmatch(r"\d+\.\d{3}", r[7]) for r in rows[1:])


def test_csv_refuses_other_header(tmp_path, capsys):
    out = tmp_path / "x.csv"
    out.write_text("a,b\n")
    code, _, _ = run(capsys, "bench", "toy", "--n-max", "1", "--modes", "reduced", "--out", str(out))
    assert code == 2


def test_explore_listing(tmp_path, capsys):
    dump = tmp_path / "dump.txt"
    code, out, _ = run(capsys, "explore", PA, "--mode", "compressed", "--dump", str(dump))
    assert code == 0
    assert "io_cB[X1;w3]\tsolved" in out.splitlines()
    assert dump.read_text().splitlines()[0] == ""


def test_null_query_lists_one_empty_trace(tmp_path, capsys):
    f = tmp_path / "null.spv"
    f.write_text(NULL)
    code, out, _ = run(capsys, "explore", str(f), "--mode", "reduced")
    assert code == 0 and out == "\tsolved\n"


def test_service_endpoints():
    c = TestClient(app)
    assert c.get("/health").json() == {"status": "ok"}
    r = c.post("/check", json={"source": NULL})
    assert r.status_code == 200 and r.json()["results"][0]["verdict"] == "EQUIVALENT"
    r = c.post("/check", json={"source": "let A = ."})
    assert r.status_code == 422 and r.json()["detail"]["line"] == 1


def test_non_blocking_flag_warns_when_unsafe(tmp_path, capsys):
    f = tmp_path / "nb.spv"
    f.write_text("frame E = [].\nlet A = in(c,x); out(c,fst(x)).\nquery equiv reduced { A } E ~ { A } E.\n")
    _, out, _ = run(capsys, "check", str(f), "--assume-non-blocking")
    assert out.startswith("warning:")
    _, out, _ = run(capsys, "check", PA, "--assume-non-blocking")
    assert "warning" not in out
