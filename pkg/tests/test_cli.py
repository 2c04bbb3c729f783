import csv
import json
import math
import subprocess
import sys

import pytest

from quasitri import cli

from conftest import SQRT3


def run(args, capsys):
    code = cli.main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    return list(csv.DictReader(text.splitlines()))


def test_generate_vg(capsys):
    code, out, _ = run(["generate", "--gen", "vg", "--triangle", "equilateral", "--n", "45"], capsys)
    assert code == 0
    r = rows(out)
    assert len(r) == 45
    got = [(float(x["x"]), float(x["y"])) for x in r[:3]]
    assert got == [(0.0, 0.0), (1.0, 0.0), (0.5, SQRT3 / 2)]


def test_generate_kronecker_manifest(tmp_path, capsys):
    out = tmp_path / "k.csv"
    code, _, _ = run(["generate", "--gen", "kronecker", "--n", "100", "--alpha", "3pi/8", "--out", str(out)], capsys)
    assert code == 0
    man = json.loads((tmp_path / "k.csv.manifest.json").read_text())
    count = len(rows(out.read_text()))
    # N = 100 happens to clip to exactly 100 points at this angle
    assert man["info"]["points"] == count
    run(["generate", "--gen", "kronecker", "--n", "99", "--alpha", "3pi/8", "--out", str(out)], capsys)
    man = json.loads((tmp_path / "k.csv.manifest.json").read_text())
    assert man["info"]["points"] == len(rows(out.read_text())) != 99
    assert man["parameters"]["alpha"] == pytest.approx(3 * math.pi / 8)
    assert man["tool_version"]


def test_generate_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        assert run(["generate", "--gen", "iid", "--n", "10", "--seed", "7", "--out", str(p)], capsys)[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_replay_is_byte_identical(tmp_path, capsys):
    out = tmp_path / "m.csv"
    assert run(["mesh-sweep", "--gen", "poisson", "--n-list", "10,20", "--trials", "3", "--seed", "5",
                "--out", str(out)], capsys)[0] == 0
    first = out.read_bytes()
    out.unlink()
    assert run(["replay", str(out) + ".manifest.json"], capsys)[0] == 0
    assert out.read_bytes() == first


def test_exit_codes(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["generate", "--gen", "nope", "--n", "3"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        cli.main(["generate", "--gen", "vg", "--n", "3", "--triangle", "0,0,1,1,2,2"])
    assert exc.value.code == 2
    code, _, err = run(["generate", "--gen", "vg", "--n", "2"], capsys)
    assert code == 3 and "VG" in err
    bad = tmp_path / "bad.csv"
    bad.write_text("x,y\n0.1,zzz\n")
    code, _, err = run(["voronoi-dump", "--points", str(bad)], capsys)
    assert code == 2 and "bad.csv:2" in err


def test_float_format(capsys):
    _, out, _ = run(["generate", "--gen", "vg", "--n", "4"], capsys)
    last = out.strip().splitlines()[-1].split(",")
    assert last[1] == "0.5" and float(last[2]) == pytest.approx(SQRT3 / 6, rel=1e-15)
    assert len(last[2].replace("0.", "", 1)) == 17
    assert cli.fmt(0.1) == "0.10000000000000001"
    assert cli.fmt(None) == "" and cli.fmt(3) == "3"


def test_mesh_sweep_vg_and_grid(capsys):
    code, out, _ = run(["mesh-sweep", "--gen", "vg", "--n-max", "60"], capsys)
    assert code == 0
    r = rows(out)
    assert [int(x["n"]) for x in r] == list(range(3, 61))
    assert all(float(x["rho"]) <= 2 + 1e-12 for x in r)
    tri = [k * (k + 1) // 2 for k in range(2, 12)]
    code, out, _ = run(["mesh-sweep", "--gen", "grid", "--n-list", ",".join(map(str, tri))], capsys)
    for x in rows(out):
        assert float(x["rho"]) == pytest.approx(2 / SQRT3, abs=1e-9)


def test_mesh_sweep_random_trials(capsys):
    code, out, _ = run(["mesh-sweep", "--gen", "iid", "--n-list", "20,40", "--trials", "4", "--format", "json"],
                       capsys)
    assert code == 0
    recs = json.loads(out)
    assert [r["n"] for r in recs] == [20, 40]


def test_shape_sweep(capsys):
    code, out, _ = run(["shape-sweep", "--alpha-steps", "5", "--beta-steps", "5", "--n", "120"], capsys)
    assert code == 0
    r = rows(out)
    assert r and list(r[0]) == cli.SHAPE_COLUMNS
    for x in r:
        k = int(x["empirical_k"])
        assert k <= int(x["k_primary"]) + 1
        if float(x["J"]) >= 0.8:
            assert k == 3
    code, out, _ = run(["shape-sweep", "--alpha-steps", "1", "--beta-steps", "5"], capsys)
    assert code == 2


def test_shape_row_equilateral():
    row = dict(zip(cli.SHAPE_COLUMNS, cli.shape_row((math.pi / 3, math.pi / 3), 60)))
    assert row["J"] == pytest.approx(1.0)
    assert row["vertex_rho"] == pytest.approx(2 / SQRT3)
    assert row["empirical_k"] == 3


def test_rbf_command(capsys):
    code, out, _ = run(["rbf", "--test-function", "runge", "--kernel", "wendland_c2", "--generators", "grid,iid",
                        "--n-list", "10,21", "--seeds", "2", "--resolution", "30"], capsys)
    assert code == 0
    r = rows(out)
    assert [x["generator"] for x in r] == ["grid", "grid", "iid", "iid"]
    assert all(x["status"] == "ok" for x in r)
    assert all(float(x["c"]) == 5.0 for x in r)
    assert r[2]["seeds"] == "2"


def test_rbf_row_failure_is_local(monkeypatch, capsys):
    from quasitri import rbf

    def boom(*a, **k):
        raise rbf.SingularSystem("forced")

    monkeypatch.setattr(rbf, "fit", boom)
    code, out, _ = run(["rbf", "--generators", "vdc", "--n-list", "10", "--resolution", "10"], capsys)
    assert code == 0
    assert rows(out)[0]["status"] == "singular"


def test_voronoi_dump(tmp_path, capsys):
    p = tmp_path / "v.csv"
    p.write_text("index,x,y\n0,0,0\n1,1,0\n2,0.5,%r\n" % (SQRT3 / 2))
    code, out, _ = run(["voronoi-dump", "--points", str(p)], capsys)
    js = json.loads(out)
    assert code == 0 and len(js["interior_vertices"]) == 1
    assert js["interior_vertices"][0]["point"] == pytest.approx([0.5, SQRT3 / 6])
    p.write_text("0.3,0.2\n")
    code, out, _ = run(["voronoi-dump", "--points", str(p)], capsys)
    assert json.loads(out)["skeleton_edges"] == []


def test_bounds(capsys):
    code, out, _ = run(["bounds", "--triangle", "skinny"], capsys)
    js = json.loads(out)
    assert js["k_bound_primary"] == 35 and js["triangle"]["C"] == [0.028, 0.045]


def test_parse_helpers():
    assert cli.parse_angle("3pi/8") == pytest.approx(3 * math.pi / 8)
    assert cli.parse_angle("pi") == pytest.approx(math.pi)
    assert cli.parse_angle("1.0") == 1.0
    assert cli.parse_int_list("45:60:15") == [45, 60]
    assert cli.row_seed(6, 3) == 5


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "quasitri", "bounds"], capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["iso_quotient"] == pytest.approx(1.0)
