import subprocess
import sys

import pytest

from anchorlab.cli import main
from anchorlab.field import TESTBED


@pytest.fixture
def files(tmp_path):
    (tmp_path / "ap1.csv").write_text("id,x,y\n1,0,100\n2,0,0\n3,100,0\n")
    (tmp_path / "line.csv").write_text("id,x,y\n1,0,0\n2,50,0\n3,100,0\n")
    return tmp_path


def run(args, capsys):
    code = main([str(a) for a in args])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_score_region(files, capsys):
    code, out, _ = run(["score", "--anchors", files / "ap1.csv", "--region", "0,0,100,100"], capsys)
    assert code == 0
    assert abs(float(out) - 1.501) <= 0.01
    assert len(out.strip().split(".")[1]) == 6


def test_score_collinear_fails(files, capsys):
    code, out, err = run(["score", "--anchors", files / "line.csv", "--region", "0,0,100,100"],
                         capsys)
    assert code != 0 and out == ""
    assert "collinear" in err


def test_missing_file_fails(files, capsys):
    code, _, err = run(["score", "--anchors", files / "nope.csv", "--region", "0,0,1,1"], capsys)
    assert code == 1 and "error" in err


def test_unknown_flag_exits_nonzero(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["score", "--bogus"])
    assert exc.value.code != 0


def test_hilbert_then_score_trajectory(files, capsys):
    out_csv = files / "ht.csv"
    assert run(["hilbert", "--order", 6, "--points", 8190, "--out", out_csv], capsys)[0] == 0
    assert sum(1 for _ in open(out_csv)) == 8191
    code, out, _ = run(["score", "--anchors", files / "ap1.csv", "--trajectory", out_csv], capsys)
    assert code == 0 and abs(float(out) - 1.499) < 0.05


def test_bench_zero_noise(files, capsys):
    (files / "t.csv").write_text("x,y\n10,10\n20,30\n40,60\n80,20\n")
    code, out, _ = run(["bench", "--anchors", files / "ap1.csv", "--trajectory", files / "t.csv",
                        "--noise-level", 0, "--model", "gaussian", "--reps", 1,
                        "--methods", "lsm,tplm", "--seed", 1], capsys)
    assert code == 0
    rows = [r.split(",") for r in out.strip().splitlines()[1:]]
    assert {r[0]: r[3] for r in rows} == {"lsm": "0.000000", "tplm": "0.000000"}


def test_bench_byte_identical(files, capsys):
    (files / "t.csv").write_text("x,y\n10,10\n20,30\n40,60\n80,20\n")
    outputs = []
    for k in range(2):
        d = files / f"run{k}"
        args = ["bench", "--anchors", files / "ap1.csv", "--trajectory", files / "t.csv",
                "--noise-level", 0.5, "--model", "uniform", "--reps", 3, "--seed", 9,
                "--restored", "--out", d]
        assert run(args, capsys)[0] == 0
        outputs.append((d / "restored.csv").read_bytes())
        stats = (d / "stats.csv").read_text().splitlines()
        # ave/std columns are deterministic; time is not
        outputs.append([",".join(r.split(",")[:5]) for r in stats])
    assert outputs[0] == outputs[2] and outputs[1] == outputs[3]


def test_seed_from_environment(files, capsys, monkeypatch):
    args = ["osap", "--anchors", files / "ap1.csv", "--region", "0,0,100,100", "--grid", 15, 15,
            "--noise-level", 3.0]
    monkeypatch.setenv("ANCHORLAB_SEED", "5")
    a = run(args, capsys)[1]
    b = run(args + ["--seed", 5], capsys)[1]
    monkeypatch.setenv("ANCHORLAB_SEED", "6")
    c = run(args, capsys)[1]
    assert a == b and a != c


def test_lvt_pgm_requires_out(files, capsys):
    code, _, err = run(["lvt", "--anchors", files / "ap1.csv", "--region", "0,0,100,100",
                        "--pgm"], capsys)
    assert code == 1 and "--out" in err
    code, _, _ = run(["lvt", "--anchors", files / "ap1.csv", "--region", "0,0,100,100",
                      "--grid", 11, 11, "--pgm", "--out", files / "l.pgm"], capsys)
    assert code == 0 and (files / "l.pgm").read_bytes().startswith(b"P5")


def test_geo_command(files, capsys):
    TESTBED.dump(files / "geo.json")
    code, out, _ = run(["geo", "--transform", files / "geo.json", "--lon", -74.475585,
                        "--lat", 40.538468], capsys)
    x, y = map(float, out.split(","))
    assert code == 0 and abs(x - 65.345179) < 0.1 and abs(y - 52.75145) < 0.1


def test_replay_command(files, capsys):
    (files / "tb.csv").write_text("id,x,y\n4,65.345179,52.75145\n5,92.580022,52.83239\n"
                                  "6,89.52274,22.232383\n")
    (files / "log.csv").write_text("epoch,time,d1,d2,d3\n0,0.0,10,20,30\n1,0.5,11,bad,29\n"
                                   "2,10.0,12,19,28\n")
    code, out, err = run(["replay", "--log", files / "log.csv", "--anchors", files / "tb.csv",
                          "--methods", "tplm", "--out", files / "rp"], capsys)
    assert code == 0
    assert "skipped=1" in err and "gaps=1" in err
    lines = (files / "rp" / "restored_tplm.csv").read_text().splitlines()
    assert len(lines) == 3 and lines[2].endswith(",1")
    (files / "two.csv").write_text("id,x,y\n1,0,0\n2,5,5\n")
    code, _, err = run(["replay", "--log", files / "log.csv", "--anchors", files / "two.csv"],
                       capsys)
    assert code == 1 and "anchors" in err


def test_rgap_and_sweep_commands(files, capsys):
    (files / "t.csv").write_text("x,y\n10,10\n20,30\n40,60\n80,20\n")
    code, _, err = run(["rgap", "--m", 3, "--placements", 3, "--trajectory", files / "t.csv",
                        "--methods", "lsm,tplm", "--out", files / "rg"], capsys)
    assert code == 0 and "mean_score=" in err
    assert len((files / "rg" / "rgap.csv").read_text().splitlines()) == 4
    code, out, _ = run(["sweep", "--anchors", files / "ap1.csv", "--trajectory", files / "t.csv",
                        "--levels", "0,0.5", "--models", "gaussian", "--reps", 1], capsys)
    assert code == 0 and len(out.strip().splitlines()) == 1 + 2 * 2


def test_module_entry_point(files):
    proc = subprocess.run([sys.executable, "-m", "anchorlab", "score", "--anchors",
                           str(files / "line.csv"), "--region", "0,0,100,100"],
                          capture_output=True, text=True)
    assert proc.returncode == 1 and "collinear" in proc.stderr
