import json
import subprocess
import sys

import pytest

from globalrv.cli import main


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


@pytest.fixture
def bv_file(tmp_path):
    return write(tmp_path, "path.csv", "t,x\n0,0\n1,1\n2,3\n3,6\n")


def test_constants(capsys):
    assert main(["constants", "--alpha", "0.2"]) == 0
    out, err = capsys.readouterr()
    assert out == "0.2,1.642374,0.350180,0.678655\n"
    assert err.startswith("resolved: ")


def test_estimate_bv(bv_file, capsys):
    assert main(["estimate", "--input", bv_file, "--estimator", "bv"]) == 0
    assert capsys.readouterr().out == "bv,12.566371\n"


def test_estimate_labels_and_mask(tmp_path, capsys):
    text = "t,x\n" + "".join(f"{i},{v}\n" for i, v in enumerate([0, 0.1, -0.1, 4.9, 5.05]))
    src = write(tmp_path, "p.csv", text)
    mask = tmp_path / "mask.csv"
    rc = main(["estimate", "--input", src, "--estimator", "grv[0.25]", "--estimator", "trv",
               "--rho", "0.2", "--mask", str(mask), "--T", "1"])
    assert rc == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("grv[0.25],") and lines[0].endswith(",2")
    assert lines[1].startswith("trv[0.2],")
    body = mask.read_text().splitlines()
    assert body[0].startswith("#") and body[1] == "label,index"
    assert "grv[0.25],3" in body


def test_estimate_out_file(bv_file, tmp_path):
    out = tmp_path / "o.csv"
    assert main(["estimate", "--input", bv_file, "--estimator", "mrv", "--out", str(out)]) == 0
    assert out.read_text().startswith("mrv,")


def test_exit_codes(tmp_path, bv_file, capsys):
    assert main(["estimate", "--input", str(tmp_path / "missing.csv")]) == 3
    bad = write(tmp_path, "bad.csv", "t,x\n0,1\n0.4,1\n1,1\n")
    assert main(["estimate", "--input", bad, "--estimator", "bv"]) == 3
    assert main(["estimate", "--input", bv_file, "--estimator", "nope"]) == 4
    assert main(["constants", "--alpha", "1.5"]) == 4
    err = capsys.readouterr().err.strip().splitlines()
    assert all(line.startswith(("globalrv:", "resolved:")) for line in err)
    with pytest.raises(SystemExit) as info:
        main(["constants"])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        main(["estimate", "--input", bv_file, "--bogus"])
    assert info.value.code == 2


def test_simulate_and_reestimate(tmp_path, capsys):
    out = tmp_path / "sim.csv"
    assert main(["simulate", "--n", "400", "--seed", "5", "--out", str(out)]) == 0
    side = json.loads((tmp_path / "sim.csv.json").read_text())
    assert side["seed"] == 5 and side["theta_true"] > 0 and side["gamma_true"] > 0
    first = out.read_bytes()
    assert main(["simulate", "--n", "400", "--seed", "5", "--out", str(out)]) == 0
    assert out.read_bytes() == first
    assert main(["estimate", "--input", str(out), "--estimator", "grv.lgrv[0.20]"]) == 0
    line = capsys.readouterr().out.strip()
    assert line.startswith("grv.lgrv[0.20],")


def test_mc_and_sweep(tmp_path):
    cfg = {"model": {"eta": 3}, "jumps": {"kind": "compound-poisson", "lambda": 5,
                                          "mu": 0.3, "nu": 0.2},
           "n": 300, "trials": 3, "seed": 1, "estimators": ["bv", "grv.lgrv[0.20]"]}
    path = write(tmp_path, "cfg.json", json.dumps(cfg))
    out, rec, qq = tmp_path / "s.csv", tmp_path / "r.csv", tmp_path / "q.csv"
    assert main(["mc", "--config", path, "--out", str(out), "--records", str(rec),
                 "--qq", str(qq)]) == 0
    rows = [l for l in out.read_text().splitlines() if not l.startswith("#")]
    assert rows[0].startswith("label,min,q1,median,q3,max,mean")
    assert len(rows) == 3 and rec.exists() and qq.exists()
    assert main(["sweep", "--config", path]) == 4          # no grid
    sweep = write(tmp_path, "sw.json", json.dumps(dict(cfg, sweep={"lambda": [5, 10]})))
    sout = tmp_path / "sw.csv"
    assert main(["sweep", "--config", sweep, "--out", str(sout)]) == 0
    assert main(["mc", "--config", sweep]) == 4
    rows = [l for l in sout.read_text().splitlines() if not l.startswith("#")]
    assert rows[0] == "lambda,label,mean_error,median_error,trials" and len(rows) == 5
    broken = write(tmp_path, "broken.json", "{not json")
    assert main(["mc", "--config", broken]) == 4


def test_module_entry_point(bv_file):
    res = subprocess.run([sys.executable, "-m", "globalrv", "estimate", "--input", bv_file,
                          "--estimator", "bv"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout == "bv,12.566371\n"
    assert res.stderr.startswith("resolved: ")
