import hashlib
import json

import pytest

from msaw import __version__
from msaw.cli import main
from msaw.io import loads_csv, read_s1p


@pytest.fixture(autouse=True)
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("MSAW_SCENARIO_DIR", raising=False)
    return tmp_path


def digest(path):
    return hashlib.sha256(open(path, "rb").read()).hexdigest()


def test_usage_errors_exit_1(capsys):
    assert main(["frobnicate"]) == 1
    assert main(["simulate", "--bogus"]) == 1
    assert main([]) == 1
    err = capsys.readouterr().err
    assert "usage" in err.lower()


def test_missing_input_exit_1(capsys):
    assert main(["interrogate", "--in", "nope.s1p"]) == 1
    assert main(["simulate", "--scenario", "nope.json"]) == 1
    assert "scenario file not found" in capsys.readouterr().err


def test_processing_error_exit_2(capsys):
    open("flat.csv", "w").write(
        "sweep_id,temperature_c,field_mt,peak_id,f_zero_hz\n0,25,-4,1,410000000\n0,25,-4,1,410000000\n")
    assert main(["calibrate", "--temperature-csv", "flat.csv"]) == 2
    assert "constant" in capsys.readouterr().err


def test_simulate_is_deterministic_and_headed(capsys):
    assert main(["--seed", "3", "--snr-db", "30", "simulate", "--out", "a.s1p"]) == 0
    assert main(["simulate", "--out", "b.s1p", "--seed", "3", "--snr-db", "30"]) == 0
    assert digest("a.s1p") == digest("b.s1p")
    rec = read_s1p(open("a.s1p").read())
    assert rec.comments[0] == f"msaw {__version__} simulate seed=3 snr_db=30"
    assert rec.frequencies.size == 4001
    assert main(["simulate", "--out", "c.s1p", "--seed", "4", "--snr-db", "30"]) == 0
    assert digest("a.s1p") != digest("c.s1p")


def test_interrogate_finds_four_echoes(capsys):
    assert main(["simulate", "--scenario", "default.json", "--out", "dev.s1p"]) == 0
    before = digest("dev.s1p")
    assert main(["interrogate", "--in", "dev.s1p", "--out", "echoes.csv", "--time-csv", "t.csv"]) == 0
    assert digest("dev.s1p") == before
    rows = loads_csv(open("echoes.csv").read())
    assert [int(r["peak_id"]) for r in rows] == [1, 2, 3, 4]
    assert rows[0]["level_db"] == pytest.approx(-18, abs=0.5)
    assert rows[1]["level_db"] == pytest.approx(-24, abs=0.5)
    assert loads_csv(open("t.csv").read(), required=("time_s", "level_db"))


def test_scenario_dir_env(monkeypatch, tmp_path, capsys):
    d = tmp_path / "scen"
    d.mkdir()
    (d / "hot.json").write_text(json.dumps({"environment": {"temperature_c": 40}}))
    monkeypatch.setenv("MSAW_SCENARIO_DIR", str(d))
    assert main(["simulate", "--scenario", "hot.json", "--out", "hot.s1p"]) == 0
    assert "temperature_c=40" in open("hot.s1p").read()


def test_strict_config(tmp_path, capsys):
    (tmp_path / "odd.json").write_text('{"extra": 1}')
    with pytest.warns(UserWarning, match="extra"):
        assert main(["simulate", "--scenario", "odd.json", "--out", "x.s1p"]) == 0
    assert main(["--strict-config", "simulate", "--scenario", "odd.json", "--out", "y.s1p"]) == 1
    assert "extra" in capsys.readouterr().err


def test_temperature_sweep_then_calibrate(capsys):
    assert main(["sweep", "--vary", "temperature", "25:50:5", "--out", "t.csv"]) == 0
    assert "seed=0" in open("t.csv").readline()
    assert main(["calibrate", "--temperature-csv", "t.csv", "--out", "cal.csv"]) == 0
    cal = {int(r["peak_id"]): r["value"] for r in loads_csv(open("cal.csv").read())}
    assert cal[1] == pytest.approx(-67.7, rel=0.01)
    assert cal[2] == pytest.approx(-66.2, rel=0.01)


def test_field_sweep_calibrate_compensate(capsys):
    # drift-free sweeps: a chuck drift would add its own slope to the raw fit
    args = ["sweep", "--vary", "field", "--range=-1:1.5:0.1", "--temperatures", "7,37", "--out", "f.csv"]
    assert main(args) == 0
    assert main(["calibrate", "--field-csv", "f.csv", "--sweep-id", "1", "--out", "m.csv"]) == 0
    rows = loads_csv(open("m.csv").read())
    slope = {int(r["peak_id"]): r["value"] for r in rows if r["quantity"] == "magnetic_slope"}
    assert slope[2] == pytest.approx(-781, rel=0.01)
    before = digest("f.csv")
    assert main(["compensate", "--in", "f.csv", "--tcf1", "-67.7", "--tcf2", "-66.2", "--out", "c.csv"]) == 0
    assert digest("f.csv") == before
    assert "compensated" in capsys.readouterr().err
    comp = loads_csv(open("c.csv").read())
    assert {int(r["sweep_id"]) for r in comp} == {0, 1}
    assert main(["compensate", "--in", "f.csv", "--out", "d.csv"]) == 1


def test_decode_round_trip(capsys):
    assert main(["simulate", "--code", "a5", "--out", "tag.s1p"]) == 0
    assert main(["decode", "--in", "tag.s1p"]) == 0
    assert capsys.readouterr().out.strip() == "a5"
    assert main(["simulate", "--code", "1ff", "--out", "bad.s1p"]) == 1
    assert main(["simulate", "--code", "xyz", "--out", "bad.s1p"]) == 1


def test_disperse_and_magcurve(capsys):
    assert main(["disperse", "--control", "thickness", "--layer", "ZnO", "--range=2e-7:1e-6:4e-7",
                 "--out", "d.csv"]) == 0
    v = [r["phase_velocity_mps"] for r in loads_csv(open("d.csv").read())]
    assert len(v) == 3 and v[0] > v[1] > v[2]
    assert main(["disperse", "--layer", "Gold", "--range=1e-7:2e-7:1e-7"]) == 1
    assert main(["magcurve", "--range=-4:4:1", "--out", "m.csv"]) == 0
    rows = loads_csv(open("m.csv").read())
    assert rows[0]["shift_ppm"] == 0 and rows[-1]["shift_ppm"] == pytest.approx(-687.28)


def test_plot_subcommand(capsys):
    assert main(["magcurve", "--out", "m.csv"]) == 0
    assert main(["plot", "--kind", "shift_vs_field", "--in", "m.csv", "--out", "a.svg"]) == 0
    assert main(["plot", "--kind", "shift_vs_field", "--in", "m.csv", "--out", "b.svg"]) == 0
    assert digest("a.svg") == digest("b.svg")
    assert main(["plot", "--kind", "spectrum_db", "--in", "m.csv", "--out", "c.svg"]) == 1
    assert main(["plot", "--kind", "spectrum_db", "--in", "m.csv", "--xrange", "3:1"]) == 1
