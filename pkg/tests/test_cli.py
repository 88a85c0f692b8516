import json
import subprocess
import sys

import pytest

from cantorlab import __version__
from cantorlab.cli import main
from cantorlab.recipes import RECIPES


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_count_json_schema(capsys):
    code, out, _ = run(capsys, "count", "--model", "mcmullen", "--rho", "2^-20", "--method", "oracle")
    assert code == 0
    doc = json.loads(out)
    assert doc["version"] == __version__
    assert len(doc["config_hash"]) == 64
    res = doc["result"]
    assert res["rho_log2"] == "-20"
    assert isinstance(res["count_decimal"], str)
    assert int(res["count_decimal"]).bit_length() == res["count_bits"]
    assert res["completeness"] == "1"


def test_count_routes_agree_and_flags_follow_subcommand(capsys):
    outs = {}
    for method in ("oracle", "classes", "literal"):
        code, out, _ = run(capsys, "count", "--model", "star", "--rho", "2^-18", "--prefix", "1^6", "--method", method, "--threads", "2")
        assert code == 0
        outs[method] = json.loads(out)["result"]["count_decimal"]
    assert len(set(outs.values())) == 1


def test_byte_identical_repeats(capsys):
    argv = ("count", "--model", "mcmullen", "--rho", "2^-400", "--classes")
    _, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv)
    assert a == b and a


def test_malformed_json_reports_position(tmp_path, capsys):
    bad = tmp_path / "m.json"
    bad.write_text('{"family": "mcmullen",\n  "M": 128,,\n}')
    code, _, err = run(capsys, "bilip", "--model", str(bad), "--depth", "4")
    assert code == 2
    assert "line 2" in err and "column" in err


def test_invalid_model_exit_code(tmp_path, capsys):
    cfg = tmp_path / "m.json"
    cfg.write_text(json.dumps({"family": "mcmullen", "beta": "1/2", "M": 5}))
    code, _, _ = run(capsys, "bilip", "--model", str(cfg))
    assert code == 3


def test_unknown_config_key_is_refused(tmp_path, capsys):
    cfg = tmp_path / "m.json"
    cfg.write_text(json.dumps({"family": "mcmullen", "beta": "1/2", "M": 128, "colour": "red"}))
    code, _, _ = run(capsys, "bilip", "--model", str(cfg))
    assert code in (2, 3)


def test_model_file_round_trip(tmp_path, capsys):
    cfg = tmp_path / "m.json"
    cfg.write_text(json.dumps({"family": "mcmullen", "beta": "1/2", "M": 128}))
    _, a, _ = run(capsys, "count", "--model", str(cfg), "--rho", "2^-30")
    _, b, _ = run(capsys, "count", "--model", "mcmullen", "--rho", "2^-30")
    assert json.loads(a)["result"] == json.loads(b)["result"]


def test_decimal_rho_refused(capsys):
    code, _, err = run(capsys, "count", "--model", "mcmullen", "--rho", "0.001")
    assert code == 2
    assert "2^-" in err


def test_resource_guard_exit_code(capsys, monkeypatch):
    monkeypatch.setenv("CANTORLAB_MAX_LEAVES", "100")
    code, _, _ = run(capsys, "count", "--model", "mcmullen", "--rho", "2^-200", "--method", "oracle")
    assert code == 4


def test_csv_slope_series(capsys):
    code, out, _ = run(capsys, "sweep", "--model", "mcmullen", "--k-min", "100", "--k-max", "300", "--k-step", "100", "--format", "csv")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "K,slope"
    assert [ln.split(",")[0] for ln in lines[1:]] == ["100", "200", "300"]


def test_csv_refused_for_non_series(capsys):
    code, _, _ = run(capsys, "--format", "csv", "bilip", "--model", "mcmullen", "--depth", "3")
    assert code == 2


def test_sweep_range_checked(capsys):
    code, _, _ = run(capsys, "sweep", "--model", "mcmullen", "--k-min", "500", "--k-max", "100")
    assert code == 2


def test_dims_theory_star(capsys):
    code, out, _ = run(capsys, "dims", "--model", "star")
    assert code == 0
    th = json.loads(out)["result"]["theory"]
    vals = [float(th[k]["value"]) for k in ("ldim", "hdim", "lbdim", "ubdim", "adim")]
    assert vals == sorted(vals)


def test_dims_empirical_symmetric(capsys, tmp_path):
    cfg = tmp_path / "third.json"
    cfg.write_text(json.dumps({"family": "symmetric", "c": {"kind": "constant", "params": {"value": "1/3"}}}))
    code, out, _ = run(capsys, "dims", "--model", str(cfg), "--mode", "both", "--schedule", "100,200,400", "--n-max", "500")
    assert code == 0
    res = json.loads(out)["result"]
    assert res["empirical"]["asymptotic"] is False
    assert abs(float(res["theory"]["hdim"]["value"]) - 0.6309297535714574) < 1e-12


def test_map_eval_and_inverse(capsys):
    code, out, _ = run(capsys, "map", "eval", "--model", "mcmullen", "--branch", "0", "--x", "1/3")
    assert code == 0
    enc = json.loads(out)["result"]["enclosure"]
    assert float(enc["lo"]) <= 1 / 384 <= float(enc["hi"])
    code, out, _ = run(capsys, "map", "eval", "--model", "mcmullen", "--branch", "0", "--x", "1/384", "--inverse")
    assert code == 0
    back = json.loads(out)["result"]["enclosure"]
    assert float(back["lo"]) <= 1 / 3 <= float(back["hi"])
    # Points in the gap have no preimage under branch 0.
    code, _, err = run(capsys, "map", "eval", "--model", "mcmullen", "--branch", "0", "--x", "1/3", "--inverse")
    assert code == 2 and "outside" in err


def test_map_sample_fat_cantor(capsys):
    code, out, _ = run(capsys, "map", "sample", "--model", "fat-cantor", "--coding", "0^12")
    assert code == 0
    enc = json.loads(out)["result"]["enclosure"]
    assert float(enc["lo"]) == 0.0


def test_out_file(tmp_path, capsys):
    dest = tmp_path / "r.json"
    code, out, _ = run(capsys, "count", "--model", "mcmullen", "--rho", "2^-10", "--out", str(dest))
    assert code == 0 and out == ""
    assert json.loads(dest.read_text())["result"]["count_decimal"]


def test_repro_lists_recipes(capsys):
    code, out, _ = run(capsys, "repro")
    assert code == 0
    assert set(json.loads(out)["result"]["recipes"]) == set(RECIPES)


def test_repro_unknown_recipe(capsys):
    code, _, _ = run(capsys, "repro", "nope")
    assert code == 2


def test_repro_fast_recipe(capsys):
    code, out, err = run(capsys, "repro", "fat-cantor")
    assert code == 0
    res = json.loads(out)["result"]
    assert res["bilip"]["status"] == "PASS"
    assert "elapsed_seconds" not in res
    assert "elapsed" in err


def test_console_script_entry_point():
    r = subprocess.run([sys.executable, "-m", "cantorlab.cli", "--version"], capture_output=True, text=True)
    assert r.returncode == 0
    assert r.stdout.strip() == __version__


@pytest.mark.parametrize("argv", [["count"], ["count", "--model", "mcmullen"], ["bilip", "--model", "mcmullen", "--depth", "-1"]])
def test_argument_errors_exit_two(argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2
