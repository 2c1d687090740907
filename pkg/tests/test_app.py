import csv
import hashlib
import json

import pytest

from app import main

from conftest import DEVICE_INI

pytestmark = pytest.mark.usefixtures("reset_logging")


def _write(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def test_unknown_subcommand():
    assert main(["flux-capacitor"]) == 1


def test_missing_config_file(tmp_path):
    assert main(["spectrum", "--config", str(tmp_path / "none.cfg"), "--out", str(tmp_path / "out")]) == 1


def test_invalid_config_key(tmp_path):
    config = _write(tmp_path, DEVICE_INI + "\n[grid]\npionts = 64\n")
    assert main(["spectrum", "--config", str(config), "--out", str(tmp_path / "out")]) == 1


def test_single_well_device_is_numeric_failure(tmp_path):
    config = _write(tmp_path, DEVICE_INI.replace("beta_l = 1.2", "beta_l = 0.8"))
    assert main(["evolve", "--config", str(config), "--out", str(tmp_path / "out")]) == 2


def test_spectrum_writes_outputs(tmp_path):
    config = _write(tmp_path, DEVICE_INI + "\n[sweep]\nx_e2 = 0.49985\n")
    out = tmp_path / "out"
    assert main(["spectrum", "--config", str(config), "--out", str(out), "--threads", "1"]) == 0

    for name in ("spectrum.csv", "drive.csv", "spectrum.txt", "config.normalized.cfg", "squidleak.log"):
        assert (out / name).is_file(), name

    envelope = json.loads((out / "spectrum.envelope.json").read_text(encoding="utf-8"))
    normalized = (out / "config.normalized.cfg").read_text(encoding="utf-8")
    assert envelope["config"] == normalized
    assert envelope["config_hash"] == hashlib.sha256(normalized.encode("utf-8")).hexdigest()
    assert envelope["payload"] == ["spectrum.csv", "drive.csv", "spectrum.txt"]

    with open(out / "spectrum.csv", encoding="utf-8", newline="") as f:
        rows = list(csv.reader(f))
    assert rows[0][:4] == ["n", "energy", "well", "computational"]
    assert len(rows) == 21


def test_ita_map_is_reproducible(tmp_path):
    config = _write(tmp_path, DEVICE_INI + "\n[sweep]\naxes = kappa:4e-4:6e-4:2\n")
    first, second = tmp_path / "first", tmp_path / "second"
    assert main(["ita-map", "--config", str(config), "--out", str(first), "--threads", "1"]) == 0
    assert main(["ita-map", "--config", str(config), "--out", str(second), "--threads", "1"]) == 0

    content = (first / "ita_map.csv").read_bytes()
    assert content == (second / "ita_map.csv").read_bytes()
    lines = content.decode("utf-8").splitlines()
    assert lines[0] == "x_e1,x_e2,kappa,eta,eta_00,eta_01,eta_10,eta_11,flag"
    assert len(lines) == 3
    envelope = json.loads((first / "ita-map.envelope.json").read_text(encoding="utf-8"))
    assert envelope["method"] == "ITA"


def test_levels_map_columns(tmp_path):
    config = _write(tmp_path, DEVICE_INI + "\n[grid]\nstates = 6\n[sweep]\naxes = x_e2:0.4998:0.5002:3\n")
    out = tmp_path / "out"
    assert main(["levels-map", "--config", str(config), "--out", str(out), "--threads", "1"]) == 0
    header = (out / "levels.csv").read_text(encoding="utf-8").splitlines()[0]
    assert header == "x_e1,x_e2,kappa,E_1,E_2,E_3,E_4,E_5,E_6,dE12,dE13,dE14,dE23,dE24,dE34,flag"


def test_compare_requires_both_maps(tmp_path):
    config = _write(tmp_path, DEVICE_INI)
    assert main([
        "compare", "--config", str(config), "--out", str(tmp_path / "out"),
        "--ita-map", str(tmp_path / "ita_map.csv"),
    ]) == 1


def test_compare_from_existing_maps(tmp_path):
    header = "x_e1,x_e2,kappa,eta,eta_00,eta_01,eta_10,eta_11,flag\n"
    ita = tmp_path / "ita.csv"
    dm = tmp_path / "dm.csv"
    ita.write_text(header + "0.499,0.4985,0.0005,0.1,,,,,\n0.499,0.499,0.0005,0.2,,,,,\n0.499,0.4995,0.0005,0.3,,,,,\n")
    dm.write_text(header + "0.499,0.4985,0.0005,0.15,,,,,\n0.499,0.499,0.0005,0.25,,,,,\n0.499,0.4995,0.0005,0.5,,,,,\n")
    config = _write(tmp_path, DEVICE_INI)
    out = tmp_path / "out"
    assert main(["compare", "--config", str(config), "--out", str(out), "--ita-map", str(ita), "--dm-map", str(dm)]) == 0
    envelope = json.loads((out / "compare.envelope.json").read_text(encoding="utf-8"))
    assert envelope["summary"]["rank_correlation"] == pytest.approx(1.0)
    assert envelope["summary"]["ordering_agreement"] == 1.0
    assert (out / "comparison.txt").is_file()


@pytest.mark.slow
def test_evolve_traces(tmp_path):
    config = _write(tmp_path, DEVICE_INI + "\n[sweep]\nx_e2 = 0.49985\n[dm]\ninitial_state = 10\n")
    out = tmp_path / "out"
    assert main(["evolve", "--config", str(config), "--out", str(out), "--threads", "1"]) == 0
    header = (out / "trace.csv").read_text(encoding="utf-8").splitlines()[0]
    assert header == "tau," + ",".join(f"p_{n}" for n in range(1, 21))
    compact = (out / "trace_compact.csv").read_text(encoding="utf-8").splitlines()
    assert compact[0] == "tau,p_10,p_11"
    assert compact[1].startswith("0.0,1.0,0.0")
