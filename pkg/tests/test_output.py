import hashlib
import json

import numpy as np
import pytest

from squid.errors import ConfigurationError
from squid.schemas import (
    ComponentLeakage,
    FidelityReport,
    GateLeakage,
    LeakageMap,
    LeakagePoint,
    MapComparison,
    WorkingParams,
)
from util.config import config_hash, emit_config, parse_text
from util.output import (
    MAP_HEADER,
    ResultEnvelope,
    emit_csv,
    format_value,
    map_rows,
    read_map_csv,
    write_envelope,
)
from util.reports import render_text, report_comparison, report_fidelity, report_leakage

from conftest import DEVICE_INI


def _map():
    points = [
        LeakagePoint(
            working_params=WorkingParams(x_e1=0.499, x_e2=0.4985, kappa=1e-4),
            eta=0.1 + 0.2,
            components={"00": 1e-3, "01": 2e-3, "10": 0.3, "11": 0.25},
        ),
        LeakagePoint(
            working_params=WorkingParams(x_e1=0.499, x_e2=0.4995, kappa=1e-4),
            eta=1.0,
            flag="basis_undefined",
        ),
    ]
    return LeakageMap(axes=[], points=points, method="ITA", amplitude=2e-4)


def test_format_value():
    assert format_value(0.5) == "0.5"
    assert format_value(0.1 + 0.2) == "0.30000000000000004"
    assert format_value(0.1 + 0.2, 6) == "0.3"
    assert format_value(np.float64(2e-4)) == "0.0002"
    assert format_value(3) == "3"
    assert format_value(True) == "true"
    assert format_value(None) == ""


def test_empty_map_writes_header_only(tmp_path):
    path = emit_csv(MAP_HEADER, [], tmp_path / "empty.csv")
    assert path.read_bytes() == b"x_e1,x_e2,kappa,eta,eta_00,eta_01,eta_10,eta_11,flag\n"


def test_map_rows_layout(tmp_path):
    path = emit_csv(MAP_HEADER, map_rows(_map()), tmp_path / "map.csv")
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[1] == "0.499,0.4985,0.0001,0.30000000000000004,0.001,0.002,0.3,0.25,"
    assert lines[2] == "0.499,0.4995,0.0001,1.0,,,,,basis_undefined"


def test_csv_output_is_deterministic(tmp_path):
    first = emit_csv(MAP_HEADER, map_rows(_map()), tmp_path / "a.csv")
    second = emit_csv(MAP_HEADER, map_rows(_map()), tmp_path / "b.csv")
    assert first.read_bytes() == second.read_bytes()


def test_row_length_mismatch(tmp_path):
    with pytest.raises(ConfigurationError, match="row 0"):
        emit_csv(["a", "b"], [[1]], tmp_path / "bad.csv")


def test_read_map_csv(tmp_path):
    path = emit_csv(MAP_HEADER, map_rows(_map()), tmp_path / "map.csv")
    loaded = read_map_csv(path, "DM", 2e-4)
    assert loaded.method == "DM"
    assert [p.working_params for p in loaded.points] == [p.working_params for p in _map().points]
    assert loaded.points[0].eta == 0.1 + 0.2
    assert loaded.points[1].flag == "basis_undefined"
    assert loaded.points[1].components == {}


def test_read_map_csv_rejects_other_files(tmp_path):
    path = emit_csv(["tau", "p_1"], [[0.0, 1.0]], tmp_path / "trace.csv")
    with pytest.raises(ConfigurationError, match="header"):
        read_map_csv(path, "ITA", 2e-4)
    with pytest.raises(ConfigurationError, match="not found"):
        read_map_csv(tmp_path / "none.csv", "ITA", 2e-4)


def test_envelope_records_config_hash(tmp_path):
    config = parse_text(DEVICE_INI)
    echo = emit_config(config)
    path = write_envelope(tmp_path, ResultEnvelope(
        command="ita-map",
        method="ITA",
        config_hash=config_hash(config),
        config=echo,
        wall_time=1.5,
        payload=["ita_map.csv"],
    ))
    assert path.name == "ita-map.envelope.json"
    envelope = json.loads(path.read_text(encoding="utf-8"))
    assert envelope["config_hash"] == hashlib.sha256(envelope["config"].encode("utf-8")).hexdigest()
    assert envelope["payload"] == ["ita_map.csv"]


def test_fidelity_report_text():
    report = FidelityReport(
        fidelity=0.9997,
        raw_fidelity=0.61,
        subspace_matrix=np.eye(4),
        phases=[0.0, 0.1, 0.2],
        subspace_leakage={"00": 0.0, "01": 0.0, "10": 1e-4, "11": 2e-4},
        duration=15707.96,
    )
    text = render_text(report_fidelity(report))
    assert "CNOT fidelity" in text
    assert "0.999700" in text
    assert "|10>" in text


def test_leakage_report_text():
    components = {
        label: ComponentLeakage(component=label, eta=eta, breakdown={4: eta}, dominant_channel=4)
        for label, eta in (("00", 1e-5), ("01", 2e-5), ("10", 3e-4), ("11", 1e-4))
    }
    text = render_text(report_leakage(GateLeakage(eta=3e-4, components=components, method="ITA")))
    assert "3.000000e-04" in text
    assert "ITA gate leakage" in text


def test_degenerate_comparison_text():
    comparison = MapComparison(points=1, ita=[0.1], dm=[0.2], degenerate=True)
    assert "undefined" in render_text(report_comparison(comparison))
