import hashlib
from pathlib import Path

import pytest

from squid.errors import ConfigurationError
from util.config import config_hash, emit_config, parse_config, parse_text

from conftest import DEVICE_INI

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def test_minimal_config_gets_defaults():
    config = parse_text(DEVICE_INI)
    assert config.grid.points == 64
    assert config.grid.states == 20
    assert config.grid.backend == "product"
    assert config.drive.amplitude == 2e-4
    assert config.drive.photon_aggregation == "max"
    assert config.grid.window == (0.0, 1.0)
    assert config.sweep.axes == []
    assert config.working_params().x_e1 == 0.499


def test_unknown_section_is_named():
    with pytest.raises(ConfigurationError, match="devics"):
        parse_text(DEVICE_INI + "\n[devics]\nfoo = 1\n")


def test_unknown_key_is_named():
    with pytest.raises(ConfigurationError, match="grid.pionts"):
        parse_text(DEVICE_INI + "\n[grid]\npionts = 64\n")


def test_missing_device_section():
    with pytest.raises(ConfigurationError, match="device"):
        parse_text("[grid]\npoints = 64\n")


def test_inconsistent_critical_current():
    text = DEVICE_INI + "critical_current = 1e-6\n"
    with pytest.raises(ConfigurationError, match="inconsistent"):
        parse_text(text)


def test_bias_outside_window():
    with pytest.raises(ConfigurationError, match="x_e2"):
        parse_text(DEVICE_INI + "\n[sweep]\nx_e2 = 0.52\n")


def test_axis_outside_window():
    with pytest.raises(ConfigurationError, match="bias window"):
        parse_text(DEVICE_INI + "\n[sweep]\naxes = x_e2:0.48:0.5:5\n")


def test_axes_parsing():
    config = parse_text(DEVICE_INI + "\n[sweep]\naxes = x_e2:0.4985:0.5005:20, kappa:1e-4:2e-3:20\n")
    first, second = config.sweep.axes
    assert (first.name, first.minimum, first.maximum, first.count) == ("x_e2", 0.4985, 0.5005, 20)
    assert (second.name, second.count) == ("kappa", 20)
    spec = config.sweep_spec()
    assert len(spec.working_points()) == 400
    assert spec.amplitude == config.drive.amplitude


@pytest.mark.parametrize("axes", [
    "x_e2:0.49:0.5",
    "flux:0.49:0.5:3",
    "x_e2:0.5:0.49:3",
    "x_e2:0.49:0.5:3, x_e2:0.49:0.5:4",
])
def test_bad_axes(axes):
    with pytest.raises(ConfigurationError):
        parse_text(DEVICE_INI + f"\n[sweep]\naxes = {axes}\n")


def test_grid_too_small():
    with pytest.raises(ConfigurationError, match="grid.points"):
        parse_text(DEVICE_INI + "\n[grid]\npoints = 8\n")


def test_missing_file(tmp_path):
    with pytest.raises(ConfigurationError, match="not found"):
        parse_config(tmp_path / "missing.cfg")


def test_normalized_echo_is_fixed_point():
    config = parse_text(DEVICE_INI + "\n[sweep]\naxes = kappa:1e-4:2e-3:20\n[output]\nprecision = 8\n")
    echo = emit_config(config)
    again = parse_text(echo)
    assert again == config
    assert emit_config(again) == echo


def test_config_hash_matches_echo():
    config = parse_text(DEVICE_INI)
    digest = config_hash(config)
    assert digest == hashlib.sha256(emit_config(config).encode("utf-8")).hexdigest()
    assert len(digest) == 64
    assert config_hash(parse_text(DEVICE_INI + "\n[drive]\namplitude = 3e-4\n")) != digest


def test_backend_override():
    config = parse_text(DEVICE_INI)
    assert config.with_backend("full2d").grid.backend == "full2d"
    assert config.with_backend(None) is config


@pytest.mark.parametrize("name", [
    "paper_fig1.cfg",
    "paper_fig1_kappa.cfg",
    "paper_fig2.cfg",
    "paper_fig2_dm.cfg",
    "paper_fig2c.cfg",
    "paper_fig2d.cfg",
    "pointA.cfg",
    "pointB.cfg",
])
def test_reference_configs_parse(name):
    config = parse_config(CONFIG_DIR / name)
    assert config.device_params().beta_l == 1.2
    assert config.working_params().x_e1 == 0.499
