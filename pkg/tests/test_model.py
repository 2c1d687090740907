import logging
import math

import numpy as np
import pytest
from pydantic import ValidationError

from squid.constants import FLUX_QUANTUM, TWO_PI
from squid.errors import FourWellStructureLost, InvalidParameterError
from squid.model import check_bias_window, derive_scales, find_wells, potential_1d, potential_2d
from squid.schemas import DeviceParams, ModelScales, WorkingParams

from conftest import POINT_A


# ── derive_scales ─────────────────────────────────────────────────────────────

def test_derive_scales_reference_device(scales):
    assert scales.omega_lc == pytest.approx(5e11, rel=1e-12)
    assert scales.rho == pytest.approx(810.9, abs=0.1)
    assert scales.ej == pytest.approx(24.65, abs=0.01)
    assert scales.ej == pytest.approx(scales.rho * 1.2 / (4 * math.pi ** 2), rel=1e-14)


def test_derive_scales_rejects_nonpositive_inductance():
    dp = DeviceParams.model_construct(inductance=-1e-12, capacitance=40e-15, beta_l=1.2)
    with pytest.raises(InvalidParameterError):
        derive_scales(dp)


def test_device_params_reject_negative_values():
    with pytest.raises(ValidationError):
        DeviceParams(inductance=-1e-12, capacitance=40e-15, beta_l=1.2)


def test_beta_from_critical_current():
    current = 1.2 * FLUX_QUANTUM / (TWO_PI * 100e-12)
    dp = DeviceParams(inductance=100e-12, capacitance=40e-15, critical_current=current)
    assert dp.beta_l == pytest.approx(1.2, rel=1e-12)


def test_inconsistent_beta_and_critical_current():
    with pytest.raises(ValidationError, match="inconsistent"):
        DeviceParams(inductance=100e-12, capacitance=40e-15, beta_l=1.2, critical_current=1e-6)


def test_single_well_device_warns(caplog):
    with caplog.at_level(logging.WARNING):
        DeviceParams(inductance=100e-12, capacitance=40e-15, beta_l=0.8)
    assert "no double well" in caplog.text


# ── potentials ────────────────────────────────────────────────────────────────

def test_potential_1d_at_bias_point(scales):
    assert potential_1d(0.5, 0.5, scales) == pytest.approx(scales.ej, rel=1e-14)


def test_potential_1d_harmonic_limit():
    harmonic = ModelScales.dimensionless(rho=800.0, beta_l=0.0)
    assert potential_1d(0.6, 0.5, harmonic) == pytest.approx(4.0, rel=1e-12)


def test_symmetric_double_well(scales):
    x = np.linspace(0.0, 1.0, 20001)
    u = potential_1d(x, 0.5, scales)
    interior = np.nonzero((u[1:-1] < u[:-2]) & (u[1:-1] < u[2:]))[0] + 1
    assert len(interior) == 2
    left, right = x[interior]
    assert left + right == pytest.approx(1.0, abs=1e-4)
    assert u[interior[0]] == pytest.approx(u[interior[1]], abs=1e-9)


def test_potential_2d_separates_without_coupling(scales):
    wp = WorkingParams(x_e1=0.499, x_e2=0.501, kappa=0.0)
    x1, x2 = 0.37, 0.64
    expected = potential_1d(x1, wp.x_e1, scales) + potential_1d(x2, wp.x_e2, scales)
    assert potential_2d(x1, x2, wp, scales) == expected


def test_coupling_vanishes_at_bias_point(scales):
    wp = WorkingParams(x_e1=0.499, x_e2=0.501, kappa=0.3)
    uncoupled = wp.replace(kappa=0.0)
    assert potential_2d(0.499, 0.2, wp, scales) == potential_2d(0.499, 0.2, uncoupled, scales)


def test_potential_reflection_symmetry(scales):
    rng = np.random.default_rng(7)
    wp = WorkingParams(x_e1=0.4993, x_e2=0.5004, kappa=2e-3)
    x1, x2 = rng.uniform(0.1, 0.9, size=(2, 200))
    direct = potential_2d(x1, x2, wp, scales)
    mirrored = potential_2d(1.0 - x1, 1.0 - x2, wp.reflected(), scales)
    np.testing.assert_allclose(direct, mirrored, rtol=0, atol=1e-11)


def test_potential_swap_symmetry(scales):
    rng = np.random.default_rng(11)
    wp = WorkingParams(x_e1=0.499, x_e2=0.502, kappa=1e-3)
    x1, x2 = rng.uniform(0.1, 0.9, size=(2, 200))
    np.testing.assert_allclose(
        potential_2d(x1, x2, wp, scales),
        potential_2d(x2, x1, wp.swapped(), scales),
        rtol=1e-12,
    )


def test_kappa_must_be_physical():
    with pytest.raises(ValidationError):
        WorkingParams(x_e1=0.5, x_e2=0.5, kappa=1.0)


# ── find_wells ────────────────────────────────────────────────────────────────

def test_four_degenerate_wells_at_symmetry_point(scales):
    wells = find_wells(WorkingParams(x_e1=0.5, x_e2=0.5, kappa=0.0), scales)
    assert [w.label for w in wells] == ["LL", "LH", "HL", "HH"]
    energies = [w.energy for w in wells]
    assert max(energies) - min(energies) < 1e-9
    offsets = [abs(w.x1 - 0.5) for w in wells] + [abs(w.x2 - 0.5) for w in wells]
    assert max(offsets) - min(offsets) < 1e-7


def test_wells_follow_quadrants(scales):
    wells = {w.label: w for w in find_wells(POINT_A, scales)}
    assert wells["LL"].x1 < 0.5 and wells["LL"].x2 < 0.5
    assert wells["LH"].x1 < 0.5 and wells["LH"].x2 > 0.5
    assert wells["HL"].x1 > 0.5 and wells["HL"].x2 < 0.5
    assert wells["HH"].x1 > 0.5 and wells["HH"].x2 > 0.5


def test_reflection_maps_wells(scales):
    wp = WorkingParams(x_e1=0.499, x_e2=0.4995, kappa=1e-3)
    direct = {w.label: w for w in find_wells(wp, scales)}
    mirrored = {w.label: w for w in find_wells(wp.reflected(), scales)}
    opposite = {"LL": "HH", "LH": "HL", "HL": "LH", "HH": "LL"}
    for label, well in direct.items():
        image = mirrored[opposite[label]]
        assert image.x1 == pytest.approx(1.0 - well.x1, abs=1e-6)
        assert image.x2 == pytest.approx(1.0 - well.x2, abs=1e-6)
        assert image.energy == pytest.approx(well.energy, abs=1e-8)


def test_single_well_device_loses_structure():
    scales = derive_scales(DeviceParams(inductance=100e-12, capacitance=40e-15, beta_l=0.5))
    with pytest.raises(FourWellStructureLost) as excinfo:
        find_wells(WorkingParams(x_e1=0.5, x_e2=0.5, kappa=0.0), scales)
    assert excinfo.value.flag == "four_well_lost"


def test_bias_window():
    check_bias_window(POINT_A)
    with pytest.raises(InvalidParameterError, match="x_e2"):
        check_bias_window(WorkingParams(x_e1=0.5, x_e2=0.52, kappa=0.0))
