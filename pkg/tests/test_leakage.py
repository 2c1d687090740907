import logging

import numpy as np
import pytest

from squid.constants import COMPUTATIONAL_LABELS
from squid.leakage import (
    bessel_rabi_factor,
    cnot_drive,
    component_leakage,
    gate_leakage,
    transition_probability,
    undesired_states,
    weak_field_ratio,
)
from squid.schemas import DrivePulse, WorkingParams
from squid.spectro import solve_coupled

from conftest import synthetic_table


# ── Bessel factor ─────────────────────────────────────────────────────────────

def test_bessel_factor_small_argument_limits():
    assert bessel_rabi_factor(1, 0.0) == 0.5
    assert bessel_rabi_factor(2, 0.0) == 0.0
    assert bessel_rabi_factor(3, 0.0) == 0.0


def test_bessel_factor_value():
    # J_1(1) = 0.44005058574...
    assert bessel_rabi_factor(1, 1.0) == pytest.approx(0.4400505857, abs=1e-9)


def test_bessel_factor_continuous_at_series_switch():
    for N in (1, 2, 3):
        below = bessel_rabi_factor(N, 1e-8 * (1 - 1e-6))
        above = bessel_rabi_factor(N, 1e-8 * (1 + 1e-6))
        assert below == pytest.approx(above, abs=1e-12)


def test_bessel_factor_rejects_zero_photons():
    with pytest.raises(ValueError):
        bessel_rabi_factor(0, 0.1)


# ── two-level probabilities ───────────────────────────────────────────────────

def _pulse(frequency, amplitude=1e-3, duration=1.0):
    return DrivePulse(amplitude=amplitude, frequency=frequency, duration=duration)


def test_resonant_transition_is_complete(two_level):
    record = transition_probability(two_level, _pulse(1.0), 0, 1, 1)
    assert record.probability == 1.0
    assert record.rabi == pytest.approx(1e-3)
    assert record.bessel_argument == 0.0


def test_detuning_equal_to_rabi_gives_half(two_level):
    record = transition_probability(two_level, _pulse(1.0 - 1e-3), 0, 1, 1)
    assert record.probability == pytest.approx(0.5, abs=1e-9)


def test_probability_falls_with_detuning(two_level):
    probabilities = [
        transition_probability(two_level, _pulse(1.0 - d), 0, 1, 1).probability
        for d in (0.0, 5e-4, 1e-3, 3e-3, 1e-2)
    ]
    assert all(0.0 <= p <= 1.0 for p in probabilities)
    assert probabilities == sorted(probabilities, reverse=True)


def test_forbidden_transition_without_coupling():
    table = synthetic_table([0.0, 1.0], np.zeros((2, 2)))
    record = transition_probability(table, _pulse(1.0), 0, 1, 1)
    assert record.probability == 0.0


def test_two_photon_process_needs_diagonal_drive(two_level):
    record = transition_probability(two_level, _pulse(0.5), 0, 1, 2)
    assert record.rabi == 0.0
    assert record.probability == 0.0

    asymmetric = synthetic_table([0.0, 1.0], [[0.0, 1.0], [1.0, 50.0]])
    record = transition_probability(asymmetric, _pulse(0.5), 0, 1, 2)
    assert record.detuning == pytest.approx(0.0, abs=1e-15)
    assert record.probability == pytest.approx(1.0)


def test_probability_ignores_pulse_duration(two_level):
    short = transition_probability(two_level, _pulse(0.999, duration=1.0), 0, 1, 1)
    long = transition_probability(two_level, _pulse(0.999, duration=1e5), 0, 1, 1)
    assert short.probability == long.probability


def test_same_state_transition_rejected(two_level):
    with pytest.raises(ValueError):
        transition_probability(two_level, _pulse(1.0), 0, 0, 1)


# ── component and gate leakage ────────────────────────────────────────────────

def _leaky_device():
    """cnot_device plus weak couplings out of the computational subspace."""
    drive = np.zeros((5, 5))
    drive[2, 3] = drive[3, 2] = 1.0
    drive[0, 4] = drive[4, 0] = 0.2
    drive[3, 4] = drive[4, 3] = 0.5
    drive[0, 1] = drive[1, 0] = 0.1
    return synthetic_table(
        [0.0, 0.3, 1.0, 1.5, 2.1],
        drive,
        computational={"00": 0, "01": 1, "10": 2, "11": 3},
    )


def test_undesired_states(cnot_device):
    assert undesired_states(cnot_device, "00") == [1, 2, 3, 4]
    assert undesired_states(cnot_device, "10") == [0, 1, 4]
    assert undesired_states(cnot_device, "11") == [0, 1, 4]


def test_component_leakage_sums_undesired_channels():
    table = _leaky_device()
    pulse = cnot_drive(table, 1e-3)
    component = component_leakage(table, pulse, "11")
    expected = {
        k: max(transition_probability(table, pulse, 3, k, N).probability for N in (1, 2, 3))
        for k in (0, 1, 4)
    }
    assert component.breakdown == pytest.approx(expected)
    assert component.eta == pytest.approx(sum(expected.values()))
    assert component.dominant_channel == max(expected, key=expected.get)


def test_gate_leakage_is_worst_component():
    table = _leaky_device()
    result = gate_leakage(table, cnot_drive(table, 1e-3))
    assert result.method == "ITA"
    assert set(result.components) == set(COMPUTATIONAL_LABELS)
    assert result.eta == max(c.eta for c in result.components.values())


def test_sum_aggregation_not_below_max():
    table = _leaky_device()
    pulse = cnot_drive(table, 1e-3)
    by_max = gate_leakage(table, pulse, aggregation="max")
    by_sum = gate_leakage(table, pulse, aggregation="sum")
    for label in COMPUTATIONAL_LABELS:
        assert by_sum.components[label].eta >= by_max.components[label].eta


def test_ideal_cnot_device_has_no_leakage(cnot_device):
    result = gate_leakage(cnot_device, cnot_drive(cnot_device, 2e-4))
    assert result.eta == 0.0


def test_leakage_vanishes_with_amplitude():
    table = _leaky_device()
    etas = [gate_leakage(table, cnot_drive(table, a)).eta for a in (1e-3, 1e-5, 1e-8)]
    assert etas[0] > etas[1] > etas[2]
    assert etas[2] < 1e-9


def test_weak_field_warning(caplog):
    table = _leaky_device()
    pulse = cnot_drive(table, 1e-3)
    assert weak_field_ratio(table, pulse) == pytest.approx(1e-3 * 1.0 / 0.5)
    with caplog.at_level(logging.WARNING):
        gate_leakage(table, cnot_drive(table, 0.2))
    assert "weak-field" in caplog.text


# ── point A ───────────────────────────────────────────────────────────────────

def test_cnot_transition_resonant_at_point_a(table_a):
    pulse = cnot_drive(table_a, 2e-4)
    record = transition_probability(table_a, pulse, table_a.index("10"), table_a.index("11"), 1)
    assert record.probability == 1.0


def test_point_a_leakage_is_bounded(table_a):
    result = gate_leakage(table_a, cnot_drive(table_a, 2e-4))
    assert 0.0 <= result.eta
    for component in result.components.values():
        assert all(0.0 <= p <= 1.0 for p in component.breakdown.values())


def test_transition_probabilities_reflection_invariant(scales, grid):
    wp = WorkingParams(x_e1=0.499, x_e2=0.4995, kappa=5e-4)
    direct = solve_coupled(scales, wp, grid, 10, require_basis=False)
    mirrored = solve_coupled(scales, wp.reflected(), grid, 10, require_basis=False)
    pulse = _pulse(float(direct.energies[2] - direct.energies[0]), amplitude=2e-4)
    for i in range(8):
        for j in range(i + 1, 8):
            for N in (1, 2, 3):
                p = transition_probability(direct, pulse, i, j, N).probability
                q = transition_probability(mirrored, pulse, i, j, N).probability
                assert q == pytest.approx(p, abs=1e-6)
