"""
Physical constants (CODATA 2018) and numerical defaults shared across modules.
"""

import math

# SI constants
FLUX_QUANTUM = 2.067833848e-15      # Wb, h / 2e
HBAR = 1.054571817e-34              # J s

TWO_PI = 2.0 * math.pi
FOUR_PI_SQUARED = 4.0 * math.pi ** 2

# Coordinate window, bias window and grid defaults (flux in units of Phi_0)
DEFAULT_WINDOW = (0.0, 1.0)
DEFAULT_GRID_POINTS = 64
MIN_GRID_POINTS = 16
DEFAULT_STATES = 20
DEFAULT_BASIS_SIZE = 10
DEFAULT_BIAS_WINDOW = (0.49, 0.51)
WELL_MARGIN_STEPS = 5
BOUNDARY_TOLERANCE = 1e-10

# Well search
WELL_SEED_POINTS = 64
WELL_DEDUP_DISTANCE = 1e-4
WELL_THRESHOLD = 0.5

# Drive and leakage
DEFAULT_AMPLITUDE = 2e-4
MAX_PHOTONS = 3
WEAK_FIELD_RATIO = 0.1
RESONANCE_EPSILON = 1e-12
MIN_COUPLING = 1e-12

# Dynamics
DEFAULT_STEP_DIVISOR = 64
DEFAULT_MAX_REFINEMENTS = 4
NORM_DRIFT_TOLERANCE = 1e-8
STEP_HALVING_TOLERANCE = 1e-6
DEFAULT_MAX_DURATION = 1e6
TRUNCATION_TOLERANCE = 1e-4

# Computational basis, qubit 1 (control) first, 0 = low-flux well
COMPUTATIONAL_LABELS = ("00", "01", "10", "11")
WELL_LABELS = ("LL", "LH", "HL", "HH")
WELL_TO_COMPUTATIONAL = {"LL": "00", "LH": "01", "HL": "10", "HH": "11"}
CNOT_PARTNER = {"10": "11", "11": "10"}
