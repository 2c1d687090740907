"""
Fourier-grid Hamiltonian spectroscopy of one and two coupled rf SQUIDs.

Two backends solve the coupled problem:
  full2d  - dense eigensolve of the N^2 x N^2 grid Hamiltonian
  product - the Hamiltonian projected onto products of the lowest n_b
            single-SQUID eigenstates of each qubit
Both produce the same SpectroTable: energies, position and drive matrix
elements, per-well probabilities and the computational-state map.
"""

import logging
from functools import lru_cache
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import ValidationError
from scipy.linalg import LinAlgError, eigh

from .constants import (
    BOUNDARY_TOLERANCE,
    DEFAULT_BASIS_SIZE,
    DEFAULT_GRID_POINTS,
    DEFAULT_STATES,
    DEFAULT_WINDOW,
    TWO_PI,
    WELL_LABELS,
    WELL_MARGIN_STEPS,
    WELL_THRESHOLD,
    WELL_TO_COMPUTATIONAL,
)
from .errors import (
    ComputationalBasisUndefined,
    EigensolverError,
    FourWellStructureLost,
    GridConfigurationError,
)
from .model import find_saddle, find_wells, potential_1d, potential_2d
from .schemas import FghGrid, ModelScales, SpectroTable, Spectrum1D, WellMinimum, WorkingParams

logger = logging.getLogger(__name__)

BACKENDS = ("product", "full2d")


# ── Grid ──────────────────────────────────────────────────────────────────────

def build_grid(
    window: Tuple[float, float] = DEFAULT_WINDOW,
    points: int = DEFAULT_GRID_POINTS,
    wells: Optional[List[WellMinimum]] = None,
) -> FghGrid:
    """
    Build a periodic Fourier grid over the coordinate window.

    Args:
        window: (a, b) in flux units
        points: N, at least 16 (a power of two is preferred)
        wells: if given, every well must lie at least 5 spacings inside [a, b]

    Raises:
        GridConfigurationError: on an empty window, too few points, or wells
            too close to the window edge
    """
    try:
        grid = FghGrid(lower=float(window[0]), upper=float(window[1]), points=int(points))
    except ValidationError as e:
        raise GridConfigurationError(f"Invalid grid {window} x {points}: {e.errors()[0]['msg']}") from e

    if points & (points - 1):
        logger.debug(f"Grid size {points} is not a power of two")
    if wells is not None:
        check_wells_inside(grid, wells)
    return grid


def check_wells_inside(grid: FghGrid, wells: List[WellMinimum]) -> None:
    margin = WELL_MARGIN_STEPS * grid.spacing
    for well in wells:
        for coordinate in (well.x1, well.x2):
            if not grid.lower + margin <= coordinate <= grid.upper - margin:
                raise GridConfigurationError(
                    f"Well {well.label} at {coordinate:.6f} is within {WELL_MARGIN_STEPS} grid steps "
                    f"of the window [{grid.lower}, {grid.upper}]"
                )


@lru_cache(maxsize=32)
def _kinetic_matrix(points: int, spacing: float, rho: float) -> np.ndarray:
    """Periodic Fourier-grid kinetic matrix -(1/2rho) d^2/dx^2."""
    k = TWO_PI * np.fft.fftfreq(points, d=spacing)
    columns = np.fft.fft(np.eye(points), axis=0)
    kinetic = np.fft.ifft((k ** 2)[:, None] * columns, axis=0).real / (2.0 * rho)
    kinetic = 0.5 * (kinetic + kinetic.T)
    kinetic.setflags(write=False)
    return kinetic


def fgh_hamiltonian_1d(s: ModelScales, x_e: float, g: FghGrid) -> np.ndarray:
    """Dense symmetric single-SQUID Hamiltonian on the grid (hbar*omega_LC)."""
    hamiltonian = np.array(_kinetic_matrix(g.points, g.spacing, s.rho))
    hamiltonian[np.diag_indices(g.points)] += potential_1d(g.coordinates, x_e, s)
    return hamiltonian


def _lowest_eigenpairs(hamiltonian: np.ndarray, count: int) -> Tuple[np.ndarray, np.ndarray]:
    try:
        energies, vectors = eigh(
            hamiltonian,
            subset_by_index=[0, count - 1],
            overwrite_a=True,
            check_finite=False,
        )
    except (LinAlgError, ValueError) as e:
        raise EigensolverError(f"Dense eigendecomposition failed: {e}") from e
    return energies, _fix_signs(vectors)


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude component of every column positive."""
    peaks = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[peaks, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def _boundary_amplitude(vectors: np.ndarray, points: int) -> float:
    """Largest component on the window edge (1D: (N, K); 2D: (N*N, K))."""
    if vectors.shape[0] == points:
        return float(np.max(np.abs(vectors[[0, -1], :])))
    cube = np.abs(vectors.reshape(points, points, -1))
    return float(max(cube[[0, -1], :, :].max(), cube[:, [0, -1], :].max()))


def solve_1d(s: ModelScales, x_e: float, g: FghGrid, K: int) -> Spectrum1D:
    """
    Lowest K eigenpairs of the single-SQUID Hamiltonian.

    Returns:
        Spectrum1D with wavefunctions normalized so sum(|psi|^2)*dx = 1 and
        position matrix elements <m|x|n>
    """
    if not 0 < K <= g.points:
        raise GridConfigurationError(f"Cannot retain {K} states on {g.points} grid points")
    energies, vectors = _lowest_eigenpairs(fgh_hamiltonian_1d(s, x_e, g), K)
    position = vectors.T @ (g.coordinates[:, None] * vectors)
    return Spectrum1D(
        x_e=x_e,
        grid=g,
        energies=energies,
        wavefunctions=vectors / np.sqrt(g.spacing),
        position=0.5 * (position + position.T),
    )


# ── Coupled qubits ────────────────────────────────────────────────────────────

def _quadrant_masks(g: FghGrid, saddle: Tuple[float, float]) -> Tuple[np.ndarray, np.ndarray]:
    x = g.coordinates
    return x < saddle[0], x < saddle[1]


def _solve_full2d(s: ModelScales, wp: WorkingParams, g: FghGrid, K: int, saddle):
    n = g.points
    x = g.coordinates
    kinetic = _kinetic_matrix(n, g.spacing, s.rho)
    identity = np.eye(n)

    logger.debug(f"full2d: assembling {n * n}x{n * n} Hamiltonian")
    hamiltonian = np.kron(kinetic, identity)
    hamiltonian += np.kron(identity, kinetic)
    x1, x2 = np.meshgrid(x, x, indexing="ij")
    hamiltonian[np.diag_indices(n * n)] += potential_2d(x1, x2, wp, s).ravel()

    energies, vectors = _lowest_eigenpairs(hamiltonian, K)
    del hamiltonian

    x1_flat, x2_flat = x1.ravel(), x2.ravel()
    op_x1 = vectors.T @ (x1_flat[:, None] * vectors)
    op_x2 = vectors.T @ (x2_flat[:, None] * vectors)

    low1, low2 = _quadrant_masks(g, saddle)
    density = vectors.reshape(n, n, K) ** 2
    weights = np.stack([
        density[np.ix_(low1, low2)].sum(axis=(0, 1)),
        density[np.ix_(low1, ~low2)].sum(axis=(0, 1)),
        density[np.ix_(~low1, low2)].sum(axis=(0, 1)),
        density[np.ix_(~low1, ~low2)].sum(axis=(0, 1)),
    ], axis=1)
    return energies, op_x1, op_x2, weights, _boundary_amplitude(vectors, n)


def _solve_product(
    s: ModelScales,
    wp: WorkingParams,
    g: FghGrid,
    K: int,
    saddle,
    basis_size: int,
    boundary_tolerance: float,
):
    nb = basis_size
    if K > nb * nb:
        raise GridConfigurationError(f"Cannot retain {K} states in a {nb}x{nb} product basis")
    first = solve_1d(s, wp.x_e1, g, nb)
    second = solve_1d(s, wp.x_e2, g, nb)

    basis_edge = max(
        _boundary_amplitude(first.wavefunctions * np.sqrt(g.spacing), g.points),
        _boundary_amplitude(second.wavefunctions * np.sqrt(g.spacing), g.points),
    )
    if basis_edge > boundary_tolerance:
        logger.warning(f"product basis: 1D state amplitude {basis_edge:.2e} at the window edge")

    identity = np.eye(nb)
    shifted1 = first.position - wp.x_e1 * identity
    shifted2 = second.position - wp.x_e2 * identity

    hamiltonian = np.diag(np.add.outer(first.energies, second.energies).ravel())
    hamiltonian += s.rho * wp.kappa * np.kron(shifted1, shifted2)

    energies, coefficients = _lowest_eigenpairs(hamiltonian, K)

    op_x1 = coefficients.T @ np.kron(first.position, identity) @ coefficients
    op_x2 = coefficients.T @ np.kron(identity, second.position) @ coefficients

    low1, low2 = _quadrant_masks(g, saddle)
    unit1 = first.wavefunctions * np.sqrt(g.spacing)
    unit2 = second.wavefunctions * np.sqrt(g.spacing)
    project1 = unit1[low1].T @ unit1[low1]
    project2 = unit2[low2].T @ unit2[low2]
    projectors = {
        "LL": np.kron(project1, project2),
        "LH": np.kron(project1, identity - project2),
        "HL": np.kron(identity - project1, project2),
        "HH": np.kron(identity - project1, identity - project2),
    }
    weights = np.stack(
        [np.einsum("ak,ab,bk->k", coefficients, projectors[label], coefficients) for label in WELL_LABELS],
        axis=1,
    )

    grid_vectors = np.einsum("ia,jb,abk->ijk", unit1, unit2, coefficients.reshape(nb, nb, K))
    edge = _boundary_amplitude(grid_vectors.reshape(g.points * g.points, K), g.points)
    return energies, op_x1, op_x2, weights, edge


def label_states(
    weights: np.ndarray,
    threshold: float = WELL_THRESHOLD,
) -> Tuple[List[Optional[str]], Optional[Dict[str, int]], Optional[str]]:
    """
    Dominant well per state and the computational map.

    The computational state of a well is the lowest eigenstate whose dominant
    well it is, provided its weight there reaches the threshold.
    """
    labels: List[Optional[str]] = []
    mapping: Dict[str, int] = {}
    for n, row in enumerate(weights):
        dominant = int(np.argmax(row))
        label = WELL_LABELS[dominant] if row[dominant] >= threshold else None
        labels.append(label)
        if label is not None and WELL_TO_COMPUTATIONAL[label] not in mapping:
            mapping[WELL_TO_COMPUTATIONAL[label]] = n

    missing = [c for c in WELL_TO_COMPUTATIONAL.values() if c not in mapping]
    if missing:
        return labels, None, (
            f"No eigenstate localized with weight >= {threshold} for computational state(s) {missing}"
        )
    return labels, dict(sorted(mapping.items())), None


def solve_coupled(
    s: ModelScales,
    wp: WorkingParams,
    g: FghGrid,
    K: int = DEFAULT_STATES,
    backend: str = "product",
    basis_size: int = DEFAULT_BASIS_SIZE,
    threshold: float = WELL_THRESHOLD,
    boundary_tolerance: float = BOUNDARY_TOLERANCE,
    require_basis: bool = True,
) -> SpectroTable:
    """
    Spectroscopic table of the coupled qubits at one working point.

    Args:
        s: Model scales
        wp: Working parameters
        g: Fourier grid (used per axis)
        K: Number of retained eigenstates
        backend: "product" (default, fast) or "full2d" (validation)
        basis_size: n_b single-SQUID states per qubit for the product backend
        threshold: Minimum well weight for a computational state
        boundary_tolerance: Maximum amplitude of retained states at the window edge
        require_basis: Raise if the computational map is undefined; otherwise
            return the table with computational=None and basis_error set

    Raises:
        FourWellStructureLost, GridConfigurationError, EigensolverError,
        ComputationalBasisUndefined
    """
    if backend not in BACKENDS:
        raise GridConfigurationError(f"Unknown backend {backend!r}; expected one of {BACKENDS}")

    structure_error = None
    try:
        wells = find_wells(wp, s, window=(g.lower, g.upper))
        check_wells_inside(g, wells)
        saddle = find_saddle(wp, s, [np.array([w.x1, w.x2]) for w in wells])
    except FourWellStructureLost as e:
        if require_basis:
            raise
        # Without four wells the quadrant split falls back to the bias point.
        structure_error = str(e)
        saddle = (wp.x_e1, wp.x_e2)

    if backend == "full2d":
        if K > g.points ** 2:
            raise GridConfigurationError(f"Cannot retain {K} states on a {g.points}^2 grid")
        energies, op_x1, op_x2, weights, edge = _solve_full2d(s, wp, g, K, saddle)
    else:
        energies, op_x1, op_x2, weights, edge = _solve_product(
            s, wp, g, K, saddle, basis_size, boundary_tolerance
        )

    if edge > boundary_tolerance:
        raise GridConfigurationError(
            f"Retained states reach the window edge (amplitude {edge:.2e} > {boundary_tolerance:.0e}); "
            f"widen the window [{g.lower}, {g.upper}]"
        )

    op_x1 = 0.5 * (op_x1 + op_x1.T)
    op_x2 = 0.5 * (op_x2 + op_x2.T)
    identity = np.eye(K)
    drive = s.rho * (op_x2 - wp.x_e2 * identity + wp.kappa * (op_x1 - wp.x_e1 * identity))

    labels, mapping, basis_error = label_states(weights, threshold)
    if structure_error is not None:
        mapping, basis_error = None, structure_error
    if mapping is None and require_basis:
        raise ComputationalBasisUndefined(f"{basis_error} at {wp}")

    return SpectroTable(
        working_params=wp,
        rho=s.rho,
        backend=backend,
        energies=energies,
        x1=op_x1,
        x2=op_x2,
        drive=drive,
        well_weights=weights,
        well_labels=labels,
        computational=mapping,
        basis_error=basis_error,
        saddle=saddle,
    )


SPACING_PAIRS = (("00", "01"), ("00", "10"), ("00", "11"), ("01", "10"), ("01", "11"), ("10", "11"))
SPACING_NAMES = ("12", "13", "14", "23", "24", "34")


def level_spacings(table: SpectroTable) -> Dict[str, float]:
    """|E_j - E_i| between computational states, keyed '12'..'34' (1=|00>, ..., 4=|11>)."""
    return {name: table.spacing(a, b) for name, (a, b) in zip(SPACING_NAMES, SPACING_PAIRS)}
