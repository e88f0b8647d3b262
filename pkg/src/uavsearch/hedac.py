"""Coverage bookkeeping and the potential field that steers the search.

The field state tracks, per grid cell, the accumulated coverage (time
integral of the detection rate) and the density of still-undetected
targets, which decays as initial * exp(-coverage). Search accomplishment
is one minus the remaining probability mass.

Heading guidance comes from a screened-Poisson potential

    diffusion * laplacian(u) = damping * u - undetected

with zero normal derivative on the domain boundary, discretized with the
five-point stencil and mirrored ghost cells on the cell-centered grid.
The system (damping * I - diffusion * L) u = undetected is symmetric
positive definite and is solved iteratively (MINRES, which has a
monotone residual) to a relative-residual tolerance. Vehicles climb the
interpolated gradient of u.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import minres

from .domain import DensityGrid, GridSpec, bilinear_on_grid
from .errors import SolverError
from .sensing import (CameraModel, CameraPose, RecallTable, SensingParams,
                      detection_rate_footprint)
from .terrain import TerrainGrid


@dataclass(frozen=True)
class HedacParams:
    """Potential-field parameters.

    diffusion (m^2) sets how far influence spreads; damping (1/...) is
    the screening term that keeps the system definite. The screening
    length is sqrt(diffusion / damping).
    """

    diffusion: float = 1000.0
    damping: float = 1.0
    solver_tolerance: float = 1e-8
    max_iterations: int = 5000

    def __post_init__(self) -> None:
        if not self.diffusion > 0:
            raise SolverError("diffusion must be positive")
        if not self.damping > 0:
            raise SolverError("damping must be positive")
        if not 0 < self.solver_tolerance < 1:
            raise SolverError("solver_tolerance must be in (0, 1)")
        if self.max_iterations < 1:
            raise SolverError("max_iterations must be >= 1")


@dataclass
class FieldState:
    """Per-cell search state over the flight-domain grid."""

    grid: GridSpec
    initial: DensityGrid
    coverage: np.ndarray
    undetected: np.ndarray
    potential: np.ndarray

    @classmethod
    def from_density(cls, density: DensityGrid) -> "FieldState":
        return cls(
            grid=density.grid,
            initial=density,
            coverage=np.zeros(density.grid.shape),
            undetected=density.values.copy(),
            potential=np.zeros(density.grid.shape),
        )


def accumulate_coverage(state: FieldState, pose: CameraPose, camera: CameraModel,
                        grid: TerrainGrid, table: RecallTable,
                        params: SensingParams, dt: float) -> None:
    """Add dt seconds of sensing from a pose (rectangle rule).

    Coverage gains detection_rate * dt per visible cell; the undetected
    density is refreshed everywhere to keep undetected =
    initial * exp(-coverage) exact.
    """
    if dt < 0:
        raise ValueError("dt must be >= 0")
    rows, cols, rates = detection_rate_footprint(
        pose, camera, grid, table, params, state.grid)
    if rates.size:
        state.coverage[rows, cols] += rates * dt
    np.multiply(state.initial.values, np.exp(-state.coverage), out=state.undetected)


def accomplishment(state: FieldState) -> float:
    """Probability that a target of the initial density has been seen."""
    return 1.0 - float(state.undetected.sum()) * state.grid.cell_area


def neumann_laplacian(grid: GridSpec) -> sp.csr_matrix:
    """Five-point Laplacian with mirrored ghost cells, C-order flattened.

    Mirroring the ghost cell across each boundary face enforces a zero
    normal derivative there; the resulting matrix is symmetric negative
    semidefinite.
    """

    def second_difference(n: int) -> sp.csr_matrix:
        main = np.full(n, -2.0)
        main[0] = -1.0
        main[-1] = -1.0
        off = np.ones(n - 1)
        return sp.diags([off, main, off], [-1, 0, 1], format="csr")

    h2 = grid.cell_size ** 2
    tx = second_difference(grid.ncols)
    ty = second_difference(grid.nrows)
    ix = sp.identity(grid.ncols, format="csr")
    iy = sp.identity(grid.nrows, format="csr")
    return (sp.kron(iy, tx) + sp.kron(ty, ix)).tocsr() / h2


class PotentialSolver:
    """Reusable solver for the screened-Poisson potential.

    Assembles the sparse operator once and warm-starts each solve from
    the previous solution, which keeps per-step iteration counts low
    when the source changes slowly.
    """

    def __init__(self, grid: GridSpec, params: HedacParams):
        self.grid = grid
        self.params = params
        laplacian = neumann_laplacian(grid)
        n = grid.ncols * grid.nrows
        self.matrix = (params.damping * sp.identity(n, format="csr")
                       - params.diffusion * laplacian).tocsr()
        self._warm = np.zeros(n)
        # Gershgorin: eigenvalues lie in [damping, damping + 8 diffusion/h^2].
        # minres stops on ||r|| / (||A|| ||x|| + ||b||), which is weaker than
        # ||r||/||b|| by up to this condition bound, so scale rtol down by it
        # and verify the true residual afterwards.
        h2 = grid.cell_size ** 2
        self._condition_bound = 1.0 + 8.0 * params.diffusion / (params.damping * h2)

    def solve(self, source: np.ndarray, warm_start: bool = True) -> np.ndarray:
        """Solve to relative residual <= solver_tolerance or raise SolverError.

        The Krylov run is restarted from its last iterate with a tighter
        inner tolerance until the measured residual passes; each restart
        resumes from the previous residual, so the residual sequence
        stays non-increasing across the whole solve.
        """
        b = np.ravel(source, order="C")
        b_norm = float(np.linalg.norm(b))
        if b_norm == 0.0:
            self._warm = np.zeros_like(b)
            return np.zeros(self.grid.shape)
        x = self._warm if warm_start else None
        tol = self.params.solver_tolerance
        # The 0.1 covers the slack between the Gershgorin bound and the
        # norm estimate inside minres; measured first-call residuals
        # run 2-3x above tol with a factor of 0.5.
        inner_rtol = 0.1 * tol / (self._condition_bound + 1.0)
        residual = np.inf
        for _ in range(6):
            x, _ = minres(self.matrix, b, x0=x, rtol=max(inner_rtol, 1e-15),
                          maxiter=self.params.max_iterations)
            residual = float(np.linalg.norm(b - self.matrix @ x)) / b_norm
            if residual <= tol:
                self._warm = x.copy()
                return x.reshape(self.grid.shape)
            inner_rtol *= 1e-2
        raise SolverError(
            f"potential solve stalled: relative residual {residual:.3e} "
            f"(tolerance {tol:.1e})"
        )

    def refresh(self, state: FieldState) -> None:
        state.potential = self.solve(state.undetected)


def solve_potential(state: FieldState, params: HedacParams) -> np.ndarray:
    """One-shot potential solve; updates and returns state.potential."""
    solver = PotentialSolver(state.grid, params)
    state.potential = solver.solve(state.undetected, warm_start=False)
    return state.potential


def steering_gradient(state: FieldState, position) -> np.ndarray | None:
    """Unit ascent direction of the potential at an (x, y) position.

    The nodal gradient uses central differences (one-sided at the grid
    edge) and is interpolated bilinearly; positions in the outer
    half-cell ring clamp to the cell-center hull. Returns None when the
    gradient magnitude is below 1e-12, meaning the field is locally
    flat and the caller should hold its heading.
    """
    x, y = float(position[0]), float(position[1])
    if not bool(state.grid.contains(x, y)):
        raise SolverError(
            f"steering query ({x:g}, {y:g}) outside flight domain {state.grid.rect}")
    grad_y, grad_x = np.gradient(state.potential, state.grid.cell_size)
    gx = bilinear_on_grid(state.grid, grad_x, x, y)
    gy = bilinear_on_grid(state.grid, grad_y, x, y)
    norm = float(np.hypot(gx, gy))
    if norm < 1e-12:
        return None
    return np.array([gx / norm, gy / norm])
