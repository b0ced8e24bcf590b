import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import StrEnum
from typing import Callable

import numpy as np
from django.conf import settings

from phsid.core.exceptions import (
    DimensionMismatchError,
    UnsupportedDirectionError,
)
from phsid.core.integrators import dynamics_matrix, euler_steps
from phsid.core.matrices import PSDMatrix, SkewSymmetricMatrix, SymmetricMatrix
from phsid.core.quadrature import left_endpoint
from phsid.core.systems import ReducedPHSystem, Signal, TimeGrid, Trajectory

logger = logging.getLogger(__name__)


class Structure(StrEnum):
    FULL = "full"
    DIAGONAL_R = "diagonal_R"


@dataclass(frozen=True, eq=False)
class TangentDirection:
    h_J: SkewSymmetricMatrix
    h_R: SymmetricMatrix
    h_x: np.ndarray

    __array_ufunc__ = None

    @property
    def n(self) -> int:
        return self.h_J.n

    @classmethod
    def zeros(cls, n: int) -> "TangentDirection":
        return cls(SkewSymmetricMatrix.zeros(n), SymmetricMatrix.zeros(n), np.zeros(n))

    def blocks(self) -> list[str]:
        """Names of the nonzero blocks."""
        nonzero = []
        if np.any(self.h_J.entries):
            nonzero.append("J")
        if np.any(self.h_R.entries):
            nonzero.append("R")
        if np.any(self.h_x):
            nonzero.append("x")
        return nonzero

    def __add__(self, other: "TangentDirection") -> "TangentDirection":
        return TangentDirection(
            self.h_J + other.h_J, self.h_R + other.h_R, self.h_x + other.h_x
        )

    def __mul__(self, alpha: float) -> "TangentDirection":
        return TangentDirection(alpha * self.h_J, alpha * self.h_R, alpha * self.h_x)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class ParameterPoint:
    """An admissible point (J, R, w_hat): J skew, R positive semidefinite."""

    J: SkewSymmetricMatrix
    R: PSDMatrix
    w_hat: np.ndarray

    def __post_init__(self):
        n = self.J.n
        if isinstance(self.R, SymmetricMatrix):
            object.__setattr__(self, "R", PSDMatrix(self.R))
        if self.R.n != n:
            raise DimensionMismatchError(f"R is {self.R.n}x{self.R.n}, J is {n}x{n}.")
        w_hat = np.asarray(self.w_hat, dtype=float).ravel()
        if w_hat.size != n:
            raise DimensionMismatchError(f"w_hat has length {w_hat.size}, n = {n}.")
        w_hat.setflags(write=False)
        object.__setattr__(self, "w_hat", w_hat)

    @property
    def n(self) -> int:
        return self.J.n

    @classmethod
    def from_system(cls, sys: ReducedPHSystem) -> "ParameterPoint":
        return cls(sys.J_t, sys.R_t, sys.w_hat)

    def system(self, B) -> ReducedPHSystem:
        return ReducedPHSystem(J_t=self.J, R_t=self.R, B_t=B, w_hat=self.w_hat)

    def trial_system(
        self, B, direction: TangentDirection, alpha: float
    ) -> ReducedPHSystem:
        """The system at v + alpha * direction, without the PSD check on R."""
        return ReducedPHSystem(
            J_t=self.J + alpha * direction.h_J,
            R_t=self.R.base + alpha * direction.h_R,
            B_t=B,
            w_hat=self.w_hat + alpha * direction.h_x,
        )


@dataclass(frozen=True)
class BasisSet:
    directions: tuple[TangentDirection, ...]
    structure: Structure
    labels: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.directions)

    def __iter__(self):
        return iter(self.directions)


@dataclass(frozen=True, eq=False)
class Gradient:
    value: TangentDirection
    coefficients: np.ndarray

    @property
    def norm_squared(self) -> float:
        return float(np.dot(self.coefficients, self.coefficients))


def tangent_basis(n: int, structure: Structure = Structure.FULL) -> BasisSet:
    """Skew directions, then symmetric (diagonal first), then coordinate vectors."""
    directions: list[TangentDirection] = []
    labels: list[str] = []
    zero_skew = SkewSymmetricMatrix.zeros(n)
    zero_sym = SymmetricMatrix.zeros(n)

    rows, cols = np.tril_indices(n, -1)
    for ell, (i, j) in enumerate(zip(rows, cols)):
        params = np.zeros(rows.size)
        params[ell] = 1.0
        skew = SkewSymmetricMatrix.from_lower(n, params)
        directions.append(TangentDirection(skew, zero_sym, np.zeros(n)))
        labels.append(f"J[{i},{j}]")

    for i in range(n):
        unit = np.zeros(n)
        unit[i] = 1.0
        directions.append(
            TangentDirection(zero_skew, SymmetricMatrix.diagonal(unit), np.zeros(n))
        )
        labels.append(f"R[{i},{i}]")

    if structure == Structure.FULL:
        for i, j in zip(rows, cols):
            pair = np.zeros((n, n))
            pair[i, j] = pair[j, i] = 1.0
            directions.append(
                TangentDirection(zero_skew, SymmetricMatrix.from_array(pair), np.zeros(n))
            )
            labels.append(f"R[{i},{j}]")

    for i in range(n):
        unit = np.zeros(n)
        unit[i] = 1.0
        directions.append(TangentDirection(zero_skew, zero_sym, unit))
        labels.append(f"x[{i}]")

    return BasisSet(tuple(directions), Structure(structure), tuple(labels))


def solve_sensitivity(
    sys: ReducedPHSystem, traj: Trajectory, h: TangentDirection, grid: TimeGrid
) -> Trajectory:
    """Forward sensitivity s = S'(v)h with the Euler stencil of the state.

    ds/dt - (J - R) s = h_J w   (J direction),  s(0) = 0
    ds/dt - (J - R) s = -h_R w  (R direction),  s(0) = 0
    ds/dt - (J - R) s = 0       (x direction),  s(0) = h_x
    """
    if traj.grid != grid:
        raise DimensionMismatchError("State trajectory lives on a different grid.")
    if traj.n != sys.n or h.n != sys.n:
        raise DimensionMismatchError("Direction, trajectory and system sizes differ.")

    blocks = h.blocks()
    if len(blocks) > 1:
        raise UnsupportedDirectionError(
            f"Direction mixes blocks {blocks}; only pure directions are supported."
        )

    s0 = np.zeros(sys.n)
    source = np.zeros_like(traj.states)
    if blocks == ["J"]:
        source = traj.states @ h.h_J.entries.T
    elif blocks == ["R"]:
        source = -(traj.states @ h.h_R.entries.T)
    elif blocks == ["x"]:
        s0 = h.h_x

    states = euler_steps(dynamics_matrix(sys), s0, source, grid.h)
    return Trajectory(grid, states, traj.scheme)


def directional_derivative(
    sys: ReducedPHSystem, traj: Trajectory, sens: Trajectory, y_data: Signal
) -> float:
    """sum_{j<K} h <B^T w_j - y_data_j, B^T s_j>."""
    if not (traj.grid == sens.grid == y_data.grid):
        raise DimensionMismatchError("State, sensitivity and data grids differ.")
    residual = traj.states @ sys.B_t - y_data.values
    sensitivity = sens.states @ sys.B_t
    return left_endpoint(traj.grid, np.einsum("ij,ij->i", residual, sensitivity))


def assemble_gradient(coefficients, basis: BasisSet) -> Gradient:
    coefficients = np.asarray(coefficients, dtype=float).ravel()
    if coefficients.size != len(basis):
        raise DimensionMismatchError(
            f"Got {coefficients.size} coefficients for {len(basis)} basis directions."
        )
    value = TangentDirection.zeros(basis.directions[0].n)
    for c, direction in zip(coefficients, basis):
        value = value + float(c) * direction
    coefficients.setflags(write=False)
    return Gradient(value, coefficients)


def sensitivity_coefficients(
    sys: ReducedPHSystem,
    traj: Trajectory,
    y_data: Signal,
    basis: BasisSet,
    workers: int | None = None,
) -> np.ndarray:
    """Directional derivatives of the cost along every basis direction, in basis order."""

    def coefficient(direction: TangentDirection) -> float:
        sens = solve_sensitivity(sys, traj, direction, traj.grid)
        return directional_derivative(sys, traj, sens, y_data)

    workers = workers or settings.PHSID_WORKERS
    if workers <= 1:
        return np.array([coefficient(d) for d in basis])

    with ThreadPoolExecutor(max_workers=workers) as pool:
        return np.array(list(pool.map(coefficient, basis)))


def finite_difference_gradient(
    build: Callable[[TangentDirection, float], ReducedPHSystem],
    evaluate: Callable[[ReducedPHSystem], float],
    basis: BasisSet,
    eps: float = 1e-6,
) -> np.ndarray:
    """Central differences [J(v + eps h) - J(v - eps h)] / (2 eps) per direction.

    ``build(h, alpha)`` returns the system at v + alpha h; ``evaluate`` returns
    the cost of a system. The perturbed points need not be admissible.
    """
    if eps <= 0:
        raise ValueError("eps must be positive.")

    coefficients = np.empty(len(basis))
    for ell, direction in enumerate(basis):
        plus = evaluate(build(direction, eps))
        minus = evaluate(build(direction, -eps))
        coefficients[ell] = (plus - minus) / (2 * eps)
        logger.debug("FD coefficient %s = %.6e", basis.labels[ell], coefficients[ell])
    return coefficients


GRADIENT_CHECK_RTOL = 1e-4
GRADIENT_CHECK_ATOL = 1e-8


@dataclass(frozen=True)
class GradientCheckRow:
    label: str
    sensitivity: float
    finite_difference: float

    @property
    def relative_error(self) -> float:
        scale = max(abs(self.sensitivity), abs(self.finite_difference))
        if scale == 0:
            return 0.0
        return abs(self.sensitivity - self.finite_difference) / scale

    @property
    def passed(self) -> bool:
        difference = abs(self.sensitivity - self.finite_difference)
        if max(abs(self.sensitivity), abs(self.finite_difference)) < GRADIENT_CHECK_RTOL:
            return difference <= GRADIENT_CHECK_ATOL
        return self.relative_error <= GRADIENT_CHECK_RTOL


def compare_gradients(
    basis: BasisSet, sensitivity: np.ndarray, finite_difference: np.ndarray
) -> list[GradientCheckRow]:
    return [
        GradientCheckRow(label, float(s), float(f))
        for label, s, f in zip(basis.labels, sensitivity, finite_difference)
    ]
