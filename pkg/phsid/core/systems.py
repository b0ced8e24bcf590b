from dataclasses import dataclass, field
from enum import StrEnum

import numpy as np

from phsid.core.exceptions import DimensionMismatchError, InvariantError
from phsid.core.matrices import (
    PSDMatrix,
    SkewSymmetricMatrix,
    SPDMatrix,
    SymmetricMatrix,
    _frozen,
    _numeric,
)


class Scheme(StrEnum):
    EULER = "euler"
    MIDPOINT = "midpoint"


@dataclass(frozen=True)
class TimeGrid:
    t_end: float
    steps: int

    def __post_init__(self):
        if not (np.isfinite(self.t_end) and self.t_end > 0):
            raise InvariantError("Final time must be positive.", code="range")
        if self.steps < 1:
            raise InvariantError("A grid needs at least one step.", code="range")

    @property
    def h(self) -> float:
        return self.t_end / self.steps

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, self.t_end, self.steps + 1)


@dataclass(frozen=True, eq=False)
class Signal:
    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2 or values.shape[0] != self.grid.steps + 1:
            raise InvariantError(
                f"Signal has {values.shape[0]} rows, grid needs {self.grid.steps + 1}.",
                code="grid",
            )
        object.__setattr__(self, "values", _frozen(values))

    @property
    def ports(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True, eq=False)
class Trajectory:
    grid: TimeGrid
    states: np.ndarray
    scheme: Scheme = Scheme.EULER

    def __post_init__(self):
        states = np.asarray(self.states, dtype=float)
        if states.ndim != 2 or states.shape[0] != self.grid.steps + 1:
            raise InvariantError(
                f"Trajectory has {states.shape[0]} rows, "
                f"grid needs {self.grid.steps + 1}.",
                code="grid",
            )
        object.__setattr__(self, "states", _frozen(states))

    @property
    def n(self) -> int:
        return self.states.shape[1]


def _input_matrix(B, n: int) -> np.ndarray:
    B = _numeric(B, "B")
    if B.ndim != 2 or B.shape[0] != n or B.shape[1] < 1:
        raise DimensionMismatchError(f"B must be {n}xk with k >= 1, got {B.shape}.")
    if not np.all(np.isfinite(B)):
        raise InvariantError("B has non-finite entries.", code="range")
    return _frozen(B)


def _state_vector(x, n: int, name: str) -> np.ndarray:
    x = _numeric(x, name).ravel()
    if x.size != n:
        raise DimensionMismatchError(f"{name} must have length {n}, got {x.size}.")
    if not np.all(np.isfinite(x)):
        raise InvariantError(f"{name} has non-finite entries.", code="range")
    return _frozen(x)


def _check_square(n: int, **matrices):
    for name, m in matrices.items():
        if m.n != n:
            raise DimensionMismatchError(f"{name} is {m.n}x{m.n}, expected {n}x{n}.")


@dataclass(frozen=True, eq=False)
class PHSystem:
    """dx/dt = (J - R) Q x + B u,  y = B^T Q x,  x(0) = x_hat."""

    J: SkewSymmetricMatrix
    R: PSDMatrix
    Q: SPDMatrix
    B: np.ndarray
    x_hat: np.ndarray

    def __post_init__(self):
        n = self.J.n
        _check_square(n, R=self.R, Q=self.Q)
        object.__setattr__(self, "B", _input_matrix(self.B, n))
        object.__setattr__(self, "x_hat", _state_vector(self.x_hat, n, "x_hat"))

    @property
    def n(self) -> int:
        return self.J.n

    @property
    def k(self) -> int:
        return self.B.shape[1]

    @property
    def energy_matrix(self) -> np.ndarray:
        return self.Q.entries

    @property
    def initial_state(self) -> np.ndarray:
        return self.x_hat


@dataclass(frozen=True, eq=False)
class ReducedPHSystem:
    """dw/dt = (J - R) w + B u,  y = B^T w,  w(0) = w_hat; H(w) = w^T w / 2.

    R_t is normally a PSDMatrix. A bare SymmetricMatrix is accepted for trial
    points off the admissible set (finite differences, unprojected steps).
    """

    J_t: SkewSymmetricMatrix
    R_t: PSDMatrix | SymmetricMatrix
    B_t: np.ndarray
    w_hat: np.ndarray
    _identity: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        n = self.J_t.n
        _check_square(n, R_t=self.R_t)
        object.__setattr__(self, "B_t", _input_matrix(self.B_t, n))
        object.__setattr__(self, "w_hat", _state_vector(self.w_hat, n, "w_hat"))
        object.__setattr__(self, "_identity", _frozen(np.eye(n)))

    @property
    def n(self) -> int:
        return self.J_t.n

    @property
    def k(self) -> int:
        return self.B_t.shape[1]

    # Shared surface with PHSystem so the integrators treat both alike.
    @property
    def J(self) -> SkewSymmetricMatrix:
        return self.J_t

    @property
    def R(self) -> PSDMatrix | SymmetricMatrix:
        return self.R_t

    @property
    def B(self) -> np.ndarray:
        return self.B_t

    @property
    def energy_matrix(self) -> np.ndarray:
        return self._identity

    @property
    def initial_state(self) -> np.ndarray:
        return self.w_hat


AnySystem = PHSystem | ReducedPHSystem


def cholesky_reduce(sys: PHSystem) -> ReducedPHSystem:
    """Eliminate Q through w = V^T x with Q = V V^T (V lower Cholesky factor)."""
    V = sys.Q.cholesky_factor
    J_t = SkewSymmetricMatrix.skew_part(V.T @ sys.J.entries @ V)
    R_t = PSDMatrix(SymmetricMatrix.symmetric_part(V.T @ sys.R.entries @ V))
    return ReducedPHSystem(J_t=J_t, R_t=R_t, B_t=V.T @ sys.B, w_hat=V.T @ sys.x_hat)
