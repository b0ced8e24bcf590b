"""Time integration of port-Hamiltonian systems on a uniform grid.

Both integrators accept the original model (H = x^T Q x / 2) and the
reduced model (Q = I). The explicit Euler scheme samples the input at the
left node; the discrete-gradient scheme uses the midpoint discrete gradient
of the quadratic Hamiltonian and the input at the right node, which gives an
exact discrete energy balance.
"""

import logging

import numpy as np
import scipy.linalg

from phsid.core.exceptions import (
    DimensionMismatchError,
    DivergenceError,
    SingularStepError,
)
from phsid.core.systems import AnySystem, Scheme, Signal, TimeGrid, Trajectory

logger = logging.getLogger(__name__)


def _check_input(sys: AnySystem, u: Signal):
    if u.ports != sys.k:
        raise DimensionMismatchError(
            f"Input has {u.ports} ports, system has k = {sys.k}."
        )


def _check_trajectory(sys: AnySystem, traj: Trajectory):
    if traj.n != sys.n:
        raise DimensionMismatchError(
            f"Trajectory has {traj.n} states, system has n = {sys.n}."
        )


def _first_divergent_step(states: np.ndarray) -> int | None:
    bad = np.flatnonzero(~np.all(np.isfinite(states), axis=1))
    if bad.size == 0:
        return None
    return int(bad[0]) - 1


def dynamics_matrix(sys: AnySystem) -> np.ndarray:
    """(J - R) Q, the linear part of the state equation."""
    return (sys.J.entries - sys.R.entries) @ sys.energy_matrix


def euler_steps(M: np.ndarray, x0: np.ndarray, source: np.ndarray, h: float):
    """x_{j+1} = x_j + h (M x_j + source_j) for j = 0..K-1.

    ``source`` has one row per grid node; its last row is never read.
    """
    states = np.empty((source.shape[0], x0.size))
    states[0] = x0
    with np.errstate(over="ignore", invalid="ignore"):
        for j in range(source.shape[0] - 1):
            states[j + 1] = states[j] + h * (M @ states[j] + source[j])

    step = _first_divergent_step(states)
    if step is not None:
        logger.warning("Euler integration diverged at step %d", step)
        raise DivergenceError(step)
    return states


def simulate_euler(sys: AnySystem, u: Signal) -> Trajectory:
    _check_input(sys, u)
    source = u.values @ sys.B.T
    states = euler_steps(dynamics_matrix(sys), sys.initial_state, source, u.grid.h)
    return Trajectory(u.grid, states, Scheme.EULER)


def simulate_discrete_gradient(sys: AnySystem, u: Signal) -> Trajectory:
    """Solve (I - h/2 M) x_{j+1} = (I + h/2 M) x_j + h B u_{j+1} with M = (J - R) Q."""
    _check_input(sys, u)
    h = u.grid.h
    M = dynamics_matrix(sys)
    identity = np.eye(sys.n)

    lu, piv = scipy.linalg.lu_factor(identity - (h / 2) * M, check_finite=False)
    if not np.all(np.diag(lu)):
        raise SingularStepError(
            "Discrete-gradient step matrix is singular; R is not positive semidefinite."
        )
    explicit = identity + (h / 2) * M
    source = h * (u.values @ sys.B.T)

    states = np.empty((u.grid.steps + 1, sys.n))
    states[0] = sys.initial_state
    with np.errstate(over="ignore", invalid="ignore"):
        for j in range(u.grid.steps):
            rhs = explicit @ states[j] + source[j + 1]
            states[j + 1] = scipy.linalg.lu_solve((lu, piv), rhs, check_finite=False)

    step = _first_divergent_step(states)
    if step is not None:
        logger.warning("Discrete-gradient integration diverged at step %d", step)
        raise DivergenceError(step)
    return Trajectory(u.grid, states, Scheme.MIDPOINT)


def simulate(sys: AnySystem, u: Signal, scheme: Scheme = Scheme.EULER) -> Trajectory:
    if scheme == Scheme.MIDPOINT:
        return simulate_discrete_gradient(sys, u)
    return simulate_euler(sys, u)


def output(sys: AnySystem, traj: Trajectory) -> Signal:
    """y_j = B^T Q x_j at every node."""
    _check_trajectory(sys, traj)
    return Signal(traj.grid, traj.states @ sys.energy_matrix @ sys.B)


def midpoint_output(sys: AnySystem, traj: Trajectory) -> Signal:
    """Discrete output y_{j+1} = B^T Q (x_j + x_{j+1}) / 2; node 0 reports B^T Q x_0."""
    _check_trajectory(sys, traj)
    efforts = np.empty_like(traj.states)
    efforts[0] = traj.states[0]
    efforts[1:] = (traj.states[:-1] + traj.states[1:]) / 2
    return Signal(traj.grid, efforts @ sys.energy_matrix @ sys.B)


def scheme_output(sys: AnySystem, traj: Trajectory) -> Signal:
    if traj.scheme == Scheme.MIDPOINT:
        return midpoint_output(sys, traj)
    return output(sys, traj)


def hamiltonian(sys: AnySystem, traj: Trajectory) -> np.ndarray:
    _check_trajectory(sys, traj)
    x = traj.states
    return 0.5 * np.einsum("ij,jk,ik->i", x, sys.energy_matrix, x)


def energy_balance_residual(
    sys: AnySystem, traj: Trajectory, u: Signal
) -> np.ndarray:
    """Per-step defect of the discrete balance

    H(x_{j+1}) - H(x_j) = h (-g^T R g + y_{j+1}^T u_{j+1}),  g = Q (x_j + x_{j+1}) / 2.
    """
    _check_trajectory(sys, traj)
    _check_input(sys, u)
    if traj.grid != u.grid:
        raise DimensionMismatchError("Trajectory and input live on different grids.")

    energy = hamiltonian(sys, traj)
    g = (traj.states[:-1] + traj.states[1:]) / 2 @ sys.energy_matrix
    dissipated = np.einsum("ij,jk,ik->i", g, sys.R.entries, g)
    supplied = np.einsum("ij,ij->i", g @ sys.B, u.values[1:])
    return (energy[1:] - energy[:-1]) - traj.grid.h * (supplied - dissipated)
