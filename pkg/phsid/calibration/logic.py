import logging
from dataclasses import dataclass
from enum import StrEnum
from typing import Callable, NamedTuple

import numpy as np
import scipy.linalg

from phsid.core.exceptions import (
    DimensionMismatchError,
    DivergenceError,
    InvariantError,
    LineSearchError,
)
from phsid.core.integrators import output, simulate_euler
from phsid.core.matrices import PSDMatrix, SymmetricMatrix
from phsid.core.quadrature import left_endpoint
from phsid.core.systems import ReducedPHSystem, Signal
from phsid.sensitivity.logic import (
    Gradient,
    ParameterPoint,
    Structure,
    assemble_gradient,
    sensitivity_coefficients,
    tangent_basis,
)

logger = logging.getLogger(__name__)


class PSDMode(StrEnum):
    PROJECT = "project"
    NONE = "none"


class StopReason(StrEnum):
    CONVERGED = "converged"
    MAX_ITER = "max_iter"
    LINE_SEARCH = "line_search"
    STATIONARY = "stationary"
    DIVERGENCE = "divergence"


@dataclass(frozen=True)
class CalibrationConfig:
    sigma_init: float = 10.0
    gamma: float = 1e-4
    eps_stop: float = 1e-4
    max_iter: int = 500
    max_halvings: int = 60
    structure: Structure = Structure.FULL
    psd_mode: PSDMode = PSDMode.PROJECT

    def __post_init__(self):
        if not self.sigma_init > 0:
            raise InvariantError("sigma_init must be positive.", code="range")
        if not 0 < self.gamma < 1:
            raise InvariantError("gamma must lie in (0, 1).", code="range")
        if not self.eps_stop > 0:
            raise InvariantError("eps_stop must be positive.", code="range")
        if self.max_iter < 0 or self.max_halvings < 0:
            raise InvariantError("Iteration limits must be non-negative.", code="range")
        object.__setattr__(self, "structure", Structure(self.structure))
        object.__setattr__(self, "psd_mode", PSDMode(self.psd_mode))


@dataclass(frozen=True, eq=False)
class CalibrationResult:
    v_opt: ParameterPoint
    cost_history: list[float]
    iterations: int
    converged: bool
    y_opt: Signal | None
    step_sizes: list[float]
    reason: StopReason
    gradient_norms: list[float]

    @property
    def final_cost(self) -> float:
        return self.cost_history[-1]


class ArmijoStep(NamedTuple):
    sigma: float
    point: ParameterPoint
    cost: float


def cost(sys: ReducedPHSystem, u: Signal, y_data: Signal) -> float:
    """1/2 sum_{j<K} h |y_j - y_data_j|^2 with y from the Euler trajectory."""
    if u.grid != y_data.grid:
        raise DimensionMismatchError("Input and reference data live on different grids.")
    if y_data.ports != sys.k:
        raise DimensionMismatchError(
            f"Reference data has {y_data.ports} ports, system has k = {sys.k}."
        )
    try:
        traj = simulate_euler(sys, u)
    except DivergenceError as e:
        raise DivergenceError(e.step, point=sys) from e
    residual = output(sys, traj).values - y_data.values
    return 0.5 * left_endpoint(u.grid, np.einsum("ij,ij->i", residual, residual))


def project_psd(m: SymmetricMatrix) -> PSDMatrix:
    """Frobenius-nearest PSD matrix: clip negative eigenvalues to zero."""
    if m.is_diagonal():
        return PSDMatrix(SymmetricMatrix.diagonal(np.maximum(np.diag(m.entries), 0)))

    eigenvalues, U = scipy.linalg.eigh(m.entries)
    if eigenvalues[0] >= 0:
        return PSDMatrix(m)
    clipped = (U * np.maximum(eigenvalues, 0)) @ U.T
    return PSDMatrix(SymmetricMatrix.symmetric_part(clipped))


def retract(
    v: ParameterPoint, g: Gradient, sigma: float, psd_mode: PSDMode
) -> ParameterPoint:
    """v - sigma g mapped back to the admissible set."""
    step = g.value
    R = v.R.base - sigma * step.h_R
    if psd_mode == PSDMode.PROJECT:
        R = project_psd(R)
    return ParameterPoint(
        J=v.J - sigma * step.h_J, R=R, w_hat=v.w_hat - sigma * step.h_x
    )


def armijo_search(
    v: ParameterPoint,
    g: Gradient,
    cost_at_v: float,
    evaluate: Callable[[ParameterPoint], float],
    cfg: CalibrationConfig,
) -> ArmijoStep:
    """First sigma in sigma_init * 2^-i with J(v') - J(v) <= -gamma sigma |g|^2.

    Candidates are retracted before evaluation, so the accepted cost is the
    cost of the returned point. Candidates that diverge, or leave the PSD
    cone when projection is off, count as rejected.
    """
    sigma = cfg.sigma_init
    norm_squared = g.norm_squared

    for halvings in range(cfg.max_halvings + 1):
        if halvings:
            sigma = 0.5 * sigma
        try:
            candidate = retract(v, g, sigma, cfg.psd_mode)
            candidate_cost = evaluate(candidate)
        except InvariantError as e:
            logger.debug("sigma = %.3e left the admissible set: %s", sigma, e)
            continue
        except DivergenceError:
            logger.debug("sigma = %.3e diverged", sigma)
            continue

        if candidate_cost - cost_at_v <= -cfg.gamma * sigma * norm_squared:
            return ArmijoStep(sigma, candidate, candidate_cost)
        logger.debug(
            "sigma = %.3e rejected: cost %.6e vs %.6e", sigma, candidate_cost, cost_at_v
        )

    logger.warning("Armijo search failed after %d halvings", cfg.max_halvings)
    raise LineSearchError(sigma, cfg.max_halvings)


def calibrate(
    v0: ParameterPoint,
    u: Signal,
    y_data: Signal,
    B,
    cfg: CalibrationConfig | None = None,
) -> CalibrationResult:
    cfg = cfg or CalibrationConfig()
    basis = tangent_basis(v0.n, cfg.structure)

    def evaluate(point: ParameterPoint) -> float:
        return cost(point.system(B), u, y_data)

    logger.info(
        "Calibrating n=%d over %d directions (%s, psd_mode=%s)",
        v0.n,
        len(basis),
        cfg.structure,
        cfg.psd_mode,
    )

    v = v0
    try:
        current = evaluate(v)
    except DivergenceError:
        logger.warning("Initial guess diverges; nothing to calibrate")
        return CalibrationResult(
            v, [np.inf], 0, False, None, [], StopReason.DIVERGENCE, []
        )

    history = [current]
    steps: list[float] = []
    norms: list[float] = []

    while True:
        if current <= cfg.eps_stop:
            reason = StopReason.CONVERGED
            break
        if len(steps) >= cfg.max_iter:
            reason = StopReason.MAX_ITER
            break

        sys = v.system(B)
        traj = simulate_euler(sys, u)
        g = assemble_gradient(sensitivity_coefficients(sys, traj, y_data, basis), basis)
        if g.norm_squared == 0:
            reason = StopReason.STATIONARY
            break

        try:
            step = armijo_search(v, g, current, evaluate, cfg)
        except LineSearchError:
            reason = StopReason.LINE_SEARCH
            break

        v, current = step.point, step.cost
        history.append(current)
        steps.append(step.sigma)
        norms.append(g.norm_squared)
        logger.info(
            "iter %d: cost %.6e, sigma %.4g", len(steps), current, step.sigma
        )

    sys = v.system(B)
    y_opt = output(sys, simulate_euler(sys, u))
    logger.info(
        "Calibration stopped (%s) after %d iterations, cost %.6e",
        reason,
        len(steps),
        current,
    )
    return CalibrationResult(
        v_opt=v,
        cost_history=history,
        iterations=len(steps),
        converged=reason == StopReason.CONVERGED,
        y_opt=y_opt,
        step_sizes=steps,
        reason=reason,
        gradient_norms=norms,
    )
