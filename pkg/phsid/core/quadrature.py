import numpy as np

from phsid.core.exceptions import DimensionMismatchError
from phsid.core.systems import TimeGrid


def left_endpoint(grid: TimeGrid, integrand: np.ndarray) -> float:
    """sum_{j=0}^{K-1} h * f_j for node values f_0..f_K (the last node is unused)."""
    integrand = np.asarray(integrand, dtype=float)
    if integrand.shape[0] != grid.steps + 1:
        raise DimensionMismatchError(
            f"Integrand has {integrand.shape[0]} nodes, grid has {grid.steps + 1}."
        )
    return float(grid.h * np.sum(integrand[:-1]))
