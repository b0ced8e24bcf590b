"""Random admissible systems for tests."""

import numpy as np

from phsid.core.matrices import (
    PSDMatrix,
    SkewSymmetricMatrix,
    SPDMatrix,
    SymmetricMatrix,
)
from phsid.core.systems import PHSystem, ReducedPHSystem


def random_skew(rng: np.random.Generator, n: int, scale: float = 1.0):
    return SkewSymmetricMatrix.from_lower(n, scale * rng.standard_normal(n * (n - 1) // 2))


def random_psd(rng: np.random.Generator, n: int, scale: float = 0.5):
    A = rng.standard_normal((n, n))
    return PSDMatrix(SymmetricMatrix.symmetric_part(scale * A @ A.T / n))


def random_spd(rng: np.random.Generator, n: int):
    A = rng.standard_normal((n, n))
    return SPDMatrix.from_symmetric(
        SymmetricMatrix.symmetric_part(0.5 * A @ A.T / n + np.eye(n))
    )


def random_system(rng: np.random.Generator, n: int, k: int, with_q: bool = True):
    return PHSystem(
        J=random_skew(rng, n),
        R=random_psd(rng, n),
        Q=random_spd(rng, n) if with_q else SPDMatrix.identity(n),
        B=rng.standard_normal((n, k)),
        x_hat=rng.standard_normal(n),
    )


def random_reduced_system(rng: np.random.Generator, n: int, k: int):
    return ReducedPHSystem(
        J_t=random_skew(rng, n),
        R_t=random_psd(rng, n),
        B_t=rng.standard_normal((n, k)),
        w_hat=rng.standard_normal(n),
    )
