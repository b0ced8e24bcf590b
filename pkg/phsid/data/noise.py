"""Seeded synthetic data.

Normal draws come from a fixed recipe so that golden files are reproducible
on any platform: uniform doubles are taken from numpy's PCG64 bit generator
(``Generator.random``, i.e. the top 53 bits of each 64-bit output scaled to
[0, 1)), and pairs (u1, u2) are mapped by Box-Muller to
z = sqrt(-2 ln(1 - u1)) * (cos 2 pi u2, sin 2 pi u2). Draws fill the
(K+1) x k sample matrix row by row, so every port gets independent noise.
"""

import logging
from dataclasses import dataclass

import numpy as np

from phsid.core.exceptions import InvariantError
from phsid.core.integrators import output, simulate_euler
from phsid.core.systems import AnySystem, Signal, TimeGrid

logger = logging.getLogger(__name__)

MAX_SEED = 2**64 - 1


@dataclass(frozen=True)
class NoiseSpec:
    seed: int
    mean: float = 1.0
    std: float = 0.1

    def __post_init__(self):
        if not 0 <= self.seed <= MAX_SEED:
            raise InvariantError("Seed must be a 64-bit unsigned integer.", "range")
        if not (np.isfinite(self.std) and self.std >= 0):
            raise InvariantError("Noise std must be non-negative.", code="range")
        if not np.isfinite(self.mean):
            raise InvariantError("Noise mean must be finite.", code="range")


def standard_normal(seed: int, count: int) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(seed))
    pairs = (count + 1) // 2
    uniforms = rng.random(2 * pairs).reshape(pairs, 2)
    radius = np.sqrt(-2.0 * np.log1p(-uniforms[:, 0]))
    angle = 2.0 * np.pi * uniforms[:, 1]
    z = np.empty(2 * pairs)
    z[0::2] = radius * np.cos(angle)
    z[1::2] = radius * np.sin(angle)
    return z[:count]


def generate_input(grid: TimeGrid, k: int, spec: NoiseSpec) -> Signal:
    """u_{j,i} = mean + std * z_{j,i}."""
    if k < 1:
        raise InvariantError("An input needs at least one port.", code="range")
    z = standard_normal(spec.seed, (grid.steps + 1) * k).reshape(grid.steps + 1, k)
    return Signal(grid, spec.mean + spec.std * z)


def generate_reference(
    sys: AnySystem, grid: TimeGrid, spec: NoiseSpec
) -> tuple[Signal, Signal]:
    """Noisy input and the noise-free Euler output of ``sys`` driven by it."""
    u = generate_input(grid, sys.k, spec)
    y_data = output(sys, simulate_euler(sys, u))
    logger.info(
        "Generated reference data: K=%d, k=%d, seed=%d", grid.steps, sys.k, spec.seed
    )
    return u, y_data
