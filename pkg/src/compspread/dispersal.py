"""Discrete dispersal operators on a truncated uniform grid.

Random dispersal is the second-difference Laplacian with reflecting
(zero-flux) boundaries; nonlocal dispersal is trapezoid-rule convolution
against a compactly supported unit-mass kernel minus identity, with
constant extension of the boundary values.  Both annihilate constants
exactly, so mass is conserved for fields that are flat near the boundary.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _accel
from .errors import ConfigError, PreconditionError

KERNEL_SHAPES = ("uniform", "triangle", "raised-cosine")


@dataclass(frozen=True)
class Grid:
    """Uniform 1-D grid on [x_min, x_max] with n points."""

    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if self.n < 3:
            raise ConfigError("grid needs at least 3 points")
        if self.x_max <= self.x_min:
            raise ConfigError("grid bounds must be increasing")

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / (self.n - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n)

    def widened(self, factor: float) -> "Grid":
        """Same spacing, symmetric extension of the span by ``factor``."""
        extra = 0.5 * (factor - 1.0) * (self.x_max - self.x_min)
        pad = int(np.ceil(extra / self.h))
        return Grid(self.x_min - pad * self.h, self.x_max + pad * self.h,
                    self.n + 2 * pad)


@dataclass(frozen=True)
class Kernel:
    """Symmetric unit-mass dispersal kernel sampled at grid offsets.

    ``weights[k + m]`` is the density at offset k*h for k = -m..m, with zero
    samples at the support edge; trapezoid mass is renormalized to 1 at
    construction so that discrete convolution of a constant is exact.
    """

    shape: str
    nominal_radius: float
    h: float
    weights: np.ndarray

    @property
    def half_width(self) -> int:
        return (self.weights.size - 1) // 2

    @property
    def support_radius(self) -> float:
        return self.half_width * self.h

    @staticmethod
    def build(shape: str, radius: float, h: float) -> "Kernel":
        if shape not in KERNEL_SHAPES:
            raise ConfigError(f"unknown kernel shape {shape!r}")
        if radius <= 0.0 or h <= 0.0:
            raise ConfigError("kernel radius and spacing must be positive")
        m = int(round(radius / h))
        if m < 2 or abs(m * h - radius) > 1e-8 * radius:
            raise ConfigError("kernel radius must be a multiple of the grid "
                              "spacing with at least two cells per side")
        k = np.arange(-m, m + 1)
        z = k * h
        if shape == "uniform":
            # Half-weight edge samples plus a zero pad realize the sharp-edged
            # density with second-order accurate moments while keeping the
            # sampled kernel zero at its support edge.
            w = np.full(2 * m + 1, 1.0 / (2.0 * radius))
            w[0] *= 0.5
            w[-1] *= 0.5
            w = np.concatenate(([0.0], w, [0.0]))
        elif shape == "triangle":
            w = (1.0 - np.abs(z) / radius) / radius
        else:
            w = (1.0 + np.cos(np.pi * z / radius)) / (2.0 * radius)
            w[0] = 0.0
            w[-1] = 0.0
        w = np.abs(w)
        mass = h * float(np.sum(w))
        if mass <= 0.0:
            raise ConfigError("kernel mass vanished")
        w = w / mass
        return Kernel(shape, radius, h, w)

    def mass(self) -> float:
        return self.h * float(np.sum(self.weights))

    def offsets(self) -> np.ndarray:
        m = self.half_width
        return np.arange(-m, m + 1) * self.h

    def tilted_weights(self, mu: float) -> np.ndarray:
        return self.weights * np.exp(-mu * self.offsets())


def kernel_moment(kernel: Kernel, mu: float) -> float:
    """Trapezoid integral of the kernel against exp(-mu*z)."""
    return kernel.h * float(np.sum(kernel.tilted_weights(mu)))


def _check_kernel_grid(kernel: Kernel, grid: Grid) -> None:
    if abs(kernel.h - grid.h) > 1e-9 * grid.h:
        raise ConfigError("kernel sampling spacing must match the grid")
    if kernel.support_radius >= 0.5 * (grid.x_max - grid.x_min):
        raise PreconditionError("kernel support exceeds half the domain")


def apply_random(u: np.ndarray, grid: Grid) -> np.ndarray:
    """Second-order central difference with reflecting ghost values."""
    return _accel.second_diff(u, 1.0 / grid.h ** 2)


def apply_nonlocal(u: np.ndarray, grid: Grid, kernel: Kernel) -> np.ndarray:
    """Convolution minus identity, boundary values extended as constants."""
    _check_kernel_grid(kernel, grid)
    return _accel.correlate_ext(u, kernel.weights * kernel.h) - u


def apply_tilted_random(u: np.ndarray, grid: Grid, mu: float) -> np.ndarray:
    """Exponentially tilted Laplacian: second difference plus mu^2 * u."""
    if mu < 0.0:
        raise PreconditionError("tilt must be nonnegative")
    out = apply_random(u, grid)
    if mu == 0.0:
        return out
    return out + (mu * mu) * u


def apply_tilted_nonlocal(u: np.ndarray, grid: Grid, kernel: Kernel,
                          mu: float) -> np.ndarray:
    """Convolution against exp(-mu*z)*kernel minus identity."""
    if mu < 0.0:
        raise PreconditionError("tilt must be nonnegative")
    if mu == 0.0:
        return apply_nonlocal(u, grid, kernel)
    _check_kernel_grid(kernel, grid)
    return _accel.correlate_ext(u, kernel.tilted_weights(mu) * kernel.h) - u


def boundary_margin(grid: Grid, kernel: Optional[Kernel]) -> float:
    """Fronts must stay this far from the domain edge for the boundary
    handling to be faithful."""
    radius = kernel.support_radius if kernel is not None else 0.0
    return radius + 10.0 * grid.h
