"""Product quadrature on round spheres S^{n-1}_r in R^n."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import gamma, pi

import numpy as np
from scipy.special import roots_jacobi

__all__ = ["SphereQuadrature", "sphere_quadrature", "sphere_area", "sphere_moment"]


@dataclass(frozen=True, eq=False)
class SphereQuadrature:
    """Nodes on S_r with positive weights summing to the area of S_r.

    Exact for polynomials of degree <= 2*order + 1 restricted to the sphere.
    """

    n: int
    radius: float
    order: int
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    @property
    def normals(self) -> np.ndarray:
        return self.nodes / self.radius

    def integrate(self, values: np.ndarray) -> np.ndarray:
        """Sum over the leading (node) axis."""
        return np.tensordot(self.weights, values, axes=(0, 0))


@lru_cache(maxsize=64)
def _unit_rule(n: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    if n == 2:
        count = 2 * order + 2
        theta = 2 * pi * np.arange(count) / count
        nodes = np.stack([np.cos(theta), np.sin(theta)], axis=1)
        return nodes, np.full(count, 2 * pi / count)
    # x_1 = t, the rest = sqrt(1 - t^2) * y with y on S^{n-2}; measure (1-t^2)^((n-3)/2) dt
    alpha = (n - 3) / 2
    t, wt = roots_jacobi(order + 1, alpha, alpha)
    lower, wl = _unit_rule(n - 1, order)
    s = np.sqrt(1.0 - t**2)
    nodes = np.concatenate(
        [
            np.repeat(t, len(lower))[:, None],
            (s[:, None, None] * lower[None, :, :]).reshape(-1, n - 1),
        ],
        axis=1,
    )
    weights = np.outer(wt, wl).ravel()
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def sphere_quadrature(n: int, radius: float, order: int) -> SphereQuadrature:
    if n < 2 or order < 0:
        raise ValueError("need n >= 2 and order >= 0")
    if radius <= 0:
        raise ValueError("radius must be positive")
    nodes, weights = _unit_rule(n, order)
    return SphereQuadrature(n, float(radius), order, radius * nodes, radius ** (n - 1) * weights)


def sphere_area(n: int, radius: float = 1.0) -> float:
    """Area of the round sphere S^{n-1} of the given radius."""
    return 2 * pi ** (n / 2) / gamma(n / 2) * radius ** (n - 1)


def sphere_moment(exponents) -> float:
    """Integral of prod x_i^{a_i} over the unit sphere S^{n-1}."""
    exps = list(exponents)
    if any(a % 2 for a in exps):
        return 0.0
    num = 2.0
    for a in exps:
        num *= gamma((a + 1) / 2)
    return num / gamma((sum(exps) + len(exps)) / 2)
