"""Product quadrature on polydisks with a refine-until-stable driver.

Each complex coordinate uses a polar rule on its disk: Gauss-Legendre in the
radius on equal panels, and the trapezoid rule in the angle (spectrally
accurate for smooth periodic integrands). Integrands of the form
``exp(-|y|^2 / h) * (smooth)`` are resolved by choosing the panel width of
order ``sqrt(h)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .errors import QuadratureError

__all__ = ["DiskRule", "QuadratureDomain", "QuadResult", "disk_rule", "integrate"]


@dataclass(frozen=True)
class DiskRule:
    nodes: np.ndarray  # complex
    weights: np.ndarray  # real, positive


def disk_rule(
    radius: float,
    n_radial: int,
    n_angular: int,
    center: complex = 0j,
    panels: int = 1,
) -> DiskRule:
    """Polar rule on the disk ``|y - center| <= radius``.

    ``n_radial`` Gauss-Legendre nodes per radial panel; weights include the
    Jacobian ``r``.
    """
    x, w = np.polynomial.legendre.leggauss(n_radial)
    edges = np.linspace(0.0, radius, panels + 1)
    r = np.concatenate([(a + b) / 2 + (b - a) / 2 * x for a, b in zip(edges[:-1], edges[1:])])
    wr = np.concatenate([(b - a) / 2 * w for a, b in zip(edges[:-1], edges[1:])]) * r
    theta = 2 * np.pi * np.arange(n_angular) / n_angular
    wt = 2 * np.pi / n_angular
    nodes = center + (r[:, None] * np.exp(1j * theta[None, :])).ravel()
    weights = (wr[:, None] * np.full(n_angular, wt)[None, :]).ravel()
    return DiskRule(nodes, weights)


@dataclass(frozen=True)
class QuadratureDomain:
    """Polydisk ``prod_j {|y_j - center_j| <= radius}`` with a base resolution.

    Attributes
    ----------
    center : tuple of complex
    radius : float
    n_radial : int
        Gauss-Legendre nodes per radial panel at level 0.
    n_angular : int
        Trapezoid nodes in the angle at level 0.
    panels : int
        Number of equal radial panels.
    """

    center: tuple
    radius: float
    n_radial: int = 8
    n_angular: int = 64
    panels: int = 8

    @property
    def dimension(self) -> int:
        return len(self.center)

    @classmethod
    def for_h(cls, center: Sequence[complex], radius: float, h: float, **kw) -> "QuadratureDomain":
        """Panels of width about ``2 sqrt(h)`` so the Gaussian scale is resolved."""
        panels = max(2, math.ceil(radius / (2 * math.sqrt(h))))
        return cls(tuple(complex(c) for c in center), float(radius), panels=panels, **kw)

    def rule(self, level: int = 0) -> list[DiskRule]:
        k = 2**level
        return [
            disk_rule(self.radius, self.n_radial * k, self.n_angular * k, c, self.panels)
            for c in self.center
        ]

    def contains(self, x: Sequence[complex], ratio: float = 1.0) -> bool:
        return all(abs(complex(a) - c) <= ratio * self.radius for a, c in zip(x, self.center))

    def inner(self, ratio: float = 0.5) -> "QuadratureDomain":
        return replace(self, radius=self.radius * ratio)


@dataclass
class QuadResult:
    value: complex
    abs_integral: float
    delta: float
    level: int
    n_nodes: int


def _apply(func: Callable, rules: list[DiskRule]) -> tuple[complex, float]:
    if len(rules) == 1:
        vals = np.asarray(func([rules[0].nodes]), dtype=complex)
        vals = np.broadcast_to(vals, rules[0].nodes.shape)
        return complex(np.sum(vals * rules[0].weights)), float(np.sum(np.abs(vals) * rules[0].weights))
    # loop over the first coordinate, vectorize over the rest
    rest = rules[1:]
    grids = np.meshgrid(*[r.nodes for r in rest], indexing="ij")
    wgrid = np.ones_like(grids[0], dtype=float)
    for axis, r in enumerate(rest):
        shape = [1] * len(rest)
        shape[axis] = -1
        wgrid = wgrid * r.weights.reshape(shape)
    flat = [g.ravel() for g in grids]
    wflat = wgrid.ravel()
    partial = np.empty(len(rules[0].nodes), dtype=complex)
    partial_abs = np.empty(len(rules[0].nodes))
    for i, (y0, w0) in enumerate(zip(rules[0].nodes, rules[0].weights)):
        vals = np.asarray(func([np.full(flat[0].shape, y0)] + flat), dtype=complex)
        vals = np.broadcast_to(vals, flat[0].shape)
        partial[i] = w0 * np.sum(vals * wflat)
        partial_abs[i] = w0 * np.sum(np.abs(vals) * wflat)
    return complex(np.sum(partial)), float(np.sum(partial_abs))


def integrate(
    func: Callable[[list[np.ndarray]], np.ndarray],
    domain: QuadratureDomain,
    tol: float = 1e-9,
    max_level: int = 4,
) -> QuadResult:
    """Integrate ``func`` over ``domain``, doubling nodes until two levels agree.

    Agreement means ``|I_k - I_{k-1}| <= tol * max(|I_k|, int |func|)``; the
    integral of ``|func|`` keeps the test meaningful when cancellation makes
    ``I`` tiny.

    Raises
    ------
    QuadratureError
        If ``max_level`` doublings do not reach the tolerance.
    """
    prev, _ = _apply(func, domain.rule(0))
    delta = float("inf")
    for level in range(1, max_level + 1):
        cur, cur_abs = _apply(func, domain.rule(level))
        delta = abs(cur - prev)
        if delta <= tol * max(abs(cur), cur_abs) or cur_abs == 0.0:
            n_nodes = sum(len(r.nodes) for r in domain.rule(level)) if domain.dimension == 1 else int(
                np.prod([len(r.nodes) for r in domain.rule(level)])
            )
            return QuadResult(cur, cur_abs, delta, level, n_nodes)
        prev = cur
    raise QuadratureError(
        f"quadrature did not converge after {max_level} doublings (last change {delta:.3e})"
    )
