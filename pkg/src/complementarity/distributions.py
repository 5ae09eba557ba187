"""Phase grids and the distributions sampled on them.

The phase axis is discretized by a uniform midpoint grid. Midpoint
quadrature on such a grid integrates trigonometric polynomials of degree
below ``n`` exactly, so for n >= 3 every integral of a product of two
first-harmonic functions (the only kind that occurs here) carries no
discretization error.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Literal

import numpy as np

from .errors import ValidationError

MASS_TOL = 1e-10
DEFAULT_GRID_N = 256

OutcomeLabel = Literal["path", "polarizer"]


@dataclass(frozen=True)
class PhiGrid:
    n: int = DEFAULT_GRID_N

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 3:
            raise ValidationError(f"grid needs n >= 3 nodes, got {self.n}")
        object.__setattr__(self, "n", int(self.n))

    @cached_property
    def nodes(self) -> np.ndarray:
        nodes = (np.arange(self.n) + 0.5) * (2 * np.pi / self.n)
        nodes.setflags(write=False)
        return nodes

    @property
    def weight(self) -> float:
        return 2 * math.pi / self.n

    def integrate(self, values) -> float:
        return float(np.sum(values) * self.weight)

    def harmonics(self, values) -> tuple[float, float, float]:
        """Coefficients (c0, a, b) of the projection c0 + a cos(phi) + b sin(phi).

        Exact for first-harmonic inputs since n >= 3.
        """
        values = np.asarray(values, dtype=float)
        c0 = float(np.mean(values))
        a = float(2 * np.mean(values * np.cos(self.nodes)))
        b = float(2 * np.mean(values * np.sin(self.nodes)))
        return c0, a, b

    def index_of(self, phi: float) -> int:
        """Index of the node nearest to ``phi`` (mod 2pi)."""
        k = math.floor((phi % (2 * math.pi)) / self.weight)
        return min(k, self.n - 1)


def _as_row(values, grid: PhiGrid, name: str) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.shape != (grid.n,):
        raise ValidationError(f"{name} has shape {arr.shape}, expected ({grid.n},)")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite values")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class AngularDistribution:
    """Real function of phi on a grid whose quadrature sum equals ``mass``."""

    grid: PhiGrid
    values: np.ndarray
    mass: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "values", _as_row(self.values, self.grid, "values"))
        total = self.grid.integrate(self.values)
        if abs(total - self.mass) > MASS_TOL:
            raise ValidationError(f"distribution mass {total!r} differs from declared {self.mass!r}")

    def harmonics(self) -> tuple[float, float, float]:
        return self.grid.harmonics(self.values)

    def visibility(self) -> float:
        """Fringe visibility (max - min)/(max + min) of the first-harmonic part."""
        c0, a, b = self.harmonics()
        return math.hypot(a, b) / c0


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """Two rows over the phase grid, one per binary outcome (+1, -1)."""

    grid: PhiGrid
    row_plus: np.ndarray
    row_minus: np.ndarray
    outcome_label: OutcomeLabel = "path"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.outcome_label not in ("path", "polarizer"):
            raise ValidationError(f"unknown outcome label {self.outcome_label!r}")
        object.__setattr__(self, "row_plus", _as_row(self.row_plus, self.grid, "row_plus"))
        object.__setattr__(self, "row_minus", _as_row(self.row_minus, self.grid, "row_minus"))
        total = self.mass()
        if abs(total - 1.0) > MASS_TOL:
            raise ValidationError(f"joint distribution mass {total!r} differs from 1")

    @classmethod
    def from_table(cls, grid: PhiGrid, table, outcome_label: OutcomeLabel = "path") -> "JointDistribution":
        table = np.asarray(table, dtype=float)
        return cls(grid, table[0], table[1], outcome_label)

    @property
    def table(self) -> np.ndarray:
        """2 x n array, row 0 for outcome +1."""
        return np.vstack([self.row_plus, self.row_minus])

    def row(self, outcome: int) -> np.ndarray:
        if outcome == 1:
            return self.row_plus
        if outcome == -1:
            return self.row_minus
        raise ValidationError(f"outcome must be +1 or -1, got {outcome}")

    def mass(self) -> float:
        return float((np.sum(self.row_plus) + np.sum(self.row_minus)) * self.grid.weight)

    def outcome_marginal(self) -> tuple[float, float]:
        return self.grid.integrate(self.row_plus), self.grid.integrate(self.row_minus)

    def phase_marginal(self) -> AngularDistribution:
        return AngularDistribution(self.grid, self.row_plus + self.row_minus)

    def min(self) -> float:
        return float(min(self.row_plus.min(), self.row_minus.min()))
