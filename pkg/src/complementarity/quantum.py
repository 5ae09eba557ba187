"""Single-photon counterpart of the classical model, in Bloch parametrization."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .classical import phase_states
from .distributions import AngularDistribution, JointDistribution, PhiGrid
from .errors import UndefinedCoherenceError, ValidationError
from .hermitian import SIGMA_X, SIGMA_Y, SIGMA_Z, HMatrix2, sandwich_many

BLOCH_TOL = 1e-12
POVM_TOL = 1e-12


@dataclass(frozen=True)
class BlochVector:
    sx: float
    sy: float
    sz: float

    def __post_init__(self):
        for name in ("sx", "sy", "sz"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValidationError(f"{name} must be finite")
            object.__setattr__(self, name, value)
        if self.sx**2 + self.sy**2 + self.sz**2 > 1 + BLOCH_TOL:
            raise ValidationError(f"Bloch vector length {self.norm():.15g} exceeds 1")

    def norm(self) -> float:
        return math.sqrt(self.sx**2 + self.sy**2 + self.sz**2)

    def as_array(self) -> np.ndarray:
        return np.array([self.sx, self.sy, self.sz])


def rho_from_bloch(s: BlochVector) -> HMatrix2:
    return HMatrix2(0.5 * (1 + s.sz), 0.5 * (1 - s.sz), 0.5 * complex(s.sx, -s.sy))


def bloch_from_rho(rho: HMatrix2) -> BlochVector:
    m = rho.array
    return BlochVector(*(float(np.trace(m @ sigma).real) for sigma in (SIGMA_X, SIGMA_Y, SIGMA_Z)))


def path_probabilities(rho: HMatrix2) -> tuple[float, float]:
    return rho.p, rho.q


@lru_cache(maxsize=64)
def phase_povm_deviation(n: int) -> float:
    """Max entrywise deviation of sum_k w |phi_k><phi_k| from the identity."""
    grid = PhiGrid(n)
    states = phase_states(grid.nodes)
    total = grid.weight * np.einsum("ki,kj->ij", states, states.conj())
    return float(np.max(np.abs(total - np.eye(2))))


def check_phase_povm(grid: PhiGrid) -> None:
    deviation = phase_povm_deviation(grid.n)
    if deviation > POVM_TOL:
        raise ValidationError(f"phase POVM on {grid.n} nodes is incomplete (deviation {deviation:.3e})")


def phase_distribution(rho: HMatrix2, grid: PhiGrid) -> AngularDistribution:
    """Phase statistics from projecting onto the (non-orthogonal) phase states."""
    check_phase_povm(grid)
    return AngularDistribution(grid, sandwich_many(rho, phase_states(grid.nodes)))


def marked_joint_probability(rho: HMatrix2, vartheta: float, grid: PhiGrid) -> JointDistribution:
    """Observed polarizer/phase statistics under optimal marking.

    P(p, phi) = [1 + sin(2v)(cos(phi) sx + sin(phi) sy) - p cos(2v) sz] / (4 pi)
    """
    s = bloch_from_rho(rho)
    phi = grid.nodes
    fringe = math.sin(2 * vartheta) * (np.cos(phi) * s.sx + np.sin(phi) * s.sy)
    tilt = math.cos(2 * vartheta) * s.sz
    row_plus = (1 + fringe - tilt) / (4 * math.pi)
    row_minus = (1 + fringe + tilt) / (4 * math.pi)
    return JointDistribution(grid, row_plus, row_minus, outcome_label="polarizer")


def coherence_of_state(rho: HMatrix2) -> float:
    """Squared degree of coherence |rho_{1,-1}|^2 / (rho_{1,1} rho_{-1,-1})."""
    if rho.p <= 0 or rho.q <= 0:
        raise UndefinedCoherenceError("coherence is undefined for a pure path state")
    return abs(rho.c) ** 2 / (rho.p * rho.q)
