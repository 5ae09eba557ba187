"""Classical Young interferometer with polarization marking.

Conventions
-----------
* Path basis: index 0 is aperture z=+1, index 1 is aperture z=-1.
* Polarization basis: index 0 is horizontal, index 1 is vertical.
* The composite space is path (x) polarization, so the composite index is
  ``2 * path_index + polarization_index``.
* The half-wave plate sits on aperture z=+1: ``u(+1) = cos(theta) H + sin(theta) V``
  and ``u(-1) = H``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .distributions import AngularDistribution, JointDistribution, PhiGrid
from .errors import SingularKernelError, UndefinedCoherenceError, ValidationError
from .hermitian import (
    HMatrix2,
    HMatrix4,
    is_psd,
    phase_of,
    sandwich_many,
    wrap_angle,
)

OPTIMAL_TOL = 1e-12
SINGULAR_ANGLE_TOL = 1e-6
NORM_TOL = 1e-12


@dataclass(frozen=True)
class CoherenceSpec:
    """Aperture intensities and complex degree of coherence ``mu_abs * exp(i delta)``."""

    i1: float
    i_m1: float
    mu_abs: float
    delta: float = 0.0

    def __post_init__(self):
        for name in ("i1", "i_m1", "mu_abs", "delta"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValidationError(f"{name} must be finite")
            object.__setattr__(self, name, value)
        if self.i1 < 0 or self.i_m1 < 0:
            raise ValidationError("aperture intensities must be nonnegative")
        if abs(self.i1 + self.i_m1 - 1.0) > NORM_TOL:
            raise ValidationError(f"intensities must sum to 1, got {self.i1 + self.i_m1!r}")
        if not 0.0 <= self.mu_abs <= 1.0:
            raise ValidationError(f"mu_abs must lie in [0, 1], got {self.mu_abs}")
        object.__setattr__(self, "delta", wrap_angle(self.delta))

    @classmethod
    def from_i1(cls, i1: float, mu_abs: float, delta: float = 0.0) -> "CoherenceSpec":
        return cls(i1, 1.0 - i1, mu_abs, delta)


def optimal_theta(vartheta: float) -> float:
    """Wave-plate angle satisfying 2*vartheta - theta = pi/2."""
    return 2 * vartheta - math.pi / 2


def distance_to_singular_angle(vartheta: float) -> float:
    """Distance from vartheta to the nearest multiple of pi/4."""
    step = math.pi / 4
    r = vartheta % step
    return min(r, step - r)


@dataclass(frozen=True)
class MarkingConfig:
    """Wave-plate angle ``theta`` and polarizer angle ``vartheta``.

    ``theta=None`` selects the optimal ``2*vartheta - pi/2``.
    """

    vartheta: float
    theta: Optional[float] = None
    enforce_optimal: bool = True

    def __post_init__(self):
        if self.theta is None:
            object.__setattr__(self, "theta", optimal_theta(self.vartheta))
        if not (math.isfinite(self.vartheta) and math.isfinite(self.theta)):
            raise ValidationError("angles must be finite")
        if self.enforce_optimal and abs(2 * self.vartheta - self.theta - math.pi / 2) > OPTIMAL_TOL:
            raise ValidationError(
                f"2*vartheta - theta = {2 * self.vartheta - self.theta!r}, optimal marking needs pi/2"
            )
        if distance_to_singular_angle(self.vartheta) < SINGULAR_ANGLE_TOL:
            raise SingularKernelError(
                f"vartheta={self.vartheta!r} is within {SINGULAR_ANGLE_TOL} of a multiple of pi/4;"
                " the inversion kernels are singular there"
            )

    @property
    def is_optimal(self) -> bool:
        return abs(2 * self.vartheta - self.theta - math.pi / 2) <= OPTIMAL_TOL


def gamma_from_spec(spec: CoherenceSpec) -> HMatrix2:
    if spec.mu_abs > 1.0:
        raise ValidationError("mu_abs > 1 is not a valid coherence matrix")
    off = spec.mu_abs * math.sqrt(spec.i1 * spec.i_m1)
    return HMatrix2(spec.i1, spec.i_m1, off * complex(math.cos(spec.delta), math.sin(spec.delta)))


def aperture_intensities(gamma: HMatrix2) -> tuple[float, float]:
    return gamma.p, gamma.q


def degree_of_coherence(gamma: HMatrix2) -> tuple[float, float]:
    """Return ``(|mu|, delta)`` with ``delta = arg Gamma_{1,-1}``."""
    if gamma.p <= 0 or gamma.q <= 0:
        raise UndefinedCoherenceError("degree of coherence is undefined when an aperture is dark")
    mu_abs = abs(gamma.c) / math.sqrt(gamma.p * gamma.q)
    if mu_abs <= 1.0 + 1e-12:
        mu_abs = min(mu_abs, 1.0)
    return mu_abs, phase_of(gamma.c)


def phase_state(phi: float) -> np.ndarray:
    return np.array([1.0, np.exp(1j * phi)]) / math.sqrt(2 * math.pi)


def phase_states(phis) -> np.ndarray:
    """Rows are phase states for each angle in ``phis``."""
    phis = np.asarray(phis, dtype=float)
    out = np.empty((len(phis), 2), dtype=complex)
    out[:, 0] = 1.0
    out[:, 1] = np.exp(1j * phis)
    return out / math.sqrt(2 * math.pi)


def interference_pattern(gamma: HMatrix2, grid: PhiGrid) -> AngularDistribution:
    if not is_psd(gamma):
        raise ValidationError("coherence matrix is not PSD")
    return AngularDistribution(grid, sandwich_many(gamma, phase_states(grid.nodes)))


def polarizer_state(p: int, vartheta: float) -> np.ndarray:
    c, s = math.cos(vartheta), math.sin(vartheta)
    if p == 1:
        return np.array([c, s], dtype=complex)
    if p == -1:
        return np.array([-s, c], dtype=complex)
    raise ValidationError(f"polarizer outcome must be +1 or -1, got {p}")


def marking_states(theta: float) -> tuple[np.ndarray, np.ndarray]:
    """Polarization attached to apertures +1 and -1."""
    return (
        np.array([math.cos(theta), math.sin(theta)], dtype=complex),
        np.array([1.0, 0.0], dtype=complex),
    )


def marked_state(gamma: HMatrix2, theta: float) -> HMatrix4:
    """Cross-spectral density of path and polarization after marking."""
    u = marking_states(theta)
    g = gamma.array
    paths = np.eye(2, dtype=complex)
    out = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            out += g[i, j] * np.kron(np.outer(paths[i], paths[j]), np.outer(u[i], u[j].conj()))
    return HMatrix4(out)


def marked_joint_intensity(gtilde: HMatrix4, vartheta: float, grid: PhiGrid) -> JointDistribution:
    """Intensity behind a polarizer at ``vartheta`` for each phase node."""
    phis = phase_states(grid.nodes)
    rows = []
    for p in (1, -1):
        vectors = np.einsum("ki,j->kij", phis, polarizer_state(p, vartheta)).reshape(grid.n, 4)
        rows.append(sandwich_many(gtilde, vectors))
    return JointDistribution(grid, rows[0], rows[1], outcome_label="polarizer")


def response_matrix(vartheta: float, theta: Optional[float] = None) -> np.ndarray:
    """R[p, z] = |<p|u_z>|^2: how aperture intensity spreads over polarizer outcomes."""
    if theta is None:
        theta = optimal_theta(vartheta)
    u = marking_states(theta)
    return np.array(
        [[abs(np.vdot(polarizer_state(p, vartheta), u[z])) ** 2 for z in range(2)] for p in (1, -1)]
    )


def polarization_marginal(joint: JointDistribution) -> tuple[float, float]:
    return joint.outcome_marginal()


def phase_marginal(joint: JointDistribution) -> AngularDistribution:
    return joint.phase_marginal()


def visibility(dist: AngularDistribution) -> float:
    return dist.visibility()
