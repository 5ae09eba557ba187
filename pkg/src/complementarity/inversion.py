"""Kernel inversion of blurred joint observations and negativity diagnostics.

A joint observation of two blurred observables gives a genuine, nonnegative
table W~(a', b'). If the blur on each marginal is undone by known kernels
M_A and M_B, applying both kernels to the whole table,

    W(a, b) = sum_{a', b'} M_A(a, a') M_B(b, b') W~(a', b'),

yields a joint whose marginals are the sharp distributions. For the
path/phase pair of a Young interferometer this W can be negative.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional, Union

import numpy as np

from .classical import (
    SINGULAR_ANGLE_TOL,
    CoherenceSpec,
    MarkingConfig,
    response_matrix,
)
from .distributions import AngularDistribution, JointDistribution, PhiGrid
from .errors import SingularKernelError, ValidationError
from .hermitian import wrap_angle
from .quantum import BlochVector

SUM_TOL = 1e-12
REPORT_TOL = 1e-10
# residual above which a row is not treated as first-harmonic
HARMONIC_FIT_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class DiscreteKernel:
    """Square real matrix acting as ``out = M @ in``; unit column sums preserve total mass."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValidationError(f"kernel must be square, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValidationError("kernel entries must be finite")
        if np.max(np.abs(m.sum(axis=0) - 1.0)) > SUM_TOL:
            raise ValidationError("kernel columns must sum to 1 (mass preservation)")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def apply(self, vec) -> np.ndarray:
        return self.matrix @ np.asarray(vec, dtype=float)

    def condition(self) -> float:
        return float(np.linalg.cond(self.matrix))

    @classmethod
    def identity(cls, size: int = 2) -> "DiscreteKernel":
        return cls(np.eye(size))


@dataclass(frozen=True)
class AngularKernel:
    """M(phi, phi') = constant + cosine_amplitude * cos(phi - phi')."""

    cosine_amplitude: float
    constant: float = 1 / (2 * math.pi)

    def __post_init__(self):
        if not math.isfinite(self.cosine_amplitude):
            raise ValidationError("cosine amplitude must be finite")
        if abs(self.constant - 1 / (2 * math.pi)) > 1e-15:
            raise ValidationError("angular kernel constant term must be 1/(2 pi)")

    def __call__(self, phi, phi_prime):
        return self.constant + self.cosine_amplitude * np.cos(np.subtract(phi, phi_prime))

    @property
    def fringe_gain(self) -> float:
        """Factor by which the kernel amplifies the first harmonic."""
        return self.cosine_amplitude * math.pi

    def matrix(self, grid: PhiGrid) -> np.ndarray:
        """Dense quadrature matrix K[j, k] = w M(phi_j, phi_k)."""
        phi = grid.nodes
        return grid.weight * self(phi[:, None], phi[None, :])

    def apply(self, values, grid: PhiGrid, at=None) -> np.ndarray:
        """Quadrature of the kernel against ``values``, evaluated at ``at`` (default: the nodes).

        Only the mean and first harmonic of ``values`` survive, so the sums
        are collapsed to those three coefficients.
        """
        values = np.asarray(values, dtype=float)
        phi = grid.nodes if at is None else np.asarray(at, dtype=float)
        w = grid.weight
        s0 = w * np.sum(values, axis=-1)
        sc = w * np.sum(values * np.cos(grid.nodes), axis=-1)
        ss = w * np.sum(values * np.sin(grid.nodes), axis=-1)
        s0, sc, ss = (np.expand_dims(x, -1) for x in (s0, sc, ss))
        return self.constant * s0 + self.cosine_amplitude * (np.cos(phi) * sc + np.sin(phi) * ss)

    @classmethod
    def identity_like(cls) -> "AngularKernel":
        """Kernel that reproduces any first-harmonic function."""
        return cls(1 / math.pi)


def path_kernel(vartheta: float) -> DiscreteKernel:
    c2 = math.cos(2 * vartheta)
    if abs(c2) <= SINGULAR_ANGLE_TOL:
        raise SingularKernelError(f"path kernel is singular at vartheta={vartheta!r} (cos 2v = {c2:.3e})")
    s, c = math.sin(vartheta) ** 2, math.cos(vartheta) ** 2
    return DiscreteKernel(np.array([[-s, c], [c, -s]]) / c2)


def phase_kernel(vartheta: float) -> AngularKernel:
    s2 = math.sin(2 * vartheta)
    if abs(s2) <= SINGULAR_ANGLE_TOL:
        raise SingularKernelError(f"phase kernel is singular at vartheta={vartheta!r} (sin 2v = {s2:.3e})")
    return AngularKernel(1 / (math.pi * s2))


def marking_kernels(marking: MarkingConfig) -> tuple[DiscreteKernel, AngularKernel]:
    """Kernels that undo a general (theta, vartheta) marking.

    The path kernel inverts the polarizer response matrix; the phase kernel
    undoes the visibility loss cos(theta) = <u(-1)|u(+1)>. For optimal
    marking these coincide with ``path_kernel`` and ``phase_kernel``.
    """
    if marking.is_optimal:
        return path_kernel(marking.vartheta), phase_kernel(marking.vartheta)
    response = response_matrix(marking.vartheta, marking.theta)
    if abs(np.linalg.det(response)) <= SINGULAR_ANGLE_TOL:
        raise SingularKernelError("polarizer response matrix is singular for this marking")
    damping = math.cos(marking.theta)
    if abs(damping) <= SINGULAR_ANGLE_TOL:
        raise SingularKernelError("marking erases the fringes completely (cos theta = 0)")
    return DiscreteKernel(np.linalg.inv(response)), AngularKernel(1 / (math.pi * damping))


def invert_path_marginal(kernel: DiscreteKernel, observed) -> tuple[float, float]:
    out = kernel.apply(observed)
    return float(out[0]), float(out[1])


def invert_phase_marginal(kernel: AngularKernel, observed: AngularDistribution) -> AngularDistribution:
    values = kernel.apply(observed.values, observed.grid)
    return AngularDistribution(observed.grid, values, mass=observed.mass)


def invert_joint(kz: DiscreteKernel, kphi: AngularKernel, joint: JointDistribution) -> JointDistribution:
    table = kz.matrix @ kphi.apply(joint.table, joint.grid)
    return JointDistribution.from_table(joint.grid, table, outcome_label="path")


def evaluate_inverted(kz: DiscreteKernel, kphi: AngularKernel, joint: JointDistribution, z: int, phi) -> np.ndarray:
    """Reconstructed joint at arbitrary phases (not only grid nodes)."""
    rows = kphi.apply(joint.table, joint.grid, at=np.atleast_1d(phi))
    return (kz.matrix @ rows)[0 if z == 1 else 1]


def generic_invert(
    ma: DiscreteKernel,
    mb: Union[DiscreteKernel, AngularKernel],
    wtilde,
    grid: Optional[PhiGrid] = None,
) -> np.ndarray:
    """Apply M_A on the first axis and M_B on the second axis of ``wtilde``."""
    wtilde = np.asarray(wtilde, dtype=float)
    if wtilde.ndim != 2 or wtilde.shape[0] != ma.size:
        raise ValidationError(f"table shape {wtilde.shape} incompatible with M_A of size {ma.size}")
    if isinstance(mb, AngularKernel):
        if grid is None or wtilde.shape[1] != grid.n:
            raise ValidationError("angular kernel needs a grid matching the table's second axis")
        mb_matrix = mb.matrix(grid)
    else:
        if wtilde.shape[1] != mb.size:
            raise ValidationError(f"table shape {wtilde.shape} incompatible with M_B of size {mb.size}")
        mb_matrix = mb.matrix
    return ma.matrix @ wtilde @ mb_matrix.T


def reconstructed_joint_closed_form(source: Union[CoherenceSpec, BlochVector], grid: PhiGrid) -> JointDistribution:
    phi = grid.nodes
    if isinstance(source, CoherenceSpec):
        fringe = source.mu_abs * math.sqrt(source.i1 * source.i_m1) * np.cos(phi + source.delta)
        row_plus = (source.i1 + fringe) / (2 * math.pi)
        row_minus = (source.i_m1 + fringe) / (2 * math.pi)
    elif isinstance(source, BlochVector):
        base = 1 + np.cos(phi) * source.sx + np.sin(phi) * source.sy
        row_plus = (base + source.sz) / (4 * math.pi)
        row_minus = (base - source.sz) / (4 * math.pi)
    else:
        raise ValidationError(f"unsupported source {type(source).__name__}")
    return JointDistribution(grid, row_plus, row_minus, outcome_label="path")


def pathology_threshold(pz) -> float:
    """Smallest |mu|^2 above which the reconstruction goes negative."""
    p1, pm1 = float(pz[0]), float(pz[1])
    if p1 <= 0 or pm1 <= 0:
        raise ValidationError("threshold is degenerate when one path carries no light")
    return min(p1 / pm1, pm1 / p1)


@dataclass(frozen=True)
class PathologyReport:
    """Negativity diagnostics of a reconstructed joint.

    ``min_value``/``argmin_*`` refer to the continuum minimum when each row is
    a first-harmonic function of phi (always true after kernel inversion), and
    to the grid minimum otherwise. ``negative_mass`` is a diagnostic of this
    package: the quadrature weight of the negative part.
    """

    min_value: float
    argmin_outcome: int
    argmin_phi: float
    negative_mass: float
    threshold_mu2: Optional[float]
    is_pathological: bool
    grid_min_value: float
    grid_argmin_outcome: int
    grid_argmin_phi: float
    mu2: Optional[float]
    tolerance: float

    def to_dict(self) -> dict:
        d = asdict(self)
        d["argmin_z"] = d.pop("argmin_outcome")
        d["grid_argmin_z"] = d.pop("grid_argmin_outcome")
        return d


def _row_continuum_min(grid: PhiGrid, row: np.ndarray) -> Optional[tuple[float, float]]:
    c0, a, b = grid.harmonics(row)
    fit = c0 + a * np.cos(grid.nodes) + b * np.sin(grid.nodes)
    scale = max(1.0, float(np.max(np.abs(row))))
    if np.max(np.abs(fit - row)) > HARMONIC_FIT_TOL * scale:
        return None
    amplitude = math.hypot(a, b)
    return c0 - amplitude, wrap_angle(math.atan2(b, a) + math.pi)


def pathology_report(joint: JointDistribution, tol: float = REPORT_TOL) -> PathologyReport:
    grid = joint.grid
    table = joint.table
    idx = np.unravel_index(np.argmin(table), table.shape)
    grid_min = float(table[idx])
    grid_outcome = 1 if idx[0] == 0 else -1
    grid_phi = float(grid.nodes[idx[1]])

    continuum = [_row_continuum_min(grid, table[r]) for r in range(2)]
    if all(c is not None for c in continuum):
        r = 0 if continuum[0][0] <= continuum[1][0] else 1
        min_value, argmin_phi = continuum[r]
        argmin_outcome = 1 if r == 0 else -1
        min_value = min(min_value, grid_min)
    else:
        min_value, argmin_outcome, argmin_phi = grid_min, grid_outcome, grid_phi

    negative_mass = float(-np.sum(np.minimum(table, 0.0)) * grid.weight)
    pz = joint.outcome_marginal()
    try:
        threshold = pathology_threshold(pz)
    except ValidationError:
        threshold = None
    mu2 = None
    if pz[0] > 0 and pz[1] > 0:
        _, a, b = grid.harmonics(table.sum(axis=0))
        # phase marginal = (1 + 2|mu| sqrt(I1 I-1) cos(phi + delta)) / (2 pi)
        mu2 = (math.pi * math.hypot(a, b)) ** 2 / (pz[0] * pz[1])
    return PathologyReport(
        min_value=float(min_value),
        argmin_outcome=argmin_outcome,
        argmin_phi=float(argmin_phi),
        negative_mass=negative_mass,
        threshold_mu2=threshold,
        is_pathological=bool(min_value < -tol),
        grid_min_value=grid_min,
        grid_argmin_outcome=grid_outcome,
        grid_argmin_phi=grid_phi,
        mu2=mu2,
        tolerance=tol,
    )
