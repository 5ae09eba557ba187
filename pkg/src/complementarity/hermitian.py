"""Small fixed-size Hermitian linear algebra (2x2 and 4x4).

2x2 matrices are stored by their independent entries so Hermiticity holds
structurally. 4x4 matrices are general arrays that are checked on
construction.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import NotPSDError, ValidationError

DEFAULT_TOL = 1e-10
HERMITIAN_TOL_4 = 1e-12
IMAG_RESIDUE_TOL = 1e-12

SIGMA_0 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

# |z=+1>, |z=-1> (also |->>, |^> in polarization space)
KET_PLUS = np.array([1, 0], dtype=complex)
KET_MINUS = np.array([0, 1], dtype=complex)


def _finite(x: complex) -> bool:
    return math.isfinite(x.real) and math.isfinite(x.imag)


@dataclass(frozen=True)
class HMatrix2:
    """2x2 Hermitian matrix ``[[p, c], [conj(c), q]]``."""

    p: float
    q: float
    c: complex = 0j

    def __post_init__(self):
        object.__setattr__(self, "p", float(self.p))
        object.__setattr__(self, "q", float(self.q))
        object.__setattr__(self, "c", complex(self.c))
        if not (math.isfinite(self.p) and math.isfinite(self.q) and _finite(self.c)):
            raise ValidationError("matrix entries must be finite")

    @classmethod
    def from_array(cls, m, tol: float = DEFAULT_TOL) -> "HMatrix2":
        m = np.asarray(m, dtype=complex)
        if m.shape != (2, 2):
            raise ValidationError(f"expected a 2x2 matrix, got shape {m.shape}")
        if np.max(np.abs(m - m.conj().T)) > tol:
            raise ValidationError("matrix is not Hermitian")
        return cls(m[0, 0].real, m[1, 1].real, m[0, 1])

    @property
    def array(self) -> np.ndarray:
        return np.array([[self.p, self.c], [self.c.conjugate(), self.q]], dtype=complex)

    @property
    def trace(self) -> float:
        return self.p + self.q

    def eigvals(self) -> tuple[float, float]:
        """Closed-form eigenvalues, ascending."""
        half_sum = 0.5 * (self.p + self.q)
        radius = math.hypot(0.5 * (self.p - self.q), abs(self.c))
        return half_sum - radius, half_sum + radius

    def scaled(self, factor: float) -> "HMatrix2":
        return HMatrix2(self.p * factor, self.q * factor, self.c * factor)


class HMatrix4:
    """4x4 Hermitian matrix, validated entrywise on construction."""

    __slots__ = ("_m",)

    def __init__(self, m, tol: float = HERMITIAN_TOL_4):
        m = np.array(m, dtype=complex)
        if m.shape != (4, 4):
            raise ValidationError(f"expected a 4x4 matrix, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValidationError("matrix entries must be finite")
        if np.max(np.abs(m - m.conj().T)) > tol:
            raise ValidationError("matrix is not Hermitian")
        m.setflags(write=False)
        self._m = m

    @property
    def array(self) -> np.ndarray:
        return self._m

    @property
    def trace(self) -> float:
        return float(np.trace(self._m).real)

    def __repr__(self):
        return f"HMatrix4({self._m!r})"


HMatrix = Union[HMatrix2, HMatrix4]


def kron(a: HMatrix2, b: HMatrix2) -> HMatrix4:
    return HMatrix4(np.kron(a.array, b.array), tol=0.0)


def sandwich(m: HMatrix, v) -> float:
    """Return the real number v^dagger M v."""
    v = np.asarray(v, dtype=complex)
    arr = m.array
    if v.shape != (arr.shape[0],):
        raise ValidationError(
            f"vector of dimension {v.shape} does not match {arr.shape[0]}x{arr.shape[0]} matrix"
        )
    value = v.conj() @ arr @ v
    if abs(value.imag) >= IMAG_RESIDUE_TOL:
        raise ValidationError(f"sandwich has imaginary residue {value.imag:.3e}")
    return float(value.real)


def sandwich_many(m: HMatrix, vectors) -> np.ndarray:
    """Vectorized ``sandwich`` over the rows of ``vectors``."""
    vectors = np.asarray(vectors, dtype=complex)
    arr = m.array
    if vectors.ndim != 2 or vectors.shape[1] != arr.shape[0]:
        raise ValidationError("vector dimension does not match matrix")
    values = np.einsum("ki,ij,kj->k", vectors.conj(), arr, vectors)
    residue = np.max(np.abs(values.imag)) if len(values) else 0.0
    if residue >= IMAG_RESIDUE_TOL:
        raise ValidationError(f"sandwich has imaginary residue {residue:.3e}")
    return values.real.copy()


def is_psd(m: HMatrix2, tol: float = DEFAULT_TOL) -> bool:
    if tol < 0:
        raise ValidationError("tol must be nonnegative")
    return m.eigvals()[0] >= -tol


def cholesky_psd(m: HMatrix2, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Lower-triangular L with L L^dagger = m, allowing rank deficiency.

    Pivots at or below ``tol`` produce a zero column instead of a division.
    """
    if not is_psd(m, tol):
        raise NotPSDError(f"matrix is not PSD (eigenvalues {m.eigvals()})")
    L = np.zeros((2, 2), dtype=complex)
    if m.p > tol:
        l00 = math.sqrt(m.p)
        l10 = m.c.conjugate() / l00
        L[0, 0] = l00
        L[1, 0] = l10
        residual = m.q - abs(l10) ** 2
    else:
        residual = m.q
    L[1, 1] = math.sqrt(residual) if residual > tol else 0.0
    return L


def phase_of(z: complex) -> float:
    """Argument in [0, 2pi); zero for a vanishing number."""
    if z == 0:
        return 0.0
    return wrap_angle(cmath.phase(z))


def wrap_angle(angle: float) -> float:
    """Map an angle into [0, 2pi)."""
    wrapped = angle % (2 * math.pi)
    # tiny negative inputs round up to exactly 2pi
    return 0.0 if wrapped >= 2 * math.pi else wrapped
