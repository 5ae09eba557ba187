"""Monte Carlo realizations of the ensembles behind the averaged quantities.

Random numbers come from numpy's PCG64 bit generator seeded through
``SeedSequence``; independent replicas use ``SeedSequence.spawn``.
Classical fields are circular complex Gaussian (only second moments are
fixed by the coherence matrix, and this is the maximum-entropy choice).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .distributions import JointDistribution, PhiGrid
from .errors import UnsamplableError, ValidationError
from .hermitian import HMatrix2, cholesky_psd

NEGATIVE_TOL = 1e-12


def make_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.PCG64(seed))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def spawn_seeds(seed: int, count: int) -> list[np.random.SeedSequence]:
    return np.random.SeedSequence(seed).spawn(count)


@dataclass(frozen=True)
class FieldSample:
    e1: complex
    e_m1: complex


@dataclass(frozen=True, eq=False)
class FieldSamples:
    """A batch of field realizations stored column-wise."""

    e1: np.ndarray
    e_m1: np.ndarray

    def __post_init__(self):
        if self.e1.shape != self.e_m1.shape or self.e1.ndim != 1:
            raise ValidationError("field components must be 1-d arrays of equal length")
        if not (np.all(np.isfinite(self.e1)) and np.all(np.isfinite(self.e_m1))):
            raise ValidationError("field samples must be finite")

    @classmethod
    def from_pairs(cls, pairs) -> "FieldSamples":
        arr = np.array([(complex(a), complex(b)) for a, b in pairs], dtype=complex).reshape(-1, 2)
        return cls(arr[:, 0], arr[:, 1])

    def __len__(self) -> int:
        return len(self.e1)

    def __iter__(self) -> Iterator[FieldSample]:
        for a, b in zip(self.e1, self.e_m1):
            yield FieldSample(complex(a), complex(b))


def sample_fields(gamma: HMatrix2, n: int, seed) -> FieldSamples:
    """Draw ``n`` amplitude pairs E = L xi with L L^dagger = gamma."""
    if n < 1:
        raise ValidationError("need at least one sample")
    L = cholesky_psd(gamma)
    rng = make_rng(seed)
    xi = (rng.standard_normal((2, n)) + 1j * rng.standard_normal((2, n))) / math.sqrt(2)
    fields = L @ xi
    return FieldSamples(fields[0], fields[1])


def _fsum_complex(z: np.ndarray) -> complex:
    return complex(math.fsum(z.real), math.fsum(z.imag))


def empirical_gamma(samples: FieldSamples) -> HMatrix2:
    """Sample average of |E><E| (raw, not renormalized)."""
    n = len(samples)
    if n == 0:
        raise ValidationError("cannot estimate a coherence matrix from an empty sample")
    if n < 2:
        raise ValidationError("need at least two samples")
    p = math.fsum(np.abs(samples.e1) ** 2) / n
    q = math.fsum(np.abs(samples.e_m1) ** 2) / n
    c = _fsum_complex(samples.e1 * samples.e_m1.conj()) / n
    return HMatrix2(p, q, c)


def project_density(m: HMatrix2) -> HMatrix2:
    """Nearest unit-trace PSD matrix: clip negative eigenvalues, renormalize."""
    vals, vecs = np.linalg.eigh(m.array)
    vals = np.clip(vals, 0.0, None)
    if vals.sum() <= 0:
        raise ValidationError("matrix has no positive part to normalize")
    out = (vecs * (vals / vals.sum())) @ vecs.conj().T
    return HMatrix2(out[0, 0].real, out[1, 1].real, out[0, 1])


@dataclass(frozen=True, eq=False)
class OutcomeCounts:
    grid: PhiGrid
    counts_plus: np.ndarray
    counts_minus: np.ndarray
    total: int

    def __post_init__(self):
        for name in ("counts_plus", "counts_minus"):
            arr = np.asarray(getattr(self, name), dtype=np.int64)
            if arr.shape != (self.grid.n,):
                raise ValidationError(f"{name} must have one count per grid node")
            if np.any(arr < 0):
                raise ValidationError("counts must be nonnegative")
            object.__setattr__(self, name, arr)
        if int(self.counts_plus.sum() + self.counts_minus.sum()) != self.total:
            raise ValidationError("total does not match the sum of counts")


def sample_outcomes(joint: JointDistribution, n: int, seed) -> OutcomeCounts:
    """Multinomial draw of ``n`` detection events over the 2 x grid cells."""
    if n < 1:
        raise ValidationError("need at least one detection event")
    table = joint.table
    if table.min() < -NEGATIVE_TOL:
        raise UnsamplableError(
            f"distribution has negative entries (min {table.min():.6g}); only observed, "
            "nonnegative distributions describe detection statistics. A reconstructed joint "
            "with negative values is not a probability distribution and cannot be sampled."
        )
    probs = np.clip(table, 0.0, None).ravel() * joint.grid.weight
    probs = probs / probs.sum()
    counts = make_rng(seed).multinomial(n, probs).reshape(2, -1)
    return OutcomeCounts(joint.grid, counts[0], counts[1], int(n))


def empirical_joint(counts: OutcomeCounts, outcome_label="polarizer") -> JointDistribution:
    if counts.total < 1:
        raise ValidationError("no events recorded")
    scale = 1.0 / (counts.total * counts.grid.weight)
    return JointDistribution(
        counts.grid,
        counts.counts_plus * scale,
        counts.counts_minus * scale,
        outcome_label=outcome_label,
    )
