"""End-to-end runs: state -> observed joint -> kernel inversion -> diagnostics."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .classical import (
    CoherenceSpec,
    MarkingConfig,
    gamma_from_spec,
    marked_joint_intensity,
    marked_state,
    optimal_theta,
)
from .distributions import JointDistribution, PhiGrid
from .hermitian import HMatrix2
from .inversion import (
    PathologyReport,
    invert_joint,
    marking_kernels,
    path_kernel,
    phase_kernel,
    pathology_report,
)
from .quantum import BlochVector, marked_joint_probability, rho_from_bloch


@dataclass(frozen=True)
class PipelineResult:
    observed: JointDistribution
    reconstructed: JointDistribution
    report: PathologyReport


def observe_classical(gamma: HMatrix2, marking: MarkingConfig, grid: PhiGrid) -> JointDistribution:
    return marked_joint_intensity(marked_state(gamma, marking.theta), marking.vartheta, grid)


def reconstruct(observed: JointDistribution, marking: MarkingConfig) -> JointDistribution:
    kz, kphi = marking_kernels(marking)
    return invert_joint(kz, kphi, observed)


def run_classical(spec: CoherenceSpec, marking: MarkingConfig, grid: PhiGrid) -> PipelineResult:
    observed = observe_classical(gamma_from_spec(spec), marking, grid)
    reconstructed = reconstruct(observed, marking)
    return PipelineResult(observed, reconstructed, pathology_report(reconstructed))


def run_quantum(s: BlochVector, vartheta: float, grid: PhiGrid) -> PipelineResult:
    observed = marked_joint_probability(rho_from_bloch(s), vartheta, grid)
    reconstructed = invert_joint(path_kernel(vartheta), phase_kernel(vartheta), observed)
    return PipelineResult(observed, reconstructed, pathology_report(reconstructed))


def classical_min_value(i1: float, mu_abs: float, delta: float, vartheta: float, grid: PhiGrid) -> float:
    spec = CoherenceSpec.from_i1(i1, mu_abs, delta)
    return run_classical(spec, MarkingConfig(vartheta), grid).report.min_value


def quantum_state_on_sweep(sz: float, mu_abs: float, delta: float = 0.0) -> BlochVector:
    """Bloch vector with given s_z and degree of coherence ``mu_abs``.

    The transverse part has length mu_abs * sqrt(1 - s_z^2) and phase chosen so
    that arg(rho_{1,-1}) = delta.
    """
    r = mu_abs * math.sqrt(max(0.0, 1.0 - sz * sz))
    return BlochVector(r * math.cos(delta), -r * math.sin(delta), sz)


def max_deviation(a: JointDistribution, b: JointDistribution) -> float:
    return float(np.max(np.abs(a.table - b.table)))


def classical_twin(s: BlochVector, vartheta: float, grid: PhiGrid) -> PipelineResult:
    """Run the classical pipeline on the coherence matrix equal to rho(s)."""
    rho = rho_from_bloch(s)
    marking = MarkingConfig(vartheta, optimal_theta(vartheta))
    observed = observe_classical(rho, marking, grid)
    reconstructed = reconstruct(observed, marking)
    return PipelineResult(observed, reconstructed, pathology_report(reconstructed))


def bisect_onset(f, lo: float, hi: float, xtol: float = 1e-12, max_iter: int = 200) -> Optional[float]:
    """Root of f between lo (f >= 0) and hi (f < 0); None without a sign change."""
    flo, fhi = f(lo), f(hi)
    if not (flo >= 0 > fhi):
        return None
    for _ in range(max_iter):
        if hi - lo <= xtol:
            break
        mid = 0.5 * (lo + hi)
        if f(mid) >= 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
