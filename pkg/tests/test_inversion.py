import math

import numpy as np
import pytest
from conftest import bloch_vectors, specs, varthetas
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from complementarity.classical import (
    CoherenceSpec,
    MarkingConfig,
    gamma_from_spec,
    interference_pattern,
    marked_joint_intensity,
    marked_state,
    optimal_theta,
    response_matrix,
)
from complementarity.distributions import AngularDistribution, JointDistribution, PhiGrid
from complementarity.errors import SingularKernelError, ValidationError
from complementarity.inversion import (
    AngularKernel,
    DiscreteKernel,
    evaluate_inverted,
    generic_invert,
    invert_joint,
    invert_path_marginal,
    invert_phase_marginal,
    marking_kernels,
    path_kernel,
    pathology_report,
    pathology_threshold,
    phase_kernel,
    reconstructed_joint_closed_form,
)
from complementarity.pipeline import run_classical, run_quantum
from complementarity.quantum import BlochVector, phase_distribution, rho_from_bloch

TWO_PI = 2 * math.pi
V = math.pi / 3


def observed(spec, vartheta, grid):
    return marked_joint_intensity(marked_state(gamma_from_spec(spec), optimal_theta(vartheta)), vartheta, grid)


class TestKernels:
    def test_path_kernel_example(self):
        np.testing.assert_allclose(path_kernel(V).matrix, [[1.5, -0.5], [-0.5, 1.5]], atol=1e-15)

    @pytest.mark.parametrize("v", [math.pi / 4, 3 * math.pi / 4, math.pi / 4 + 1e-7])
    def test_path_kernel_singular(self, v):
        with pytest.raises(SingularKernelError):
            path_kernel(v)

    @given(varthetas)
    def test_path_kernel_inverts_response(self, v):
        m = path_kernel(v).matrix
        np.testing.assert_allclose(m @ response_matrix(v), np.eye(2), atol=1e-12)
        np.testing.assert_allclose(m.sum(axis=1), 1.0, atol=1e-12)
        np.testing.assert_allclose(m.sum(axis=0), 1.0, atol=1e-12)

    def test_phase_kernel_examples(self):
        assert phase_kernel(V)(0.3, 0.3) == pytest.approx(0.5267075400397567, abs=1e-15)
        k = phase_kernel(math.pi / 4)
        for d in (0.0, 1.0, 2.5):
            assert k(d, 0.0) == pytest.approx((1 + 2 * math.cos(d)) / TWO_PI, abs=1e-15)
        with pytest.raises(SingularKernelError):
            phase_kernel(1e-8)
        with pytest.raises(SingularKernelError):
            phase_kernel(math.pi / 2)

    def test_kernel_types_validate(self):
        with pytest.raises(ValidationError):
            DiscreteKernel(np.array([[1.0, 0.5], [0.0, 1.0]]))
        with pytest.raises(ValidationError):
            AngularKernel(1.0, constant=0.2)

    @given(varthetas)
    def test_marking_kernels_reduce_to_closed_forms(self, v):
        kz, kphi = marking_kernels(MarkingConfig(v))
        assert kz.matrix is path_kernel(v).matrix or np.allclose(kz.matrix, path_kernel(v).matrix)
        assert kphi.cosine_amplitude == pytest.approx(phase_kernel(v).cosine_amplitude)
        general = MarkingConfig(v, optimal_theta(v) + 1e-3, enforce_optimal=False)
        kz_g, kphi_g = marking_kernels(general)
        np.testing.assert_allclose(kz_g.matrix @ response_matrix(v, general.theta), np.eye(2), atol=1e-10)


class TestMarginalInversion:
    def test_path_examples(self):
        assert invert_path_marginal(path_kernel(V), (0.65, 0.35)) == pytest.approx((0.8, 0.2), abs=1e-15)
        for v in (0.2, 0.5, 1.0, 1.3):
            assert invert_path_marginal(path_kernel(v), (0.5, 0.5)) == pytest.approx((0.5, 0.5), abs=1e-15)

    @given(varthetas, st.floats(0, 1))
    def test_path_round_trip(self, v, x):
        truth = np.array([x, 1 - x])
        back = invert_path_marginal(path_kernel(v), response_matrix(v) @ truth)
        np.testing.assert_allclose(back, truth, atol=1e-12)

    def test_phase_uniform_fixed_point(self, grid):
        flat = AngularDistribution(grid, np.full(grid.n, 1 / TWO_PI))
        np.testing.assert_allclose(invert_phase_marginal(phase_kernel(V), flat).values, 1 / TWO_PI, atol=1e-15)

    @given(specs, varthetas, st.integers(3, 64))
    def test_phase_restores_interference(self, spec, v, n):
        g = PhiGrid(n)
        damped = observed(spec, v, g).phase_marginal()
        restored = invert_phase_marginal(phase_kernel(v), damped)
        np.testing.assert_allclose(restored.values, interference_pattern(gamma_from_spec(spec), g).values, atol=1e-12)
        assert g.integrate(restored.values) == pytest.approx(1.0, abs=1e-12)

    def test_phase_matches_continuous_quadrature(self):
        # independent route: adaptive quadrature of the continuous kernel integral
        spec = CoherenceSpec(0.5, 0.5, 1.0, 0.0)
        k = phase_kernel(V)
        s2 = math.sin(2 * V)

        def damped(phi):
            return (1 + s2 * np.cos(phi)) / TWO_PI

        g = PhiGrid(5)
        restored = invert_phase_marginal(k, observed(spec, V, g).phase_marginal())
        for phi, value in zip(g.nodes, restored.values):
            brute, _ = quad(lambda x: k(phi, x) * damped(x), 0, TWO_PI, epsabs=1e-14)
            assert value == pytest.approx(brute, abs=1e-12)


class TestJointInversion:
    def test_classical_frozen_value(self, grid):
        joint = observed(CoherenceSpec(0.8, 0.2, 1, 0), V, grid)
        value = evaluate_inverted(path_kernel(V), phase_kernel(V), joint, -1, math.pi)[0]
        assert value == pytest.approx(-0.031830988618379069, abs=1e-12)

    def test_continuous_quadrature_oracle(self):
        # full double inversion done with scipy quad on the closed-form observed intensity
        spec = CoherenceSpec(0.8, 0.2, 1, 0)
        kz, kphi = path_kernel(V), phase_kernel(V)
        s2, c2 = math.sin(V) ** 2, math.cos(V) ** 2
        amp = math.sin(2 * V) * math.sqrt(0.16)

        def obs(p, x):
            diag = s2 * 0.8 + c2 * 0.2 if p == 0 else c2 * 0.8 + s2 * 0.2
            return (diag + amp * math.cos(x)) / TWO_PI

        def brute(z, phi):
            return sum(
                kz.matrix[z, p] * quad(lambda x: kphi(phi, x) * obs(p, x), 0, TWO_PI, epsabs=1e-14)[0] for p in (0, 1)
            )

        assert brute(1, math.pi) == pytest.approx(-0.2 / TWO_PI, abs=1e-12)
        g = PhiGrid(3)
        rec = invert_joint(kz, kphi, observed(spec, V, g))
        for k, phi in enumerate(g.nodes):
            assert rec.row_plus[k] == pytest.approx(brute(0, phi), abs=1e-12)
            assert rec.row_minus[k] == pytest.approx(brute(1, phi), abs=1e-12)

    def test_incoherent_rows_constant(self, grid):
        rec = invert_joint(path_kernel(V), phase_kernel(V), observed(CoherenceSpec(0.8, 0.2, 0.0), V, grid))
        np.testing.assert_allclose(rec.row_plus, 0.8 / TWO_PI, atol=1e-15)
        np.testing.assert_allclose(rec.row_minus, 0.2 / TWO_PI, atol=1e-15)

    def test_quantum_frozen_value(self, grid):
        from complementarity.quantum import marked_joint_probability

        joint = marked_joint_probability(rho_from_bloch(BlochVector(0.8, 0, 0.6)), V, grid)
        value = evaluate_inverted(path_kernel(V), phase_kernel(V), joint, -1, math.pi)[0]
        assert value == pytest.approx((1 - 0.6 - 0.8) / (4 * math.pi), abs=1e-12)

    @given(specs, varthetas, st.integers(3, 64))
    def test_oracle_equivalence_and_marginals(self, spec, v, n):
        g = PhiGrid(n)
        result = run_classical(spec, MarkingConfig(v), g)
        closed = reconstructed_joint_closed_form(spec, g)
        np.testing.assert_allclose(result.reconstructed.table, closed.table, atol=1e-10)
        assert result.reconstructed.mass() == pytest.approx(1.0, abs=1e-12)
        pz = result.reconstructed.outcome_marginal()
        np.testing.assert_allclose(pz, (spec.i1, spec.i_m1), atol=1e-12)
        exact_phase = interference_pattern(gamma_from_spec(spec), g).values
        np.testing.assert_allclose(result.reconstructed.phase_marginal().values, exact_phase, atol=1e-12)
        # marginals of the joint inversion equal the separately inverted marginals
        obs_pz = result.observed.outcome_marginal()
        np.testing.assert_allclose(pz, invert_path_marginal(path_kernel(v), obs_pz), atol=1e-12)
        sep = invert_phase_marginal(phase_kernel(v), result.observed.phase_marginal())
        np.testing.assert_allclose(result.reconstructed.phase_marginal().values, sep.values, atol=1e-12)

    @given(bloch_vectors(), varthetas, st.integers(3, 64))
    def test_quantum_marginals(self, s, v, n):
        g = PhiGrid(n)
        rec = run_quantum(s, v, g).reconstructed
        np.testing.assert_allclose(rec.table, reconstructed_joint_closed_form(s, g).table, atol=1e-10)
        np.testing.assert_allclose(rec.outcome_marginal(), (0.5 * (1 + s.sz), 0.5 * (1 - s.sz)), atol=1e-12)
        np.testing.assert_allclose(
            rec.phase_marginal().values, phase_distribution(rho_from_bloch(s), g).values, atol=1e-12
        )

    @given(specs)
    @settings(max_examples=30)
    def test_vartheta_independence(self, spec):
        g = PhiGrid(64)
        a = run_classical(spec, MarkingConfig(math.pi / 6), g).reconstructed
        b = run_classical(spec, MarkingConfig(math.pi / 3), g).reconstructed
        assert np.max(np.abs(a.table - b.table)) < 1e-10


class TestGenericInvert:
    def test_identity_kernels(self, rng):
        table = rng.uniform(size=(2, 3))
        np.testing.assert_allclose(generic_invert(DiscreteKernel.identity(), DiscreteKernel.identity(3), table), table)

    def test_specialization_matches_invert_joint(self, grid):
        joint = observed(CoherenceSpec(0.7, 0.3, 0.8, 1.3), 0.4, grid)
        dense = generic_invert(path_kernel(0.4), phase_kernel(0.4), joint.table, grid)
        fast = invert_joint(path_kernel(0.4), phase_kernel(0.4), joint).table
        np.testing.assert_allclose(dense, fast, atol=1e-12)

    def test_factorized_input(self, rng):
        wa = np.array([0.3, 0.7])
        wb = rng.dirichlet(np.ones(4))
        ma = path_kernel(0.5)
        mb_matrix = rng.uniform(-1, 1, size=(4, 4))
        mb_matrix += (1 - mb_matrix.sum(axis=0))[None, :] / 4
        mb = DiscreteKernel(mb_matrix)
        out = generic_invert(ma, mb, np.outer(wa, wb))
        np.testing.assert_allclose(out, np.outer(ma.apply(wa), mb.apply(wb)), atol=1e-14)

    def test_dimension_mismatch(self, grid):
        with pytest.raises(ValidationError):
            generic_invert(DiscreteKernel.identity(), DiscreteKernel.identity(3), np.ones((2, 4)))
        with pytest.raises(ValidationError):
            generic_invert(DiscreteKernel.identity(), phase_kernel(V), np.ones((2, 4)), grid)


class TestClosedForm:
    def test_examples(self):
        g = PhiGrid(4)
        shifted = CoherenceSpec(0.8, 0.2, 1, -g.nodes[0])
        assert reconstructed_joint_closed_form(shifted, g).row_plus[0] == pytest.approx(0.1909859317102744, abs=1e-15)
        flat = reconstructed_joint_closed_form(BlochVector(0, 0, 0), g)
        np.testing.assert_allclose(flat.table, 1 / (4 * math.pi), atol=1e-15)

    @given(specs, st.integers(3, 40))
    def test_marginals(self, spec, n):
        g = PhiGrid(n)
        rec = reconstructed_joint_closed_form(spec, g)
        np.testing.assert_allclose(rec.outcome_marginal(), (spec.i1, spec.i_m1), atol=1e-12)
        np.testing.assert_allclose(
            rec.phase_marginal().values, interference_pattern(gamma_from_spec(spec), g).values, atol=1e-12
        )

    @given(specs, st.integers(3, 40))
    def test_classical_equals_quantum(self, spec, n):
        from complementarity.quantum import bloch_from_rho

        g = PhiGrid(n)
        s = bloch_from_rho(gamma_from_spec(spec))
        a = reconstructed_joint_closed_form(spec, g).table
        b = reconstructed_joint_closed_form(s, g).table
        np.testing.assert_allclose(a, b, atol=1e-12)


class TestPathology:
    def test_threshold_examples(self):
        assert pathology_threshold((0.5, 0.5)) == 1.0
        assert pathology_threshold((0.8, 0.2)) == pytest.approx(0.25)
        sz = 0.6
        assert (1 - sz) / (1 + sz) == pytest.approx(pathology_threshold((0.5 * (1 + sz), 0.5 * (1 - sz))))
        with pytest.raises(ValidationError):
            pathology_threshold((1.0, 0.0))

    def test_fully_coherent_example(self, grid):
        rec = run_classical(CoherenceSpec(0.8, 0.2, 1, 0), MarkingConfig(V), grid).reconstructed
        report = pathology_report(rec)
        assert report.min_value == pytest.approx(-0.031830988618379069, abs=1e-12)
        assert report.argmin_outcome == -1
        assert report.argmin_phi == pytest.approx(math.pi, abs=1e-9)
        assert report.is_pathological
        assert report.threshold_mu2 == pytest.approx(0.25, abs=1e-12)
        assert report.mu2 == pytest.approx(1.0, abs=1e-12)
        assert report.grid_min_value > report.min_value
        # negative part of (0.2 - 0.4 cos(phi - pi)) / 2pi, integrated analytically
        a = math.acos(0.5)
        expected = (0.4 * math.sin(a) * 2 - 0.2 * 2 * a) / TWO_PI
        assert report.negative_mass == pytest.approx(expected, abs=1e-5)

    def test_incoherent_example(self, grid):
        rec = run_classical(CoherenceSpec(0.8, 0.2, 0, 0), MarkingConfig(V), grid).reconstructed
        report = pathology_report(rec)
        assert report.min_value == pytest.approx(0.2 / TWO_PI, abs=1e-14)
        assert not report.is_pathological
        assert report.negative_mass == 0.0

    def test_boundary_not_pathological(self, grid):
        rec = run_classical(CoherenceSpec(0.8, 0.2, 0.5, 0), MarkingConfig(V), grid).reconstructed
        report = pathology_report(rec)
        assert abs(report.min_value) < 1e-10
        assert not report.is_pathological

    def test_coarse_grid_cannot_hide_negativity(self):
        # with 3 nodes and delta chosen so no node lands near the minimum
        g = PhiGrid(3)
        spec = CoherenceSpec(0.8, 0.2, 0.6, math.pi - g.nodes[0] + math.pi / 3)
        rec = run_classical(spec, MarkingConfig(V), g).reconstructed
        report = pathology_report(rec)
        assert report.grid_min_value > 0
        assert report.is_pathological
        assert report.min_value == pytest.approx((0.2 - 0.6 * 0.4) / TWO_PI, abs=1e-12)

    def test_non_harmonic_rows_use_grid_minimum(self, grid):
        row = np.full(grid.n, 1 / (4 * math.pi))
        row[5] += 0.01
        row[6] -= 0.01
        report = pathology_report(JointDistribution(grid, row, row.copy()))
        assert report.min_value == pytest.approx(row[6])
        assert report.argmin_phi == grid.nodes[6]

    @given(specs, varthetas)
    @settings(max_examples=200)
    def test_criterion_matches_threshold(self, spec, v):
        threshold = pathology_threshold((spec.i1, spec.i_m1))
        if abs(spec.mu_abs**2 - threshold) < 1e-8:
            return
        report = run_classical(spec, MarkingConfig(v), PhiGrid(16)).report
        assert report.is_pathological == (spec.mu_abs**2 > threshold)
        assert report.negative_mass >= 0
