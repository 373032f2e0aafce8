"""
Tests for the curvature module.

Covers the curvature operator P, its gauge equivariance, soliton
certificates and the homothety signatures.
"""

import numpy as np
import pytest
from hcf_lab.algebra_core import ComplexLieAlgebra, GaugeTransform, HermitianMetric, unitary_frame
from hcf_lab.curvature import (
    Verdict,
    gauge_equivariance_check,
    homothety_signature,
    normalized_spectrum,
    signature_distance,
    soliton_check,
    static_check,
    static_perfectness_check,
    theta_form,
    ttcr_operator,
)
from hcf_lab.exceptions import DimensionMismatchError, ValidationError
from hcf_lab.families import build_heisenberg, build_sl, random_gauge, random_metric


@pytest.fixture
def rng():
    return np.random.default_rng(11)


class TestCurvatureOperator:
    """Test suite for ttcr_operator."""

    def test_sl_trace_metric_is_scalar(self):
        """Test P = m Id on sl(m) with the trace metric."""
        for m in (2, 3):
            alg, g = build_sl(m)
            op = ttcr_operator(alg, g)
            assert np.allclose(op.P, m * np.eye(alg.dim), atol=1e-12)
            assert op.cross_check_residual < 1e-12

    def test_heisenberg_curvature(self):
        """Test P = diag(0, 0, 1) on h3 with the standard metric."""
        alg = build_heisenberg(1)
        op = ttcr_operator(alg, HermitianMetric.identity(3))
        assert np.allclose(op.P, np.diag([0.0, 0.0, 1.0]), atol=1e-14)

    def test_abelian_curvature_vanishes(self):
        """Test P = 0 for the zero bracket."""
        op = ttcr_operator(ComplexLieAlgebra.abelian(3), HermitianMetric.identity(3))
        assert np.all(op.P == 0)
        assert op.cross_check_residual == 0.0

    def test_cross_check_and_hermiticity(self, rng):
        """Test that both evaluations agree and H P is Hermitian for random metrics."""
        alg = build_heisenberg(2)
        g = random_metric(alg.dim, rng)
        op = ttcr_operator(alg, g)
        assert op.cross_check_residual < 1e-12
        assert op.hermiticity_defect() < 1e-12
        assert op.is_positive_semidefinite()
        assert np.allclose(op.theta, theta_form(alg, g))

    def test_frame_independence(self, rng):
        """Test that P does not depend on the unitary frame."""
        alg, _ = build_sl(2)
        g = random_metric(alg.dim, rng)
        Q, _ = np.linalg.qr(rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))
        default = ttcr_operator(alg, g).P
        rotated = ttcr_operator(alg, g, frame=unitary_frame(g) @ Q).P
        assert np.linalg.norm(default - rotated) <= 1e-12 * np.linalg.norm(default)

    def test_rejects_non_unitary_frame(self):
        """Test validation of a supplied frame."""
        alg, g = build_sl(2)
        with pytest.raises(ValidationError) as exc_info:
            ttcr_operator(alg, g, frame=2.0 * np.eye(3))
        assert "not unitary" in str(exc_info.value)

    def test_dimension_mismatch(self):
        """Test that algebra and metric must have the same dimension."""
        alg, _ = build_sl(2)
        with pytest.raises(DimensionMismatchError) as exc_info:
            ttcr_operator(alg, HermitianMetric.identity(2))
        assert exc_info.value.operation == "ttcr_operator"

    def test_gauge_equivariance(self, rng):
        """Test P^{h.g}_{h.mu} = h P h^-1."""
        for alg in (build_sl(2)[0], build_heisenberg(1)):
            g = random_metric(alg.dim, rng)
            assert gauge_equivariance_check(alg, g, random_gauge(alg.dim, rng)) < 1e-10

    def test_metric_scaling(self, rng):
        """Test P(c H) = P(H) / c."""
        alg, _ = build_sl(2)
        g = random_metric(3, rng)
        P = ttcr_operator(alg, g).P
        P_scaled = ttcr_operator(alg, g.scaled(4.0)).P
        assert np.allclose(P_scaled, P / 4.0)


class TestSolitonCheck:
    """Test suite for soliton certificates."""

    def test_sl_is_static(self):
        """Test the static verdict with lambda = m for sl(m)."""
        for m in (2, 3):
            alg, g = build_sl(m)
            cert = soliton_check(alg, g)
            assert cert.verdict == Verdict.STATIC
            assert cert.lambda_ == pytest.approx(float(m), rel=1e-10)
            assert cert.kind == "shrinking"
            assert np.all(cert.D == 0)
            assert static_check(alg, g) == pytest.approx(float(m))

    def test_heisenberg_is_algebraic_expanding(self):
        """Test P = -Id + diag(1, 1, 2) on h3."""
        alg = build_heisenberg(1)
        cert = soliton_check(alg, HermitianMetric.identity(3))
        assert cert.verdict == Verdict.ALGEBRAIC
        assert cert.lambda_ == pytest.approx(-1.0, abs=1e-10)
        assert cert.kind == "expanding"
        assert np.allclose(cert.D, np.diag([1.0, 1.0, 2.0]), atol=1e-9)
        assert cert.d_star_is_derivation
        assert cert.der_dim == 6
        assert static_check(alg, HermitianMetric.identity(3)) is None

    def test_heisenberg_diagonal_metric(self):
        """Test a diagonal metric on h3 is still an algebraic soliton."""
        alg = build_heisenberg(1)
        cert = soliton_check(alg, HermitianMetric(np.diag([2.0, 3.0, 5.0])))
        assert cert.verdict == Verdict.ALGEBRAIC
        assert cert.residual < 1e-10

    def test_abelian_is_static_steady(self):
        """Test the zero bracket gives a steady static certificate."""
        cert = soliton_check(ComplexLieAlgebra.abelian(2), HermitianMetric.identity(2))
        assert cert.verdict == Verdict.STATIC
        assert cert.lambda_ == 0.0
        assert cert.kind == "steady"
        assert static_check(ComplexLieAlgebra.abelian(2), HermitianMetric.identity(2)) == 0.0

    def test_certificate_is_gauge_invariant(self, rng):
        """Test that moving the soliton by a gauge keeps the verdict and lambda."""
        from hcf_lab.algebra_core import gauge_act_bracket, gauge_act_metric

        alg, g = build_sl(2)
        h = random_gauge(3, rng)
        cert = soliton_check(gauge_act_bracket(h, alg), gauge_act_metric(h, g))
        assert cert.verdict == Verdict.STATIC
        assert cert.lambda_ == pytest.approx(2.0, rel=1e-9)

    def test_certificate_serialization(self):
        """Test to_dict of a certificate."""
        cert = soliton_check(build_heisenberg(1), HermitianMetric.identity(3))
        data = cert.to_dict()
        assert data["verdict"] == "algebraic"
        assert data["kind"] == "expanding"
        assert len(data["D"]) == 3
        assert data["D"][2][2][0] == pytest.approx(2.0, abs=1e-9)
        assert data["tol"] == cert.tol

    def test_static_perfectness(self):
        """Test that static metrics with lambda != 0 live on perfect algebras."""
        alg, g = build_sl(2)
        result = static_perfectness_check(alg, g)
        assert result["static"] and result["perfect"] and result["consistent"]
        assert result["derived_rank"] == 3

        result = static_perfectness_check(build_heisenberg(1), HermitianMetric.identity(3))
        assert not result["static"]
        assert result["consistent"]


class TestHomotheticSignatures:
    """Test suite for normalized curvature spectra."""

    def test_signature_is_scale_invariant(self, rng):
        """Test that scaling the metric leaves the signature unchanged."""
        alg = build_heisenberg(1)
        g = random_metric(3, rng)
        assert signature_distance(
            homothety_signature(alg, g), homothety_signature(alg, g.scaled(7.0))
        ) < 1e-12

    def test_signature_is_gauge_invariant(self, rng):
        """Test invariance under pull-back by a gauge."""
        from hcf_lab.algebra_core import gauge_act_bracket, gauge_act_metric

        alg = build_heisenberg(1)
        g = random_metric(3, rng)
        h = random_gauge(3, rng)
        moved = homothety_signature(gauge_act_bracket(h, alg), gauge_act_metric(h, g))
        assert signature_distance(homothety_signature(alg, g), moved) < 1e-10

    def test_sl_signature_is_uniform(self):
        """Test the signature of a static metric is constant."""
        alg, g = build_sl(2)
        assert np.allclose(homothety_signature(alg, g), np.full(3, 1.0 / 3.0))

    def test_normalized_spectrum_zero_trace(self):
        """Test that a traceless spectrum is reported as zeros."""
        assert np.all(normalized_spectrum(np.zeros((2, 2))) == 0)

    def test_signature_length_mismatch(self):
        """Test signature_distance validation."""
        with pytest.raises(DimensionMismatchError):
            signature_distance(np.ones(2), np.ones(3))
        assert signature_distance(np.array([0.2, 0.8]), np.array([0.25, 0.75])) == pytest.approx(0.05)


def test_gauge_transform_identity_leaves_p_unchanged():
    """Test the trivial gauge."""
    alg, g = build_sl(2)
    assert gauge_equivariance_check(alg, g, GaugeTransform.identity(3)) < 1e-14
