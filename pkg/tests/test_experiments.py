"""
Tests for experiments module.

Covers the named experiments, the experiment registry and the acceptance
runner, including a check that a broken closed form is caught.
"""

import numpy as np
import pytest
from hcf_lab.algebra_core import ComplexLieAlgebra, HermitianMetric
from hcf_lab.constants import ORBIT_INVARIANT_MIN_EIG
from hcf_lab.curvature import Verdict
from hcf_lab.exceptions import (
    DimensionMismatchError,
    ExperimentError,
    NotALieAlgebraError,
    ValidationError,
)
from hcf_lab.experiments import (
    EXPERIMENTS,
    ExperimentSpec,
    exp_flow_metric,
    exp_flow_reduced,
    exp_homothety_distinction,
    exp_orbit_drift,
    exp_sln_instability,
    exp_soliton_audit,
    load_audit_input,
    orbit_b_closed_form,
    run_acceptance,
    run_experiment,
    seeded_rng,
)
from hcf_lab.families import asymptotic_ratio, build_heisenberg
from hcf_lab.file_formats import write_system
from hcf_lab.flow import IntegratorConfig


class TestExperimentSpec:
    """Test suite for ExperimentSpec and the registry."""

    def test_unknown_experiment(self):
        """Test that unregistered names are rejected."""
        with pytest.raises(ValidationError) as exc_info:
            ExperimentSpec("ricci-flow")
        assert "experiment must be one of" in str(exc_info.value)

    def test_registry_covers_names(self):
        """Test every registered experiment can be named in a spec."""
        for name in EXPERIMENTS:
            assert ExperimentSpec(name).to_dict()["name"] == name

    def test_invalid_parameters(self):
        """Test that unexpected parameters raise ExperimentError."""
        with pytest.raises(ExperimentError) as exc_info:
            run_experiment(ExperimentSpec("homothety", {"radius": 2.0}))
        assert "Invalid parameters for homothety" in str(exc_info.value)

    def test_dispatch(self):
        """Test dispatching a spec to its function."""
        result = run_experiment(ExperimentSpec("soliton-audit", {"source": "sl:m=2"}))
        assert result.name == "soliton-audit"

    def test_seeded_streams(self):
        """Test that streams are reproducible and independent."""
        assert seeded_rng(5, 2).normal() == seeded_rng(5, 2).normal()
        assert seeded_rng(5, 1).normal() != seeded_rng(5, 2).normal()


class TestSolitonAudit:
    """Test suite for exp_soliton_audit."""

    def test_static_family(self):
        """Test sl(2) with the trace metric, including the perfectness check."""
        result = exp_soliton_audit("sl:m=2")
        assert result.passed
        assert result.report["certificate"]["verdict"] == "static"
        assert result.report["perfectness"]["consistent"]
        assert result.report["source"] == {"family": "sl", "params": {"m": 2.0}}

    def test_heisenberg_with_random_metric(self):
        """Test that a seeded random metric on h3 is an algebraic soliton."""
        result = exp_soliton_audit("heisenberg:m=1", seed=3, use_random_metric=True)
        assert result.report["certificate"]["verdict"] == "algebraic"
        assert result.report["source"]["metric"] == "random"
        assert "perfectness" not in result.report

    def test_non_soliton(self):
        """Test nu_t at t = 1/2 has no certificate."""
        result = exp_soliton_audit("perfect-double:t=0.5")
        assert result.report["certificate"]["verdict"] == Verdict.NONE.value
        assert not result.passed

    def test_from_file(self, tmp_path):
        """Test auditing a system file."""
        path = write_system(build_heisenberg(1), HermitianMetric.identity(3), tmp_path / "h3.json")
        result = exp_soliton_audit(str(path))
        assert result.report["source"] == {"file": str(path)}
        assert result.report["certificate"]["verdict"] == "algebraic"

    def test_rejects_non_lie_bracket(self, tmp_path):
        """Test that a file violating Jacobi is refused."""
        alg = ComplexLieAlgebra.from_sparse(3, [(0, 1, 0, 1.0), (0, 2, 1, 1.0)])
        path = write_system(alg, HermitianMetric.identity(3), tmp_path / "bad.json")
        with pytest.raises(NotALieAlgebraError):
            exp_soliton_audit(str(path))

    def test_unknown_family(self):
        """Test that an unknown family spec is an input error."""
        with pytest.raises(ValidationError):
            exp_soliton_audit("so:m=3")

    def test_missing_system_file(self, tmp_path):
        """Test that a .json source that does not exist is rejected before reading."""
        with pytest.raises(ValidationError) as exc_info:
            load_audit_input(str(tmp_path / "absent.json"))
        assert "source does not point to an existing file" in str(exc_info.value)

    def test_random_metric_flag_must_be_boolean(self):
        """Test the use_random_metric type check."""
        with pytest.raises(ValidationError) as exc_info:
            load_audit_input("sl:m=2", use_random_metric="yes")
        assert "use_random_metric must be a boolean" in str(exc_info.value)


class TestInstability:
    """Test suite for exp_sln_instability."""

    def test_start_outside_region(self):
        """Test that starting below the boundary of D is rejected with diagnostics."""
        with pytest.raises(ValidationError) as exc_info:
            exp_sln_instability(2, y0=0.1, z0=0.9)
        assert "outside the invariant region" in str(exc_info.value)
        assert exc_info.value.diagnostics["member"] is False

    def test_requires_n_at_least_two(self):
        """Test the rank validation."""
        with pytest.raises(ValidationError):
            exp_sln_instability(1)

    def test_canonical_metric_is_unstable(self):
        """Test the run from (0.999, 0.999) for sl(3)."""
        result = exp_sln_instability(2)
        report = result.report

        assert result.passed
        assert report["region"]["persistent"]
        assert report["converged_to_origin"]
        assert report["ratio"]["target"] == pytest.approx(asymptotic_ratio(2))
        assert report["ratio"]["error_at_level"] <= 1e-4
        assert report["blowup"]["bound_holds"]
        assert report["limit_bracket"]["last_distance"] < 1e-3
        assert set(result.traces) == {"yz", "xyz"}
        assert result.state_labels["xyz"] == ["x", "y", "z"]

    def test_y_decreases_inside_region(self):
        """Test that y' <= 0 at every trajectory sample lying in D."""
        report = exp_sln_instability(2).report
        monotonicity = report["monotonicity"]

        assert monotonicity["samples_in_D"] > 0
        assert monotonicity["holds"] is True
        assert monotonicity["max_ydot"] <= 1e-10

    def test_log_ratio_rate_vanishes_near_origin(self):
        """Test that d/dt ln(z^2/y) is close to zero once the ratio has settled."""
        ratio = exp_sln_instability(2).report["ratio"]
        assert abs(ratio["log_rate_at_level"]) < 1e-2


class TestPerfectFamilyExperiments:
    """Test suite for the homothety and orbit drift experiments."""

    def test_homothety_distinction(self):
        """Test nu_0 is separated from nu_{2^-1/4} and nu_{1,1}."""
        result = exp_homothety_distinction()
        distances = result.report["distances"]

        assert result.passed
        assert distances["nu_printed"]["full"] == pytest.approx(0.0522, abs=2e-3)
        assert distances["nu_1_1"]["full"] == pytest.approx(0.0623, abs=2e-3)
        assert distances["nu_1_1"]["block"] > 0.15

    def test_recorded_values(self):
        """Test the recorded trace/det values against the computed block matrices."""
        rows = {row["bracket"]: row for row in exp_homothety_distinction().report["recorded_values"]}
        assert rows["nu_0"]["oracle_trace"] == pytest.approx(3.0)
        assert rows["nu_0"]["oracle_det"] == pytest.approx(2.0)
        assert rows["nu_1"]["oracle_trace"] == pytest.approx(8.0)
        assert rows["nu_1"]["oracle_det"] == pytest.approx(8.0)
        assert rows["nu_1"]["printed_formula_trace"] == pytest.approx(13.0)
        assert not rows["nu_0"]["discrepancy"]

    def test_orbit_drift_moves_away_from_nu_0(self):
        """Test that a small b0 drifts towards nu_{+1}."""
        result = exp_orbit_drift(1.0, 0.01)
        report = result.report

        assert result.passed
        assert report["b_initial"] == pytest.approx(0.01)
        assert report["b_final"] > 0.5
        assert report["distances"]["nu_+1"]["final"] < report["distances"]["nu_0"]["final"]

    def test_orbit_drift_follows_rescaled_time_law(self):
        """Test that alpha^2 b^2 / (1 - b^4) is conserved and b increases."""
        law = exp_orbit_drift(1.0, 0.01).report["orbit_law"]

        assert law["samples"] > 10
        assert law["b_monotone"] is True
        assert law["invariant_drift"] < 1e-3
        assert law["tau_final"] > 0.0

    def test_orbit_drift_b_increases_towards_one(self):
        """Test that b0 in (0, 1) increases monotonically and stays below 1."""
        result = exp_orbit_drift(1.0, 0.5)
        trace = result.traces["metric"]
        b = np.array(trace.derived["b"])
        healthy = np.array(trace.derived["min_eig"]) >= ORBIT_INVARIANT_MIN_EIG
        b = b[healthy]

        assert b[0] == pytest.approx(0.5)
        assert np.all((b > 0.0) & (b < 1.0))
        assert np.all(np.diff(b) > 0.0)
        assert b[-1] > 0.75

    def test_orbit_closed_form(self):
        """Test the b(tau) solution: start value, limit, symmetry, fixed points and the ODE."""
        tau = np.linspace(0.0, 5.0, 51)
        b = orbit_b_closed_form(0.3, tau)

        assert b[0] == pytest.approx(0.3)
        assert orbit_b_closed_form(0.3, np.array([40.0]))[0] == pytest.approx(1.0)
        assert np.allclose(orbit_b_closed_form(-0.3, tau), -b)
        assert np.all(orbit_b_closed_form(0.0, tau) == 0.0)
        assert np.all(orbit_b_closed_form(1.0, tau) == 1.0)

        step = 1e-6
        for t in (0.0, 0.7, 2.5):
            ahead, behind = orbit_b_closed_form(0.3, np.array([t + step, t - step]))
            derivative = (ahead - behind) / (2 * step)
            value = orbit_b_closed_form(0.3, np.array([t]))[0]
            assert derivative == pytest.approx(0.5 * value * (1 - value ** 4), rel=1e-6)

    def test_orbit_drift_rejects_a0_zero(self):
        """Test the gauge validation."""
        with pytest.raises(ValidationError):
            exp_orbit_drift(0.0, 0.1)


class TestGenericFlows:
    """Test suite for exp_flow_metric and exp_flow_reduced."""

    def test_xyz_equal_start(self):
        """Test blow-up at T = 1/3 from (1, 1, 1) with n = 2."""
        result = exp_flow_reduced("xyz", 2, [1.0, 1.0, 1.0])
        report = result.report
        assert report["blowup_upper_bound"] == pytest.approx(1.0 / 3.0)
        assert report["blowup_time"] == pytest.approx(1.0 / 3.0, abs=1e-6)
        assert result.state_labels == {"xyz": ["x", "y", "z"]}

    def test_yz_reports_region(self):
        """Test that the (y, z) run records membership of its start point."""
        result = exp_flow_reduced("yz", 2, [0.9, 0.9], IntegratorConfig(t_max=1.0))
        assert result.report["region_start"]["member"] is True
        assert result.report["final_time"] == 1.0

    def test_reduced_validation(self):
        """Test the system, rank and state-length checks."""
        with pytest.raises(ValidationError):
            exp_flow_reduced("xy", 2, [1.0, 1.0])
        with pytest.raises(ValidationError):
            exp_flow_reduced("yz", 1, [0.5, 0.5])
        with pytest.raises(DimensionMismatchError):
            exp_flow_reduced("xyz", 2, [1.0, 1.0])

    def test_metric_flow_of_family(self):
        """Test the metric flow experiment on sl(2)."""
        result = exp_flow_metric("sl:m=2", IntegratorConfig(t_max=0.25))
        trace = result.traces["metric"]
        assert result.report["final_time"] == 0.25
        assert np.allclose(trace.final_state, 0.5 * np.eye(3), atol=1e-10)
        assert trace.derived["trace_H"][0] == pytest.approx(3.0)


class TestAcceptance:
    """Test suite for run_acceptance."""

    def test_fast_criteria_pass(self):
        """Test the closed-form, fixed-point, boundary and static criteria."""
        summary = run_acceptance(only=[1, 2, 3, 8])
        assert [c.number for c in summary.criteria] == [1, 2, 3, 8]
        assert summary.passed, summary.to_dict()
        assert summary.failed == []
        closed_form = summary.criteria[0]
        assert type(closed_form.passed) is bool
        assert closed_form.details["block_leakage"] <= 1e-12

    def test_homothety_criterion_names_closest_pair(self):
        """Test that criterion 10 records which pair attains the smallest distance."""
        criterion = run_acceptance(only=[10]).criteria[0]
        assert criterion.details["closest_pair"] == "nu_0 vs nu_printed"
        assert criterion.details["closest_signature"] in ("full", "block")
        distances = criterion.details["distances"]
        assert criterion.measured == distances["nu_printed"][criterion.details["closest_signature"]]

    def test_broken_closed_form_is_caught(self, monkeypatch):
        """Test that a perturbed curvature formula fails criterion 1."""
        from hcf_lab import experiments

        original = experiments.p_xyz_closed_form

        def perturbed(n, x, y, z):
            p_sl, p_i, p_s = original(n, x, y, z)
            return p_sl, p_i * (1.0 + 1e-6), p_s

        monkeypatch.setattr(experiments, "p_xyz_closed_form", perturbed)
        summary = run_acceptance(only=[1])
        assert not summary.passed
        assert summary.failed == [1]
        assert summary.criteria[0].measured == pytest.approx(1e-6, rel=1e-3)

    def test_raising_criterion_is_recorded(self, monkeypatch):
        """Test that an exception inside a criterion marks it failed."""
        from hcf_lab import experiments

        def boom(rng, tol):
            raise RuntimeError("boom")

        monkeypatch.setattr(experiments, "criterion_fixed_points", boom)
        summary = run_acceptance(only=[2])
        result = summary.criteria[0]
        assert not result.passed
        assert result.name == "error"
        assert result.details == {"error": "boom", "type": "RuntimeError"}

    def test_tolerance_override(self):
        """Test that a tighter tol replaces the default threshold."""
        summary = run_acceptance(tol=1e-11, only=[1])
        assert summary.criteria[0].threshold == 1e-11
        assert summary.to_dict()["tol_override"] == 1e-11
