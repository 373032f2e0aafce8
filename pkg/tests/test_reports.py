"""
Tests for reports module.

This module tests the plain-text report templates and their error handling.
"""

import pytest
from hcf_lab.exceptions import TemplateError
from hcf_lab.reports import ReportRenderer


class TestReportRenderer:
    """Test suite for ReportRenderer class."""

    def test_templates_are_cached(self):
        """Test that all renderers share the compiled templates."""
        first = ReportRenderer()
        second = ReportRenderer()
        assert first._template_cache is second._template_cache
        assert first.available == [
            "acceptance", "certificate", "families", "flow", "homothety", "orbit-drift", "sln-instability",
        ]

    def test_unknown_template(self):
        """Test rendering a template that does not exist."""
        with pytest.raises(TemplateError) as exc_info:
            ReportRenderer().render("summary")
        assert "Unknown template" in str(exc_info.value)
        assert exc_info.value.template_name == "summary"

    def test_missing_variable(self):
        """Test that undefined template variables are errors."""
        with pytest.raises(TemplateError) as exc_info:
            ReportRenderer().render("flow", title="metric flow")
        assert "Failed to render report 'flow'" in str(exc_info.value)

    def test_flow_report(self):
        """Test the flow report lists its events."""
        text = ReportRenderer().render(
            "flow",
            title="xyz flow",
            final_time=0.3333,
            events=[{"kind": "blowup_detected", "time": 0.3333, "t_est": 1.0 / 3.0}],
        )
        assert text.startswith("xyz flow\n")
        assert "blowup_detected at t = 0.3333 (T_est 0.3333333333)" in text

    def test_families_report(self):
        """Test the family listing."""
        text = ReportRenderer().render(
            "families",
            families={
                "sl": {"description": "sl(m, C) with the trace metric", "params": ["m"]},
                "h3": {"description": "Heisenberg", "params": []},
            },
        )
        assert text.splitlines()[0] == "Available families:"
        assert "[m]" in text
        assert text.index("h3") < text.index("sl ")

    def test_acceptance_report(self):
        """Test pass/fail marks and the summary line."""
        criteria = [
            {"number": 1, "name": "p_xyz_closed_form", "passed": True, "measured": 1e-14,
             "threshold": 1e-10, "seconds": 0.1},
            {"number": 5, "name": "blowup_bound", "passed": False, "measured": None,
             "threshold": None, "seconds": 0.2},
        ]
        text = ReportRenderer().render(
            "acceptance", seed=1, tol_override=None, criteria=criteria, passed=False, failed=[5]
        )
        assert "[PASS]  1 p_xyz_closed_form" in text
        assert "[FAIL]  5 blowup_bound" in text
        assert text.rstrip().endswith("FAILED: 5")
