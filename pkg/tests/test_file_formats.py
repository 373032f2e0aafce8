"""
Tests for file_formats module.

Covers the tagged JSON documents for algebras, metrics, systems and
certificates, and the CSV trace export with its events sidecar.
"""

import json

import numpy as np
import pytest
from hcf_lab.algebra_core import ComplexLieAlgebra, HermitianMetric, bracket_distance
from hcf_lab.constants import FORMAT_TAG
from hcf_lab.curvature import Verdict, soliton_check
from hcf_lab.exceptions import FileFormatError
from hcf_lab.families import build_heisenberg, build_sl2_chevalley, xyz_rhs
from hcf_lab.file_formats import (
    dumps,
    read_algebra,
    read_certificate,
    read_metric,
    read_system,
    read_trace_csv,
    sidecar_path,
    write_algebra,
    write_certificate,
    write_metric,
    write_system,
    write_trace_csv,
)
from hcf_lab.flow import FlowEvent, FlowTrace, IntegratorConfig, integrate_reduced


class TestJsonDocuments:
    """Test suite for algebra, metric and system documents."""

    def test_algebra_document(self, tmp_path):
        """Test the sparse listing and reading it back."""
        alg = build_sl2_chevalley()
        path = write_algebra(alg, tmp_path / "sl2.json")
        payload = json.loads(path.read_text(encoding="utf-8"))

        assert payload["format"] == FORMAT_TAG
        assert payload["kind"] == "algebra"
        assert all(entry["i"] < entry["j"] for entry in payload["constants"])

        loaded = read_algebra(path)
        assert loaded.labels == ("E", "H", "F")
        assert bracket_distance(loaded, alg) == 0.0
        assert not loaded.verified

    def test_complex_metric_document(self, tmp_path):
        """Test a metric with complex off-diagonal entries."""
        g = HermitianMetric(np.array([[2.0, 1j], [-1j, 3.0]]))
        loaded = read_metric(write_metric(g, tmp_path / "g.json"))
        assert np.array_equal(loaded.H, g.H)

    def test_system_document_keeps_metadata(self, tmp_path):
        """Test a system document with extra fields."""
        alg = build_heisenberg(1)
        path = write_system(alg, HermitianMetric.identity(3), tmp_path / "h3.json", family="heisenberg:m=1")
        system = read_system(path)
        assert system["family"] == "heisenberg:m=1"
        assert system["algebra"].dim == 3
        assert np.array_equal(system["metric"].H, np.eye(3))

    def test_certificate_document(self, tmp_path):
        """Test writing and reading a soliton certificate."""
        cert = soliton_check(build_heisenberg(1), HermitianMetric.identity(3))
        loaded = read_certificate(write_certificate(cert, tmp_path / "cert.json", source="heisenberg"))
        assert loaded.verdict == Verdict.ALGEBRAIC
        assert loaded.lambda_ == cert.lambda_
        assert np.array_equal(loaded.D, cert.D)
        assert loaded.der_dim == 6

    def test_dumps_is_sorted_and_unwraps_numpy(self):
        """Test deterministic JSON text."""
        text = dumps({"b": np.float64(0.5), "a": np.arange(2)})
        assert text.index('"a"') < text.index('"b"')
        assert json.loads(text) == {"a": [0, 1], "b": 0.5}


class TestJsonErrors:
    """Test suite for malformed JSON documents."""

    def test_missing_file(self, tmp_path):
        """Test reading a file that does not exist."""
        with pytest.raises(FileFormatError) as exc_info:
            read_algebra(tmp_path / "missing.json")
        assert "File not found" in str(exc_info.value)
        assert exc_info.value.reason == "missing"

    def test_wrong_format_tag(self, tmp_path):
        """Test that documents without the format tag are rejected."""
        path = tmp_path / "old.json"
        path.write_text(json.dumps({"format": "hcf-lab/0", "kind": "metric"}), encoding="utf-8")
        with pytest.raises(FileFormatError) as exc_info:
            read_metric(path)
        assert "Unsupported format tag" in str(exc_info.value)

    def test_wrong_kind(self, tmp_path):
        """Test reading a metric document as an algebra."""
        path = write_metric(HermitianMetric.identity(2), tmp_path / "g.json")
        with pytest.raises(FileFormatError) as exc_info:
            read_algebra(path)
        assert exc_info.value.reason == "kind"

    def test_invalid_json(self, tmp_path):
        """Test a file that is not JSON."""
        path = tmp_path / "broken.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(FileFormatError) as exc_info:
            read_system(path)
        assert exc_info.value.reason == "unreadable"

    def test_metric_entry_count(self, tmp_path):
        """Test a metric with too few entries."""
        path = tmp_path / "short.json"
        path.write_text(
            json.dumps({"format": FORMAT_TAG, "kind": "metric", "dim": 2, "entries": [[1.0, 0.0]]}),
            encoding="utf-8",
        )
        with pytest.raises(FileFormatError) as exc_info:
            read_metric(path)
        assert "expected 4" in str(exc_info.value)

    def test_algebra_with_bad_index(self, tmp_path):
        """Test that invalid structure constants surface as a format error."""
        path = tmp_path / "bad.json"
        payload = {
            "format": FORMAT_TAG,
            "kind": "algebra",
            "dim": 2,
            "constants": [{"i": 1, "j": 0, "k": 0, "re": 1.0}],
        }
        path.write_text(json.dumps(payload), encoding="utf-8")
        with pytest.raises(FileFormatError) as exc_info:
            read_algebra(path)
        assert "Invalid algebra data" in str(exc_info.value)

    def test_system_without_metric(self, tmp_path):
        """Test a system document missing its metric."""
        path = tmp_path / "system.json"
        payload = {"format": FORMAT_TAG, "kind": "system", "algebra": {"dim": 1, "constants": []}}
        path.write_text(json.dumps(payload), encoding="utf-8")
        with pytest.raises(FileFormatError) as exc_info:
            read_system(path)
        assert "needs algebra and metric" in str(exc_info.value)
        assert exc_info.value.reason == "fields"

    def test_metric_without_entries(self, tmp_path):
        """Test that a document missing a required field names it."""
        path = tmp_path / "metric.json"
        path.write_text(json.dumps({"format": FORMAT_TAG, "kind": "metric", "dim": 2}), encoding="utf-8")
        with pytest.raises(FileFormatError) as exc_info:
            read_metric(path)
        assert "Missing required fields: entries" in str(exc_info.value)
        assert exc_info.value.reason == "fields"


class TestTraceCsv:
    """Test suite for the CSV trace export."""

    @pytest.fixture
    def reduced_trace(self):
        trace = FlowTrace()
        for t, state in [(0.0, [1.0, 0.5]), (0.1, [0.9, 0.25]), (0.2, [0.8, 0.125])]:
            trace.record(t, np.array(state), {"ratio": lambda s: s[1] / s[0]})
        trace.events.append(FlowEvent("blowup_detected", 0.2, t_est=0.21, detail={"measure": 1e-9}))
        return trace

    def test_reduced_trace(self, tmp_path, reduced_trace):
        """Test a reduced trace with labels, derived scalars and events."""
        path = write_trace_csv(reduced_trace, tmp_path / "yz.csv", state_labels=["y", "z"], n=2)

        header = path.read_text(encoding="utf-8").splitlines()[0]
        assert header == "t,y,z,ratio"
        sidecar = json.loads(sidecar_path(path).read_text(encoding="utf-8"))
        assert sidecar["n"] == 2
        assert sidecar["state_kind"] == "reduced"

        loaded = read_trace_csv(path)
        assert loaded.times == reduced_trace.times
        assert np.array_equal(loaded.final_state, reduced_trace.final_state)
        assert loaded.derived["ratio"] == reduced_trace.derived["ratio"]
        assert loaded.blowup_time == 0.21

    def test_matrix_trace(self, tmp_path):
        """Test that complex metric samples are written as re/im columns."""
        trace = FlowTrace()
        trace.record(0.0, np.array([[2.0, 1j], [-1j, 3.0]]), None)
        path = write_trace_csv(trace, tmp_path / "metric.csv")

        header = path.read_text(encoding="utf-8").splitlines()[0].split(",")
        assert header[:3] == ["t", "H_0_0_re", "H_0_0_im"]
        assert len(header) == 1 + 8

        loaded = read_trace_csv(path)
        assert loaded.is_matrix
        assert np.array_equal(loaded.final_state, trace.final_state)

    def test_sidecar_name(self):
        """Test the sidecar naming convention."""
        assert sidecar_path("out/xyz.csv").name == "xyz.events.json"

    def test_empty_trace(self, tmp_path):
        """Test that empty traces are not exported."""
        with pytest.raises(FileFormatError) as exc_info:
            write_trace_csv(FlowTrace(), tmp_path / "empty.csv")
        assert "empty trace" in str(exc_info.value)

    def test_label_count(self, tmp_path, reduced_trace):
        """Test that the number of labels must match the state."""
        with pytest.raises(FileFormatError):
            write_trace_csv(reduced_trace, tmp_path / "bad.csv", state_labels=["x", "y", "z"])

    def test_header_mismatch(self, tmp_path, reduced_trace):
        """Test that a CSV edited out of sync with its sidecar is rejected."""
        path = write_trace_csv(reduced_trace, tmp_path / "yz.csv", state_labels=["y", "z"])
        lines = path.read_text(encoding="utf-8").splitlines()
        lines[0] = "t,a,b,ratio"
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        with pytest.raises(FileFormatError) as exc_info:
            read_trace_csv(path)
        assert exc_info.value.reason == "header"

    def test_fixed_step_export_is_byte_identical(self, tmp_path):
        """Test that two rk4_fixed runs export the same CSV bytes."""
        cfg = IntegratorConfig(method="rk4_fixed", h_init=1e-2, t_max=0.1)
        paths = []
        for name in ("first.csv", "second.csv"):
            trace = integrate_reduced(xyz_rhs(2), [1.0, 0.9, 0.8], cfg)
            paths.append(write_trace_csv(trace, tmp_path / name, state_labels=["x", "y", "z"], n=2))
        assert paths[0].read_bytes() == paths[1].read_bytes()


def test_abelian_algebra_has_no_constants(tmp_path):
    """Test that the zero bracket is written with an empty listing."""
    path = write_algebra(ComplexLieAlgebra.abelian(2), tmp_path / "ab.json")
    assert json.loads(path.read_text(encoding="utf-8"))["constants"] == []
    assert read_algebra(path).norm == 0.0

