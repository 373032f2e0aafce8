"""
Tests for validators module.

This module tests the validation of scalar parameters, vectors, matrices
and file paths accepted by the public constructors.
"""

import numpy as np
import pytest
from hcf_lab.validators import ParameterValidator
from hcf_lab.exceptions import DimensionMismatchError, ValidationError


class TestParameterValidator:
    """Test suite for ParameterValidator class."""

    def test_validate_required_fields_success(self):
        """Test successful validation of required fields."""
        data = {"dim": 3, "constants": [], "labels": ["a", "b", "c"]}

        # Should not raise any exception
        ParameterValidator.validate_required_fields(data, ["dim", "constants"])

    def test_validate_required_fields_missing(self):
        """Test validation failure when required fields are missing."""
        with pytest.raises(ValidationError) as exc_info:
            ParameterValidator.validate_required_fields({"dim": 3}, ["dim", "constants", "labels"])

        assert "Missing required fields" in str(exc_info.value)
        assert "constants" in str(exc_info.value)

    def test_validate_integer_field_success(self):
        """Test integer validation inside the allowed range."""
        assert ParameterValidator.validate_integer_field(3, "n", 2, 10) == 3
        assert ParameterValidator.validate_integer_field(np.int64(5), "n", 2) == 5

    def test_validate_integer_field_rejects_non_integers(self):
        """Test integer validation with floats, strings and booleans."""
        for value in [2.5, "3", True, None]:
            with pytest.raises(ValidationError) as exc_info:
                ParameterValidator.validate_integer_field(value, "n", 1)
            assert "must be an integer" in str(exc_info.value)

    def test_validate_integer_field_out_of_range(self):
        """Test integer validation outside the range."""
        with pytest.raises(ValidationError) as exc_info:
            ParameterValidator.validate_integer_field(1, "n", 2, 5)
        assert "between 2 and 5" in str(exc_info.value)

        with pytest.raises(ValidationError) as exc_info:
            ParameterValidator.validate_integer_field(-1, "seed", 0)
        assert "between 0 and inf" in str(exc_info.value)

    def test_validate_real_field(self):
        """Test real-number validation."""
        assert ParameterValidator.validate_real_field(2, "b") == 2.0
        assert ParameterValidator.validate_real_field(np.float64(-0.5), "b") == -0.5

        for value in ["1.0", None, 1j, True]:
            with pytest.raises(ValidationError) as exc_info:
                ParameterValidator.validate_real_field(value, "b")
            assert "must be a real number" in str(exc_info.value)

        for value in [float("nan"), float("inf")]:
            with pytest.raises(ValidationError) as exc_info:
                ParameterValidator.validate_real_field(value, "b")
            assert "must be finite" in str(exc_info.value)

    def test_validate_positive_and_nonzero(self):
        """Test positivity and non-zero checks."""
        assert ParameterValidator.validate_positive_field(0.25, "y") == 0.25
        assert ParameterValidator.validate_nonzero_field(-2.0, "a") == -2.0

        with pytest.raises(ValidationError) as exc_info:
            ParameterValidator.validate_positive_field(0.0, "y")
        assert "must be positive" in str(exc_info.value)

        with pytest.raises(ValidationError) as exc_info:
            ParameterValidator.validate_nonzero_field(0.0, "a")
        assert "must be non-zero" in str(exc_info.value)
        assert exc_info.value.field_name == "a"

    def test_validate_enum_field(self):
        """Test enum validation."""
        methods = {"rk4_fixed", "rk45_adaptive"}
        assert ParameterValidator.validate_enum_field("rk4_fixed", "method", methods) == "rk4_fixed"

        with pytest.raises(ValidationError) as exc_info:
            ParameterValidator.validate_enum_field("euler", "method", methods)
        assert "must be one of: rk45_adaptive, rk4_fixed" in str(exc_info.value)

    def test_validate_boolean_field(self):
        """Test boolean validation."""
        assert ParameterValidator.validate_boolean_field(False, "flag") is False
        with pytest.raises(ValidationError):
            ParameterValidator.validate_boolean_field(1, "flag")

    def test_validate_vector(self):
        """Test vector validation returns a complex copy of the right length."""
        vec = ParameterValidator.validate_vector([1, 2, 3], 3, "u")
        assert vec.dtype == np.complex128
        assert vec.tolist() == [1, 2, 3]

        with pytest.raises(DimensionMismatchError) as exc_info:
            ParameterValidator.validate_vector([1, 2], 3, "u")
        assert "length 3" in str(exc_info.value)
        assert exc_info.value.operation == "u"

    def test_validate_square_matrix(self):
        """Test square-matrix validation."""
        M = ParameterValidator.validate_square_matrix(np.eye(2), "H", 2)
        assert M.shape == (2, 2)

        with pytest.raises(DimensionMismatchError):
            ParameterValidator.validate_square_matrix(np.ones((2, 3)), "H")
        with pytest.raises(DimensionMismatchError) as exc_info:
            ParameterValidator.validate_square_matrix(np.eye(3), "H", 2)
        assert "2x2" in str(exc_info.value)
        with pytest.raises(ValidationError) as exc_info:
            ParameterValidator.validate_square_matrix([[1.0, np.nan], [0.0, 1.0]], "H")
        assert "non-finite" in str(exc_info.value)

    def test_validate_existing_file(self, tmp_path):
        """Test file-path validation."""
        target = tmp_path / "system.json"
        target.write_text("{}", encoding="utf-8")
        assert ParameterValidator.validate_existing_file(str(target)) == target

        with pytest.raises(ValidationError) as exc_info:
            ParameterValidator.validate_existing_file(tmp_path / "missing.json")
        assert "existing file" in str(exc_info.value)


class TestExceptions:
    """Test error context serialization."""

    def test_validation_error_context(self):
        """Test that ValidationError carries its field information."""
        error = ValidationError("bad", field_name="y0", field_value=2.0, diagnostics={"member": False})
        data = error.to_dict()

        assert data["error_type"] == "ValidationError"
        assert data["error_code"] == "VALIDATION_ERROR"
        assert data["context"]["field_name"] == "y0"
        assert data["context"]["field_value"] == "2.0"
        assert data["context"]["diagnostics"] == {"member": False}

    def test_dimension_mismatch_context(self):
        """Test that DimensionMismatchError records expected and actual shapes."""
        error = DimensionMismatchError("mismatch", expected=(3,), actual=(2,), operation="bracket_eval")
        assert error.to_dict()["context"] == {
            "expected": "(3,)",
            "actual": "(2,)",
            "operation": "bracket_eval",
        }
