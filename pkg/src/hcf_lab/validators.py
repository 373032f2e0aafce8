"""
Validation utilities for the HCF lab.

This module provides validation functions for the parameters, vectors and
matrices accepted by the public constructors, the integrator configuration
and the command-line front end.
"""

import math
from pathlib import Path
from typing import Any, Dict, List, Optional, Set

import numpy as np

from .exceptions import DimensionMismatchError, ValidationError


class ParameterValidator:
    """
    Validator class for numerical parameters and array inputs.

    All methods are class methods; they either return the cleaned value or
    raise ValidationError / DimensionMismatchError.
    """

    MIN_SL_RANK = 2
    MAX_SL_RANK = 12
    MIN_HEISENBERG_RANK = 1
    MAX_HEISENBERG_RANK = 20
    MAX_ALGEBRA_DIM = 64

    @classmethod
    def validate_required_fields(cls, data: Dict[str, Any], required_fields: List[str]) -> None:
        """
        Validate that all required fields are present in the data.

        Args:
            data: Dictionary to validate
            required_fields: List of required field names

        Raises:
            ValidationError: If any required field is missing
        """
        missing_fields = [field for field in required_fields if field not in data]
        if missing_fields:
            raise ValidationError(
                f"Missing required fields: {', '.join(missing_fields)}",
                field_name=missing_fields[0] if len(missing_fields) == 1 else None
            )

    @classmethod
    def validate_integer_field(
        cls,
        value: Any,
        field_name: str,
        min_value: int,
        max_value: Optional[int] = None
    ) -> int:
        """
        Validate integer field with range constraints.

        Args:
            value: The value to validate
            field_name: Name of the field being validated
            min_value: Minimum allowed value
            max_value: Maximum allowed value, unbounded when None

        Returns:
            int: Validated integer value

        Raises:
            ValidationError: If value is not an integer or is out of range
        """
        if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
            raise ValidationError(
                f"{field_name} must be an integer",
                field_name=field_name,
                field_value=value,
                expected_type="integer"
            )
        value = int(value)
        if value < min_value or (max_value is not None and value > max_value):
            upper = "inf" if max_value is None else str(max_value)
            raise ValidationError(
                f"{field_name} must be between {min_value} and {upper}",
                field_name=field_name,
                field_value=value
            )
        return value

    @classmethod
    def validate_real_field(cls, value: Any, field_name: str) -> float:
        """
        Validate that a value is a finite real number.

        Args:
            value: The value to validate
            field_name: Name of the field being validated

        Returns:
            float: Validated value

        Raises:
            ValidationError: If value is not a finite real number
        """
        if isinstance(value, bool) or not isinstance(value, (int, float, np.integer, np.floating)):
            raise ValidationError(
                f"{field_name} must be a real number",
                field_name=field_name,
                field_value=value,
                expected_type="float"
            )
        value = float(value)
        if not math.isfinite(value):
            raise ValidationError(
                f"{field_name} must be finite",
                field_name=field_name,
                field_value=value
            )
        return value

    @classmethod
    def validate_positive_field(cls, value: Any, field_name: str) -> float:
        """Validate a strictly positive finite real number."""
        value = cls.validate_real_field(value, field_name)
        if value <= 0.0:
            raise ValidationError(
                f"{field_name} must be positive",
                field_name=field_name,
                field_value=value
            )
        return value

    @classmethod
    def validate_nonzero_field(cls, value: Any, field_name: str) -> float:
        """Validate a finite real number different from zero."""
        value = cls.validate_real_field(value, field_name)
        if value == 0.0:
            raise ValidationError(
                f"{field_name} must be non-zero",
                field_name=field_name,
                field_value=value
            )
        return value

    @classmethod
    def validate_enum_field(cls, value: Any, field_name: str, valid_values: Set[str]) -> str:
        """
        Validate that a string belongs to a fixed set of values.

        Args:
            value: The value to validate
            field_name: Name of the field being validated
            valid_values: Allowed values

        Returns:
            str: Validated value

        Raises:
            ValidationError: If value is not one of the allowed values
        """
        if not isinstance(value, str) or value not in valid_values:
            raise ValidationError(
                f"{field_name} must be one of: {', '.join(sorted(valid_values))}",
                field_name=field_name,
                field_value=value,
                expected_type="enum"
            )
        return value

    @classmethod
    def validate_boolean_field(cls, value: Any, field_name: str) -> bool:
        """Validate a boolean flag."""
        if not isinstance(value, bool):
            raise ValidationError(
                f"{field_name} must be a boolean",
                field_name=field_name,
                field_value=value,
                expected_type="boolean"
            )
        return value

    @classmethod
    def validate_vector(cls, value: Any, dim: int, field_name: str) -> np.ndarray:
        """
        Validate a complex vector of the given length.

        Returns:
            np.ndarray: complex128 copy of the vector

        Raises:
            DimensionMismatchError: If the vector has the wrong shape
        """
        arr = np.asarray(value, dtype=complex)
        if arr.shape != (dim,):
            raise DimensionMismatchError(
                f"{field_name} must be a vector of length {dim}",
                expected=(dim,),
                actual=arr.shape,
                operation=field_name
            )
        return arr

    @classmethod
    def validate_square_matrix(
        cls,
        value: Any,
        field_name: str,
        dim: Optional[int] = None
    ) -> np.ndarray:
        """
        Validate a finite complex square matrix, optionally of a fixed size.

        Returns:
            np.ndarray: complex128 copy of the matrix

        Raises:
            DimensionMismatchError: If the matrix is not square or has the wrong size
            ValidationError: If the matrix contains non-finite entries
        """
        arr = np.array(value, dtype=complex)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise DimensionMismatchError(
                f"{field_name} must be a square matrix",
                expected="(n, n)",
                actual=arr.shape,
                operation=field_name
            )
        if dim is not None and arr.shape[0] != dim:
            raise DimensionMismatchError(
                f"{field_name} must be {dim}x{dim}",
                expected=(dim, dim),
                actual=arr.shape,
                operation=field_name
            )
        if not np.all(np.isfinite(arr)):
            raise ValidationError(
                f"{field_name} contains non-finite entries",
                field_name=field_name
            )
        return arr

    @classmethod
    def validate_existing_file(cls, value: Any, field_name: str = "path") -> Path:
        """Validate that a path points to an existing regular file."""
        path = Path(str(value))
        if not path.is_file():
            raise ValidationError(
                f"{field_name} does not point to an existing file",
                field_name=field_name,
                field_value=value,
                expected_type="file path"
            )
        return path
