"""
Custom exceptions for the HCF lab.

This module defines specific exception classes for the different kinds of
failure that can occur while building metric Lie algebras, computing
curvature, integrating flows and running experiments.
"""

from typing import Any, Dict, Optional, Sequence


class HcfLabError(Exception):
    """
    Base exception class for all HCF lab errors.

    Attributes:
        message: Human-readable error message
        error_code: Optional error code for programmatic handling
        context: Optional dictionary with additional error context
    """

    def __init__(
        self,
        message: str,
        error_code: Optional[str] = None,
        context: Optional[Dict[str, Any]] = None
    ) -> None:
        super().__init__(message)
        self.message = message
        self.error_code = error_code
        self.context = context or {}

    def to_dict(self) -> Dict[str, Any]:
        """Convert exception to dictionary for serialization."""
        return {
            "error_type": self.__class__.__name__,
            "message": self.message,
            "error_code": self.error_code,
            "context": self.context
        }


class ValidationError(HcfLabError):
    """
    Raised when input validation fails.

    This exception is raised when required parameters are missing,
    have the wrong type, or lie outside their admissible range.
    """

    def __init__(
        self,
        message: str,
        field_name: Optional[str] = None,
        field_value: Optional[Any] = None,
        expected_type: Optional[str] = None,
        diagnostics: Optional[Dict[str, Any]] = None
    ) -> None:
        context: Dict[str, Any] = {}
        if field_name:
            context["field_name"] = field_name
        if field_value is not None:
            context["field_value"] = str(field_value)
        if expected_type:
            context["expected_type"] = expected_type
        if diagnostics:
            context["diagnostics"] = diagnostics

        super().__init__(message, "VALIDATION_ERROR", context)
        self.field_name = field_name
        self.field_value = field_value
        self.expected_type = expected_type
        self.diagnostics = diagnostics or {}


class DimensionMismatchError(HcfLabError):
    """Raised when vectors, matrices or tensors have incompatible shapes."""

    def __init__(
        self,
        message: str,
        expected: Optional[Any] = None,
        actual: Optional[Any] = None,
        operation: Optional[str] = None
    ) -> None:
        context: Dict[str, Any] = {}
        if expected is not None:
            context["expected"] = str(expected)
        if actual is not None:
            context["actual"] = str(actual)
        if operation:
            context["operation"] = operation

        super().__init__(message, "DIMENSION_MISMATCH", context)
        self.expected = expected
        self.actual = actual
        self.operation = operation


class SingularGaugeError(HcfLabError):
    """Raised when a gauge transformation is not invertible."""

    def __init__(
        self,
        message: str,
        determinant: Optional[float] = None,
        operation: Optional[str] = None
    ) -> None:
        context: Dict[str, Any] = {}
        if determinant is not None:
            context["abs_determinant"] = float(determinant)
        if operation:
            context["operation"] = operation

        super().__init__(message, "SINGULAR_GAUGE", context)
        self.determinant = determinant
        self.operation = operation


class IndefiniteMetricError(HcfLabError):
    """
    Raised when a Hermitian matrix that must be positive definite is not.

    The context carries the smallest eigenvalue and the full spectrum so the
    caller can see how far from positive the matrix was.
    """

    def __init__(
        self,
        message: str,
        min_eigenvalue: Optional[float] = None,
        eigenvalues: Optional[Sequence[float]] = None,
        operation: Optional[str] = None
    ) -> None:
        context: Dict[str, Any] = {}
        if min_eigenvalue is not None:
            context["min_eigenvalue"] = float(min_eigenvalue)
        if eigenvalues is not None:
            context["eigenvalues"] = [float(v) for v in eigenvalues]
        if operation:
            context["operation"] = operation

        super().__init__(message, "INDEFINITE_METRIC", context)
        self.min_eigenvalue = min_eigenvalue
        self.eigenvalues = eigenvalues
        self.operation = operation


class NotALieAlgebraError(HcfLabError):
    """Raised when a structure tensor fails the Jacobi identity."""

    def __init__(
        self,
        message: str,
        jacobi_residual: Optional[float] = None,
        tol: Optional[float] = None
    ) -> None:
        context: Dict[str, Any] = {}
        if jacobi_residual is not None:
            context["jacobi_residual"] = float(jacobi_residual)
        if tol is not None:
            context["tol"] = float(tol)

        super().__init__(message, "NOT_A_LIE_ALGEBRA", context)
        self.jacobi_residual = jacobi_residual
        self.tol = tol


class IntegrationError(HcfLabError):
    """
    Raised when an ODE integration cannot proceed.

    Typical cause is step-size underflow close to a singularity or a
    right-hand side that returns non-finite values at every trial step.
    """

    def __init__(
        self,
        message: str,
        time: Optional[float] = None,
        step: Optional[float] = None,
        operation: Optional[str] = None
    ) -> None:
        context: Dict[str, Any] = {}
        if time is not None:
            context["time"] = float(time)
        if step is not None:
            context["step"] = float(step)
        if operation:
            context["operation"] = operation

        super().__init__(message, "INTEGRATION_ERROR", context)
        self.time = time
        self.step = step
        self.operation = operation


class FileFormatError(HcfLabError):
    """Raised when an input or output file cannot be read or is malformed."""

    def __init__(
        self,
        message: str,
        path: Optional[str] = None,
        reason: Optional[str] = None
    ) -> None:
        context: Dict[str, Any] = {}
        if path:
            context["path"] = str(path)
        if reason:
            context["reason"] = reason

        super().__init__(message, "FILE_FORMAT_ERROR", context)
        self.path = path
        self.reason = reason


class TemplateError(HcfLabError):
    """
    Raised when report template processing fails.

    This exception is raised when template rendering fails,
    templates are not found, or template syntax is invalid.
    """

    def __init__(
        self,
        message: str,
        template_name: Optional[str] = None,
        template_variables: Optional[Dict[str, Any]] = None
    ) -> None:
        context: Dict[str, Any] = {}
        if template_name:
            context["template_name"] = template_name
        if template_variables:
            context["template_variables"] = sorted(template_variables)

        super().__init__(message, "TEMPLATE_ERROR", context)
        self.template_name = template_name
        self.template_variables = template_variables


class ExperimentError(HcfLabError):
    """Raised when an experiment is unknown or fails at its boundary."""

    def __init__(
        self,
        message: str,
        experiment: Optional[str] = None,
        operation: Optional[str] = None
    ) -> None:
        context: Dict[str, Any] = {}
        if experiment:
            context["experiment"] = experiment
        if operation:
            context["operation"] = operation

        super().__init__(message, "EXPERIMENT_ERROR", context)
        self.experiment = experiment
        self.operation = operation
