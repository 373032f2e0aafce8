"""
Torsion-twisted Chern-Ricci curvature of left-invariant Hermitian metrics.

For a complex metric Lie algebra (g, mu, H) and a unitary frame {Z_l} the
curvature operator is

    P = 1/2 sum_l ad_{Z_l} ad_{Z_l}^*          (^* = adjoint w.r.t. H)

and its form is Theta = H P. Soliton certificates decide whether
P = lambda Id + 1/2 (D + D^*) for a derivation D, by least squares over
lambda and the coordinates of D in an orthonormal basis of Der(g, mu),
computed in a unitary frame so that the Frobenius norm is the metric norm.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, Optional

import numpy as np
from scipy import linalg

from .algebra_core import (
    ComplexLieAlgebra,
    GaugeTransform,
    HermitianMetric,
    basis_ad_matrices,
    derivation_space,
    derived_algebra_rank,
    frame_gauge,
    gauge_act_bracket,
    gauge_act_metric,
    is_derivation,
    unitary_frame,
)
from .constants import TOL_CROSS_CHECK, TOL_NULLSPACE, TOL_RANK, TOL_VERDICT
from .exceptions import DimensionMismatchError, ValidationError

logger = logging.getLogger(__name__)

# Relative singular-value cutoff for the soliton least-squares solve.
_LSTSQ_CUTOFF = 1e-10


class Verdict(str, Enum):
    """Outcome of a soliton certificate."""
    STATIC = "static"
    ALGEBRAIC = "algebraic"
    SEMI_ALGEBRAIC = "semi_algebraic"
    NONE = "none"


def _complex_matrix_to_lists(M: np.ndarray) -> List[List[List[float]]]:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(M)]


@dataclass(frozen=True)
class CurvatureOperator:
    """
    Curvature operator P together with the metric it is Hermitian against.

    Attributes:
        P: Complex n x n matrix
        metric: The metric H used to compute P
        cross_check_residual: Relative gap between the ad-form and the
            Gram-form evaluations of P
    """

    P: np.ndarray
    metric: HermitianMetric
    cross_check_residual: float = 0.0

    @property
    def theta(self) -> np.ndarray:
        """Matrix H P of the form Theta."""
        return self.metric.H @ self.P

    def in_frame(self, frame: Optional[np.ndarray] = None) -> np.ndarray:
        """Hermitian matrix F^-1 P F of P in a unitary frame F."""
        F = unitary_frame(self.metric) if frame is None else frame
        return F.conj().T @ self.metric.H @ self.P @ F

    def eigenvalues(self) -> np.ndarray:
        """Real eigenvalues of P, ascending."""
        return linalg.eigvalsh(self.in_frame())

    def hermiticity_defect(self) -> float:
        """Relative defect of H P from being Hermitian."""
        theta = self.theta
        scale = max(float(np.linalg.norm(theta)), 1e-300)
        return float(np.linalg.norm(theta - theta.conj().T)) / scale

    def is_positive_semidefinite(self, tol: float = 1e-12) -> bool:
        eigenvalues = self.eigenvalues()
        return bool(eigenvalues[0] >= -tol * max(1.0, float(np.linalg.norm(self.P))))


@dataclass(frozen=True)
class SolitonCertificate:
    """
    Certificate for P = lambda Id + 1/2 (D + D^*).

    Attributes:
        verdict: static, algebraic, semi_algebraic or none
        lambda_: Soliton constant
        D: Witness derivation in the original basis, zero for static
        residual: |P - lambda Id - 1/2 (D + D^*)| / |P| in metric norm
        tol: Verdict tolerance
        d_star_is_derivation: Whether D^* is a derivation
        d_star_residual: Derivation residual of D^*/|D^*|, 0 when D = 0
        der_dim: Dimension of the derivation algebra used
    """

    verdict: Verdict
    lambda_: float
    D: np.ndarray
    residual: float
    tol: float
    d_star_is_derivation: bool
    d_star_residual: float
    der_dim: int

    @property
    def kind(self) -> str:
        """Shrinking, expanding or steady, by the sign of lambda."""
        scale = max(1.0, abs(self.lambda_))
        if abs(self.lambda_) <= self.tol * scale:
            return "steady"
        return "shrinking" if self.lambda_ > 0 else "expanding"

    def to_dict(self) -> Dict[str, Any]:
        """Convert certificate to dictionary for JSON serialization."""
        return {
            "verdict": self.verdict.value,
            "lambda": self.lambda_,
            "kind": self.kind,
            "residual": self.residual,
            "D": _complex_matrix_to_lists(self.D),
            "D_star_is_derivation": self.d_star_is_derivation,
            "D_star_residual": self.d_star_residual,
            "der_dim": self.der_dim,
            "tol": self.tol,
        }


def ttcr_operator(
    alg: ComplexLieAlgebra,
    g: HermitianMetric,
    frame: Optional[np.ndarray] = None,
    cross_check: bool = True
) -> CurvatureOperator:
    """
    Curvature operator P of (alg, g).

    P is evaluated from the Gram form <P u, u> = sum_{a<b} |<mu(Z_a, Z_b), u>|^2
    and, when cross_check is set, also from 1/2 sum_l ad_{Z_l} ad_{Z_l}^*;
    the relative gap is stored on the result.

    Args:
        alg: The algebra
        g: Positive-definite metric
        frame: Optional g-unitary frame; the Cholesky frame is used by default
        cross_check: Also evaluate the ad form

    Returns:
        CurvatureOperator: P with its metric

    Raises:
        DimensionMismatchError: If the algebra and metric differ in dimension
        IndefiniteMetricError: If g is not positive definite
        ValidationError: If the supplied frame is not g-unitary
    """
    if alg.dim != g.dim:
        raise DimensionMismatchError(
            "Algebra and metric dimensions differ",
            expected=alg.dim,
            actual=g.dim,
            operation="ttcr_operator"
        )
    if frame is None:
        F = unitary_frame(g)
    else:
        F = np.asarray(frame, dtype=complex)
        defect = float(np.linalg.norm(F.conj().T @ g.H @ F - np.eye(g.dim)))
        if defect > 1e-10:
            raise ValidationError(
                f"Frame is not unitary for the metric (defect {defect:.3e})",
                field_name="frame"
            )

    W = np.einsum("kij,ia,jb->kab", alg.c, F, F, optimize=True)
    gram = 0.5 * np.einsum("kab,nab->kn", W, W.conj(), optimize=True)
    P = gram @ g.H

    residual = 0.0
    if cross_check:
        ads = basis_ad_matrices(alg, F)
        hinv = F @ F.conj().T
        P_ad = 0.5 * sum(A @ hinv @ A.conj().T @ g.H for A in ads)
        scale = float(np.linalg.norm(P))
        gap = float(np.linalg.norm(P - P_ad))
        residual = gap / scale if scale > 0 else gap
        if residual > TOL_CROSS_CHECK:
            logger.warning(f"ttcr_operator: ad-form and Gram-form disagree (relative {residual:.3e})")

    return CurvatureOperator(P=P, metric=g, cross_check_residual=residual)


def theta_form(alg: ComplexLieAlgebra, g: HermitianMetric) -> np.ndarray:
    """Matrix of the form Theta(g) = H P."""
    return ttcr_operator(alg, g, cross_check=False).theta


def static_check(
    alg: ComplexLieAlgebra,
    g: HermitianMetric,
    tol: float = TOL_VERDICT
) -> Optional[float]:
    """
    Return lambda if P = lambda Id within tol, otherwise None.

    lambda = tr(P)/n and the test is |P - lambda Id|_F / |P|_F <= tol.
    """
    P = ttcr_operator(alg, g, cross_check=False).P
    lam = float(np.trace(P).real) / alg.dim
    norm = float(np.linalg.norm(P))
    if norm == 0.0:
        return 0.0
    residual = float(np.linalg.norm(P - lam * np.eye(alg.dim))) / norm
    logger.debug(f"static_check: lambda={lam:.6g}, residual={residual:.3e}")
    return lam if residual <= tol else None


def soliton_check(
    alg: ComplexLieAlgebra,
    g: HermitianMetric,
    tol: float = TOL_VERDICT,
    nullspace_tol: float = TOL_NULLSPACE
) -> SolitonCertificate:
    """
    Certify P = lambda Id + 1/2 (D + D^*) with D a derivation.

    The problem is moved to the g-unitary frame (gauge h = L^H), where it is
    a real least-squares problem in (lambda, Re a, Im a) for the coordinates
    a of D in an orthonormal basis of Der. The minimum-norm solution is the
    witness. Verdicts: static if D is negligible, algebraic if D^* is also a
    derivation, semi_algebraic otherwise, none if the residual exceeds tol.

    Args:
        alg: The algebra
        g: Positive-definite metric
        tol: Relative verdict tolerance
        nullspace_tol: Relative threshold for the derivation nullspace

    Returns:
        SolitonCertificate: The certificate with its witness
    """
    n = alg.dim
    h = frame_gauge(g)
    alg_frame = gauge_act_bracket(h, alg)
    P = ttcr_operator(alg_frame, HermitianMetric.identity(n), cross_check=False).P
    P = 0.5 * (P + P.conj().T)
    der = derivation_space(alg_frame, nullspace_tol)

    columns = [np.eye(n, dtype=complex).reshape(-1)]
    for B in der.basis:
        columns.append((0.5 * (B + B.conj().T)).reshape(-1))
    for B in der.basis:
        iB = 1j * B
        columns.append((0.5 * (iB + iB.conj().T)).reshape(-1))
    A = np.stack(columns, axis=1)
    A_real = np.vstack([A.real, A.imag])
    b_real = np.concatenate([P.reshape(-1).real, P.reshape(-1).imag])
    x, _, _, _ = linalg.lstsq(A_real, b_real, cond=_LSTSQ_CUTOFF)

    lam = float(x[0])
    m = der.dim
    coeffs = x[1:1 + m] + 1j * x[1 + m:1 + 2 * m]
    D_frame = np.zeros((n, n), dtype=complex)
    for a, B in zip(coeffs, der.basis):
        D_frame += a * B

    P_norm = float(np.linalg.norm(P))
    fit = P - lam * np.eye(n) - 0.5 * (D_frame + D_frame.conj().T)
    residual = float(np.linalg.norm(fit))
    if P_norm > 0.0:
        residual /= P_norm

    D_norm = float(np.linalg.norm(D_frame))
    if D_norm > 0.0:
        _, d_star_residual = is_derivation(alg_frame, D_frame.conj().T / D_norm, nullspace_tol)
    else:
        d_star_residual = 0.0
    d_star_ok = d_star_residual <= tol

    if residual > tol:
        verdict = Verdict.NONE
    elif D_norm <= tol * max(P_norm, 1e-300) or P_norm == 0.0:
        verdict = Verdict.STATIC
        D_frame = np.zeros((n, n), dtype=complex)
        lam = float(np.trace(P).real) / n
    elif d_star_ok:
        verdict = Verdict.ALGEBRAIC
    else:
        verdict = Verdict.SEMI_ALGEBRAIC

    D = h.inverse @ D_frame @ h.h
    logger.info(
        f"soliton_check: verdict={verdict.value}, lambda={lam:.6g}, residual={residual:.3e}, "
        f"Der dim={der.dim}"
    )
    return SolitonCertificate(
        verdict=verdict,
        lambda_=lam,
        D=D,
        residual=residual,
        tol=tol,
        d_star_is_derivation=bool(d_star_ok),
        d_star_residual=float(d_star_residual),
        der_dim=der.dim,
    )


def gauge_equivariance_check(
    alg: ComplexLieAlgebra,
    g: HermitianMetric,
    h: GaugeTransform
) -> float:
    """
    Relative residual |h P h^-1 - P^{h.g}_{h.mu}|_F / |P|_F.
    """
    P = ttcr_operator(alg, g, cross_check=False).P
    P_moved = ttcr_operator(
        gauge_act_bracket(h, alg), gauge_act_metric(h, g), cross_check=False
    ).P
    gap = float(np.linalg.norm(h.h @ P @ h.inverse - P_moved))
    norm = float(np.linalg.norm(P))
    return gap / norm if norm > 0 else gap


def normalized_spectrum(hermitian: np.ndarray) -> np.ndarray:
    """Ascending eigenvalues of a Hermitian matrix divided by its trace; zeros if the trace vanishes."""
    eigenvalues = linalg.eigvalsh(0.5 * (hermitian + np.conj(hermitian).T))
    total = float(np.sum(eigenvalues))
    if abs(total) <= 1e-300:
        return np.zeros_like(eigenvalues)
    return eigenvalues / total


def homothety_signature(alg: ComplexLieAlgebra, g: HermitianMetric) -> np.ndarray:
    """
    Eigenvalues of P sorted ascending and divided by tr(P).

    Invariant under biholomorphic pull-back and under scaling of the metric,
    so homothetic metric Lie groups share a signature.
    """
    op = ttcr_operator(alg, g, cross_check=False)
    return normalized_spectrum(op.in_frame())


def signature_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Sup-distance between two signatures of equal length."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DimensionMismatchError(
            "Signatures have different lengths",
            expected=a.shape,
            actual=b.shape,
            operation="signature_distance"
        )
    return float(np.max(np.abs(a - b))) if a.size else 0.0


def static_perfectness_check(
    alg: ComplexLieAlgebra,
    g: HermitianMetric,
    tol: float = TOL_VERDICT,
    rank_tol: float = TOL_RANK
) -> Dict[str, Any]:
    """
    Check that a static metric with lambda != 0 lives on a perfect algebra.

    Returns:
        Dict[str, Any]: static flag, lambda, derived-algebra rank, perfect
        flag and whether the implication holds
    """
    lam = static_check(alg, g, tol)
    rank = derived_algebra_rank(alg, rank_tol)
    perfect = rank == alg.dim
    applies = lam is not None and abs(lam) > tol
    return {
        "static": lam is not None,
        "lambda": lam,
        "derived_rank": rank,
        "dim": alg.dim,
        "perfect": perfect,
        "consistent": (not applies) or perfect,
    }
