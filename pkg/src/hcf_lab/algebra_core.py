"""
Complex metric Lie algebras for the HCF lab.

A complex Lie algebra is stored as its dense structure tensor c with
c[k, i, j] the coefficient of e_k in mu(e_i, e_j). Hermitian inner products
are stored as positive-definite matrices H with <u, v> = v^H H u, and the
group GL(n, C) acts on both through

    h . mu = h mu(h^-1 ., h^-1 .)        h . H = h^-H H h^-1

Everything is complex-linear, so the complex structure never appears
explicitly. All values are immutable after construction and all
operations are pure functions of their inputs.
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from .constants import TOL_JACOBI, TOL_NULLSPACE, TOL_RANK
from .exceptions import (
    DimensionMismatchError,
    IndefiniteMetricError,
    NotALieAlgebraError,
    SingularGaugeError,
    ValidationError,
)
from .validators import ParameterValidator

logger = logging.getLogger(__name__)

# Antisymmetry defects above this (relative) are treated as input errors
# instead of being silently projected away.
_ANTISYMMETRY_TOL = 1e-9
_HERMITIAN_TOL = 1e-10


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ComplexLieAlgebra:
    """
    Complex structure-constant tensor of an n-dimensional algebra.

    Attributes:
        dim: Complex dimension n
        c: Tensor of shape (n, n, n), c[k, i, j] = e_k-coefficient of mu(e_i, e_j)
        labels: Basis names, defaults to e1..en
        verified: True once the Jacobi identity has been checked
    """

    dim: int
    c: np.ndarray
    labels: Tuple[str, ...] = ()
    verified: bool = False

    def __post_init__(self) -> None:
        dim = ParameterValidator.validate_integer_field(
            self.dim, "dim", 1, ParameterValidator.MAX_ALGEBRA_DIM
        )
        c = np.array(self.c, dtype=complex)
        if c.shape != (dim, dim, dim):
            raise DimensionMismatchError(
                f"Structure tensor must have shape ({dim}, {dim}, {dim})",
                expected=(dim, dim, dim),
                actual=c.shape,
                operation="ComplexLieAlgebra"
            )
        if not np.all(np.isfinite(c)):
            raise ValidationError("Structure tensor contains non-finite entries", field_name="c")

        defect = float(np.linalg.norm(c + c.transpose(0, 2, 1)))
        scale = max(1.0, float(np.linalg.norm(c)))
        if defect > _ANTISYMMETRY_TOL * scale:
            raise ValidationError(
                f"Structure tensor is not antisymmetric (defect {defect:.3e})",
                field_name="c",
                expected_type="antisymmetric tensor"
            )
        c = 0.5 * (c - c.transpose(0, 2, 1))

        labels = tuple(self.labels) if self.labels else tuple(f"e{i + 1}" for i in range(dim))
        if len(labels) != dim:
            raise DimensionMismatchError(
                "Number of labels must match the dimension",
                expected=dim,
                actual=len(labels),
                operation="ComplexLieAlgebra"
            )

        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "c", _frozen(c))
        object.__setattr__(self, "labels", labels)

    @classmethod
    def abelian(cls, dim: int) -> "ComplexLieAlgebra":
        """Zero bracket on C^dim."""
        return cls(dim, np.zeros((dim, dim, dim), dtype=complex), verified=True)

    @classmethod
    def from_sparse(
        cls,
        dim: int,
        entries: Iterable[Tuple[int, int, int, complex]],
        labels: Optional[Sequence[str]] = None
    ) -> "ComplexLieAlgebra":
        """
        Build an algebra from (i, j, k, value) entries with i < j.

        Each entry sets c[k, i, j] = value and c[k, j, i] = -value (0-based).

        Raises:
            ValidationError: If an index is out of range or i >= j
        """
        c = np.zeros((dim, dim, dim), dtype=complex)
        for i, j, k, value in entries:
            for name, idx in (("i", i), ("j", j), ("k", k)):
                ParameterValidator.validate_integer_field(idx, name, 0, dim - 1)
            if i >= j:
                raise ValidationError(
                    "Sparse bracket entries must satisfy i < j",
                    field_name="constants",
                    field_value=(i, j, k)
                )
            c[k, i, j] += value
            c[k, j, i] -= value
        return cls(dim, c, tuple(labels or ()))

    @classmethod
    def from_matrix_basis(
        cls,
        matrices: Sequence[np.ndarray],
        labels: Optional[Sequence[str]] = None
    ) -> "ComplexLieAlgebra":
        """
        Structure constants of a matrix Lie algebra in an arbitrary basis.

        The commutators [B_i, B_j] are expanded in the basis by least squares,
        so the basis need not be orthonormal for any inner product.

        Raises:
            ValidationError: If the basis is linearly dependent or not closed
                under the commutator
        """
        mats = np.array([np.asarray(m, dtype=complex) for m in matrices])
        dim = mats.shape[0]
        basis = mats.reshape(dim, -1).T
        rank = np.linalg.matrix_rank(basis)
        if rank < dim:
            raise ValidationError(
                "Matrix basis is linearly dependent",
                field_name="matrices",
                field_value=f"rank {rank} < {dim}"
            )

        comm = np.einsum("iab,jbc->ijac", mats, mats) - np.einsum("jab,ibc->ijac", mats, mats)
        rhs = comm.reshape(dim * dim, -1).T
        coeffs, _, _, _ = linalg.lstsq(basis, rhs)
        closure = float(np.linalg.norm(basis @ coeffs - rhs))
        if closure > 1e-9 * max(1.0, float(np.linalg.norm(rhs))):
            raise ValidationError(
                f"Matrix basis is not closed under the commutator (defect {closure:.3e})",
                field_name="matrices"
            )
        c = coeffs.reshape(dim, dim, dim)
        return cls(dim, c, tuple(labels or ()))

    @property
    def norm(self) -> float:
        """Frobenius norm of the structure tensor."""
        return float(np.linalg.norm(self.c))

    def verify(self, tol: float = TOL_JACOBI) -> "ComplexLieAlgebra":
        """
        Return a copy flagged as a verified Lie algebra.

        The tolerance is relative to max(1, |mu|^2).

        Raises:
            NotALieAlgebraError: If the Jacobi residual exceeds tol
        """
        residual = jacobi_residual(self)
        if residual > tol * max(1.0, self.norm ** 2):
            raise NotALieAlgebraError(
                f"Jacobi identity fails (residual {residual:.3e})",
                jacobi_residual=residual,
                tol=tol
            )
        return ComplexLieAlgebra(self.dim, self.c, self.labels, verified=True)

    def scaled(self, s: complex) -> "ComplexLieAlgebra":
        """Bracket s * mu."""
        return ComplexLieAlgebra(self.dim, s * self.c, self.labels, self.verified)


@dataclass(frozen=True)
class HermitianMetric:
    """
    Positive-definite Hermitian inner product <u, v> = v^H H u.

    Attributes:
        H: Hermitian positive-definite matrix
    """

    H: np.ndarray

    def __post_init__(self) -> None:
        H = ParameterValidator.validate_square_matrix(self.H, "H")
        asym = float(np.linalg.norm(H - H.conj().T))
        if asym > _HERMITIAN_TOL * max(1.0, float(np.linalg.norm(H))):
            raise ValidationError(
                f"Metric matrix is not Hermitian (defect {asym:.3e})",
                field_name="H",
                expected_type="Hermitian matrix"
            )
        H = 0.5 * (H + H.conj().T)
        eigenvalues = linalg.eigvalsh(H)
        if eigenvalues[0] <= 0.0:
            raise IndefiniteMetricError(
                f"Metric is not positive definite (min eigenvalue {eigenvalues[0]:.3e})",
                min_eigenvalue=float(eigenvalues[0]),
                eigenvalues=eigenvalues,
                operation="HermitianMetric"
            )
        object.__setattr__(self, "H", _frozen(H))

    @classmethod
    def identity(cls, dim: int) -> "HermitianMetric":
        """Standard inner product on C^dim."""
        return cls(np.eye(dim, dtype=complex))

    @property
    def dim(self) -> int:
        return int(self.H.shape[0])

    def scaled(self, s: float) -> "HermitianMetric":
        """Metric s * H for s > 0."""
        return HermitianMetric(ParameterValidator.validate_positive_field(s, "scale") * self.H)


@dataclass(frozen=True)
class GaugeTransform:
    """
    Invertible complex matrix acting on brackets and metrics.

    Attributes:
        h: Invertible n x n complex matrix
    """

    h: np.ndarray

    def __post_init__(self) -> None:
        h = ParameterValidator.validate_square_matrix(self.h, "h")
        det = abs(np.linalg.det(h))
        if det == 0.0 or np.linalg.cond(h) > 1e14:
            raise SingularGaugeError(
                "Gauge transformation is singular",
                determinant=det,
                operation="GaugeTransform"
            )
        object.__setattr__(self, "h", _frozen(h))

    @classmethod
    def identity(cls, dim: int) -> "GaugeTransform":
        return cls(np.eye(dim, dtype=complex))

    @cached_property
    def inverse(self) -> np.ndarray:
        return _frozen(linalg.inv(self.h))

    @property
    def dim(self) -> int:
        return int(self.h.shape[0])

    def compose(self, other: "GaugeTransform") -> "GaugeTransform":
        """Product self.h @ other.h (apply other first)."""
        return GaugeTransform(self.h @ other.h)


@dataclass(frozen=True)
class DerivationSpace:
    """
    Frobenius-orthonormal basis of Der(g, mu).

    Attributes:
        basis: Tuple of n x n complex matrices
        tol_used: Relative singular-value threshold used for the nullspace
    """

    basis: Tuple[np.ndarray, ...]
    tol_used: float
    n: int = field(default=0)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def as_matrix(self) -> np.ndarray:
        """Basis stacked as columns of an (n^2, dim) matrix."""
        if not self.basis:
            return np.zeros((self.n * self.n, 0), dtype=complex)
        return np.stack([D.reshape(-1) for D in self.basis], axis=1)

    def project(self, D: np.ndarray) -> np.ndarray:
        """Orthogonal projection of D onto the span of the basis."""
        B = self.as_matrix()
        vec = np.asarray(D, dtype=complex).reshape(-1)
        return (B @ (B.conj().T @ vec)).reshape(D.shape)


def _check_same_dim(n: int, m: int, operation: str) -> None:
    if n != m:
        raise DimensionMismatchError(
            f"Dimension mismatch in {operation}",
            expected=n,
            actual=m,
            operation=operation
        )


def bracket_eval(alg: ComplexLieAlgebra, u: Sequence[complex], v: Sequence[complex]) -> np.ndarray:
    """
    Evaluate mu(u, v).

    Args:
        alg: The algebra
        u: Complex vector of length n
        v: Complex vector of length n

    Returns:
        np.ndarray: Coefficient vector of mu(u, v)

    Raises:
        DimensionMismatchError: If u or v has the wrong length
    """
    u = ParameterValidator.validate_vector(u, alg.dim, "u")
    v = ParameterValidator.validate_vector(v, alg.dim, "v")
    return np.einsum("kij,i,j->k", alg.c, u, v)


def ad_matrix(alg: ComplexLieAlgebra, v: Sequence[complex]) -> np.ndarray:
    """Matrix of ad_v = mu(v, .)."""
    v = ParameterValidator.validate_vector(v, alg.dim, "v")
    return np.einsum("kij,i->kj", alg.c, v)


def basis_ad_matrices(alg: ComplexLieAlgebra, frame: Optional[np.ndarray] = None) -> np.ndarray:
    """
    Stack of ad_{Z_l} for the columns Z_l of frame (default: the basis).

    Returns:
        np.ndarray: Array of shape (m, n, n) with entry [l] = ad_{Z_l}
    """
    if frame is None:
        return np.transpose(alg.c, (1, 0, 2)).copy()
    return np.einsum("kij,il->lkj", alg.c, frame)


def jacobi_residual(alg: ComplexLieAlgebra) -> float:
    """
    Largest Jacobiator over basis triples.

    Returns the max over (i, j, k) of the Euclidean norm of
    mu(e_i, mu(e_j, e_k)) + mu(e_j, mu(e_k, e_i)) + mu(e_k, mu(e_i, e_j)).
    """
    nested = np.einsum("mia,ajk->mijk", alg.c, alg.c, optimize=True)
    jacobiator = (
        nested
        + np.einsum("mjki->mijk", nested)
        + np.einsum("mkij->mijk", nested)
    )
    return float(np.max(np.linalg.norm(jacobiator, axis=0)))


def gauge_act_bracket(h: GaugeTransform, alg: ComplexLieAlgebra) -> ComplexLieAlgebra:
    """
    Bracket h . mu = h mu(h^-1 ., h^-1 .).

    Raises:
        DimensionMismatchError: If h and the algebra differ in dimension
    """
    _check_same_dim(alg.dim, h.dim, "gauge_act_bracket")
    hinv = h.inverse
    c = np.einsum("ka,abd,bi,dj->kij", h.h, alg.c, hinv, hinv, optimize=True)
    return ComplexLieAlgebra(alg.dim, c, alg.labels, alg.verified)


def gauge_act_metric(h: GaugeTransform, g: HermitianMetric) -> HermitianMetric:
    """Metric h . H = h^-H H h^-1."""
    _check_same_dim(g.dim, h.dim, "gauge_act_metric")
    hinv = h.inverse
    return HermitianMetric(hinv.conj().T @ g.H @ hinv)


def pi_action(D: np.ndarray, alg: ComplexLieAlgebra) -> np.ndarray:
    """
    Infinitesimal gauge action pi(D)mu = D mu(., .) - mu(D., .) - mu(., D.).

    Returns:
        np.ndarray: Tensor of shape (n, n, n)
    """
    D = ParameterValidator.validate_square_matrix(D, "D", alg.dim)
    c = alg.c
    return (
        np.einsum("ka,aij->kij", D, c)
        - np.einsum("kpj,pi->kij", c, D)
        - np.einsum("kip,pj->kij", c, D)
    )


def derivation_operator(alg: ComplexLieAlgebra) -> np.ndarray:
    """Matrix of vec(D) -> vec(pi(D)mu), shape (n^3, n^2), D flattened row-major."""
    n = alg.dim
    eye = np.eye(n, dtype=complex)
    c = alg.c
    op = (
        np.einsum("kp,qij->kijpq", eye, c)
        - np.einsum("kpj,qi->kijpq", c, eye)
        - np.einsum("kip,qj->kijpq", c, eye)
    )
    return op.reshape(n ** 3, n ** 2)


def derivation_space(alg: ComplexLieAlgebra, tol: float = TOL_NULLSPACE) -> DerivationSpace:
    """
    Orthonormal basis of Der(g, mu) = {D : pi(D)mu = 0}.

    The nullspace is read off an economy SVD of the derivation operator,
    thresholding singular values at tol times the largest one. The right
    singular vectors are Frobenius-orthonormal.

    Args:
        alg: The algebra
        tol: Relative singular-value threshold

    Returns:
        DerivationSpace: Basis of the derivation algebra
    """
    n = alg.dim
    op = derivation_operator(alg)
    _, s, vh = linalg.svd(op, full_matrices=False)
    cutoff = tol * s[0] if s.size and s[0] > 0 else 0.0
    rank = int(np.sum(s > cutoff)) if cutoff > 0 else 0
    null = vh[rank:].conj()
    basis = tuple(_frozen(row.reshape(n, n).copy()) for row in null)
    logger.debug(f"derivation_space: dim {n}, operator rank {rank}, Der dimension {len(basis)}")
    return DerivationSpace(basis=basis, tol_used=tol, n=n)


def is_derivation(
    alg: ComplexLieAlgebra,
    D: np.ndarray,
    tol: float = TOL_NULLSPACE
) -> Tuple[bool, float]:
    """
    Test whether D is a derivation.

    Returns:
        Tuple[bool, float]: (residual <= tol, |pi(D)mu| / |mu|); the residual
        is absolute when mu = 0
    """
    residual = float(np.linalg.norm(pi_action(D, alg)))
    if alg.norm > 0.0:
        residual /= alg.norm
    return residual <= tol, residual


def _cholesky_lower(g: HermitianMetric, operation: str) -> np.ndarray:
    try:
        return linalg.cholesky(g.H, lower=True)
    except linalg.LinAlgError:
        eigenvalues = linalg.eigvalsh(g.H)
        raise IndefiniteMetricError(
            "Cholesky factorization failed; metric is not positive definite",
            min_eigenvalue=float(eigenvalues[0]),
            eigenvalues=eigenvalues,
            operation=operation
        )


def unitary_frame(g: HermitianMetric) -> np.ndarray:
    """
    Columns Z_i with Z_j^H H Z_i = delta_ij.

    Computed as L^-H for the lower Cholesky factor H = L L^H.

    Raises:
        IndefiniteMetricError: If H is not positive definite
    """
    L = _cholesky_lower(g, "unitary_frame")
    Linv = linalg.solve_triangular(L, np.eye(g.dim, dtype=complex), lower=True)
    return Linv.conj().T


def frame_gauge(g: HermitianMetric) -> GaugeTransform:
    """
    Upper-triangular gauge h = L^H with positive diagonal, so that h . g = Id.

    Raises:
        IndefiniteMetricError: If H is not positive definite
    """
    L = _cholesky_lower(g, "frame_gauge")
    return GaugeTransform(L.conj().T)


def adjoint_h(A: np.ndarray, g: HermitianMetric) -> np.ndarray:
    """Metric adjoint H^-1 A^H H of an endomorphism A."""
    A = ParameterValidator.validate_square_matrix(A, "A", g.dim)
    return linalg.solve(g.H, A.conj().T @ g.H, assume_a="her")


def bracket_distance(a: ComplexLieAlgebra, b: ComplexLieAlgebra) -> float:
    """
    Frobenius distance between two structure tensors.

    Raises:
        DimensionMismatchError: If the algebras differ in dimension
    """
    _check_same_dim(a.dim, b.dim, "bracket_distance")
    return float(np.linalg.norm(a.c - b.c))


def bracket_distance_unitary_orbit(
    a: ComplexLieAlgebra,
    b: ComplexLieAlgebra,
    unitaries: Sequence[np.ndarray]
) -> float:
    """
    Smallest distance from k . a to b over a finite set of unitaries k.

    This is an upper bound for the distance between unitary orbits; it is
    exact only when the relevant unitary is in the supplied set.
    """
    _check_same_dim(a.dim, b.dim, "bracket_distance_unitary_orbit")
    if not unitaries:
        return bracket_distance(a, b)
    return min(
        bracket_distance(gauge_act_bracket(GaugeTransform(k), a), b) for k in unitaries
    )


def _numerical_rank(mat: np.ndarray, tol: float) -> int:
    if mat.size == 0:
        return 0
    s = linalg.svdvals(mat)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > tol * s[0]))


def _range_basis(mat: np.ndarray, tol: float) -> np.ndarray:
    if mat.size == 0:
        return np.zeros((mat.shape[0], 0), dtype=complex)
    u, s, _ = linalg.svd(mat, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((mat.shape[0], 0), dtype=complex)
    return u[:, : int(np.sum(s > tol * s[0]))]


def derived_algebra_rank(alg: ComplexLieAlgebra, tol: float = TOL_RANK) -> int:
    """Dimension of mu(g, g), read off the numerical rank of the flattened tensor."""
    return _numerical_rank(alg.c.reshape(alg.dim, -1), tol)


def is_perfect(alg: ComplexLieAlgebra, tol: float = TOL_RANK) -> bool:
    """True iff the derived algebra spans g."""
    return derived_algebra_rank(alg, tol) == alg.dim


def center_dimension(alg: ComplexLieAlgebra, tol: float = TOL_RANK) -> int:
    """Dimension of {v : ad_v = 0}."""
    n = alg.dim
    ad_map = np.transpose(alg.c, (0, 2, 1)).reshape(n * n, n)
    if not np.any(ad_map):
        return n
    return n - _numerical_rank(ad_map, tol)


def derived_series_dims(alg: ComplexLieAlgebra, tol: float = TOL_RANK) -> List[int]:
    """Dimensions of g, [g,g], [[g,g],[g,g]], ... until the series stabilizes."""
    n = alg.dim
    W = np.eye(n, dtype=complex)
    dims = [n]
    while W.shape[1] > 0:
        images = np.einsum("kij,ia,jb->kab", alg.c, W, W, optimize=True).reshape(n, -1)
        W = _range_basis(images, tol)
        if W.shape[1] == dims[-1]:
            break
        dims.append(W.shape[1])
    return dims


def lower_central_series_dims(alg: ComplexLieAlgebra, tol: float = TOL_RANK) -> List[int]:
    """Dimensions of g, [g,g], [g,[g,g]], ... until the series stabilizes."""
    n = alg.dim
    W = np.eye(n, dtype=complex)
    dims = [n]
    while W.shape[1] > 0:
        images = np.einsum("kij,jb->kib", alg.c, W, optimize=True).reshape(n, -1)
        W = _range_basis(images, tol)
        if W.shape[1] == dims[-1]:
            break
        dims.append(W.shape[1])
    return dims


def killing_form(alg: ComplexLieAlgebra) -> np.ndarray:
    """Matrix B[i, j] = tr(ad_{e_i} ad_{e_j})."""
    return np.einsum("kia,ajk->ij", alg.c, alg.c, optimize=True)
