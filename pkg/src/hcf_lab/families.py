"""
Constructors and closed forms for the example families of the HCF lab.

Covers sl(n+1, C) in the block basis sl_n + C I + s with the
Ad(SU(n))-invariant metrics sigma_{x,y,z}, the reduced (x, y, z) and (y, z)
vector fields with their invariant region D, the gauged brackets mu_{y,z}
and their limit mu_infinity, complex Heisenberg algebras, and the perfect
semidirect double (h, mu) x (h, 0) with its brackets nu_{a,b}.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from .algebra_core import (
    ComplexLieAlgebra,
    GaugeTransform,
    HermitianMetric,
    ad_matrix,
    bracket_distance,
    center_dimension,
    derived_series_dims,
    gauge_act_bracket,
    is_derivation,
    killing_form,
    lower_central_series_dims,
)
from .constants import (
    BLOCK_I,
    BLOCK_S,
    BLOCK_SL,
    FAMILY_PARAMETERS,
    PERFECT_SOLITON_PARAMETERS,
    TOL_NULLSPACE,
    TOL_VERDICT,
)
from .curvature import SolitonCertificate, soliton_check, static_check, ttcr_operator
from .exceptions import ValidationError
from .validators import ParameterValidator

logger = logging.getLogger(__name__)

VectorField = Callable[[np.ndarray], np.ndarray]


# ---------------------------------------------------------------------------
# sl(n+1, C)
# ---------------------------------------------------------------------------

def sl_matrix_basis(m: int) -> Tuple[List[np.ndarray], List[str], List[str]]:
    """
    Trace-orthonormal basis of sl(m, C) split into the blocks sl_n, C I, s.

    With n = m - 1 the basis is: Hermitian generalized Gell-Mann matrices of
    sl_n (embedded top-left), I = diag(1_n, -n)/sqrt(n(n+1)), r_i = e_{i,m}
    and s_i = e_{m,i}. Every element has unit norm for tr(X Y^*).

    Returns:
        Tuple of (matrices, labels, block labels)
    """
    m = ParameterValidator.validate_integer_field(
        m, "m", ParameterValidator.MIN_SL_RANK, ParameterValidator.MAX_SL_RANK
    )
    n = m - 1
    matrices: List[np.ndarray] = []
    labels: List[str] = []
    blocks: List[str] = []

    def unit(i: int, j: int) -> np.ndarray:
        E = np.zeros((m, m), dtype=complex)
        E[i, j] = 1.0
        return E

    for j in range(n):
        for k in range(j + 1, n):
            matrices.append((unit(j, k) + unit(k, j)) / math.sqrt(2.0))
            matrices.append(1j * (unit(j, k) - unit(k, j)) / math.sqrt(2.0))
    for l in range(1, n):
        diag = np.zeros(m, dtype=complex)
        diag[:l] = 1.0
        diag[l] = -float(l)
        matrices.append(np.diag(diag) / math.sqrt(l * (l + 1)))
    labels.extend(f"u{k + 1}" for k in range(len(matrices)))
    blocks.extend(BLOCK_SL for _ in matrices)

    diag = np.ones(m, dtype=complex)
    diag[n] = -float(n)
    matrices.append(np.diag(diag) / math.sqrt(n * (n + 1)))
    labels.append("I")
    blocks.append(BLOCK_I)

    for i in range(n):
        matrices.append(unit(i, n))
        labels.append(f"r{i + 1}")
        blocks.append(BLOCK_S)
    for i in range(n):
        matrices.append(unit(n, i))
        labels.append(f"s{i + 1}")
        blocks.append(BLOCK_S)
    return matrices, labels, blocks


def _structure_from_orthonormal(matrices: Sequence[np.ndarray]) -> np.ndarray:
    mats = np.array(matrices)
    comm = np.einsum("iab,jbc->ijac", mats, mats) - np.einsum("jab,ibc->ijac", mats, mats)
    # c[k, i, j] = tr([B_i, B_j] B_k^*)
    return np.einsum("ijab,kab->kij", comm, mats.conj())


def build_sl(m: int) -> Tuple[ComplexLieAlgebra, HermitianMetric]:
    """
    sl(m, C) in the block basis together with its trace metric.

    The trace form tr(X Y^*) is orthonormal in this basis, so the metric is
    the identity matrix.

    Raises:
        ValidationError: If m < 2
    """
    matrices, labels, _ = sl_matrix_basis(m)
    alg = ComplexLieAlgebra(len(matrices), _structure_from_orthonormal(matrices), tuple(labels))
    return alg.verify(), HermitianMetric.identity(alg.dim)


def build_sl2_chevalley() -> ComplexLieAlgebra:
    """sl(2, C) in the basis {E, H, F}, so that mu(E, F) = H and ad_H = diag(2, 0, -2)."""
    E = np.array([[0, 1], [0, 0]], dtype=complex)
    H = np.array([[1, 0], [0, -1]], dtype=complex)
    F = np.array([[0, 0], [1, 0]], dtype=complex)
    return ComplexLieAlgebra.from_matrix_basis([E, H, F], ["E", "H", "F"]).verify()


@dataclass(frozen=True)
class SLnAnsatz:
    """
    sl(n+1, C) with the block metric sigma_{x,y,z}.

    Attributes:
        n: Rank parameter, n >= 1
        algebra: Structure constants of sl(n+1, C) in the block basis
        matrices: Basis matrices
        block_index: Block label of each basis vector
        x, y, z: Positive metric parameters
    """

    n: int
    algebra: ComplexLieAlgebra
    matrices: Tuple[np.ndarray, ...]
    block_index: Tuple[str, ...]
    x: float = 1.0
    y: float = 1.0
    z: float = 1.0

    @classmethod
    def create(cls, n: int, x: float = 1.0, y: float = 1.0, z: float = 1.0) -> "SLnAnsatz":
        """Build the ansatz for sl(n+1, C) at (x, y, z)."""
        n = ParameterValidator.validate_integer_field(
            n, "n", 1, ParameterValidator.MAX_SL_RANK - 1
        )
        x = ParameterValidator.validate_positive_field(x, "x")
        y = ParameterValidator.validate_positive_field(y, "y")
        z = ParameterValidator.validate_positive_field(z, "z")
        matrices, labels, blocks = sl_matrix_basis(n + 1)
        algebra, _ = build_sl(n + 1)
        return cls(n, algebra, tuple(matrices), tuple(blocks), x, y, z)

    def with_parameters(self, x: float, y: float, z: float) -> "SLnAnsatz":
        return SLnAnsatz(
            self.n, self.algebra, self.matrices, self.block_index,
            ParameterValidator.validate_positive_field(x, "x"),
            ParameterValidator.validate_positive_field(y, "y"),
            ParameterValidator.validate_positive_field(z, "z"),
        )

    def indices(self, block: str) -> List[int]:
        return [i for i, b in enumerate(self.block_index) if b == block]

    def block_sizes(self) -> Dict[str, int]:
        return {b: len(self.indices(b)) for b in (BLOCK_SL, BLOCK_I, BLOCK_S)}

    def conjugate_coefficients(self) -> np.ndarray:
        """Row k holds the coordinates of B_k^* in the basis."""
        mats = np.array(self.matrices)
        return np.einsum("kba,jab->kj", mats.conj(), mats.conj())

    def matrix_of(self, coeffs: Sequence[complex]) -> np.ndarray:
        """Matrix sum_k coeffs[k] B_k."""
        return np.einsum("k,kab->ab", np.asarray(coeffs, dtype=complex), np.array(self.matrices))

    def bracket_relation_residuals(self) -> Dict[str, float]:
        """
        Mass of each block bracket outside its allowed target blocks.

        The allowed targets are mu(sl_n, sl_n) in sl_n, mu(sl_n, s) in s,
        mu(I, s) in s and mu(s, s) in sl_n + C I.
        """
        c = self.algebra.c
        sl = self.indices(BLOCK_SL)
        one = self.indices(BLOCK_I)
        s = self.indices(BLOCK_S)
        rules = {
            "sl_sl": (sl, sl, sl),
            "sl_s": (sl, s, s),
            "I_s": (one, s, s),
            "s_s": (s, s, sl + one),
        }
        residuals = {}
        for name, (left, right, allowed) in rules.items():
            outside = [k for k in range(self.algebra.dim) if k not in allowed]
            if not left or not right or not outside:
                residuals[name] = 0.0
                continue
            block = c[np.ix_(outside, left, right)]
            residuals[name] = float(np.linalg.norm(block))
        return residuals


def sigma_metric(ansatz: SLnAnsatz) -> HermitianMetric:
    """Block metric diag(x^-1 Id_{n^2-1}, y^-1, z^-1 Id_{2n})."""
    scale = {BLOCK_SL: 1.0 / ansatz.x, BLOCK_I: 1.0 / ansatz.y, BLOCK_S: 1.0 / ansatz.z}
    return HermitianMetric(np.diag([scale[b] for b in ansatz.block_index]).astype(complex))


def canonical_metric(n: int) -> HermitianMetric:
    """Metric 2(n+1) sigma_{1,1,1} on sl(n+1, C), static with lambda = 1/2."""
    ansatz = SLnAnsatz.create(n)
    return sigma_metric(ansatz).scaled(2.0 * (n + 1))


def p_xyz_closed_form(n: int, x: float, y: float, z: float) -> Tuple[float, float, float]:
    """
    Eigenvalues of P on the blocks sl_n, C I and s for the metric sigma_{x,y,z}.

    Returns:
        Tuple of (n x + z^2/x, (n+1) z^2/y, ((n+1)/n)((n-1) x + y))
    """
    return (
        n * x + z * z / x,
        (n + 1) * z * z / y,
        (n + 1) / n * ((n - 1) * x + y),
    )


def p_block_eigenvalues(ansatz: SLnAnsatz) -> Dict[str, float]:
    """Block eigenvalues of P read off the brute-force curvature operator."""
    P = ttcr_operator(ansatz.algebra, sigma_metric(ansatz), cross_check=False).P
    values = {}
    for block in (BLOCK_SL, BLOCK_I, BLOCK_S):
        idx = ansatz.indices(block)
        if idx:
            values[block] = float(np.mean(np.diag(P)[idx].real))
    return values


def block_offdiagonal_mass(matrix: np.ndarray, ansatz: SLnAnsatz) -> float:
    """Frobenius mass of matrix outside the diagonal blocks, relative to its norm."""
    mask = np.zeros(matrix.shape, dtype=bool)
    for block in (BLOCK_SL, BLOCK_I, BLOCK_S):
        idx = ansatz.indices(block)
        mask[np.ix_(idx, idx)] = True
    norm = float(np.linalg.norm(matrix))
    off = float(np.linalg.norm(matrix[~mask]))
    return off / norm if norm > 0 else off


def killing_identity_residual(ansatz: SLnAnsatz, rng: np.random.Generator, pairs: int = 20) -> float:
    """Largest relative gap in tr(ad_X ad_Y) = 2m tr(X Y) over random pairs."""
    m = ansatz.n + 1
    kill = killing_form(ansatz.algebra)
    worst = 0.0
    for _ in range(pairs):
        u = rng.normal(size=ansatz.algebra.dim) + 1j * rng.normal(size=ansatz.algebra.dim)
        v = rng.normal(size=ansatz.algebra.dim) + 1j * rng.normal(size=ansatz.algebra.dim)
        lhs = u @ kill @ v
        rhs = 2 * m * np.trace(ansatz.matrix_of(u) @ ansatz.matrix_of(v))
        worst = max(worst, abs(lhs - rhs) / max(1.0, abs(rhs)))
    return float(worst)


def completeness_sum(ansatz: SLnAnsatz) -> np.ndarray:
    """sum_k ad_{B_k^*} ad_{B_k} over the basis, which equals 2(n+1) Id."""
    alg = ansatz.algebra
    conj = ansatz.conjugate_coefficients()
    eye = np.eye(alg.dim)
    total = np.zeros((alg.dim, alg.dim), dtype=complex)
    for k in range(alg.dim):
        total += ad_matrix(alg, conj[k]) @ ad_matrix(alg, eye[k])
    return total


# ---------------------------------------------------------------------------
# Reduced vector fields and the region D
# ---------------------------------------------------------------------------

def xyz_rhs(n: int) -> VectorField:
    """Vector field (n x^2 + z^2, (n+1) z^2, ((n+1)/n) z ((n-1) x + y))."""

    def field(state: np.ndarray) -> np.ndarray:
        x, y, z = state
        return np.array([
            n * x * x + z * z,
            (n + 1) * z * z,
            (n + 1) * z * ((n - 1) * x + y) / n,
        ])

    return field


def yz_rhs(n: int) -> VectorField:
    """
    Rescaled vector field on (y, z).

    The evaluation order makes (1, 1) and (0, 0) exact zeros in floating point.
    """

    def field(state: np.ndarray) -> np.ndarray:
        y, z = state
        return np.array([
            z * z * (n + 1 - y) - n * y,
            (n + 1) * z * (n - 1 + y) / n - (n + z * z) * z,
        ])

    return field


def yz_jacobian(n: int) -> Callable[[float, float], np.ndarray]:
    """Jacobian of yz_rhs(n)."""

    def jac(y: float, z: float) -> np.ndarray:
        return np.array([
            [-z * z - n, 2.0 * z * (n + 1 - y)],
            [(n + 1) * z / n, (n + 1) * (n - 1 + y) / n - n - 3.0 * z * z],
        ])

    return jac


def classify_fixed_point(n: int, y: float, z: float) -> Dict[str, Any]:
    """
    Linearization of the (y, z) system at a point.

    Returns:
        Dict[str, Any]: eigenvalues (real parts sorted) and a label among
        "attracting", "repelling", "saddle" and "non-hyperbolic"
    """
    eigenvalues = np.sort(np.linalg.eigvals(yz_jacobian(n)(y, z)).real)
    if np.any(np.abs(eigenvalues) <= 1e-12):
        label = "non-hyperbolic"
    elif np.all(eigenvalues < 0):
        label = "attracting"
    elif np.all(eigenvalues > 0):
        label = "repelling"
    else:
        label = "saddle"
    return {"point": (y, z), "eigenvalues": eigenvalues.tolist(), "type": label}


def log_ratio_rate(n: int) -> Callable[[float, float], float]:
    """d/dt ln(z^2 / y) along the (y, z) field."""
    field = yz_rhs(n)

    def rate(y: float, z: float) -> float:
        dy, dz = field(np.array([y, z]))
        return float(2.0 * dz / z - dy / y)

    return rate


def region_lower_boundary(n: int, z: float) -> float:
    """Curved boundary y = z^2 (n+1) / (z^2 + n) of D."""
    return z * z * (n + 1) / (z * z + n)


def boundary_normal_product(n: int, z: float) -> float:
    """<N, v> at the boundary point over z, with N = ((n+z^2)^2, -2n(n+1)z)."""
    y = region_lower_boundary(n, z)
    v = yz_rhs(n)(np.array([y, z]))
    normal = np.array([(n + z * z) ** 2, -2.0 * n * (n + 1) * z])
    return float(normal @ v)


def boundary_normal_closed_form(n: int, z: float) -> float:
    """2n(n+1) z^2 (z^2 - 1)^2 / (n + z^2)."""
    return 2.0 * n * (n + 1) * z * z * (z * z - 1.0) ** 2 / (n + z * z)


@dataclass(frozen=True)
class RegionCheck:
    """Membership of a point in D with boundary diagnostics."""
    member: bool
    y: float
    z: float
    lower_boundary: float
    on_boundary: bool
    normal_product: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "member": self.member,
            "y": self.y,
            "z": self.z,
            "lower_boundary": self.lower_boundary,
            "on_boundary": self.on_boundary,
            "normal_product": self.normal_product,
        }


def region_D_membership(n: int) -> Callable[[float, float], RegionCheck]:
    """
    Membership test for D = {z^2 (n+1) / (z^2 + n) <= y < 1}.

    On the curved boundary the result also carries <N, v>.
    """

    def check(y: float, z: float, boundary_tol: float = 1e-12) -> RegionCheck:
        lower = region_lower_boundary(n, z)
        on_boundary = abs(y - lower) <= boundary_tol * max(1.0, abs(y))
        member = (lower <= y or on_boundary) and y < 1.0
        product = boundary_normal_product(n, z) if on_boundary else None
        return RegionCheck(member, float(y), float(z), float(lower), on_boundary, product)

    return check


def asymptotic_ratio(n: int) -> float:
    """
    Limit of z^2 / y along trajectories in D: (n^2 - 2) / (n (n+1)).

    Raises:
        ValidationError: If n < 2
    """
    n = ParameterValidator.validate_integer_field(n, "n", 2)
    return (n * n - 2) / (n * (n + 1))


# ---------------------------------------------------------------------------
# Gauged brackets mu_{y,z} and the limit bracket
# ---------------------------------------------------------------------------

def h_yz(ansatz: SLnAnsatz, y: float, z: float) -> GaugeTransform:
    """Diagonal gauge diag(Id_{sl_n}, y^-1/2, z^-1/2 Id_s)."""
    scale = {BLOCK_SL: 1.0, BLOCK_I: y ** -0.5, BLOCK_S: z ** -0.5}
    return GaugeTransform(np.diag([scale[b] for b in ansatz.block_index]).astype(complex))


def _scaled_by_block(ansatz: SLnAnsatz, factors: Dict[Tuple[str, str, str], float]) -> ComplexLieAlgebra:
    """Multiply each block component (target, left, right) of the sl bracket by a factor."""
    c = np.zeros_like(ansatz.algebra.c)
    source = ansatz.algebra.c
    for (target, left, right), factor in factors.items():
        kk = ansatz.indices(target)
        ii = ansatz.indices(left)
        jj = ansatz.indices(right)
        if not (kk and ii and jj):
            continue
        c[np.ix_(kk, ii, jj)] = factor * source[np.ix_(kk, ii, jj)]
        c[np.ix_(kk, jj, ii)] = factor * source[np.ix_(kk, jj, ii)]
    return ComplexLieAlgebra(ansatz.algebra.dim, c, ansatz.algebra.labels)


def _block_factors(sqrt_y: float, z_sl: float, z_i: float) -> Dict[Tuple[str, str, str], float]:
    return {
        (BLOCK_SL, BLOCK_SL, BLOCK_SL): 1.0,
        (BLOCK_S, BLOCK_SL, BLOCK_S): 1.0,
        (BLOCK_S, BLOCK_I, BLOCK_S): sqrt_y,
        (BLOCK_SL, BLOCK_S, BLOCK_S): z_sl,
        (BLOCK_I, BLOCK_S, BLOCK_S): z_i,
    }


def mu_yz(n: int, y: float, z: float) -> ComplexLieAlgebra:
    """
    Bracket h_{y,z} . mu of sl(n+1, C), assembled block by block.

    Components: unchanged on sl_n^sl_n and sl_n^s, sqrt(y) on I^s, z on the
    sl_n part of s^s and z/sqrt(y) on its I part.

    Raises:
        ValidationError: If y or z is not positive
    """
    y = ParameterValidator.validate_positive_field(y, "y")
    z = ParameterValidator.validate_positive_field(z, "z")
    ansatz = SLnAnsatz.create(n)
    return _scaled_by_block(ansatz, _block_factors(math.sqrt(y), z, z / math.sqrt(y)))


def mu_yz_by_gauge(n: int, y: float, z: float) -> ComplexLieAlgebra:
    """mu_{y,z} computed through the gauge action."""
    ansatz = SLnAnsatz.create(n)
    return gauge_act_bracket(h_yz(ansatz, y, z), ansatz.algebra)


def mu_infinity(n: int) -> ComplexLieAlgebra:
    """
    Limit bracket of mu_{y,z} along D, isomorphic to sl_n x| h_{2n+1}.

    Keeps the sl_n^sl_n and sl_n^s components and sqrt((n^2-2)/(n(n+1)))
    times the I part of s^s.

    Raises:
        ValidationError: If n < 2
    """
    ratio = asymptotic_ratio(n)
    ansatz = SLnAnsatz.create(n)
    return _scaled_by_block(ansatz, _block_factors(0.0, 0.0, math.sqrt(ratio))).verify()


def limit_derivation(n: int) -> np.ndarray:
    """D = 2 Id_{C I} + Id_s, a derivation of mu_infinity."""
    ansatz = SLnAnsatz.create(n)
    weights = {BLOCK_SL: 0.0, BLOCK_I: 2.0, BLOCK_S: 1.0}
    return np.diag([weights[b] for b in ansatz.block_index]).astype(complex)


def limit_block_eigenvalues(n: int) -> Tuple[float, float, float]:
    """Expected P eigenvalues (n, (n^2-2)/n, (n^2-1)/n) of mu_infinity with the trace metric."""
    return (float(n), (n * n - 2) / n, (n * n - 1) / n)


def limit_algebra_structure(n: int) -> Dict[str, Any]:
    """
    Relation checks identifying mu_infinity as sl_n x| h_{2n+1}.

    Checks the Heisenberg relations mu(r_i, s_j) = (sqrt(n^2-2)/n) delta_ij I
    and mu(I, .) = 0 on C I + s, invariance of the ideal C I + s under sl_n,
    and the lower central series of that ideal.
    """
    ansatz = SLnAnsatz.create(n)
    alg = mu_infinity(n)
    c = alg.c
    sl = ansatz.indices(BLOCK_SL)
    one = ansatz.indices(BLOCK_I)[0]
    s = ansatz.indices(BLOCK_S)
    r_idx, s_idx = s[:n], s[n:]
    coupling = math.sqrt(n * n - 2) / n

    heisenberg = 0.0
    for a, i in enumerate(r_idx):
        for b, j in enumerate(s_idx):
            expected = np.zeros(alg.dim, dtype=complex)
            if a == b:
                expected[one] = coupling
            heisenberg = max(heisenberg, float(np.linalg.norm(c[:, i, j] - expected)))
    ideal = [one] + s
    heisenberg = max(heisenberg, float(np.linalg.norm(c[:, one, :])))
    heisenberg = max(heisenberg, float(np.linalg.norm(c[np.ix_(range(alg.dim), r_idx, r_idx)])))
    heisenberg = max(heisenberg, float(np.linalg.norm(c[np.ix_(range(alg.dim), s_idx, s_idx)])))

    outside_ideal = [k for k in range(alg.dim) if k not in ideal]
    invariance = float(np.linalg.norm(c[np.ix_(outside_ideal, sl, ideal)])) if sl else 0.0

    sub = ComplexLieAlgebra(len(ideal), c[np.ix_(ideal, ideal, ideal)])
    return {
        "heisenberg_residual": heisenberg,
        "ideal_invariance_residual": invariance,
        "ideal_lower_central_series": lower_central_series_dims(sub),
        "ideal_center_dimension": center_dimension(sub),
        "derived_series": derived_series_dims(alg),
    }


# ---------------------------------------------------------------------------
# Heisenberg algebras
# ---------------------------------------------------------------------------

def build_heisenberg(m: int) -> ComplexLieAlgebra:
    """
    Complex Heisenberg algebra h_{2m+1} with mu(X_i, Y_i) = Z.

    Basis order: X_1..X_m, Y_1..Y_m, Z.
    """
    m = ParameterValidator.validate_integer_field(
        m, "m", ParameterValidator.MIN_HEISENBERG_RANK, ParameterValidator.MAX_HEISENBERG_RANK
    )
    dim = 2 * m + 1
    entries = [(i, m + i, 2 * m, 1.0) for i in range(m)]
    labels = [f"X{i + 1}" for i in range(m)] + [f"Y{i + 1}" for i in range(m)] + ["Z"]
    return ComplexLieAlgebra.from_sparse(dim, entries, labels).verify()


def heisenberg_derivation(m: int) -> np.ndarray:
    """D = 2 Id_{C Z} + Id_V on h_{2m+1}."""
    return np.diag([1.0] * (2 * m) + [2.0]).astype(complex)


# ---------------------------------------------------------------------------
# Perfect family
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PerfectFamily:
    """
    Semidirect double (h, mu) x| (h, 0) over a static base.

    Attributes:
        base: Base algebra h
        base_metric: Base metric rescaled so that P = Id
        doubled: Bracket nu on h + h
        metric: Orthogonal sum of two copies of the base metric
        normalization: Factor c with base_metric = c * (input metric)
    """

    base: ComplexLieAlgebra
    base_metric: HermitianMetric
    doubled: ComplexLieAlgebra
    metric: HermitianMetric
    normalization: float

    @property
    def base_dim(self) -> int:
        return self.base.dim

    def gauge(self, a: float, b: float) -> GaugeTransform:
        """h_{a,b} = [[a, b], [0, 1]] tensored with Id_h."""
        a = ParameterValidator.validate_nonzero_field(a, "a")
        b = ParameterValidator.validate_real_field(b, "b")
        return GaugeTransform(np.kron(np.array([[a, b], [0.0, 1.0]]), np.eye(self.base_dim)).astype(complex))

    def block_matrix(self, M: np.ndarray) -> np.ndarray:
        """Lift a 2 x 2 block matrix to M tensored with Id_h."""
        return np.kron(np.asarray(M, dtype=complex), np.eye(self.base_dim))

    def block_part(self, A: np.ndarray) -> np.ndarray:
        """2 x 2 matrix of block traces divided by dim h."""
        d = self.base_dim
        return np.array([
            [np.trace(A[p * d:(p + 1) * d, q * d:(q + 1) * d]) / d for q in range(2)]
            for p in range(2)
        ])

    @property
    def k_unitary(self) -> np.ndarray:
        """k = Id + (-Id), exchanging nu_{1,-t} and nu_{1,t}."""
        return self.block_matrix(np.diag([1.0, -1.0]))


def build_perfect_double(
    base: ComplexLieAlgebra,
    metric: HermitianMetric,
    tol: float = TOL_VERDICT
) -> PerfectFamily:
    """
    Perfect family over a static base.

    The base metric is rescaled by c = lambda so that P = Id; nu acts by
    nu(X+0, Y+0) = mu(X, Y)+0, nu(X+0, 0+Y) = 0+mu(X, Y), nu(0+X, 0+Y) = 0.

    Raises:
        ValidationError: If the base metric is not static with lambda > 0
    """
    lam = static_check(base, metric, tol)
    if lam is None or lam <= 0.0:
        raise ValidationError(
            "Perfect double requires a static base metric with positive lambda",
            field_name="metric",
            field_value=lam,
            expected_type="static metric"
        )
    d = base.dim
    c = np.zeros((2 * d, 2 * d, 2 * d), dtype=complex)
    c[:d, :d, :d] = base.c
    c[d:, :d, d:] = base.c
    c[d:, d:, :d] = base.c
    labels = tuple(f"{label}'" for label in base.labels) + tuple(f"{label}''" for label in base.labels)
    doubled = ComplexLieAlgebra(2 * d, c, labels).verify()

    base_metric = metric.scaled(lam)
    doubled_metric = HermitianMetric(linalg.block_diag(base_metric.H, base_metric.H))
    logger.info(f"build_perfect_double: base dim {d}, normalization c={lam:.6g}")
    return PerfectFamily(base, base_metric, doubled, doubled_metric, lam)


def default_perfect_family() -> PerfectFamily:
    """Perfect family over sl(2, C) with its trace metric (normalization c = 2)."""
    return build_perfect_double(*build_sl(2))


def nu_ab(family: PerfectFamily, a: float, b: float) -> ComplexLieAlgebra:
    """
    Bracket nu_{a,b} = h_{a,b} . nu, assembled block by block.

    Components: a^-1 mu on first^first and first^second, and
    -(b^2/a) mu + -(2b/a) mu on second^second.

    Raises:
        ValidationError: If a = 0
    """
    a = ParameterValidator.validate_nonzero_field(a, "a")
    b = ParameterValidator.validate_real_field(b, "b")
    d = family.base_dim
    mu = family.base.c
    c = np.zeros((2 * d, 2 * d, 2 * d), dtype=complex)
    c[:d, :d, :d] = mu / a
    c[d:, :d, d:] = mu / a
    c[d:, d:, :d] = mu / a
    c[:d, d:, d:] = -(b * b / a) * mu
    c[d:, d:, d:] = -(2.0 * b / a) * mu
    return ComplexLieAlgebra(2 * d, c, family.doubled.labels)


def nu_ab_by_gauge(family: PerfectFamily, a: float, b: float) -> ComplexLieAlgebra:
    """nu_{a,b} computed through the gauge action."""
    return gauge_act_bracket(family.gauge(a, b), family.doubled)


def nu_t(family: PerfectFamily, t: float) -> ComplexLieAlgebra:
    """nu_t = nu_{1,t}."""
    return nu_ab(family, 1.0, t)


def p_nu_ab_closed_form(a: float, b: float) -> np.ndarray:
    """
    Block matrix of P for (nu_{a,b}, doubled metric): a^-2 [[1+b^4, 2b^3], [2b^3, 2+4b^2]].

    Raises:
        ValidationError: If a = 0
    """
    a = ParameterValidator.validate_nonzero_field(a, "a")
    return np.array([
        [1.0 + b ** 4, 2.0 * b ** 3],
        [2.0 * b ** 3, 2.0 + 4.0 * b ** 2],
    ]) / (a * a)


def p_nu_ab_printed(a: float, b: float) -> np.ndarray:
    """Printed block matrix a^-2 [[1+2b^4, 4b^3], [4b^3, 2+8b^2]], kept for reporting."""
    a = ParameterValidator.validate_nonzero_field(a, "a")
    return np.array([
        [1.0 + 2.0 * b ** 4, 4.0 * b ** 3],
        [4.0 * b ** 3, 2.0 + 8.0 * b ** 2],
    ]) / (a * a)


def p_nu_ab_oracle(family: PerfectFamily, a: float, b: float) -> np.ndarray:
    """Block matrix of the brute-force P for (nu_{a,b}, doubled metric)."""
    P = ttcr_operator(nu_ab(family, a, b), family.metric, cross_check=False).P
    return family.block_part(P).real


def derivation_d_t(family: PerfectFamily, t: float) -> np.ndarray:
    """D_t = h_t D h_t^-1 = [[0, t], [0, 1]] tensored with Id_h."""
    return family.block_matrix(np.array([[0.0, t], [0.0, 1.0]]))


@dataclass(frozen=True)
class PerfectSolitonRow:
    """Certificate of nu_t with the derivation check of D_t."""
    t: float
    certificate: SolitonCertificate
    d_t_residual: float

    def to_dict(self) -> Dict[str, Any]:
        data = {"t": self.t, "D_t_residual": self.d_t_residual}
        data.update(self.certificate.to_dict())
        return data


@dataclass(frozen=True)
class PerfectSolitonTable:
    """Soliton certificates along the perfect family plus k-conjugacy residuals."""
    rows: List[PerfectSolitonRow]
    conjugacy_residuals: Dict[float, float] = field(default_factory=dict)

    def row(self, t: float) -> PerfectSolitonRow:
        for row in self.rows:
            if abs(row.t - t) <= 1e-15:
                return row
        raise KeyError(t)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "rows": [row.to_dict() for row in self.rows],
            "conjugacy_residuals": {repr(t): r for t, r in self.conjugacy_residuals.items()},
        }


def perfect_soliton_table(
    family: PerfectFamily,
    parameters: Sequence[float] = tuple(PERFECT_SOLITON_PARAMETERS),
    tol: float = TOL_VERDICT
) -> PerfectSolitonTable:
    """
    Soliton certificates of nu_t for each t, with D_t and k-conjugacy checks.

    The conjugacy residual at t is |k . nu_{-t} - nu_t| for each t > 0.
    """
    rows = []
    conjugacy = {}
    for t in parameters:
        alg = nu_t(family, t)
        certificate = soliton_check(alg, family.metric, tol)
        _, d_t_residual = is_derivation(alg, derivation_d_t(family, t), TOL_NULLSPACE)
        rows.append(PerfectSolitonRow(float(t), certificate, d_t_residual))
        if t > 0:
            moved = gauge_act_bracket(GaugeTransform(family.k_unitary), nu_t(family, -t))
            conjugacy[float(t)] = bracket_distance(moved, alg)
        logger.info(f"perfect_soliton_table: t={t:.6g} -> {certificate.verdict.value}")
    return PerfectSolitonTable(rows, conjugacy)


# ---------------------------------------------------------------------------
# Random data and the named-family registry
# ---------------------------------------------------------------------------

def random_metric(dim: int, rng: np.random.Generator, spread: float = 1.0) -> HermitianMetric:
    """Well-conditioned random metric A^H A + dim Id."""
    A = spread * (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim)))
    return HermitianMetric(A.conj().T @ A + dim * np.eye(dim))


def random_gauge(dim: int, rng: np.random.Generator, spread: float = 0.3) -> GaugeTransform:
    """Well-conditioned random gauge Id + spread * G."""
    G = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return GaugeTransform(np.eye(dim) + spread * G / math.sqrt(dim))


def parse_family_spec(text: str) -> Tuple[str, Dict[str, float]]:
    """
    Parse "name" or "name:key=value,key=value".

    Raises:
        ValidationError: If the name is unknown or a parameter is malformed
    """
    name, _, rest = text.partition(":")
    name = name.strip()
    ParameterValidator.validate_enum_field(name, "family", set(FAMILY_PARAMETERS))
    params: Dict[str, float] = {}
    if rest:
        for item in rest.split(","):
            key, sep, value = item.partition("=")
            key = key.strip()
            if not sep or key not in FAMILY_PARAMETERS[name]:
                raise ValidationError(
                    f"Invalid parameter '{item}' for family {name}",
                    field_name="family",
                    field_value=text,
                    expected_type=f"{name}:{','.join(k + '=...' for k in FAMILY_PARAMETERS[name])}"
                )
            try:
                params[key] = float(value)
            except ValueError:
                raise ValidationError(
                    f"Parameter {key} must be numeric",
                    field_name=key,
                    field_value=value
                )
    return name, params


def _int_param(params: Dict[str, float], key: str, default: int) -> int:
    value = params.get(key, default)
    if float(value) != int(value):
        raise ValidationError(f"{key} must be an integer", field_name=key, field_value=value)
    return int(value)


def build_named_family(name: str, params: Dict[str, float]) -> Tuple[ComplexLieAlgebra, HermitianMetric]:
    """
    Algebra and metric of a registered family.

    Raises:
        ValidationError: If the name or parameters are invalid
    """
    ParameterValidator.validate_enum_field(name, "family", set(FAMILY_PARAMETERS))
    if name == "abelian":
        dim = _int_param(params, "dim", 3)
        return ComplexLieAlgebra.abelian(dim), HermitianMetric.identity(dim)
    if name == "sl":
        return build_sl(_int_param(params, "m", 3))
    if name == "sl-sigma":
        ansatz = SLnAnsatz.create(
            _int_param(params, "n", 2), params.get("x", 1.0), params.get("y", 1.0), params.get("z", 1.0)
        )
        return ansatz.algebra, sigma_metric(ansatz)
    if name == "mu-yz":
        alg = mu_yz(_int_param(params, "n", 2), params.get("y", 1.0), params.get("z", 1.0))
        return alg, HermitianMetric.identity(alg.dim)
    if name == "mu-infinity":
        alg = mu_infinity(_int_param(params, "n", 2))
        return alg, HermitianMetric.identity(alg.dim)
    if name == "heisenberg":
        alg = build_heisenberg(_int_param(params, "m", 1))
        return alg, HermitianMetric.identity(alg.dim)
    family = default_perfect_family()
    if name == "perfect-double":
        return nu_t(family, params.get("t", 0.0)), family.metric
    return nu_ab(family, params.get("a", 1.0), params.get("b", 0.0)), family.metric
