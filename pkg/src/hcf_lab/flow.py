"""
Numerical integration of the left-invariant HCF+ and its reductions.

The metric flow dH/dt = -Theta(H) = -H P(H) is integrated as a matrix ODE,
the reduced (x, y, z) and (y, z) systems as vector ODEs. Both use the same
explicit Runge-Kutta driver: Dormand-Prince 5(4) with PI step control, or
classical RK4 with a fixed step for reproducibility runs. The driver
enforces admissibility of every accepted state (positive coordinates,
positive-definite metrics), lands exactly on requested sample times and
records blow-up, convergence and stopping events.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from .algebra_core import (
    ComplexLieAlgebra,
    HermitianMetric,
    bracket_distance,
    bracket_distance_unitary_orbit,
    frame_gauge,
    gauge_act_bracket,
)
from .constants import (
    DEFAULT_ABS_TOL,
    DEFAULT_BLOWUP_NORM_CAP,
    DEFAULT_H_INIT,
    DEFAULT_INTEGRATOR,
    DEFAULT_MAX_STEPS,
    DEFAULT_MIN_EIG_FLOOR,
    DEFAULT_REL_TOL,
    DEFAULT_SAFETY,
    DEFAULT_T_MAX,
    ENVELOPE_SLACK,
    INTEGRATOR_METHODS,
    MIN_STEP_FACTOR,
)
from .curvature import theta_form
from .exceptions import HcfLabError, IndefiniteMetricError, IntegrationError, ValidationError
from .validators import ParameterValidator

logger = logging.getLogger(__name__)

State = np.ndarray
VectorField = Callable[[State], State]

# Dormand-Prince 5(4) tableau
_A = (
    (),
    (1.0 / 5.0,),
    (3.0 / 40.0, 9.0 / 40.0),
    (44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0),
    (19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0),
    (9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0),
    (35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0),
)
_B5 = (35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0)
_B4 = (
    5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0,
    -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0,
)
_E = tuple(b5 - b4 for b5, b4 in zip(_B5, _B4))

# PI controller exponents for a method of order 5
_PI_ALPHA = 0.7 / 5.0
_PI_BETA = 0.4 / 5.0
_FAC_MIN = 0.2
_FAC_MAX = 5.0


@dataclass(frozen=True)
class IntegratorConfig:
    """
    Settings of the Runge-Kutta driver.

    Attributes:
        method: "rk45_adaptive" or "rk4_fixed"
        h_init: Initial (adaptive) or constant (fixed) step
        rel_tol, abs_tol: Error tolerances of the adaptive method; abs_tol is
            also the convergence threshold on |rhs|
        t_max: Final time
        blowup_norm_cap: Blow-up when |state| (or |H^-1|) reaches this
        min_eig_floor: Blow-up when the smallest metric eigenvalue drops below
        safety: Step-size safety factor
        max_steps: Upper bound on attempted steps
        min_step_factor: Underflow when the step falls below this times t_max
        t_eval: Optional sample times; when given only these are stored
    """

    method: str = DEFAULT_INTEGRATOR
    h_init: float = DEFAULT_H_INIT
    rel_tol: float = DEFAULT_REL_TOL
    abs_tol: float = DEFAULT_ABS_TOL
    t_max: float = DEFAULT_T_MAX
    blowup_norm_cap: float = DEFAULT_BLOWUP_NORM_CAP
    min_eig_floor: float = DEFAULT_MIN_EIG_FLOOR
    safety: float = DEFAULT_SAFETY
    max_steps: int = DEFAULT_MAX_STEPS
    min_step_factor: float = MIN_STEP_FACTOR
    t_eval: Optional[Tuple[float, ...]] = None

    def __post_init__(self) -> None:
        ParameterValidator.validate_enum_field(self.method, "method", INTEGRATOR_METHODS)
        for name in ("h_init", "rel_tol", "abs_tol", "t_max", "blowup_norm_cap",
                     "min_eig_floor", "min_step_factor"):
            ParameterValidator.validate_positive_field(getattr(self, name), name)
        safety = ParameterValidator.validate_positive_field(self.safety, "safety")
        if safety >= 1.0:
            raise ValidationError("safety must be below 1", field_name="safety", field_value=safety)
        ParameterValidator.validate_integer_field(self.max_steps, "max_steps", 1)
        if self.t_eval is not None:
            samples = tuple(float(t) for t in self.t_eval)
            if any(b <= a for a, b in zip(samples, samples[1:])):
                raise ValidationError("t_eval must be strictly increasing", field_name="t_eval")
            if samples and (samples[0] < 0.0 or samples[-1] > self.t_max):
                raise ValidationError("t_eval must lie in [0, t_max]", field_name="t_eval")
            object.__setattr__(self, "t_eval", samples)

    def replace(self, **changes: Any) -> "IntegratorConfig":
        """Copy with some fields changed."""
        data = self.to_dict()
        data.update(changes)
        return IntegratorConfig(**data)

    def to_dict(self) -> Dict[str, Any]:
        """Convert configuration to dictionary."""
        return {
            "method": self.method,
            "h_init": self.h_init,
            "rel_tol": self.rel_tol,
            "abs_tol": self.abs_tol,
            "t_max": self.t_max,
            "blowup_norm_cap": self.blowup_norm_cap,
            "min_eig_floor": self.min_eig_floor,
            "safety": self.safety,
            "max_steps": self.max_steps,
            "min_step_factor": self.min_step_factor,
            "t_eval": list(self.t_eval) if self.t_eval is not None else None,
        }


@dataclass(frozen=True)
class FlowEvent:
    """
    Event recorded by the integrator.

    kind is one of blowup_detected, converged, max_time_reached, stopped,
    sample_skipped.
    """
    kind: str
    time: float
    t_est: Optional[float] = None
    detail: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, "time": self.time, "t_est": self.t_est, "detail": self.detail}


@dataclass
class FlowTrace:
    """
    Time-stamped solution curve with events and derived scalars.

    Attributes:
        times: Strictly increasing sample times
        states: Metric matrices or reduced coordinate vectors
        events: Recorded events
        derived: Per-sample scalars by name
    """

    times: List[float] = field(default_factory=list)
    states: List[np.ndarray] = field(default_factory=list)
    events: List[FlowEvent] = field(default_factory=list)
    derived: Dict[str, List[float]] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.times)

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    @property
    def final_time(self) -> float:
        return self.times[-1]

    @property
    def is_matrix(self) -> bool:
        return bool(self.states) and self.states[0].ndim == 2

    def event(self, kind: str) -> Optional[FlowEvent]:
        """First event of the given kind, if any."""
        for item in self.events:
            if item.kind == kind:
                return item
        return None

    @property
    def blowup_time(self) -> Optional[float]:
        blowup = self.event("blowup_detected")
        return blowup.t_est if blowup else None

    def record(self, t: float, state: np.ndarray, derived: Optional[Dict[str, Callable[[np.ndarray], float]]]) -> None:
        self.times.append(float(t))
        self.states.append(np.array(state, copy=True))
        for name, fn in (derived or {}).items():
            self.derived.setdefault(name, []).append(float(fn(state)))

    def state_at(self, t: float) -> np.ndarray:
        """Stored state at a sample time (exact match)."""
        idx = self.times.index(float(t))
        return self.states[idx]


# ---------------------------------------------------------------------------
# Runge-Kutta driver
# ---------------------------------------------------------------------------

def _error_norm(err: np.ndarray, y0: np.ndarray, y1: np.ndarray, cfg: IntegratorConfig) -> float:
    scale = cfg.abs_tol + cfg.rel_tol * np.maximum(np.abs(y0), np.abs(y1))
    return float(np.max(np.abs(err) / scale))


def _dp5_step(rhs: VectorField, y: State, k1: State, h: float) -> Tuple[State, State, State]:
    """One Dormand-Prince step; returns (y_new, f(y_new), error estimate)."""
    stages = [k1]
    for i in range(1, 7):
        incr = sum(a * k for a, k in zip(_A[i], stages) if a != 0.0)
        stages.append(rhs(y + h * incr))
    y_new = y + h * sum(b * k for b, k in zip(_B5, stages) if b != 0.0)
    err = h * sum(e * k for e, k in zip(_E, stages) if e != 0.0)
    return y_new, stages[6], err


def _rk4_step(rhs: VectorField, y: State, k1: State, h: float) -> State:
    k2 = rhs(y + 0.5 * h * k1)
    k3 = rhs(y + 0.5 * h * k2)
    k4 = rhs(y + h * k3)
    return y + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0


_STAGE_FAILURES = (HcfLabError, linalg.LinAlgError, FloatingPointError)


def _safe_rhs(rhs: VectorField, y: State) -> Optional[State]:
    try:
        value = rhs(y)
    except _STAGE_FAILURES:
        return None
    if not np.all(np.isfinite(value)):
        return None
    return value


def _attempt(
    rhs: VectorField,
    y: State,
    k1: State,
    h: float,
    adaptive: bool,
    admissible: Callable[[State], Optional[State]],
    cfg: IntegratorConfig
) -> Tuple[Optional[State], Optional[State], float]:
    """Try one step; returns (accepted state or None, its rhs, error norm)."""
    try:
        if adaptive:
            y_new, _, err = _dp5_step(rhs, y, k1, h)
            finite = bool(np.all(np.isfinite(y_new)) and np.all(np.isfinite(err)))
            err_norm = _error_norm(err, y, y_new, cfg) if finite else math.inf
        else:
            y_new = _rk4_step(rhs, y, k1, h)
            finite = bool(np.all(np.isfinite(y_new)))
            err_norm = 0.0 if finite else math.inf
    except _STAGE_FAILURES:
        return None, None, math.inf
    if not finite or err_norm > 1.0:
        return None, None, err_norm
    cleaned = admissible(y_new)
    if cleaned is None:
        return None, None, err_norm
    k_next = _safe_rhs(rhs, cleaned)
    if k_next is None:
        return None, None, err_norm
    return cleaned, k_next, err_norm


def _secant_blowup_time(t_prev: float, u_prev: float, t_cur: float, u_cur: float) -> float:
    """Zero of the line through (t_prev, u_prev), (t_cur, u_cur); u -> 0 at blow-up."""
    if u_prev <= u_cur:
        return t_cur
    return t_cur + u_cur * (t_cur - t_prev) / (u_prev - u_cur)


def _integrate(
    rhs: VectorField,
    state0: State,
    cfg: IntegratorConfig,
    admissible: Callable[[State], Optional[State]],
    blowup_measure: Callable[[State], float],
    blowup_floor: float,
    stop: Optional[Callable[[float, State], bool]] = None,
    derived: Optional[Dict[str, Callable[[State], float]]] = None,
    operation: str = "integrate"
) -> FlowTrace:
    """
    Shared Runge-Kutta loop.

    admissible returns the (possibly cleaned) state or None to reject it;
    blowup_measure is a positive quantity that tends to 0 at blow-up.
    """
    trace = FlowTrace()
    t = 0.0
    y = admissible(np.array(state0, copy=True))
    if y is None:
        raise ValidationError("Initial state is not admissible", field_name="state0")
    k1 = _safe_rhs(rhs, y)
    if k1 is None:
        raise IntegrationError("Right-hand side is not finite at the initial state", time=0.0, operation=operation)

    samples = list(cfg.t_eval) if cfg.t_eval is not None else None
    if samples and samples[0] == 0.0:
        samples.pop(0)
    trace.record(t, y, derived)

    span = cfg.t_max
    h = min(cfg.h_init, span)
    err_prev = 1.0
    u_prev, t_prev = blowup_measure(y), t
    adaptive = cfg.method == "rk45_adaptive"

    if float(np.max(np.abs(k1))) <= cfg.abs_tol:
        trace.events.append(FlowEvent("converged", t, detail={"rhs_norm": float(np.max(np.abs(k1)))}))
        logger.info(f"{operation}: initial state is stationary")
        return trace

    steps = 0
    while t < cfg.t_max:
        steps += 1
        if steps > cfg.max_steps:
            raise IntegrationError(
                f"Exceeded {cfg.max_steps} steps before t_max",
                time=t, step=h, operation=operation
            )
        target = samples[0] if samples else cfg.t_max
        h_try = min(h if adaptive else cfg.h_init, target - t)
        lands = h_try >= target - t

        cleaned, k_next, err_norm = _attempt(rhs, y, k1, h_try, adaptive, admissible, cfg)

        if cleaned is None and adaptive:
            if math.isfinite(err_norm) and err_norm > 1.0:
                h = h_try * max(_FAC_MIN, cfg.safety * err_norm ** (-1.0 / 5.0))
            else:
                h = 0.5 * h_try
            if h < cfg.min_step_factor * span:
                raise IntegrationError("Step size underflow", time=t, step=h, operation=operation)
            continue

        while cleaned is None:
            # fixed-step mode halves the current step only
            h_try *= 0.5
            lands = False
            if h_try < cfg.min_step_factor * span:
                raise IntegrationError("Step size underflow", time=t, step=h_try, operation=operation)
            cleaned, k_next, err_norm = _attempt(rhs, y, k1, h_try, adaptive, admissible, cfg)

        t = target if lands else t + h_try
        y = cleaned
        k1 = k_next
        if adaptive:
            factor = cfg.safety * max(err_norm, 1e-10) ** (-_PI_ALPHA) * err_prev ** _PI_BETA
            factor = min(_FAC_MAX, max(_FAC_MIN, factor))
            err_prev = max(err_norm, 1e-4)
            h = h_try * factor if not lands or h_try >= h else h
        if lands and samples:
            samples.pop(0)

        if samples is None or lands:
            trace.record(t, y, derived)

        u = blowup_measure(y)
        if u <= blowup_floor:
            t_est = _secant_blowup_time(t_prev, u_prev, t, u)
            if trace.times[-1] != t:
                trace.record(t, y, derived)
            trace.events.append(FlowEvent("blowup_detected", t, t_est=t_est, detail={"measure": u}))
            logger.info(f"{operation}: blow-up detected at t={t:.10g}, T_est={t_est:.10g}")
            return trace
        u_prev, t_prev = u, t

        if stop is not None and stop(t, y):
            if trace.times[-1] != t:
                trace.record(t, y, derived)
            trace.events.append(FlowEvent("stopped", t))
            logger.info(f"{operation}: stop condition met at t={t:.10g}")
            return trace

        rhs_norm = float(np.max(np.abs(k1)))
        if rhs_norm <= cfg.abs_tol:
            if trace.times[-1] != t:
                trace.record(t, y, derived)
            trace.events.append(FlowEvent("converged", t, detail={"rhs_norm": rhs_norm}))
            logger.info(f"{operation}: converged at t={t:.10g}")
            return trace

    if trace.times[-1] != t:
        trace.record(t, y, derived)
    trace.events.append(FlowEvent("max_time_reached", t))
    logger.info(f"{operation}: reached t_max={cfg.t_max:.10g} after {steps} steps")
    return trace


# ---------------------------------------------------------------------------
# Metric flow
# ---------------------------------------------------------------------------

def metric_flow_rhs(alg: ComplexLieAlgebra, g: HermitianMetric) -> np.ndarray:
    """
    Velocity -Theta(g) = -H P of the metric flow.

    Raises:
        IndefiniteMetricError: If g is not positive definite
    """
    return -theta_form(alg, g)


def _min_eigenvalue(H: np.ndarray) -> float:
    return float(linalg.eigvalsh(H)[0])


def integrate_metric_flow(
    alg: ComplexLieAlgebra,
    H0: HermitianMetric,
    cfg: IntegratorConfig,
    stop: Optional[Callable[[float, np.ndarray], bool]] = None,
    derived: Optional[Dict[str, Callable[[np.ndarray], float]]] = None
) -> FlowTrace:
    """
    Integrate dH/dt = -H P(H) from H0.

    Every accepted state is re-symmetrized and must be positive definite.
    Blow-up is declared when the smallest eigenvalue drops to min_eig_floor
    or |H^-1| reaches blowup_norm_cap; T_est extrapolates the smallest
    eigenvalue linearly to zero.

    Raises:
        IntegrationError: On step-size underflow
    """
    def rhs(H: np.ndarray) -> np.ndarray:
        return metric_flow_rhs(alg, HermitianMetric(0.5 * (H + H.conj().T)))

    def admissible(H: np.ndarray) -> Optional[np.ndarray]:
        H = 0.5 * (H + H.conj().T)
        try:
            linalg.cholesky(H, lower=True)
        except linalg.LinAlgError:
            return None
        return H

    floor = max(cfg.min_eig_floor, 1.0 / cfg.blowup_norm_cap)
    logger.debug(f"integrate_metric_flow: dim {alg.dim}, config {cfg.to_dict()}")
    return _integrate(
        rhs, np.asarray(H0.H, dtype=complex), cfg, admissible, _min_eigenvalue, floor,
        stop=stop, derived=derived, operation="integrate_metric_flow"
    )


# ---------------------------------------------------------------------------
# Reduced systems
# ---------------------------------------------------------------------------

def integrate_reduced(
    rhs: VectorField,
    state0: Sequence[float],
    cfg: IntegratorConfig,
    stop: Optional[Callable[[float, np.ndarray], bool]] = None,
    derived: Optional[Dict[str, Callable[[np.ndarray], float]]] = None
) -> FlowTrace:
    """
    Integrate a reduced vector field on the positive orthant.

    Steps leaving the open orthant are rejected. Blow-up is declared when
    the sup-norm reaches blowup_norm_cap; T_est extrapolates 1/|state| to 0.

    Raises:
        ValidationError: If state0 is not strictly positive
        IntegrationError: On step-size underflow
    """
    state = np.asarray(state0, dtype=float)
    if np.any(state <= 0.0):
        raise ValidationError(
            "Reduced initial state must be strictly positive",
            field_name="state0",
            field_value=state.tolist()
        )

    def admissible(y: np.ndarray) -> Optional[np.ndarray]:
        return y if np.all(y > 0.0) else None

    def measure(y: np.ndarray) -> float:
        return 1.0 / float(np.max(np.abs(y)))

    return _integrate(
        rhs, state, cfg, admissible, measure, 1.0 / cfg.blowup_norm_cap,
        stop=stop, derived=derived, operation="integrate_reduced"
    )


def comparison_envelope(t: float, m0: float, n: int) -> float:
    """Lower bound (m0^-1 - (n+1) t)^-1 for min{x, y, z}; inf once the bracket is non-positive."""
    denom = 1.0 / m0 - (n + 1) * t
    return math.inf if denom <= 0.0 else 1.0 / denom


def envelope_margin(trace: FlowTrace, m0: float, n: int, slack: float = ENVELOPE_SLACK) -> float:
    """
    Smallest value of min(state) - envelope + slack * max(1, envelope) over the trace.

    Non-negative iff the comparison envelope holds at every stored sample.
    """
    worst = math.inf
    for t, state in zip(trace.times, trace.states):
        env = comparison_envelope(t, m0, n)
        if math.isinf(env):
            continue
        worst = min(worst, float(np.min(state)) - env + slack * max(1.0, env))
    return worst


@dataclass(frozen=True)
class BlowupBounds:
    """
    Numerical blow-up time of the (x, y, z) system with its analytic upper bound.

    Attributes:
        lower: Detected T_est (None if no blow-up was seen before t_max)
        upper: ((n+1) min{x0, y0, z0})^-1
        envelope_margin: Result of envelope_margin along the trajectory
        trace: The integrated trajectory
    """
    lower: Optional[float]
    upper: float
    envelope_margin: float
    trace: FlowTrace

    @property
    def bound_holds(self) -> bool:
        return self.lower is not None and self.lower <= self.upper + 1e-6

    def to_dict(self) -> Dict[str, Any]:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "envelope_margin": self.envelope_margin,
            "bound_holds": self.bound_holds,
        }


def blowup_upper_bound(x0: float, y0: float, z0: float, n: int) -> float:
    """((n+1) min{x0, y0, z0})^-1."""
    for name, value in (("x0", x0), ("y0", y0), ("z0", z0)):
        ParameterValidator.validate_positive_field(value, name)
    return 1.0 / ((n + 1) * min(x0, y0, z0))


def blowup_time_bounds(
    x0: float,
    y0: float,
    z0: float,
    n: int,
    cfg: Optional[IntegratorConfig] = None
) -> BlowupBounds:
    """
    Detected blow-up time of the (x, y, z) system and its upper bound.

    Args:
        x0, y0, z0: Positive initial values
        n: Rank parameter
        cfg: Integrator settings; defaults integrate to 1.5 times the bound

    Raises:
        ValidationError: If an initial value is not positive
    """
    from .families import xyz_rhs

    n = ParameterValidator.validate_integer_field(n, "n", 1)
    upper = blowup_upper_bound(x0, y0, z0, n)
    if cfg is None:
        cfg = IntegratorConfig(t_max=1.5 * upper, h_init=upper * 1e-3, blowup_norm_cap=1e8,
                               rel_tol=1e-10, abs_tol=1e-12)
    trace = integrate_reduced(xyz_rhs(n), [x0, y0, z0], cfg)
    lower = trace.blowup_time
    if lower is None:
        logger.warning(f"blowup_time_bounds: no blow-up before t={trace.final_time:.6g}")
    margin = envelope_margin(trace, min(x0, y0, z0), n)
    return BlowupBounds(lower, upper, margin, trace)


# ---------------------------------------------------------------------------
# Bracket trajectories
# ---------------------------------------------------------------------------

@dataclass
class BracketTrajectory:
    """Gauged brackets along a metric trajectory, with skipped samples."""
    samples: List[Tuple[float, ComplexLieAlgebra]] = field(default_factory=list)
    skipped: List[FlowEvent] = field(default_factory=list)

    def __iter__(self) -> Iterator[Tuple[float, ComplexLieAlgebra]]:
        return iter(self.samples)

    def __len__(self) -> int:
        return len(self.samples)

    def __getitem__(self, idx: int) -> Tuple[float, ComplexLieAlgebra]:
        return self.samples[idx]


def bracket_trajectory(
    alg: ComplexLieAlgebra,
    trace: FlowTrace,
    metric_of: Optional[Callable[[np.ndarray], np.ndarray]] = None
) -> BracketTrajectory:
    """
    Move each metric sample onto the bracket: emit (t, h . mu) with h . H = Id.

    h is the positive upper-triangular Cholesky gauge L^H. metric_of maps a
    stored state to its metric matrix (identity map for metric traces).
    """
    result = BracketTrajectory()
    for t, state in zip(trace.times, trace.states):
        H = metric_of(state) if metric_of is not None else state
        try:
            g = HermitianMetric(H)
            h = frame_gauge(g)
        except IndefiniteMetricError as e:
            result.skipped.append(FlowEvent("sample_skipped", t, detail=e.to_dict()))
            logger.warning(f"bracket_trajectory: skipped indefinite sample at t={t:.6g}")
            continue
        result.samples.append((t, gauge_act_bracket(h, alg)))
    return result


@dataclass(frozen=True)
class ConvergenceReport:
    """Summary of the distance of a bracket trajectory to a target."""
    distances: List[float]
    last_distance: float
    best_distance: float
    converged: bool
    monotone_tail: bool
    degenerate: bool
    threshold: float
    scale_free: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            "last_distance": self.last_distance,
            "best_distance": self.best_distance,
            "converged": self.converged,
            "monotone_tail": self.monotone_tail,
            "degenerate": self.degenerate,
            "threshold": self.threshold,
            "scale_free": self.scale_free,
            "samples": len(self.distances),
        }


def _unit(alg: ComplexLieAlgebra) -> Optional[ComplexLieAlgebra]:
    norm = alg.norm
    return alg.scaled(1.0 / norm) if norm > 0.0 else None


def convergence_detect(
    traj: Sequence[Tuple[float, ComplexLieAlgebra]],
    target: ComplexLieAlgebra,
    scale_free: bool = True,
    threshold: float = 1e-3,
    tail_fraction: float = 0.25,
    unitaries: Optional[Sequence[np.ndarray]] = None
) -> ConvergenceReport:
    """
    Distance of a bracket trajectory to a target bracket.

    In scale-free mode every bracket and the target are normalized to unit
    Frobenius norm first; zero brackets are reported as degenerate. The
    trajectory converges when the last distance is below threshold and the
    distances over the final tail_fraction of samples are non-increasing.

    Raises:
        ValidationError: If the trajectory is empty
    """
    samples = list(traj)
    if not samples:
        raise ValidationError("Trajectory is empty", field_name="traj")

    degenerate = False
    reference = target
    if scale_free:
        reference = _unit(target)
        if reference is None:
            degenerate = True

    distances: List[float] = []
    for _, bracket in samples:
        candidate = bracket
        if scale_free:
            candidate = _unit(bracket)
            if candidate is None or reference is None:
                degenerate = True
                continue
        if unitaries:
            distances.append(bracket_distance_unitary_orbit(candidate, reference, unitaries))
        else:
            distances.append(bracket_distance(candidate, reference))

    if not distances:
        return ConvergenceReport([], math.inf, math.inf, False, False, True, threshold, scale_free)

    tail_start = min(len(distances) - 1, int(len(distances) * (1.0 - tail_fraction)))
    tail = distances[tail_start:]
    monotone = all(b <= a * (1.0 + 1e-9) + 1e-15 for a, b in zip(tail, tail[1:]))
    last = distances[-1]
    return ConvergenceReport(
        distances=distances,
        last_distance=last,
        best_distance=min(distances),
        converged=bool(last < threshold and monotone),
        monotone_tail=monotone,
        degenerate=degenerate,
        threshold=threshold,
        scale_free=scale_free,
    )
