"""
Shared constants for the HCF lab.

This module centralizes default tolerances, integrator settings, registry
names and recorded reference values used across the application to ensure
consistency and ease of maintenance.
"""

from typing import Dict, List, Set

# File format tag written into every JSON artifact.
FORMAT_TAG: str = "hcf-lab/1"

# Numerical tolerances
TOL_JACOBI: float = 1e-12
TOL_NULLSPACE: float = 1e-9
TOL_VERDICT: float = 1e-8
TOL_RANK: float = 1e-9
TOL_CROSS_CHECK: float = 1e-12

# Integrator defaults
INTEGRATOR_METHODS: Set[str] = {"rk4_fixed", "rk45_adaptive"}
DEFAULT_INTEGRATOR: str = "rk45_adaptive"
DEFAULT_H_INIT: float = 1e-3
DEFAULT_REL_TOL: float = 1e-9
DEFAULT_ABS_TOL: float = 1e-14
DEFAULT_T_MAX: float = 10.0
DEFAULT_BLOWUP_NORM_CAP: float = 1e12
DEFAULT_MIN_EIG_FLOOR: float = 1e-12
DEFAULT_SAFETY: float = 0.9
DEFAULT_MAX_STEPS: int = 200_000
MIN_STEP_FACTOR: float = 1e-14

# Relative slack used by the comparison envelope check.
ENVELOPE_SLACK: float = 1e-6

# Seed used when none is given.
DEFAULT_SEED: int = 20240601

# Exit codes of the command-line front end
EXIT_SUCCESS: int = 0
EXIT_CRITERION_FAILURE: int = 1
EXIT_INPUT_ERROR: int = 2

OUTPUT_FORMATS: Set[str] = {"json", "csv"}

# Block labels of the sl(n+1) ansatz
BLOCK_SL: str = "sl_n"
BLOCK_I: str = "I"
BLOCK_S: str = "s"

# Named constructors available through `families list|export`.
FAMILY_PARAMETERS: Dict[str, List[str]] = {
    "abelian": ["dim"],
    "sl": ["m"],
    "sl-sigma": ["n", "x", "y", "z"],
    "mu-yz": ["n", "y", "z"],
    "mu-infinity": ["n"],
    "heisenberg": ["m"],
    "perfect-double": ["t"],
    "perfect-double-ab": ["a", "b"],
}

FAMILY_DESCRIPTIONS: Dict[str, str] = {
    "abelian": "abelian algebra of the given dimension with the identity metric",
    "sl": "sl(m,C) in the Gell-Mann/I/r/s basis with the trace metric",
    "sl-sigma": "sl(n+1,C) with the block metric sigma_{x,y,z}",
    "mu-yz": "gauged sl(n+1,C) bracket mu_{y,z} with the identity metric",
    "mu-infinity": "limit bracket mu_infinity (sl_n semidirect Heisenberg)",
    "heisenberg": "complex Heisenberg algebra h_{2m+1} with the identity metric",
    "perfect-double": "perfect family nu_t = nu_{1,t} over sl(2,C)",
    "perfect-double-ab": "perfect family nu_{a,b} over sl(2,C)",
}

# Experiment registry names
EXPERIMENT_NAMES: Set[str] = {
    "sln-instability",
    "soliton-audit",
    "homothety",
    "orbit-drift",
    "flow-metric",
    "flow-reduced",
    "acceptance",
}

# Reduced systems known to `flow-reduced`.
REDUCED_SYSTEMS: Set[str] = {"xyz", "yz"}

# Perfect family: parameters of interest.
PERFECT_SOLITON_PARAMETERS: List[float] = [
    0.0, 2.0 ** -0.25, -(2.0 ** -0.25), 1.0, -1.0
]

# Trace/determinant values printed alongside the homothety argument, recorded
# next to the computed values in the homothety report.
PRINTED_HOMOTHETY_VALUES: Dict[str, Dict[str, float]] = {
    "nu_0": {"trace": 3.0, "det": 2.0},
    "nu_1": {"trace": 8.0, "det": 8.0},
}

# Printed soliton parameter and its eigenvalue; the solver result is
# reported next to it.
PRINTED_SOLITON_PARAMETER: float = 2.0 ** -0.25
PRINTED_SOLITON_LAMBDA: float = 2.0

# Homothety verdict threshold on the sup-distance of normalized spectra.
HOMOTHETY_DISTANCE_THRESHOLD: float = 0.05

# Acceptance criteria thresholds
ACCEPT_RATIO_TOL: float = 1e-4
ACCEPT_RATIO_Y_LEVEL: float = 1e-6
ACCEPT_LIMIT_Y_LEVEL: float = 1e-9
ACCEPT_LIMIT_DISTANCE: float = 1e-3
ACCEPT_BOUNDARY_SAMPLES: int = 1000
ACCEPT_RANDOM_SAMPLES: int = 50
ACCEPT_PROPERTY_TRIPLES: int = 100
ACCEPT_BLOWUP_POINTS: int = 20
ACCEPT_HEISENBERG_METRICS: int = 20
ACCEPT_NON_DERIVATION_FLOOR: float = 0.1

# Largest y' tolerated at samples inside D (rounding at the curved boundary).
MONOTONE_Y_TOL: float = 1e-10

# Off-block mass allowed in P for a block-diagonal sl(n+1) metric.
BLOCK_LEAKAGE_TOL: float = 1e-12

# Orbit invariant alpha^2 b^2 / (1 - b^4) is only compared on samples whose
# smallest metric eigenvalue stays above this floor.
ORBIT_INVARIANT_MIN_EIG: float = 1e-4
