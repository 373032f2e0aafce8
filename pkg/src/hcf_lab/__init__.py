"""
HCF Lab

A numerical lab for the positive Hermitian curvature flow on complex Lie
groups: structure constants and Hermitian metrics, the curvature operator
P(H), adaptive integration of the metric flow and its reduced ODEs, soliton
certificates, homothety invariants and the named experiments around the
sl(n+1, C) instability and the perfect soliton family.
"""

__version__ = "0.1.0"
__author__ = "Fridayxiao"

from .algebra_core import ComplexLieAlgebra, HermitianMetric
from .cli import main, run
from .curvature import soliton_check, ttcr_operator
from .flow import IntegratorConfig, integrate_metric_flow, integrate_reduced

__all__ = [
    "ComplexLieAlgebra",
    "HermitianMetric",
    "IntegratorConfig",
    "integrate_metric_flow",
    "integrate_reduced",
    "main",
    "run",
    "soliton_check",
    "ttcr_operator",
]
