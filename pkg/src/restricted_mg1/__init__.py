"""Workload processes of M/G/1 queues with admission restrictions.

Model 1 truncates any jump at the capacity 1; model 2 admits an arrival only
while the workload is below 1. The package computes invariant laws by
convolution-series quadrature, simulates both processes exactly, couples
copies through shared randomness, evaluates closed-form convergence bounds,
and estimates total-variation decay by Monte Carlo.
"""
from .backend import BACKEND
from .dist import Empirical, Exponential, FiniteMixture, PointMass, ServiceDistribution, Uniform, from_json
from .invariant import GridFunction, InvariantDistribution, SeriesConfig, model1_invariant, model2_invariant
from .sim import EventStream, FixedStream, ModelKind

__all__ = [
    "BACKEND",
    "Empirical",
    "EventStream",
    "Exponential",
    "FiniteMixture",
    "FixedStream",
    "GridFunction",
    "InvariantDistribution",
    "ModelKind",
    "PointMass",
    "SeriesConfig",
    "ServiceDistribution",
    "Uniform",
    "from_json",
    "model1_invariant",
    "model2_invariant",
]

__version__ = "0.1.0"
