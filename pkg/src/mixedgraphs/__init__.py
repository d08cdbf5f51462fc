"""Graphical Markov models over regression graphs.

Edge-matrix calculus (partial closure), matrix calculus (partial
inversion), separation and Markov equivalence, plus Gaussian and symmetric
binary models used as distributional oracles.
"""

from .graph import Edge, EdgeKind, RegressionGraph, VClass, VKind, classify_vs, subgraph, validate

__all__ = ["Edge", "EdgeKind", "RegressionGraph", "VClass", "VKind", "classify_vs", "subgraph", "validate"]
__version__ = "0.1.0"
