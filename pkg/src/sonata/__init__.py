"""Decentralized gradient-tracking simulator and convergence-rate toolkit."""

from . import (algorithm, analysis, errors, graph, metrics, oracle, problems,
               prox, theory, textio)

__all__ = ["algorithm", "analysis", "errors", "graph", "metrics", "oracle",
           "problems", "prox", "theory", "textio"]

__version__ = "0.1.0"
