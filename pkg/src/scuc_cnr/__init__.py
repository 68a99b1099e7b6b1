"""Security-constrained unit commitment with corrective network reconfiguration.

Solve pipelines: extensive formulations, feasibility-cut decomposition, and
accelerated decomposition with critical-sub-problem screening, on DC networks.
"""

__version__ = "0.1.0"
