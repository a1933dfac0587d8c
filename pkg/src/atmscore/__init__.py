"""Dual-model ATM location scoring.

A global softmax-weighted demographic model and a per-county
k-means + random-forest local model, fused into per-network county
scores, plus a budget-constrained placement optimizer.
"""

from atmscore.errors import (
    AtmScoreError,
    CapacityError,
    ConfigError,
    DomainError,
    ParseError,
    SchemaError,
    ValidationError,
)

__version__ = "0.1.0"

__all__ = [
    "AtmScoreError",
    "CapacityError",
    "ConfigError",
    "DomainError",
    "ParseError",
    "SchemaError",
    "ValidationError",
    "__version__",
]
