"""Wealth Estimate objective and the Pearson screen over candidate features."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from atmscore.dataset import NormalizedTable
from atmscore.errors import DomainError, ValidationError

DEFAULT_THRESHOLD = 0.3

# Columns that feed the Wealth Estimate itself; excluded from the screen.
WEALTH_INPUTS = ("population_density", "median_household_income", "pct_not_earning")


@dataclass(frozen=True)
class WealthInputs:
    pd: float
    mhi: float
    pne: float

    def __post_init__(self):
        for name in ("pd", "mhi", "pne"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise DomainError(f"wealth input {name}={v} outside [0, 1]")


def wealth_estimate(w: WealthInputs) -> float:
    """Normalized density x normalized income x fraction earning."""
    return w.pd * w.mhi * (1.0 - w.pne)


def wealth_column(table: NormalizedTable) -> np.ndarray:
    """Vectorized Wealth Estimate for every row of ``table``.

    Density and income are the min-max scaled columns; the not-earning share
    is the raw percentage divided by 100.
    """
    pne = table.raw_column("pct_not_earning") / 100.0
    if np.any((pne < 0) | (pne > 1)):
        raise DomainError("pct_not_earning outside [0, 100]")
    return table.column("population_density") * table.column("median_household_income") * (1.0 - pne)


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Sample Pearson correlation coefficient, clipped to [-1, 1]."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or x.shape != y.shape:
        raise DomainError(f"length mismatch: {x.shape} vs {y.shape}")
    if len(x) < 2:
        raise DomainError("need at least 2 observations")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise DomainError("non-finite input")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise DomainError("correlation undefined for a constant sequence")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


@dataclass(frozen=True)
class CorrelationReport:
    correlations: dict[str, float]
    constant: frozenset[str] = frozenset()
    threshold: float = DEFAULT_THRESHOLD
    selected: tuple[str, ...] = field(default=())


def _is_constant(v: np.ndarray) -> bool:
    return bool(np.all(v == v[0]))


def correlate_features(
    table: NormalizedTable, threshold: float = DEFAULT_THRESHOLD
) -> CorrelationReport:
    """Correlate every non-input feature with the per-row Wealth Estimate.

    Constant features get r = 0 and are listed in ``constant``. If the
    Wealth Estimate itself is constant every feature is reported that way.
    """
    if len(table) < 2:
        raise ValidationError("correlation screen needs at least 2 zipcodes")
    we = wealth_column(table)
    we_constant = _is_constant(we)
    rs: dict[str, float] = {}
    constant = set()
    for j, name in enumerate(table.feature_names):
        if name in WEALTH_INPUTS:
            continue
        col = table.values[:, j]
        if we_constant or _is_constant(col):
            rs[name] = 0.0
            constant.add(name)
        else:
            rs[name] = pearson(col, we)
    report = CorrelationReport(rs, frozenset(constant), threshold)
    return CorrelationReport(rs, frozenset(constant), threshold, tuple(select_features(report, threshold)))


def select_features(report: CorrelationReport, threshold: float = DEFAULT_THRESHOLD) -> list[str]:
    """Features with |r| >= threshold, strongest first, ties by name.

    Constant features never pass, even at threshold 0.
    """
    keep = [
        name
        for name, r in report.correlations.items()
        if name not in report.constant and abs(r) >= threshold
    ]
    return sorted(keep, key=lambda n: (-abs(report.correlations[n]), n))


def scatter_rows(table: NormalizedTable, feature: str) -> list[tuple[float, float]]:
    """(Wealth Estimate, normalized feature value) pairs for one feature."""
    we = wealth_column(table)
    col = table.column(feature)
    return list(zip(we.tolist(), col.tolist()))
