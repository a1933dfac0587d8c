"""Global model: softmax-normalized feature weights and per-zipcode scores."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from atmscore.dataset import NormalizedTable
from atmscore.errors import DomainError, ParseError, SchemaError

# Published state-wide weights, already normalized (they sum to 0.999).
DEFAULT_WEIGHTS: tuple[tuple[str, float], ...] = (
    ("transportation_pct", 0.13),
    ("employment_pct", 0.083),
    ("private_primary_school_pct", 0.083),
    ("median_home_value", 0.093),
    ("rented_1br_pct", 0.102),
    ("educated_pct", 0.074),
    ("population_density", 0.167),
    ("median_household_income", 0.045),
    ("earning_pct", 0.083),
    ("single_pct", 0.065),
    ("single_with_roommates_pct", 0.074),
)


@dataclass(frozen=True)
class GlobalWeights:
    items: tuple[tuple[str, float], ...]
    normalized: bool = True

    @property
    def features(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.items)

    @property
    def values(self) -> np.ndarray:
        return np.array([w for _, w in self.items], dtype=float)

    def __getitem__(self, feature: str) -> float:
        for name, w in self.items:
            if name == feature:
                return w
        raise KeyError(feature)

    def total(self) -> float:
        return math.fsum(w for _, w in self.items)

    def normalize(self) -> GlobalWeights:
        """Softmax the raw weights; already-normalized weights pass through."""
        if self.normalized:
            return self
        return GlobalWeights(tuple(zip(self.features, softmax(self.values).tolist())), True)


@dataclass(frozen=True)
class ZipScore:
    zipcode: str
    county: str
    y_global: float


def softmax(raw: Sequence[float]) -> np.ndarray:
    v = np.asarray(raw, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise DomainError("softmax needs a nonempty vector")
    if not np.all(np.isfinite(v)):
        raise DomainError("softmax input must be finite")
    e = np.exp(v - v.max())
    return e / e.sum()


def default_global_weights() -> GlobalWeights:
    return GlobalWeights(DEFAULT_WEIGHTS, normalized=True)


def parse_weights(text: str, raw: bool = False) -> GlobalWeights:
    """Parse ``feature = weight`` lines (``#`` comments allowed)."""
    items = []
    seen = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        name, sep, value = line.partition("=")
        name = name.strip()
        if not sep or not name:
            raise ParseError(f"weights line {lineno}: expected 'feature = weight'")
        try:
            w = float(value)
        except ValueError:
            raise ParseError(f"weights line {lineno}: bad weight {value.strip()!r}") from None
        if not math.isfinite(w):
            raise ParseError(f"weights line {lineno}: non-finite weight")
        if name in seen:
            raise ParseError(f"weights line {lineno}: duplicate feature {name!r}")
        seen.add(name)
        items.append((name, w))
    if not items:
        raise ParseError("weights file has no entries")
    weights = GlobalWeights(tuple(items), normalized=not raw)
    if not raw:
        for name, w in items:
            if w < 0:
                raise DomainError(f"normalized weight for {name!r} is negative")
    return weights


def load_weights(path: str | Path, raw: bool = False) -> GlobalWeights:
    return parse_weights(Path(path).read_text(encoding="utf-8"), raw=raw)


def format_weights(weights: GlobalWeights) -> str:
    return "".join(f"{name} = {w!r}\n" for name, w in weights.items)


def global_zip_score(weights: GlobalWeights, row: Mapping[str, float]) -> float:
    """Weighted sum of the row's values over the weighted features only."""
    if not weights.normalized:
        raise DomainError("weights must be normalized before scoring")
    total = 0.0
    for name, w in weights.items:
        if name not in row:
            raise SchemaError(f"feature column {name!r} missing from row")
        total += w * row[name]
    return total


def global_scores(weights: GlobalWeights, table: NormalizedTable) -> list[ZipScore]:
    """Score every zipcode of ``table``."""
    weights = weights.normalize()
    cols = [table.index_of(name) for name in weights.features]
    y = table.values[:, cols] @ weights.values
    return [ZipScore(z, c, float(v)) for z, c, v in zip(table.zipcodes, table.counties, y)]
