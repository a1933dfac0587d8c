"""County-level network scores from the global and local models, and their fusion.

Global county score of a network: sum over the county's zipcodes of
``y_global * ASA(network, zipcode) * count(network, zipcode)``.

Local county score: cluster the county's normalized zipcode rows, fit a forest
on the cluster labels, keep the top importances, and take the importance
weighted mean feature value of the county times ``ASA(network, county)``.

Both scores are min-max normalized across all (county, network) rows before
the convex fusion ``(1 - alpha) * local + alpha * global``.
"""

from __future__ import annotations

import logging
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from atmscore.dataset import AtmRecord, FrequencyIndex, NormalizedTable
from atmscore.errors import DomainError
from atmscore.forest import DEFAULT_TREES, ForestParams, feature_importance, forest_fit
from atmscore.global_model import ZipScore
from atmscore.kmeans import DEFAULT_K, DEFAULT_RESTARTS, kmeans_fit
from atmscore.rng import derive_seed

logger = logging.getLogger(__name__)

DEFAULT_ALPHA = 0.35
DEFAULT_TOP_FEATURES = 20


@dataclass(frozen=True)
class FusionConfig:
    alpha: float = DEFAULT_ALPHA
    top_features: int = DEFAULT_TOP_FEATURES
    k: int = DEFAULT_K
    trees: int = DEFAULT_TREES
    restarts: int = DEFAULT_RESTARTS

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise DomainError(f"alpha={self.alpha} outside [0, 1]")
        if self.top_features < 1:
            raise DomainError("top_features must be >= 1")
        if self.k < 1 or self.trees < 1 or self.restarts < 1:
            raise DomainError("k, trees and restarts must be >= 1")

    @property
    def local_weight(self) -> float:
        return 1.0 - self.alpha


def zip_atm_score(s_zip: float, asa: float, freq: int) -> float:
    return s_zip * asa * freq


def fuse(s_local_norm: float, s_global_norm: float, alpha: float) -> float:
    if not 0.0 <= alpha <= 1.0:
        raise DomainError(f"alpha={alpha} outside [0, 1]")
    return (1.0 - alpha) * s_local_norm + alpha * s_global_norm


def average_scores(atms: Iterable[AtmRecord], key) -> dict:
    """Mean relative score of ATMs grouped by ``key(atm)``."""
    sums: dict = defaultdict(int)
    counts: Counter = Counter()
    for a in atms:
        k = key(a)
        sums[k] += a.relative_score
        counts[k] += 1
    return {k: sums[k] / counts[k] for k in counts}


def county_global_score(
    network: str,
    county: str,
    zip_scores: Sequence[ZipScore],
    frequency: FrequencyIndex,
    atms: Sequence[AtmRecord],
) -> float:
    members = [z for z in zip_scores if z.county == county]
    if not members:
        raise DomainError(f"unknown county {county!r}")
    member_zips = {z.zipcode for z in members}
    asa = average_scores(
        (a for a in atms if a.network == network and a.zipcode in member_zips),
        key=lambda a: a.zipcode,
    )
    total = 0.0
    for z in members:
        freq = frequency.count(z.zipcode, network)
        if freq:
            total += zip_atm_score(z.y_global, asa[z.zipcode], freq)
    return total


def top_k_features(importance: Sequence[float], k: int) -> list[int]:
    """Indices of the k largest positive importances, descending, ties by index."""
    if k < 1:
        raise DomainError("k must be >= 1")
    imp = np.asarray(importance, dtype=float)
    order = sorted((i for i in range(len(imp)) if imp[i] > 0), key=lambda i: (-imp[i], i))
    return order[:k]


@dataclass(frozen=True)
class LocalModel:
    """Result of the per-county cluster -> forest -> top-feature pipeline."""

    county: str
    n_zipcodes: int
    n_clusters: int
    importance: np.ndarray
    top_features: tuple[int, ...]
    weights: np.ndarray
    feature_means: np.ndarray
    base_score: float
    fallback: bool


def fit_local_model(table: NormalizedTable, county: str, config: FusionConfig, seed: int) -> LocalModel:
    rows = table.county_rows(county)
    if rows.size == 0:
        raise DomainError(f"unknown county {county!r}")
    x = table.values[rows]
    d = x.shape[1]
    zeros = np.zeros(d)
    if len(rows) < 2:
        return LocalModel(county, len(rows), 1, zeros, (), np.zeros(0), np.zeros(0), 0.0, True)

    k = max(1, min(config.k, len(rows)))
    clusters = kmeans_fit(x, k=k, seed=derive_seed(seed, "kmeans"), restarts=config.restarts)
    forest = forest_fit(x, clusters.labels, ForestParams(n_trees=config.trees), seed=derive_seed(seed, "forest"))
    importance = feature_importance(forest)
    top = top_k_features(importance, config.top_features)
    if not top:
        return LocalModel(county, len(rows), k, importance, (), np.zeros(0), np.zeros(0), 0.0, True)
    w = importance[top]
    w = w / w.sum()
    means = x[:, top].mean(axis=0)
    return LocalModel(county, len(rows), k, importance, tuple(top), w, means, float(w @ means), False)


def county_local_score(
    network: str,
    county: str,
    table: NormalizedTable,
    atms: Sequence[AtmRecord],
    config: FusionConfig | None = None,
    seed: int = 0,
    model: LocalModel | None = None,
) -> float:
    """Local county score of one network; 0 when the network has no ATM there."""
    config = config or FusionConfig()
    rows = table.county_rows(county)
    if rows.size == 0:
        raise DomainError(f"unknown county {county!r}")
    zips = {table.zipcodes[i] for i in rows}
    scores = [a.relative_score for a in atms if a.network == network and a.zipcode in zips]
    if not scores:
        return 0.0
    if model is None:
        model = fit_local_model(table, county, config, seed)
    return model.base_score * (sum(scores) / len(scores))


def rank_networks(scores: Mapping[str, float]) -> list[str]:
    """Networks by descending score, ties by ascending name."""
    return sorted(scores, key=lambda n: (-scores[n], n))


def feature_frequency_table(top_lists: Iterable[Sequence[str]]) -> list[tuple[str, int, int]]:
    """(feature, county_count, rank) over per-county top-feature lists."""
    counts: Counter[str] = Counter()
    for features in top_lists:
        counts.update(set(features))
    ordered = sorted(counts, key=lambda f: (-counts[f], f))
    return [(f, counts[f], rank) for rank, f in enumerate(ordered, start=1)]


def minmax(values: Sequence[float]) -> list[float]:
    """Min-max scale to [0, 1]; a constant (or single) sequence maps to 0."""
    if not values:
        return []
    lo, hi = min(values), max(values)
    if hi <= lo:
        return [0.0] * len(values)
    return [(v - lo) / (hi - lo) for v in values]


@dataclass(frozen=True)
class ScoreRow:
    county: str
    network: str
    s_local: float
    s_global: float
    s_local_norm: float
    s_global_norm: float
    s_fused: float
    local_fallback: bool


@dataclass
class ScoreReport:
    config: FusionConfig
    rows: list[ScoreRow]
    rankings: dict[str, list[str]]
    top_features: dict[str, list[str]]
    feature_frequency: list[tuple[str, int, int]]
    local_models: dict[str, LocalModel] = field(default_factory=dict, repr=False)

    def row(self, county: str, network: str) -> ScoreRow:
        for r in self.rows:
            if r.county == county and r.network == network:
                return r
        raise KeyError((county, network))


def build_report(
    table: NormalizedTable,
    zip_scores: Sequence[ZipScore],
    atms: Sequence[AtmRecord],
    frequency: FrequencyIndex,
    config: FusionConfig | None = None,
    seed: int = 0,
) -> ScoreReport:
    """Score every (county, network) pair that has at least one ATM.

    Counties are processed in sorted order; county ``i`` draws its clustering
    and forest streams from ``derive_seed(seed, "county", i)``.
    """
    config = config or FusionConfig()
    county_of = dict(zip(table.zipcodes, table.counties))
    counties = table.county_names()

    by_county_zip: dict[str, list[ZipScore]] = defaultdict(list)
    for z in zip_scores:
        by_county_zip[z.county].append(z)
    atms_by_county: dict[str, list[AtmRecord]] = defaultdict(list)
    for a in atms:
        atms_by_county[county_of[a.zipcode]].append(a)

    raw: list[tuple[str, str, float, float, bool]] = []
    models: dict[str, LocalModel] = {}
    for i, county in enumerate(counties):
        model = fit_local_model(table, county, config, derive_seed(seed, "county", i))
        models[county] = model
        county_atms = atms_by_county.get(county, [])
        for network in sorted({a.network for a in county_atms}):
            s_global = county_global_score(network, county, by_county_zip[county], frequency, county_atms)
            s_local = county_local_score(network, county, table, county_atms, config, model=model)
            raw.append((county, network, s_local, s_global, model.fallback))
        logger.debug("county %s: %d zipcodes, fallback=%s", county, model.n_zipcodes, model.fallback)

    g_norm = minmax([r[3] for r in raw])
    informative = [j for j, r in enumerate(raw) if not r[4]]
    l_scaled = minmax([raw[j][2] for j in informative])
    l_norm = list(g_norm)
    for j, v in zip(informative, l_scaled):
        l_norm[j] = v

    rows = [
        ScoreRow(c, n, sl, sg, ln, gn, fuse(ln, gn, config.alpha), fb)
        for (c, n, sl, sg, fb), ln, gn in zip(raw, l_norm, g_norm)
    ]
    rankings = {
        county: rank_networks({r.network: r.s_fused for r in rows if r.county == county})
        for county in counties
        if any(r.county == county for r in rows)
    }
    top = {c: [table.feature_names[j] for j in m.top_features] for c, m in models.items()}
    freq_table = feature_frequency_table(top.values())
    return ScoreReport(config, rows, rankings, top, freq_table, models)
