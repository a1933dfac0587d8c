"""Zipcode and ATM tables: ingestion, validation, name-tag classification,
min-max normalization, ATM frequency counts and a seeded synthetic generator.
"""

from __future__ import annotations

import csv
import enum
import logging
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from atmscore.errors import ConfigError, ParseError, SchemaError, ValidationError
from atmscore.rng import stream

logger = logging.getLogger(__name__)

ID_COLUMNS = ("zipcode", "county", "latitude", "longitude")

# Model features every zipcode file must carry, in file order.
FEATURE_COLUMNS = (
    "population_density",
    "median_household_income",
    "pct_not_earning",
    "transportation_pct",
    "employment_pct",
    "private_primary_school_pct",
    "median_home_value",
    "rented_1br_pct",
    "educated_pct",
    "earning_pct",
    "single_pct",
    "single_with_roommates_pct",
)
REQUIRED_COLUMNS = ID_COLUMNS + FEATURE_COLUMNS
NONNEGATIVE_COLUMNS = ("population_density", "median_household_income", "median_home_value")
PERCENT_COLUMNS = tuple(c for c in FEATURE_COLUMNS if c not in NONNEGATIVE_COLUMNS)
EXTRA_PREFIX = "f_"
# Nearest-zipcode list (semicolon separated). Carried through, never modelled.
NEAREST_COLUMN = "nearest_zipcodes"

ATM_COLUMNS = ("network", "street_address", "city", "zipcode")

_ZIP_RE = re.compile(r"^[0-9]{5}$")


class NameTag(enum.Enum):
    """Venue class of an ATM, ordered by relative score (highest first)."""

    SHOPPING_MALLS = "ShoppingMalls"
    BANKS_EXCHANGE = "BanksExchange"
    RECREATION_CENTRE = "RecreationCentre"
    GAS_STATIONS_CAR_WASH = "GasStationsCarWash"
    OFFICE_AREA = "OfficeArea"
    INDIVIDUAL_STORE = "IndividualStore"
    NULL_DATA = "NullData"

    @property
    def score(self) -> int:
        return RELATIVE_SCORES[self]

    @property
    def label(self) -> str:
        return _LABELS[self]


RELATIVE_SCORES: dict[NameTag, int] = {
    NameTag.SHOPPING_MALLS: 10,
    NameTag.BANKS_EXCHANGE: 9,
    NameTag.RECREATION_CENTRE: 8,
    NameTag.GAS_STATIONS_CAR_WASH: 7,
    NameTag.OFFICE_AREA: 6,
    NameTag.INDIVIDUAL_STORE: 5,
    NameTag.NULL_DATA: 4,
}

_LABELS = {
    NameTag.SHOPPING_MALLS: "Shopping Malls",
    NameTag.BANKS_EXCHANGE: "Banks/ Exchange Centre",
    NameTag.RECREATION_CENTRE: "Recreation Centre",
    NameTag.GAS_STATIONS_CAR_WASH: "Gas Stations/Car wash",
    NameTag.OFFICE_AREA: "Office Area",
    NameTag.INDIVIDUAL_STORE: "Individual Store",
    NameTag.NULL_DATA: "Null Data",
}

# Classification priority: descending relative score.
CLASS_PRIORITY = tuple(sorted(RELATIVE_SCORES, key=lambda t: -RELATIVE_SCORES[t]))


# --------------------------------------------------------------------------
# Records
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ZipcodeRecord:
    zipcode: str
    county: str
    latitude: float
    longitude: float
    features: Mapping[str, float]
    nearest_zipcodes: tuple[str, ...] = ()

    @property
    def not_earning_fraction(self) -> float:
        """``pct_not_earning`` rescaled from percent to a fraction."""
        return self.features["pct_not_earning"] / 100.0


@dataclass(frozen=True)
class AtmRecord:
    network: str
    street_address: str
    city: str
    zipcode: str
    name_tag: NameTag
    relative_score: int


@dataclass(frozen=True)
class NormalizedTable:
    """Min-max scaled feature matrix, one row per zipcode in ingestion order."""

    zipcodes: tuple[str, ...]
    counties: tuple[str, ...]
    feature_names: tuple[str, ...]
    minimum: np.ndarray
    maximum: np.ndarray
    raw: np.ndarray
    values: np.ndarray

    def __len__(self) -> int:
        return len(self.zipcodes)

    def index_of(self, feature: str) -> int:
        try:
            return self.feature_names.index(feature)
        except ValueError:
            raise SchemaError(f"feature column {feature!r} not in table") from None

    def column(self, feature: str) -> np.ndarray:
        return self.values[:, self.index_of(feature)]

    def raw_column(self, feature: str) -> np.ndarray:
        return self.raw[:, self.index_of(feature)]

    def county_names(self) -> list[str]:
        return sorted(set(self.counties))

    def county_rows(self, county: str) -> np.ndarray:
        return np.flatnonzero(np.asarray(self.counties) == county)

    def transform(self, raw: np.ndarray) -> np.ndarray:
        """Replay the stored scaling on new raw rows (not clipped)."""
        raw = np.atleast_2d(np.asarray(raw, dtype=float))
        span = self.maximum - self.minimum
        out = np.zeros_like(raw)
        ok = span > 0
        out[:, ok] = (raw[:, ok] - self.minimum[ok]) / span[ok]
        return out


@dataclass(frozen=True)
class FrequencyIndex:
    total: dict[str, int]
    by_network: dict[tuple[str, str], int]

    def count(self, zipcode: str, network: str | None = None) -> int:
        if network is None:
            return self.total.get(zipcode, 0)
        return self.by_network.get((zipcode, network), 0)


# --------------------------------------------------------------------------
# Name-tag classification
# --------------------------------------------------------------------------


def parse_keyword_table(text: str) -> dict[NameTag, tuple[str, ...]]:
    """Parse ``ClassKey: kw, kw`` lines. ``#`` starts a comment."""
    table: dict[NameTag, list[str]] = {tag: [] for tag in CLASS_PRIORITY}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, rest = line.partition(":")
        if not sep:
            raise ParseError(f"keyword table line {lineno}: expected 'Class: keywords'")
        try:
            tag = NameTag(key.strip())
        except ValueError:
            raise ParseError(f"keyword table line {lineno}: unknown class {key.strip()!r}") from None
        if tag is NameTag.NULL_DATA:
            raise ParseError(f"keyword table line {lineno}: NullData takes no keywords")
        table[tag].extend(k.strip().lower() for k in rest.split(",") if k.strip())
    return {tag: tuple(kws) for tag, kws in table.items() if kws}


def load_keyword_table(path: str | Path | None = None) -> dict[NameTag, tuple[str, ...]]:
    if path is None:
        text = resources.files("atmscore").joinpath("data/keywords.txt").read_text("utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    return parse_keyword_table(text)


def _compile(table: Mapping[NameTag, Sequence[str]]) -> list[tuple[NameTag, re.Pattern]]:
    compiled = []
    for tag in CLASS_PRIORITY:
        kws = table.get(tag)
        if not kws:
            continue
        alternatives = "|".join(re.escape(k) for k in sorted(kws, key=len, reverse=True))
        compiled.append((tag, re.compile(rf"(?<!\w)(?:{alternatives})(?!\w)", re.IGNORECASE)))
    return compiled


_DEFAULT_MATCHERS: list[tuple[NameTag, re.Pattern]] | None = None


def _default_matchers():
    global _DEFAULT_MATCHERS
    if _DEFAULT_MATCHERS is None:
        _DEFAULT_MATCHERS = _compile(load_keyword_table())
    return _DEFAULT_MATCHERS


def classify_name_tag(
    street_address: str, keywords: Mapping[NameTag, Sequence[str]] | None = None
) -> tuple[NameTag, int]:
    """Map a street address to its venue class and relative score.

    The first class (highest score first) with a keyword occurring as a whole
    word or phrase wins, so "Bank inside Westfield Mall" is a shopping mall.
    Addresses matching nothing, including the empty string, are NullData.
    """
    matchers = _default_matchers() if keywords is None else _compile(keywords)
    for tag, pattern in matchers:
        if pattern.search(street_address or ""):
            return tag, tag.score
    return NameTag.NULL_DATA, NameTag.NULL_DATA.score


# --------------------------------------------------------------------------
# Loading and writing
# --------------------------------------------------------------------------


def _parse_float(value: str | None, column: str, line: int) -> float:
    if value is None:
        raise ParseError(f"line {line}: missing value for {column!r}")
    try:
        out = float(value)
    except ValueError:
        raise ParseError(f"line {line}: non-numeric value {value!r} in column {column!r}") from None
    if not math.isfinite(out):
        raise ParseError(f"line {line}: non-finite value {value!r} in column {column!r}")
    return out


def _check_zip(value: str | None, line: int) -> str:
    value = (value or "").strip()
    if not _ZIP_RE.match(value):
        raise ParseError(f"line {line}: zipcode {value!r} is not a 5-digit string")
    return value


def _open_csv(path: str | Path):
    return open(path, newline="", encoding="utf-8")


def load_zipcodes(path: str | Path) -> list[ZipcodeRecord]:
    """Read a zipcode table, validating the schema and every row.

    Raises ``SchemaError`` for a missing/unknown column, ``ParseError`` with
    the file line number for a bad cell, and ``ValidationError`` for
    duplicate zipcodes or an empty table.
    """
    with _open_csv(path) as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames
        if not header:
            raise SchemaError(f"{path}: empty file, header row required")
        header = [h.strip() for h in header]
        reader.fieldnames = header
        for col in REQUIRED_COLUMNS:
            if col not in header:
                raise SchemaError(f"{path}: missing required column {col!r}")
        extras = [h for h in header if h.startswith(EXTRA_PREFIX)]
        unknown = [h for h in header if h not in REQUIRED_COLUMNS and h not in extras and h != NEAREST_COLUMN]
        if unknown:
            raise SchemaError(f"{path}: unknown column(s) {', '.join(map(repr, unknown))}")
        if len(set(header)) != len(header):
            raise SchemaError(f"{path}: duplicate column names in header")
        feature_cols = [h for h in header if h in FEATURE_COLUMNS or h in extras]

        records: list[ZipcodeRecord] = []
        seen: dict[str, int] = {}
        for row in reader:
            line = reader.line_num
            if None in row:
                raise ParseError(f"line {line}: more fields than header columns")
            zipcode = _check_zip(row["zipcode"], line)
            if zipcode in seen:
                raise ValidationError(
                    f"duplicate zipcode {zipcode} on lines {seen[zipcode]} and {line}"
                )
            seen[zipcode] = line
            county = (row["county"] or "").strip()
            if not county:
                raise ParseError(f"line {line}: empty county")
            lat = _parse_float(row["latitude"], "latitude", line)
            lon = _parse_float(row["longitude"], "longitude", line)
            if not (-90.0 <= lat <= 90.0 and -180.0 <= lon <= 180.0):
                raise ValidationError(f"line {line}: coordinates ({lat}, {lon}) out of range")
            features = {}
            for col in feature_cols:
                value = _parse_float(row[col], col, line)
                if col in PERCENT_COLUMNS and not 0.0 <= value <= 100.0:
                    raise ValidationError(f"line {line}: {col}={value} outside [0, 100]")
                if col in NONNEGATIVE_COLUMNS and value < 0.0:
                    raise ValidationError(f"line {line}: {col}={value} is negative")
                features[col] = value
            nearest: tuple[str, ...] = ()
            if NEAREST_COLUMN in header and row[NEAREST_COLUMN]:
                nearest = tuple(z.strip() for z in row[NEAREST_COLUMN].split(";") if z.strip())
            records.append(ZipcodeRecord(zipcode, county, lat, lon, features, nearest))

    if not records:
        raise ValidationError(f"{path}: no zipcode rows")
    return records


def load_atms(
    path: str | Path,
    zipcodes: Iterable[ZipcodeRecord],
    keywords: Mapping[NameTag, Sequence[str]] | None = None,
) -> tuple[list[AtmRecord], int]:
    """Read an ATM table; rows whose zipcode is not in ``zipcodes`` are skipped.

    Returns the accepted records and the number of skipped rows.
    """
    known = {z.zipcode for z in zipcodes}
    matchers = None if keywords is None else _compile(keywords)
    with _open_csv(path) as fh:
        reader = csv.DictReader(fh)
        if not reader.fieldnames:
            raise ValidationError(f"{path}: empty ATM file")
        header = [h.strip() for h in reader.fieldnames]
        reader.fieldnames = header
        for col in ATM_COLUMNS:
            if col not in header:
                raise SchemaError(f"{path}: missing required column {col!r}")

        atms: list[AtmRecord] = []
        rows = 0
        rejected = 0
        for row in reader:
            rows += 1
            line = reader.line_num
            if None in row or any(row[c] is None for c in ATM_COLUMNS):
                raise ParseError(f"line {line}: field count does not match header")
            network = row["network"].strip()
            if not network:
                raise ParseError(f"line {line}: empty network name")
            zipcode = _check_zip(row["zipcode"], line)
            if zipcode not in known:
                rejected += 1
                continue
            address = row["street_address"].strip()
            if matchers is None:
                tag, score = classify_name_tag(address)
            else:
                tag, score = _classify_with(matchers, address)
            atms.append(AtmRecord(network, address, row["city"].strip(), zipcode, tag, score))

    if rows == 0:
        raise ValidationError(f"{path}: no ATM rows")
    if rejected:
        logger.warning("%s: skipped %d ATM row(s) with unknown zipcode", path, rejected)
    return atms, rejected


def _classify_with(matchers, address: str) -> tuple[NameTag, int]:
    for tag, pattern in matchers:
        if pattern.search(address):
            return tag, tag.score
    return NameTag.NULL_DATA, NameTag.NULL_DATA.score


def _fmt(value: float) -> str:
    return repr(float(value))


def write_zipcodes(records: Sequence[ZipcodeRecord], path: str | Path) -> None:
    if not records:
        raise ValidationError("no zipcode records to write")
    feature_cols = list(records[0].features)
    with_nearest = any(r.nearest_zipcodes for r in records)
    header = list(ID_COLUMNS) + feature_cols + ([NEAREST_COLUMN] if with_nearest else [])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for r in records:
            row = [r.zipcode, r.county, _fmt(r.latitude), _fmt(r.longitude)]
            row += [_fmt(r.features[c]) for c in feature_cols]
            if with_nearest:
                row.append(";".join(r.nearest_zipcodes))
            writer.writerow(row)


def write_atms(rows: Iterable[AtmRecord | Mapping[str, str]], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(ATM_COLUMNS)
        for r in rows:
            if isinstance(r, AtmRecord):
                writer.writerow([r.network, r.street_address, r.city, r.zipcode])
            else:
                writer.writerow([r[c] for c in ATM_COLUMNS])


# --------------------------------------------------------------------------
# Normalization and counting
# --------------------------------------------------------------------------


def normalize_features(records: Sequence[ZipcodeRecord]) -> NormalizedTable:
    """Min-max scale every feature column over the whole table.

    A constant column (including any column of a one-row table) maps to 0.
    """
    if not records:
        raise ValidationError("cannot normalize an empty zipcode table")
    names = tuple(records[0].features)
    for r in records:
        if tuple(r.features) != names:
            raise ValidationError(f"zipcode {r.zipcode}: feature columns differ from first row")
    raw = np.array([[r.features[n] for n in names] for r in records], dtype=float)
    lo = raw.min(axis=0)
    hi = raw.max(axis=0)
    span = hi - lo
    values = np.zeros_like(raw)
    ok = span > 0
    values[:, ok] = (raw[:, ok] - lo[ok]) / span[ok]
    # guard against 1-ulp overshoot
    np.clip(values, 0.0, 1.0, out=values)
    return NormalizedTable(
        zipcodes=tuple(r.zipcode for r in records),
        counties=tuple(r.county for r in records),
        feature_names=names,
        minimum=lo,
        maximum=hi,
        raw=raw,
        values=values,
    )


def atm_frequency(atms: Iterable[AtmRecord]) -> FrequencyIndex:
    total: Counter[str] = Counter()
    by_network: Counter[tuple[str, str]] = Counter()
    for a in atms:
        total[a.zipcode] += 1
        by_network[(a.zipcode, a.network)] += 1
    return FrequencyIndex(dict(total), dict(by_network))


# --------------------------------------------------------------------------
# Synthetic data
# --------------------------------------------------------------------------

# Raw value range and (wealth, urbanity) loading for each model feature.
# pct_not_earning falls as its latent rises.
_FEATURE_MODEL: dict[str, tuple[float, float, float, float]] = {
    "population_density": (10.0, 20000.0, 0.35, 0.65),
    "median_household_income": (25000.0, 200000.0, 1.0, 0.0),
    "pct_not_earning": (55.0, 10.0, 0.9, 0.1),
    "transportation_pct": (0.0, 40.0, 0.3, 0.7),
    "employment_pct": (40.0, 75.0, 0.8, 0.2),
    "private_primary_school_pct": (2.0, 35.0, 0.85, 0.15),
    "median_home_value": (150000.0, 1500000.0, 0.75, 0.25),
    "rented_1br_pct": (2.0, 30.0, 0.3, 0.7),
    "educated_pct": (10.0, 70.0, 0.7, 0.3),
    "earning_pct": (45.0, 90.0, 0.9, 0.1),
    "single_pct": (20.0, 55.0, 0.2, 0.8),
    "single_with_roommates_pct": (2.0, 20.0, 0.25, 0.75),
}

DEFAULT_NETWORKS = (
    "American Chartered Bank",
    "U.S. Bank",
    "Capital One 360",
    "Whitney Bank",
    "1st Advantage Federal Credit Union",
    "Workers Credit Union",
)

_ADDRESS_TEMPLATES: dict[NameTag, tuple[str, ...]] = {
    NameTag.SHOPPING_MALLS: ("{n} Westfield Mall", "{n} Galleria Blvd", "Shopping Center {n} Oak Ave"),
    NameTag.BANKS_EXCHANGE: ("{n} Main St Bank Branch", "Credit Union {n} Pine St", "Currency Exchange {n} 1st Ave"),
    NameTag.RECREATION_CENTRE: ("{n} Stadium Way", "Cinema Complex {n} Elm St", "Fitness Club {n} Lake Rd"),
    NameTag.GAS_STATIONS_CAR_WASH: ("{n} Shell Gas Station", "Car Wash {n} Hwy 1", "{n} Chevron Fuel Stop"),
    NameTag.OFFICE_AREA: ("{n} Harbor Dr Suite {u}", "Office Tower {n} 5th Ave"),
    NameTag.INDIVIDUAL_STORE: ("{n} Walgreens Pharmacy", "7-Eleven {n} Broadway", "Grocery Store {n} Cedar St"),
    NameTag.NULL_DATA: ("", "{n} Cedar St", "{n} Valley Rd"),
}


@dataclass(frozen=True)
class SynthConfig:
    n_zipcodes: int = 5000
    n_counties: int = 40
    n_atms: int = 11229
    planted: bool = True
    clusters: int = 7
    n_extra_features: int = 20
    networks: tuple[str, ...] = DEFAULT_NETWORKS
    noise: float = 0.012
    extra_noise: float = 0.01

    def validate(self) -> None:
        if self.n_zipcodes < 1 or self.n_counties < 1 or self.n_atms < 0:
            raise ConfigError("zipcode and county counts must be positive, ATM count nonnegative")
        if self.n_counties > self.n_zipcodes:
            raise ConfigError(
                f"county count {self.n_counties} exceeds zipcode count {self.n_zipcodes}"
            )
        if self.n_zipcodes > 90000:
            raise ConfigError("at most 90000 synthetic zipcodes (5-digit space)")
        if self.clusters < 1:
            raise ConfigError("clusters must be >= 1")
        if not self.networks:
            raise ConfigError("at least one network name required")


@dataclass
class SyntheticData:
    zipcodes: list[ZipcodeRecord]
    atm_rows: list[dict[str, str]]
    planted_we: np.ndarray = field(repr=False)
    cluster_ids: np.ndarray = field(repr=False)


def planted_wealth(records: Sequence[ZipcodeRecord]) -> np.ndarray:
    """Wealth Estimate per row, with the same scaling the scoring pipeline uses."""
    table = normalize_features(records)
    pne = table.raw_column("pct_not_earning") / 100.0
    return table.column("population_density") * table.column("median_household_income") * (1.0 - pne)


def _apportion(total: int, weights: np.ndarray) -> np.ndarray:
    # Largest-remainder rounding; nondecreasing in weight.
    if total == 0 or weights.sum() <= 0:
        return np.zeros(len(weights), dtype=int)
    quota = total * weights / weights.sum()
    counts = np.floor(quota).astype(int)
    short = total - counts.sum()
    remainder = quota - counts
    order = np.lexsort((np.arange(len(weights)), -remainder))
    counts[order[:short]] += 1
    return counts


def synthesize(config: SynthConfig, seed: int) -> SyntheticData:
    """Build synthetic zipcode and ATM tables deterministically from ``seed``.

    With ``planted`` on, each county's zipcodes fall into ``clusters``
    well-separated groups along two latent axes (wealth, urbanity) that
    drive all model features, extra ``f_*`` columns vary mostly between
    counties, and ATM counts are apportioned in proportion to the Wealth
    Estimate.
    """
    config.validate()
    rng = stream(seed, "synth")
    n = config.n_zipcodes
    zips = np.sort(rng.choice(np.arange(10000, 100000), size=n, replace=False))
    perm = rng.permutation(n)
    county_of = np.empty(n, dtype=int)
    for c, members in enumerate(np.array_split(perm, config.n_counties)):
        county_of[members] = c
    county_names = [f"County {c + 1:02d}" for c in range(config.n_counties)]
    centers = np.column_stack(
        [rng.uniform(32.5, 42.0, config.n_counties), rng.uniform(-124.0, -114.5, config.n_counties)]
    )
    lat = centers[county_of, 0] + rng.normal(0.0, 0.1, n)
    lon = centers[county_of, 1] + rng.normal(0.0, 0.1, n)

    names = list(_FEATURE_MODEL)
    extra = [f"{EXTRA_PREFIX}{i + 1:02d}" for i in range(config.n_extra_features)]
    raw = np.empty((n, len(names) + len(extra)))
    cluster_ids = np.zeros(n, dtype=int)

    if config.planted:
        latent = np.empty((n, 2))
        for c in range(config.n_counties):
            members = rng.permutation(np.flatnonzero(county_of == c))
            k = min(config.clusters, len(members))
            grid = np.linspace(0.0, 1.0, k) if k > 1 else np.array([0.5])
            a = rng.permutation(grid)
            b = rng.permutation(grid)
            labels = np.arange(len(members)) % k
            cluster_ids[members] = labels
            latent[members, 0] = a[labels]
            latent[members, 1] = b[labels]
        for j, name in enumerate(names):
            lo, hi, wa, wb = _FEATURE_MODEL[name]
            t = wa * latent[:, 0] + wb * latent[:, 1] + rng.normal(0.0, config.noise, n)
            raw[:, j] = lo + (hi - lo) * np.clip(t, 0.0, 1.0)
        offsets = rng.uniform(0.0, 1.0, (config.n_counties, len(extra)))
        noise = rng.normal(0.0, config.extra_noise, (n, len(extra)))
        raw[:, len(names):] = 100.0 * np.clip(offsets[county_of] + noise, 0.0, 1.0)
    else:
        for j, name in enumerate(names):
            lo, hi, _, _ = _FEATURE_MODEL[name]
            raw[:, j] = lo + (hi - lo) * rng.uniform(0.0, 1.0, n)
        raw[:, len(names):] = 100.0 * rng.uniform(0.0, 1.0, (n, len(extra)))

    raw = np.round(raw, 4)
    lat = np.round(lat, 6)
    lon = np.round(lon, 6)
    all_names = names + extra
    records = [
        ZipcodeRecord(
            zipcode=f"{zips[i]:05d}",
            county=county_names[county_of[i]],
            latitude=float(lat[i]),
            longitude=float(lon[i]),
            features={nm: float(raw[i, j]) for j, nm in enumerate(all_names)},
        )
        for i in range(n)
    ]

    we = planted_wealth(records)
    if config.planted:
        counts = _apportion(config.n_atms, we + 1e-3)
    else:
        counts = np.bincount(rng.integers(0, n, config.n_atms), minlength=n)

    m = len(config.networks)
    share = rng.dirichlet(np.full(m, 4.0))
    venue_pref = rng.dirichlet(np.full(len(CLASS_PRIORITY), 1.5), size=m)
    atm_rows: list[dict[str, str]] = []
    for i in range(n):
        for _ in range(int(counts[i])):
            net = int(rng.choice(m, p=share))
            tag = CLASS_PRIORITY[int(rng.choice(len(CLASS_PRIORITY), p=venue_pref[net]))]
            templates = _ADDRESS_TEMPLATES[tag]
            address = templates[int(rng.integers(len(templates)))].format(
                n=int(rng.integers(1, 9999)), u=int(rng.integers(100, 999))
            )
            atm_rows.append(
                {
                    "network": config.networks[net],
                    "street_address": address,
                    "city": f"{county_names[county_of[i]]} City",
                    "zipcode": f"{zips[i]:05d}",
                }
            )
    return SyntheticData(records, atm_rows, we, cluster_ids)


def generate_synthetic(config: SynthConfig, seed: int, out_dir: str | Path) -> tuple[Path, Path]:
    """Write ``zipcodes.csv`` and ``atms.csv`` into ``out_dir``."""
    data = synthesize(config, seed)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    zip_path = out / "zipcodes.csv"
    atm_path = out / "atms.csv"
    write_zipcodes(data.zipcodes, zip_path)
    write_atms(data.atm_rows, atm_path)
    return zip_path, atm_path
