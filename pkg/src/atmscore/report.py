"""Serialization of score reports, correlation exports, plans and run manifests."""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from atmscore.dataset import NormalizedTable
from atmscore.errors import ParseError, SchemaError
from atmscore.optimizer import Candidate, Plan
from atmscore.scoring import ScoreReport
from atmscore.wealth import CorrelationReport, scatter_rows

SCORE_COLUMNS = ("county", "network", "s_local", "s_global", "s_fused")
FREQUENCY_COLUMNS = ("feature", "county_count", "rank")
RANKING_COLUMNS = ("county", "rank", "network", "s_fused")


def sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def _f(v: float) -> str:
    return repr(float(v))


def write_scores_csv(report: ScoreReport, path: Path) -> None:
    """Per-(county, network) rows with the normalized scores that were fused."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = _writer(fh)
        w.writerow(SCORE_COLUMNS)
        for r in report.rows:
            w.writerow([r.county, r.network, _f(r.s_local_norm), _f(r.s_global_norm), _f(r.s_fused)])


def write_rankings_csv(rankings: Mapping[str, Sequence[str]], fused: Mapping[tuple[str, str], float], path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = _writer(fh)
        w.writerow(RANKING_COLUMNS)
        for county in sorted(rankings):
            for rank, network in enumerate(rankings[county], start=1):
                w.writerow([county, rank, network, _f(fused[(county, network)])])


def write_frequency_csv(table: Iterable[tuple[str, int, int]], path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = _writer(fh)
        w.writerow(FREQUENCY_COLUMNS)
        for feature, count, rank in table:
            w.writerow([feature, count, rank])


def report_dict(report: ScoreReport) -> dict:
    cfg = report.config
    return {
        "config": {
            "alpha": cfg.alpha,
            "local_weight": cfg.local_weight,
            "top_features": cfg.top_features,
            "k": cfg.k,
            "trees": cfg.trees,
            "restarts": cfg.restarts,
        },
        "county_scores": [
            {
                "county": r.county,
                "network": r.network,
                "s_local": r.s_local,
                "s_global": r.s_global,
                "s_local_norm": r.s_local_norm,
                "s_global_norm": r.s_global_norm,
                "s_fused": r.s_fused,
                "local_fallback": r.local_fallback,
            }
            for r in report.rows
        ],
        "rankings": {c: list(v) for c, v in sorted(report.rankings.items())},
        "top_features": {c: list(v) for c, v in sorted(report.top_features.items())},
        "feature_frequency": [
            {"feature": f, "county_count": n, "rank": k} for f, n, k in report.feature_frequency
        ],
    }


def emit_report(report: ScoreReport, out_dir: str | Path) -> dict[str, Path]:
    """Write scores, rankings, feature-frequency and the structured report."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = {
        "scores": out / "scores.csv",
        "rankings": out / "rankings.csv",
        "feature_frequency": out / "feature_frequency.csv",
        "report": out / "report.json",
    }
    write_scores_csv(report, files["scores"])
    fused = {(r.county, r.network): r.s_fused for r in report.rows}
    write_rankings_csv(report.rankings, fused, files["rankings"])
    write_frequency_csv(report.feature_frequency, files["feature_frequency"])
    write_json(report_dict(report), files["report"])
    return files


def write_json(data, path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=2, sort_keys=False)
        fh.write("\n")


def emit_correlation(
    report: CorrelationReport, table: NormalizedTable, out_dir: str | Path, scatter: bool = False
) -> dict[str, Path]:
    """``correlation.csv``, the selected list, raw weights, and optional scatter files."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = {"correlation": out / "correlation.csv", "selected": out / "selected_features.txt",
             "raw_weights": out / "raw_weights.txt"}
    with open(files["correlation"], "w", newline="", encoding="utf-8") as fh:
        w = _writer(fh)
        w.writerow(["feature", "pearson_r"])
        for name, r in report.correlations.items():
            w.writerow([name, _f(r)])
    files["selected"].write_text("".join(f"{n}\n" for n in report.selected), encoding="utf-8")
    # |r| of the selected features, usable as raw global weights
    files["raw_weights"].write_text(
        "".join(f"{n} = {abs(report.correlations[n])!r}\n" for n in report.selected), encoding="utf-8"
    )
    if scatter:
        sdir = out / "scatter"
        sdir.mkdir(exist_ok=True)
        for name in report.correlations:
            path = sdir / f"{name}.csv"
            with open(path, "w", newline="", encoding="utf-8") as fh:
                w = _writer(fh)
                w.writerow(["we", "feature_value"])
                for we, v in scatter_rows(table, name):
                    w.writerow([_f(we), _f(v)])
            files[f"scatter:{name}"] = path
    return files


def read_scores_csv(path: str | Path) -> list[dict]:
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or any(c not in reader.fieldnames for c in SCORE_COLUMNS):
            raise SchemaError(f"{path}: expected columns {', '.join(SCORE_COLUMNS)}")
        for row in reader:
            try:
                rows.append({
                    "county": row["county"],
                    "network": row["network"],
                    "s_local": float(row["s_local"]),
                    "s_global": float(row["s_global"]),
                    "s_fused": float(row["s_fused"]),
                })
            except (TypeError, ValueError):
                raise ParseError(f"{path} line {reader.line_num}: malformed score row") from None
    return rows


def read_costs_csv(path: str | Path) -> dict[str, float]:
    costs: dict[str, float] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"county", "cost"} <= set(reader.fieldnames):
            raise SchemaError(f"{path}: expected columns county, cost")
        for row in reader:
            try:
                cost = float(row["cost"])
            except (TypeError, ValueError):
                raise ParseError(f"{path} line {reader.line_num}: bad cost {row['cost']!r}") from None
            if row["county"] in costs:
                raise ParseError(f"{path} line {reader.line_num}: duplicate county {row['county']!r}")
            costs[row["county"]] = cost
    return costs


def write_plan(plan: Plan, candidates: Sequence[Candidate], path: str | Path, budget: float) -> None:
    by_id = {c.id: c for c in candidates}
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = _writer(fh)
        w.writerow(["id", "score", "cost"])
        for cid in plan.selected:
            w.writerow([cid, _f(by_id[cid].score), _f(by_id[cid].cost)])
        w.writerow(["TOTAL", _f(plan.total_score), _f(plan.total_cost)])
        w.writerow(["BUDGET", "", _f(budget)])
        w.writerow(["METHOD", plan.method, ""])
