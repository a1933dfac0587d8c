"""Command-line interface: gen-data, correlate, score, rank, optimize.

Exit codes: 0 success, 1 validation/schema, 2 I/O, 3 domain/numeric.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
import traceback
from pathlib import Path

from atmscore import __version__
from atmscore.dataset import (
    SynthConfig,
    atm_frequency,
    generate_synthetic,
    load_atms,
    load_keyword_table,
    load_zipcodes,
    normalize_features,
)
from atmscore.errors import AtmScoreError, ConfigError, ValidationError
from atmscore.forest import DEFAULT_TREES
from atmscore.global_model import default_global_weights, global_scores, load_weights
from atmscore.kmeans import DEFAULT_K, DEFAULT_RESTARTS
from atmscore.optimizer import EXACT_LIMIT, Candidate, place
from atmscore.report import (
    emit_correlation,
    emit_report,
    read_costs_csv,
    read_scores_csv,
    sha256_file,
    write_json,
    write_plan,
    write_rankings_csv,
)
from atmscore.scoring import (
    DEFAULT_ALPHA,
    DEFAULT_TOP_FEATURES,
    FusionConfig,
    build_report,
    fuse,
    rank_networks,
)
from atmscore.wealth import DEFAULT_THRESHOLD, correlate_features

logger = logging.getLogger("atmscore")

DEFAULT_SEED = 42


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def _digest_entry(path) -> dict:
    return {"path": str(path), "sha256": sha256_file(path)}


# --------------------------------------------------------------------------
# gen-data
# --------------------------------------------------------------------------


def cmd_gen_data(args) -> int:
    config = SynthConfig(
        n_zipcodes=args.zipcodes,
        n_counties=args.counties,
        n_atms=args.atms,
        planted=not args.no_planted,
        clusters=args.clusters,
        n_extra_features=args.extra_features,
    )
    config.validate()
    out = Path(args.out)
    zip_path, atm_path = generate_synthetic(config, args.seed, out)
    write_json(
        {
            "tool": "atmscore",
            "version": __version__,
            "command": "gen-data",
            "seed": args.seed,
            "flags": {
                "zipcodes": args.zipcodes,
                "counties": args.counties,
                "atms": args.atms,
                "planted": not args.no_planted,
                "clusters": args.clusters,
                "extra_features": args.extra_features,
            },
            "outputs": {p.name: sha256_file(p) for p in (zip_path, atm_path)},
        },
        out / "manifest.json",
    )
    logger.info("wrote %s and %s", zip_path, atm_path)
    return 0


# --------------------------------------------------------------------------
# correlate
# --------------------------------------------------------------------------


def cmd_correlate(args) -> int:
    _check_unit("--threshold", args.threshold, upper=None)
    records = load_zipcodes(args.zipcodes)
    table = normalize_features(records)
    report = correlate_features(table, args.threshold)
    files = emit_correlation(report, table, args.out, scatter=args.scatter)
    for name in report.selected:
        logger.info("selected %-28s r=%+.4f", name, report.correlations[name])
    logger.info("wrote %s", files["correlation"])
    return 0


# --------------------------------------------------------------------------
# score
# --------------------------------------------------------------------------

_SCORE_FLAGS = ("alpha", "k", "top_features", "trees", "restarts", "seed", "raw_weights",
                "corr_threshold", "correlation", "scatter")
_SCORE_INPUTS = ("zipcodes", "atms", "weights", "keywords")


def _check_unit(flag: str, value: float, upper: float | None = 1.0) -> None:
    if math.isnan(value) or value < 0 or (upper is not None and value > upper):
        bound = f"[0, {upper}]" if upper is not None else ">= 0"
        raise ConfigError(f"{flag}={value} must be {bound}")


def _apply_manifest(args) -> None:
    import json

    path = Path(args.from_manifest)
    manifest = json.loads(path.read_text(encoding="utf-8"))
    if manifest.get("command") != "score":
        raise ValidationError(f"{path}: not a score manifest")
    for key in _SCORE_FLAGS:
        setattr(args, key, manifest["flags"][key])
    setattr(args, "seed", manifest["seed"])
    for key in _SCORE_INPUTS:
        entry = manifest["inputs"].get(key)
        if entry is None:
            setattr(args, key, None)
            continue
        if sha256_file(entry["path"]) != entry["sha256"]:
            raise ValidationError(f"input {entry['path']} changed since the manifest was written")
        setattr(args, key, entry["path"])


def _validate_score_flags(args) -> FusionConfig:
    _check_unit("--alpha", args.alpha)
    _check_unit("--corr-threshold", args.corr_threshold)
    for flag, value in (("--k", args.k), ("--top-features", args.top_features),
                        ("--trees", args.trees), ("--restarts", args.restarts)):
        if value < 1:
            raise ConfigError(f"{flag}={value} must be >= 1")
    if args.seed < 0:
        raise ConfigError("--seed must be >= 0")
    if not args.zipcodes or not args.atms:
        raise ConfigError("--zipcodes and --atms are required")
    return FusionConfig(args.alpha, args.top_features, args.k, args.trees, args.restarts)


def cmd_score(args) -> int:
    if args.from_manifest:
        _apply_manifest(args)
    config = _validate_score_flags(args)

    records = load_zipcodes(args.zipcodes)
    keywords = load_keyword_table(args.keywords) if args.keywords else None
    atms, rejected = load_atms(args.atms, records, keywords)
    if args.weights:
        weights = load_weights(args.weights, raw=args.raw_weights)
    else:
        if args.raw_weights:
            raise ConfigError("--raw-weights requires --weights")
        weights = default_global_weights()
    table = normalize_features(records)
    zip_scores = global_scores(weights, table)
    report = build_report(table, zip_scores, atms, atm_frequency(atms), config, args.seed)

    out = Path(args.out)
    files = emit_report(report, out)
    if args.correlation:
        corr = correlate_features(table, args.corr_threshold)
        files.update(emit_correlation(corr, table, out, scatter=args.scatter))

    inputs = {k: _digest_entry(getattr(args, k)) for k in _SCORE_INPUTS if getattr(args, k)}
    write_json(
        {
            "tool": "atmscore",
            "version": __version__,
            "command": "score",
            "seed": args.seed,
            "alpha": config.alpha,
            "local_weight": config.local_weight,
            "flags": {k: getattr(args, k) for k in _SCORE_FLAGS},
            "inputs": inputs,
            "rejected_atms": rejected,
            "outputs": {p.relative_to(out).as_posix(): sha256_file(p) for p in files.values()},
        },
        out / "manifest.json",
    )
    logger.info(
        "scored %d (county, network) pairs over %d counties; %d ATM rows skipped",
        len(report.rows), len(report.rankings), rejected,
    )
    return 0


# --------------------------------------------------------------------------
# rank
# --------------------------------------------------------------------------


def cmd_rank(args) -> int:
    if args.alpha is not None:
        _check_unit("--alpha", args.alpha)
    rows = read_scores_csv(args.scores)
    if not rows:
        raise ValidationError(f"{args.scores}: no score rows")
    fused = {}
    for r in rows:
        key = (r["county"], r["network"])
        fused[key] = r["s_fused"] if args.alpha is None else fuse(r["s_local"], r["s_global"], args.alpha)
    rankings = {}
    for county in sorted({c for c, _ in fused}):
        rankings[county] = rank_networks({n: s for (c, n), s in fused.items() if c == county})
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_rankings_csv(rankings, fused, out / "rankings.csv")
    for county, networks in rankings.items():
        logger.info("%s: %s", county, " > ".join(networks))
    return 0


# --------------------------------------------------------------------------
# optimize
# --------------------------------------------------------------------------


def county_rewards(rows: list[dict], network: str | None = None) -> dict[str, float]:
    """Reward per county: one network's fused score, or the mean over networks."""
    rewards: dict[str, list[float]] = {}
    for r in rows:
        if network is None or r["network"] == network:
            rewards.setdefault(r["county"], []).append(r["s_fused"])
    if network is not None and not rewards:
        raise ValidationError(f"network {network!r} not present in scores")
    return {c: math.fsum(v) / len(v) for c, v in sorted(rewards.items())}


def cmd_optimize(args) -> int:
    if math.isnan(args.budget) or args.budget < 0:
        raise ConfigError(f"--budget={args.budget} must be >= 0")
    rewards = county_rewards(read_scores_csv(args.scores), args.network)
    if args.costs:
        costs = read_costs_csv(args.costs)
        missing = [c for c in rewards if c not in costs]
        if missing:
            raise ValidationError(f"{args.costs}: no cost for county {missing[0]!r}")
    else:
        costs = {c: 1.0 for c in rewards}
    candidates = [Candidate(c, rewards[c], costs[c]) for c in rewards]
    plan = place(candidates, args.budget, args.method)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_plan(plan, candidates, out / "plan.csv", args.budget)
    logger.info("%s plan: %d counties, score %.6g, cost %.6g", plan.method, len(plan.selected),
                plan.total_score, plan.total_cost)
    return 0


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = _Parser(prog="atmscore", description="Dual-model ATM location scoring.", formatter_class=fmt)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen-data", help="write a seeded synthetic dataset", formatter_class=fmt)
    p.add_argument("--out", default="data", help="output directory")
    p.add_argument("--zipcodes", type=int, default=5000, help="number of zipcodes")
    p.add_argument("--counties", type=int, default=40, help="number of counties")
    p.add_argument("--atms", type=int, default=11229, help="number of ATM rows")
    p.add_argument("--clusters", type=int, default=DEFAULT_K, help="planted clusters per county")
    p.add_argument("--extra-features", type=int, default=20, help="number of extra f_* columns")
    p.add_argument("--no-planted", action="store_true", help="unstructured random features")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED, help="random seed")
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("correlate", help="Pearson screen against the Wealth Estimate", formatter_class=fmt)
    p.add_argument("--zipcodes", required=True, help="zipcodes.csv")
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD, help="minimum |r| to select")
    p.add_argument("--scatter", action="store_true", help="write per-feature scatter files")
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("score", help="run the full scoring pipeline", formatter_class=fmt)
    p.add_argument("--zipcodes", help="zipcodes.csv")
    p.add_argument("--atms", help="atms.csv")
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA,
                   help=f"global-model weight; local weight is 1 - alpha = {1 - DEFAULT_ALPHA:.2f}")
    p.add_argument("--k", type=int, default=DEFAULT_K, help="k-means clusters per county")
    p.add_argument("--top-features", type=int, default=DEFAULT_TOP_FEATURES,
                   help="features kept per county")
    p.add_argument("--trees", type=int, default=DEFAULT_TREES, help="trees per forest")
    p.add_argument("--restarts", type=int, default=DEFAULT_RESTARTS, help="k-means restarts")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED, help="random seed")
    p.add_argument("--weights", help="global weights file (feature = weight lines)")
    p.add_argument("--raw-weights", action="store_true", help="softmax-normalize the --weights file")
    p.add_argument("--keywords", help="name-tag keyword table; None uses the bundled one")
    p.add_argument("--correlation", action="store_true", help="also write correlation exports")
    p.add_argument("--corr-threshold", type=float, default=DEFAULT_THRESHOLD,
                   help="|r| threshold for --correlation")
    p.add_argument("--scatter", action="store_true", help="with --correlation, write scatter files")
    p.add_argument("--from-manifest", help="replay flags and inputs from a score manifest.json")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("rank", help="rank networks per county from scores.csv", formatter_class=fmt)
    p.add_argument("--scores", required=True, help="scores.csv")
    p.add_argument("--alpha", type=float, default=None,
                   help="re-fuse with this alpha instead of using s_fused")
    p.add_argument("--out", default="out", help="output directory")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("optimize", help="budget-constrained county selection", formatter_class=fmt)
    p.add_argument("--scores", required=True, help="scores.csv")
    p.add_argument("--costs", help="costs.csv (county, cost); default cost 1.0 each")
    p.add_argument("--budget", type=float, required=True, help="total setup budget")
    p.add_argument("--method", choices=("exact", "greedy"), default="exact",
                   help=f"solver (exact handles up to {EXACT_LIMIT} counties)")
    p.add_argument("--network", help="reward = this network's fused score; None averages over networks")
    p.add_argument("--out", default="out", help="output directory")
    p.set_defaults(func=cmd_optimize)
    return parser


def _origin(exc: BaseException) -> str:
    frames = traceback.extract_tb(exc.__traceback__)
    for frame in reversed(frames):
        path = Path(frame.filename)
        if path.parent.name == "atmscore":
            return path.stem
    return "cli"


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        args = build_parser().parse_args(argv)
        if args.verbose:
            logging.getLogger().setLevel(logging.DEBUG)
        return args.func(args)
    except AtmScoreError as exc:
        print(f"atmscore: {type(exc).__name__} [{_origin(exc)}]: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"atmscore: I/O error [{_origin(exc)}]: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
