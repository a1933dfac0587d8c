"""Acceptance suite: one printed PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v``. Verdict lines go straight
to the terminal even when output capture is on.
"""

import csv
import dataclasses
import json
import math
import time

import numpy as np
import pytest

from atmscore.cli import build_parser, main
from atmscore.dataset import NameTag, SynthConfig, atm_frequency, generate_synthetic, load_atms, load_zipcodes
from atmscore.dataset import normalize_features
from atmscore.forest import ForestParams, best_split, feature_importance, forest_fit
from atmscore.global_model import default_global_weights, global_scores, softmax
from atmscore.kmeans import kmeans_fit
from atmscore.optimizer import exact_placement, greedy_placement
from atmscore.scoring import FusionConfig, build_report, county_global_score, fuse, rank_networks, zip_atm_score
from atmscore.wealth import pearson

from test_forest import exhaustive_split
from test_kmeans import blob_instance, canonical, exhaustive_partition
from test_optimizer import brute_force, random_instance


@pytest.fixture
def verdict(capsys, request):
    def emit(ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {request.node.name}: {detail}")
        assert ok, detail

    return emit


def test_builtin_constants(verdict, tmp_path):
    expected_tags = {
        "ShoppingMalls": 10, "BanksExchange": 9, "RecreationCentre": 8, "GasStationsCarWash": 7,
        "OfficeArea": 6, "IndividualStore": 5, "NullData": 4,
    }
    tags_ok = {t.value: t.score for t in NameTag} == expected_tags
    expected_weights = {
        "transportation_pct": 0.13, "employment_pct": 0.083, "private_primary_school_pct": 0.083,
        "median_home_value": 0.093, "rented_1br_pct": 0.102, "educated_pct": 0.074,
        "population_density": 0.167, "median_household_income": 0.045, "earning_pct": 0.083,
        "single_pct": 0.065, "single_with_roommates_pct": 0.074,
    }
    w = default_global_weights()
    weights_ok = dict(w.items) == expected_weights and abs(w.total() - 0.999) <= 1e-9

    help_text = build_parser()._subparsers._group_actions[0].choices["score"].format_help()
    help_ok = "0.35" in help_text and "0.65" in help_text

    data = tmp_path / "d"
    main(["gen-data", "--out", str(data), "--zipcodes", "60", "--counties", "3", "--atms", "200", "--seed", "1"])
    main(["score", "--zipcodes", str(data / "zipcodes.csv"), "--atms", str(data / "atms.csv"),
          "--out", str(tmp_path / "r"), "--trees", "5", "--restarts", "2"])
    manifest = json.loads((tmp_path / "r" / "manifest.json").read_text())
    manifest_ok = manifest["alpha"] == 0.35 and manifest["local_weight"] == 0.65

    verdict(tags_ok and weights_ok and help_ok and manifest_ok,
            f"tags={tags_ok} weights={weights_ok} (sum={w.total()!r}) help={help_ok} manifest={manifest_ok}")


def test_softmax_suite(verdict):
    rng = np.random.default_rng(100)
    start = time.perf_counter()
    worst_sum = worst_shift = 0.0
    order_ok = True
    for _ in range(1000):
        v = rng.normal(0, 5, int(rng.integers(1, 30)))
        p = softmax(v)
        worst_sum = max(worst_sum, abs(math.fsum(p) - 1.0))
        worst_shift = max(worst_shift, float(np.max(np.abs(softmax(v + rng.uniform(-50, 50)) - p))))
        # larger input never gets a smaller probability
        idx = np.argsort(v, kind="stable")
        order_ok &= bool(np.all(np.diff(p[idx]) >= 0))
    elapsed = time.perf_counter() - start
    ok = worst_sum <= 1e-12 and worst_shift <= 1e-12 and order_ok and elapsed < 1.0
    verdict(ok, f"max|sum-1|={worst_sum:.2e} max shift diff={worst_shift:.2e} order={order_ok} {elapsed:.3f}s")


def textbook_pearson(x, y):
    n = len(x)
    mx, my = math.fsum(x) / n, math.fsum(y) / n
    sxy = math.fsum((a - mx) * (b - my) for a, b in zip(x, y))
    sxx = math.fsum((a - mx) ** 2 for a in x)
    syy = math.fsum((b - my) ** 2 for b in y)
    return sxy / math.sqrt(sxx * syy)


def test_pearson_oracle(verdict):
    rng = np.random.default_rng(101)
    worst = worst_affine = 0.0
    for _ in range(100):
        n = int(rng.integers(3, 200))
        x = rng.normal(size=n)
        y = rng.uniform(-0.5, 0.5) * x + rng.normal(size=n)
        r = pearson(x, y)
        worst = max(worst, abs(r - textbook_pearson(x.tolist(), y.tolist())))
        a, c = rng.uniform(0.1, 10), rng.uniform(-100, 100)
        worst_affine = max(worst_affine, abs(pearson(a * x + c, y) - r))
    verdict(worst <= 1e-10 and worst_affine <= 1e-12, f"max oracle diff={worst:.2e} max affine diff={worst_affine:.2e}")


def test_kmeans_oracle(verdict):
    rng = np.random.default_rng(102)
    start = time.perf_counter()
    matches = 0
    monotone = True
    for i in range(20):
        k = int(rng.integers(2, 4))
        n = int(rng.integers(max(k * 2, 6), 13))
        pts = blob_instance(rng, n, k, separation=10.0)
        best, best_sse = exhaustive_partition(pts, k)
        trace = []
        m = kmeans_fit(pts, k=k, seed=i, restarts=10, trace=lambda r, it, s: trace.append((r, s)))
        matches += canonical(m.labels) == canonical(best) and abs(m.sse - best_sse) <= 1e-9 * (1 + best_sse)
        for r in range(10):
            s = [v for rr, v in trace if rr == r]
            monotone &= all(b <= a for a, b in zip(s, s[1:]))
    elapsed = time.perf_counter() - start
    verdict(matches == 20 and monotone and elapsed < 30, f"{matches}/20 optimal, monotone={monotone}, {elapsed:.2f}s")


def test_forest_recovery(verdict):
    start = time.perf_counter()
    wins = 0
    sums_ok = const_ok = True
    for seed in range(10):
        rng = np.random.default_rng(1000 + seed)
        x = rng.normal(size=(200, 20))
        x[:, 19] = 3.0
        y = (x[:, 0] > 0.1).astype(int)
        imp = feature_importance(forest_fit(x, y, ForestParams(n_trees=100), seed=seed))
        wins += int(np.argmax(imp)) == 0
        sums_ok &= abs(imp.sum() - 1.0) <= 1e-9
        const_ok &= imp[19] == 0.0
    elapsed = time.perf_counter() - start
    verdict(wins >= 9 and sums_ok and const_ok and elapsed < 60,
            f"feature 0 ranked first in {wins}/10 seeds, sum1={sums_ok}, constant zero={const_ok}, {elapsed:.1f}s")


def test_best_split_oracle(verdict):
    rng = np.random.default_rng(103)
    matches = 0
    for _ in range(50):
        n, d = int(rng.integers(2, 31)), int(rng.integers(1, 6))
        x = rng.integers(0, 5, (n, d)).astype(float) if rng.random() < 0.5 else rng.normal(size=(n, d))
        y = rng.integers(0, int(rng.integers(2, 4)), n)
        got, want = best_split(x, y), exhaustive_split(x, y)
        if want is None:
            matches += got is None
        else:
            matches += got is not None and (got.feature, got.threshold) == want[:2]
    verdict(matches == 50, f"{matches}/50 exact matches")


def test_scoring_algebra(verdict, tmp_path):
    zip_ok = zip_atm_score(2, 7, 3) == 42 and zip_atm_score(0.3, 9, 0) == 0 and zip_atm_score(1, 10, 1) == 10

    zp, ap = generate_synthetic(SynthConfig(n_zipcodes=150, n_counties=5, n_atms=900, n_extra_features=4), 5, tmp_path)
    records = load_zipcodes(zp)
    atms, _ = load_atms(ap, records)
    table = normalize_features(records)
    zs = global_scores(default_global_weights(), table)
    y = {z.zipcode: z.y_global for z in zs}
    county_of = dict(zip(table.zipcodes, table.counties))
    freq = atm_frequency(atms)
    worst = 0.0
    for county in table.county_names():
        for network in sorted({a.network for a in atms}):
            raw = math.fsum(y[a.zipcode] * a.relative_score for a in atms
                            if a.network == network and county_of[a.zipcode] == county)
            worst = max(worst, abs(county_global_score(network, county, zs, freq, atms) - raw))
    county_ok = worst <= 1e-9

    fuse_ok = fuse(0.3, 0.8, 0.0) == 0.3 and fuse(0.3, 0.8, 1.0) == 0.8

    cfg = FusionConfig(trees=15, restarts=3)
    base = build_report(table, zs, atms, freq, cfg, seed=2)
    scale_ok = True
    for c in (0.5, 3.7):
        scaled = [dataclasses.replace(a, relative_score=a.relative_score * c) for a in atms]
        scale_ok &= build_report(table, zs, scaled, atm_frequency(scaled), cfg, seed=2).rankings == base.rankings
    ranks_ok = all(ranked == rank_networks({r.network: r.s_fused for r in base.rows if r.county == county})
                   for county, ranked in base.rankings.items())
    ok = zip_ok and county_ok and fuse_ok and scale_ok and ranks_ok
    verdict(ok, f"zip score={zip_ok} county sum max diff={worst:.2e} fuse endpoints={fuse_ok} scaling={scale_ok}")


def test_optimizer(verdict):
    start = time.perf_counter()
    rng = np.random.default_rng(104)
    exact_hits = 0
    for t in range(50):
        cands, budget = random_instance(rng, int(rng.integers(1, 19)), integer=t % 2 == 0)
        plan = exact_placement(cands, budget)
        ids, score, _ = brute_force(cands, budget)
        exact_hits += plan.selected == ids and abs(plan.total_score - score) <= 1e-9
    half = 0
    for _ in range(200):
        cands, budget = random_instance(rng, int(rng.integers(1, 15)))
        g, e = greedy_placement(cands, budget), exact_placement(cands, budget)
        half += g.total_cost <= budget and g.total_score >= 0.5 * e.total_score
    mono = 0
    for _ in range(100):
        cands, b1 = random_instance(rng, int(rng.integers(1, 15)))
        b2 = b1 + float(rng.uniform(0, 2))
        mono += exact_placement(cands, b2).total_score >= exact_placement(cands, b1).total_score
    elapsed = time.perf_counter() - start
    ok = exact_hits == 50 and half == 200 and mono == 100 and elapsed < 10
    verdict(ok, f"exact {exact_hits}/50, greedy half {half}/200, monotone {mono}/100, {elapsed:.2f}s")


@pytest.fixture(scope="module")
def full_scale(tmp_path_factory):
    """Two independent gen-data + score runs at corpus scale."""
    runs = []
    for i in range(2):
        base = tmp_path_factory.mktemp(f"full{i}")
        start = time.perf_counter()
        codes = [
            main(["gen-data", "--out", str(base / "data"), "--zipcodes", "5000", "--counties", "40",
                  "--atms", "11229", "--seed", "2024"]),
            main(["score", "--zipcodes", str(base / "data" / "zipcodes.csv"), "--atms", str(base / "data" / "atms.csv"),
                  "--out", str(base / "out"), "--seed", "2024"]),
        ]
        runs.append((base, codes, time.perf_counter() - start))
    return runs


@pytest.mark.slow
def test_table2_analog(verdict, full_scale):
    base, codes, _ = full_scale[0]
    with open(base / "out" / "feature_frequency.csv", newline="") as fh:
        counts = {r["feature"]: int(r["county_count"]) for r in csv.DictReader(fh)}
    factors = ("population_density", "median_household_income", "pct_not_earning")
    found = {f: counts.get(f, 0) for f in factors}
    verdict(codes == [0, 0] and all(n >= 30 for n in found.values()), f"county counts {found} of 40")


@pytest.mark.slow
def test_end_to_end(verdict, full_scale):
    (a, codes_a, t_a), (b, codes_b, t_b) = full_scale
    names = ("scores.csv", "rankings.csv", "feature_frequency.csv", "report.json")
    same = all((a / "out" / n).read_bytes() == (b / "out" / n).read_bytes() for n in names)
    same &= (a / "data" / "zipcodes.csv").read_bytes() == (b / "data" / "zipcodes.csv").read_bytes()
    ok = codes_a == codes_b == [0, 0] and same and max(t_a, t_b) < 60
    verdict(ok, f"runs took {t_a:.1f}s and {t_b:.1f}s, byte-identical={same}")
