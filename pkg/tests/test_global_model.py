import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from atmscore.dataset import FEATURE_COLUMNS, ZipcodeRecord, normalize_features
from atmscore.errors import DomainError, ParseError, SchemaError
from atmscore.global_model import (
    GlobalWeights,
    default_global_weights,
    global_scores,
    global_zip_score,
    parse_weights,
    softmax,
)

finite = st.floats(-50, 50, allow_nan=False)


class TestSoftmax:
    def test_examples(self):
        np.testing.assert_allclose(softmax([0, 0, 0, 0]), [0.25] * 4, atol=1e-15)
        np.testing.assert_allclose(softmax([math.log(2), 0]), [2 / 3, 1 / 3], atol=1e-15)
        np.testing.assert_allclose(softmax([1000, 1000]), [0.5, 0.5], atol=1e-15)

    @pytest.mark.parametrize("bad", [[], [1.0, float("nan")], [float("inf")]])
    def test_domain(self, bad):
        with pytest.raises(DomainError):
            softmax(bad)

    @given(st.lists(finite, min_size=1, max_size=20), finite)
    def test_properties(self, v, c):
        out = softmax(v)
        assert abs(out.sum() - 1) < 1e-12
        np.testing.assert_allclose(softmax(np.array(v) + c), out, atol=1e-12)
        v = np.array(v)
        i, j = np.triu_indices(len(v), 1)
        assert np.all((v[i] < v[j]) <= (out[i] <= out[j]))


class TestDefaultWeights:
    def test_values(self):
        w = default_global_weights()
        assert len(w.items) == 11
        assert w.normalized
        assert abs(w.total() - 0.999) < 1e-9
        assert w["population_density"] == 0.167
        assert max(w.items, key=lambda kv: kv[1])[0] == "population_density"
        assert set(w.features) <= set(FEATURE_COLUMNS)
        assert "pct_not_earning" not in w.features


class TestScore:
    def test_projection(self):
        assert global_zip_score(GlobalWeights((("f", 1.0),)), {"f": 0.42, "g": 0.9}) == 0.42

    def test_default_extremes(self):
        w = default_global_weights()
        ones = {f: 1.0 for f in w.features}
        zeros = {f: 0.0 for f in w.features}
        independent = 0.0
        for v in (0.13, 0.083, 0.083, 0.093, 0.102, 0.074, 0.167, 0.045, 0.083, 0.065, 0.074):
            independent += v
        assert global_zip_score(w, ones) == pytest.approx(independent, abs=1e-12)
        assert global_zip_score(w, ones) == pytest.approx(0.999, abs=1e-12)
        assert global_zip_score(w, zeros) == 0.0

    def test_missing_feature(self):
        with pytest.raises(SchemaError, match="employment_pct"):
            global_zip_score(default_global_weights(), {"transportation_pct": 1.0})

    def test_raw_weights_rejected_until_normalized(self):
        raw = GlobalWeights((("a", 1.0), ("b", 2.0)), normalized=False)
        with pytest.raises(DomainError):
            global_zip_score(raw, {"a": 1.0, "b": 1.0})
        norm = raw.normalize()
        assert norm.normalized and abs(norm.total() - 1) < 1e-12

    @given(st.lists(st.floats(0, 1), min_size=11, max_size=11),
           st.lists(st.floats(0, 1), min_size=11, max_size=11),
           st.floats(-3, 3), st.floats(-3, 3))
    def test_linearity_and_range(self, xa, xb, a, b):
        w = default_global_weights()
        ra = dict(zip(w.features, xa))
        rb = dict(zip(w.features, xb))
        mix = {f: a * ra[f] + b * rb[f] for f in w.features}
        lhs = global_zip_score(w, mix)
        rhs = a * global_zip_score(w, ra) + b * global_zip_score(w, rb)
        assert abs(lhs - rhs) < 1e-12
        assert 0.0 <= global_zip_score(w, ra) <= w.total() + 1e-15

    def test_table_scores_match_row_scores(self):
        rng = np.random.default_rng(1)
        recs = [
            ZipcodeRecord(f"{i:05d}", "C", 0, 0, {f: float(v) for f, v in zip(FEATURE_COLUMNS, rng.uniform(0, 90, 12))})
            for i in range(20)
        ]
        t = normalize_features(recs)
        w = default_global_weights()
        for zs, row in zip(global_scores(w, t), t.values):
            assert zs.y_global == pytest.approx(global_zip_score(w, dict(zip(t.feature_names, row))), abs=1e-12)


class TestWeightsFile:
    def test_parse(self):
        w = parse_weights("# c\na = 1\nb=0.5\n", raw=True)
        assert w.items == (("a", 1.0), ("b", 0.5)) and not w.normalized

    @pytest.mark.parametrize("text", ["", "a 1", "a = x", "a = 1\na = 2"])
    def test_bad(self, text):
        with pytest.raises(ParseError):
            parse_weights(text)
