import numpy as np
import pytest

from wavescat import oracles
from wavescat.errors import DataError, MetricError
from wavescat.metrics import (DcfParams, ScoreSet, auc, bootstrap, eer, f1,
                              min_dcf, read_score_csv)


def make_set(fake_scores, real_scores):
    scores = np.concatenate([fake_scores, real_scores])
    labels = np.array([1] * len(fake_scores) + [0] * len(real_scores))
    return ScoreSet(scores, labels)


class TestDcfParams:
    def test_beta_exact(self):
        assert DcfParams().beta == 1.9

    def test_beta_tracks_costs(self):
        p = DcfParams(c_miss=2.0, c_fa=5.0, pi_spoof=0.1)
        assert p.beta == pytest.approx((2.0 * 0.9) / (5.0 * 0.1))


class TestScoreSet:
    def test_string_labels(self):
        s = ScoreSet(np.array([1.0, 2.0]), np.array(["real", "fake"]))
        assert s.n_fake == 1 and s.n_real == 1

    def test_rejects_bad_input(self):
        with pytest.raises(DataError):
            ScoreSet(np.array([1.0, np.nan]), np.array([0, 1]))
        with pytest.raises(DataError):
            ScoreSet(np.array([1.0]), np.array([0, 1]))
        with pytest.raises(DataError):
            ScoreSet(np.array([1.0, 2.0]), np.array(["real", "spoof"]))

    def test_single_class_refused(self):
        s = ScoreSet(np.array([1.0, 2.0]), np.array([1, 1]))
        with pytest.raises(MetricError):
            min_dcf(s)
        with pytest.raises(MetricError):
            eer(s)


class TestMinDcf:
    def test_perfect_separation(self):
        assert min_dcf(make_set([2.0, 3.0], [0.0, 1.0]))[0] == 0.0

    def test_four_score_example_vs_sweep(self):
        s = make_set([0.9, 0.4], [0.6, 0.1])
        value, _ = min_dcf(s)
        swept = oracles.sweep_min_dcf(s.scores, s.labels, DcfParams().beta,
                                      grid_size=2001)
        assert value == pytest.approx(swept, abs=1e-12)

    def test_bounded_by_extremes(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            n = rng.integers(4, 40)
            labels = rng.integers(0, 2, n)
            if labels.min() == labels.max():
                continue
            s = ScoreSet(rng.standard_normal(n), labels)
            assert min_dcf(s)[0] <= min(DcfParams().beta, 1.0) + 1e-12


class TestEer:
    def test_perfect(self):
        assert eer(make_set([1.0, 2.0], [-1.0, 0.0]))[0] == 0.0

    def test_identical_scores(self):
        assert eer(make_set([0.5, 0.5], [0.5, 0.5]))[0] == pytest.approx(0.5)

    def test_interpolated_crossing(self):
        assert eer(make_set([0.8, 0.3], [0.7, 0.2]))[0] == pytest.approx(0.25)


class TestAuc:
    def test_perfect_and_ties(self):
        assert auc(make_set([2.0, 3.0], [0.0, 1.0])) == 1.0
        assert auc(make_set([1.0, 1.0], [1.0, 1.0])) == 0.5

    def test_pair_example(self):
        assert auc(make_set([0.9, 0.4], [0.6, 0.1])) == 0.75


class TestF1:
    def test_all_correct(self):
        assert f1(make_set([0.9, 0.8], [0.1, 0.2]), 0.5) == 1.0

    def test_no_predicted_positives(self):
        assert f1(make_set([0.1, 0.2], [0.0, 0.05]), 0.5) == 0.0

    def test_direct_formula(self):
        s = make_set([0.9, 0.8, 0.1], [0.7, 0.2, 0.3])
        assert f1(s, 0.5) == pytest.approx(2 / 3)


class TestOracleAgreement:
    def test_thousand_random_sets(self):
        rng = np.random.default_rng(42)
        beta = DcfParams().beta
        checked = 0
        while checked < 1000:
            n = int(rng.integers(4, 51))
            scores = np.round(rng.standard_normal(n), 2)  # ties likely
            labels = rng.integers(0, 2, n)
            if labels.min() == labels.max():
                continue
            checked += 1
            s = ScoreSet(scores, labels)
            assert min_dcf(s)[0] == pytest.approx(
                oracles.sweep_min_dcf(scores, labels, beta, grid_size=101),
                abs=1e-12)
            assert eer(s)[0] == pytest.approx(
                oracles.sweep_eer(scores, labels), abs=1e-9)
            assert auc(s) == oracles.pair_auc(scores, labels)

    def test_monotone_transform_invariance(self):
        rng = np.random.default_rng(9)
        scores = rng.standard_normal(60)
        labels = rng.integers(0, 2, 60)
        s = ScoreSet(scores, labels)
        t = ScoreSet(np.exp(0.5 * scores) + 7.0, labels)
        assert min_dcf(s)[0] == min_dcf(t)[0]
        assert eer(s)[0] == eer(t)[0]
        assert auc(s) == auc(t)


class TestBootstrap:
    def test_deterministic(self):
        rng = np.random.default_rng(0)
        s = ScoreSet(rng.standard_normal(40), rng.integers(0, 2, 40))
        a = bootstrap(s, n=200, seed=11)
        b = bootstrap(s, n=200, seed=11)
        assert a.to_json() == b.to_json()

    def test_wide_margin_zero_spread(self):
        s = make_set([5.0] * 10, [-5.0] * 10)
        report = bootstrap(s, n=300, seed=2)
        assert all(v < 1e-9 for v in report.intervals.values())
        assert report.intervals["f1"] == 0.0
        assert report.intervals["auc"] == 0.0

    def test_interval_shrinks_with_corpus_size(self):
        rng = np.random.default_rng(5)

        def corpus(m):
            scores = np.concatenate([rng.normal(1.0, 1.0, m),
                                     rng.normal(0.0, 1.0, m)])
            return ScoreSet(scores, np.array([1] * m + [0] * m))

        small = bootstrap(corpus(60), n=400, seed=3).intervals["eer"]
        large = bootstrap(corpus(240), n=400, seed=3).intervals["eer"]
        assert 0.3 <= large / small <= 0.7  # ~1/sqrt(4)

    def test_too_small_refused(self):
        with pytest.raises(MetricError):
            bootstrap(make_set([1.0], [0.0]), n=10, seed=0)

    def test_report_json_schema(self):
        s = make_set([1.0, 2.0, 3.0, 2.5, 1.7], [0.1, 0.2, -0.3, 0.4, 0.0])
        doc = bootstrap(s, n=50, seed=1).to_dict()
        assert doc["params"]["beta"] == 1.9
        assert doc["n_bootstrap"] == 50
        assert set(doc["metrics"]) == {"min_dcf", "eer", "f1", "auc"}
        for entry in doc["metrics"].values():
            assert set(entry) == {"value", "ci2sigma"}
            assert entry["ci2sigma"] >= 0.0


class TestScoreCsv:
    def test_roundtrip(self, tmp_path):
        path = tmp_path / "scores.csv"
        path.write_text("id,score,label\na,0.9,fake\nb,0.2,real\n")
        s = read_score_csv(path)
        assert s.n_fake == 1 and s.n_real == 1

    def test_bad_header(self, tmp_path):
        path = tmp_path / "scores.csv"
        path.write_text("uid,score,label\na,0.9,fake\n")
        with pytest.raises(DataError):
            read_score_csv(path)
