import numpy as np
import pytest

from voxid.errors import DimensionMismatch, NegativeRelevance
from voxid.features import FeatureMatrix
from voxid.gmm import DiagonalGmm, GmmTrainingConfig, em_fit, responsibilities
from voxid.speaker_models import (
    BaumWelchStats,
    Ubm,
    accumulate_stats,
    build_supervector,
    map_adapt,
    train_ubm,
    variance_supervector,
)


def simple_ubm(components=2, dim=2, seed=0):
    rng = np.random.default_rng(seed)
    weights = rng.uniform(0.2, 1.0, components)
    weights /= weights.sum()
    return Ubm(gmm=DiagonalGmm(
        weights=weights,
        means=rng.normal(0, 4, (components, dim)),
        variances=rng.uniform(0.5, 1.5, (components, dim)),
    ))


class TestTrainUbm:
    def test_single_utterance_matches_em_fit(self):
        rng = np.random.default_rng(1)
        feats = FeatureMatrix(rng.normal(0, 1, (200, 2)))
        config = GmmTrainingConfig(num_components=2, rng_seed=0)
        ubm = train_ubm([feats], config)
        direct = em_fit(feats, config)
        assert np.array_equal(ubm.gmm.means, direct.means)

    def test_mapping_order_insensitive(self):
        rng = np.random.default_rng(2)
        utts = {f"utt{i}": FeatureMatrix(rng.normal(0, 1, (80, 2))) for i in range(4)}
        config = GmmTrainingConfig(num_components=2, rng_seed=0)
        a = train_ubm(utts, config)
        reversed_map = dict(reversed(list(utts.items())))
        b = train_ubm(reversed_map, config)
        assert np.array_equal(a.gmm.means, b.gmm.means)

    def test_two_cluster_recovery(self):
        rng = np.random.default_rng(3)
        low = rng.normal(-6, 1, (500, 1))
        high = rng.normal(6, 1, (500, 1))
        config = GmmTrainingConfig(num_components=2, rng_seed=0)
        ubm = train_ubm([FeatureMatrix(low), FeatureMatrix(high)], config)
        means = np.sort(ubm.gmm.means[:, 0])
        assert abs(means[0] + 6) < 0.3 and abs(means[1] - 6) < 0.3


class TestAccumulateStats:
    def test_single_frame_mass(self):
        ubm = simple_ubm()
        feats = FeatureMatrix(np.array([[0.1, -0.2]]))
        stats = accumulate_stats(feats, ubm)
        assert abs(stats.zeroth.sum() - 1.0) < 1e-12

    def test_total_mass_equals_frame_count(self):
        rng = np.random.default_rng(4)
        ubm = simple_ubm()
        feats = FeatureMatrix(rng.normal(0, 2, (150, 2)))
        stats = accumulate_stats(feats, ubm)
        assert abs(stats.zeroth.sum() - 150.0) < 1e-8

    def test_frame_in_component_basin(self):
        ubm = Ubm(gmm=DiagonalGmm(
            weights=[0.5, 0.5], means=[[-10.0], [10.0]], variances=[[1.0], [1.0]]
        ))
        x = np.array([[10.0]])
        stats = accumulate_stats(FeatureMatrix(x), ubm)
        gamma = responsibilities(x[0], ubm.gmm)
        assert stats.zeroth[1] == pytest.approx(gamma[1], abs=1e-12)
        assert stats.zeroth[1] > 0.999
        assert stats.first[1, 0] == pytest.approx(10.0, rel=1e-6)

    def test_additivity_under_concatenation(self):
        # floating-point summation order makes bitwise equality unattainable;
        # agreement is asserted to a few ulps instead
        rng = np.random.default_rng(5)
        ubm = simple_ubm()
        a = FeatureMatrix(rng.normal(0, 2, (60, 2)))
        b = FeatureMatrix(rng.normal(0, 2, (40, 2)))
        merged = accumulate_stats(a.concat(b), ubm)
        summed = accumulate_stats(a, ubm) + accumulate_stats(b, ubm)
        np.testing.assert_allclose(merged.zeroth, summed.zeroth, rtol=1e-13)
        np.testing.assert_allclose(merged.first, summed.first, rtol=1e-12, atol=1e-12)


class TestMapAdapt:
    def test_zero_stats_keeps_ubm_means(self):
        ubm = simple_ubm()
        stats = BaumWelchStats(np.zeros(2), np.zeros((2, 2)))
        model = map_adapt(stats, ubm, relevance=16.0)
        assert np.array_equal(model.gmm.means, ubm.gmm.means)

    def test_zero_relevance_gives_ml_means(self):
        ubm = simple_ubm()
        n = np.array([4.0, 9.0])
        f = np.array([[1.0, 2.0], [3.0, -6.0]])
        model = map_adapt(BaumWelchStats(n, f), ubm, relevance=0.0)
        assert np.array_equal(model.gmm.means, f / n[:, None])

    def test_count_equal_relevance_is_midpoint(self):
        ubm = simple_ubm()
        r = 16.0
        n = np.full(2, r)
        f = np.array([[8.0, -4.0], [2.0, 6.0]]) * r
        model = map_adapt(BaumWelchStats(n, f), ubm, relevance=r)
        midpoint = (f / n[:, None] + ubm.gmm.means) / 2.0
        assert np.array_equal(model.gmm.means, midpoint)

    def test_weights_variances_frozen(self):
        rng = np.random.default_rng(6)
        ubm = simple_ubm()
        feats = FeatureMatrix(rng.normal(0, 2, (100, 2)))
        model = map_adapt(accumulate_stats(feats, ubm), ubm)
        assert np.array_equal(model.gmm.weights, ubm.gmm.weights)
        assert np.array_equal(model.gmm.variances, ubm.gmm.variances)

    def test_shrinkage_segment_property(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            ubm = simple_ubm(seed=rng.integers(1 << 30))
            n = rng.uniform(0.1, 50.0, 2)
            f = rng.normal(0, 5, (2, 2)) * n[:, None]
            r = rng.uniform(0.0, 40.0)
            model = map_adapt(BaumWelchStats(n, f), ubm, relevance=r)
            ml = f / n[:, None]
            lo = np.minimum(ml, ubm.gmm.means) - 1e-12
            hi = np.maximum(ml, ubm.gmm.means) + 1e-12
            assert np.all(model.gmm.means >= lo) and np.all(model.gmm.means <= hi)

    def test_scaling_stats_moves_toward_ml(self):
        ubm = simple_ubm()
        n = np.array([2.0, 3.0])
        f = np.array([[4.0, 1.0], [-3.0, 9.0]])
        a = map_adapt(BaumWelchStats(n, f), ubm, relevance=16.0)
        b = map_adapt(BaumWelchStats(3 * n, 3 * f), ubm, relevance=16.0)
        ml = f / n[:, None]
        assert np.all(np.abs(b.gmm.means - ml) < np.abs(a.gmm.means - ml))

    def test_negative_relevance(self):
        ubm = simple_ubm()
        stats = BaumWelchStats(np.ones(2), np.ones((2, 2)))
        with pytest.raises(NegativeRelevance):
            map_adapt(stats, ubm, relevance=-1.0)

    def test_wrong_shape(self):
        ubm = simple_ubm()
        with pytest.raises(DimensionMismatch):
            map_adapt(BaumWelchStats(np.ones(3), np.ones((3, 2))), ubm)


class TestSupervector:
    def test_concatenation_order(self):
        gmm = DiagonalGmm(
            weights=[0.5, 0.5],
            means=[[1.0, 2.0], [3.0, 4.0]],
            variances=[[1.0, 1.0], [1.0, 1.0]],
        )
        sv = build_supervector(Ubm(gmm=gmm))
        assert np.array_equal(sv.values, [1.0, 2.0, 3.0, 4.0])

    def test_length(self):
        rng = np.random.default_rng(8)
        ubm = simple_ubm(components=16, dim=13)
        assert build_supervector(ubm).values.size == 16 * 13

    def test_variance_layout_matches(self):
        ubm = simple_ubm(components=3, dim=4)
        sigma = variance_supervector(ubm)
        assert np.array_equal(sigma, ubm.gmm.variances.reshape(-1))
