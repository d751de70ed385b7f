import numpy as np
import pytest

from voxid.errors import (
    DegenerateCohort,
    DimensionMismatch,
    NotADistribution,
    ZeroVector,
)
from voxid.features import FeatureMatrix
from voxid.gmm import DiagonalGmm
from voxid.scoring import (
    CohortStats,
    DecisionPolicy,
    bhattacharyya_coefficient,
    cohort_from_scores,
    cosine_score,
    decide,
    llr_score,
    normalize_score,
)
from voxid.speaker_models import SpeakerModel, Ubm, accumulate_stats, map_adapt
from voxid.total_variability import IVector


def build_pair(seed=0, offset=3.0):
    """UBM plus a speaker model whose means are displaced by `offset`."""
    rng = np.random.default_rng(seed)
    ubm = Ubm(gmm=DiagonalGmm(
        weights=[0.5, 0.5],
        means=[[-2.0, 0.0], [2.0, 0.0]],
        variances=[[1.0, 1.0], [1.0, 1.0]],
    ))
    speaker = SpeakerModel(
        speaker_id="s",
        gmm=DiagonalGmm(
            weights=ubm.gmm.weights,
            means=ubm.gmm.means + offset,
            variances=ubm.gmm.variances,
        ),
    )
    return ubm, speaker, rng


class TestLlr:
    def test_speaker_equals_ubm_scores_zero(self):
        ubm, _, rng = build_pair()
        same = SpeakerModel(speaker_id="u", gmm=ubm.gmm)
        feats = FeatureMatrix(rng.normal(0, 1, (20, 2)))
        assert llr_score(feats, same, ubm) == 0.0

    def test_own_speech_scores_positive(self):
        ubm, speaker, rng = build_pair(seed=1)
        comps = rng.integers(0, 2, 200)
        frames = speaker.gmm.means[comps] + rng.standard_normal((200, 2))
        assert llr_score(FeatureMatrix(frames), speaker, ubm) > 0.0

    def test_duplication_doubles(self):
        ubm, speaker, rng = build_pair(seed=2)
        frames = rng.normal(0, 1, (30, 2))
        one = llr_score(FeatureMatrix(frames), speaker, ubm)
        two = llr_score(FeatureMatrix(np.vstack([frames, frames])), speaker, ubm)
        assert two == pytest.approx(2 * one, rel=1e-12)

    def test_frame_permutation_invariance(self):
        ubm, speaker, rng = build_pair(seed=3)
        frames = rng.normal(0, 1, (40, 2))
        shuffled = frames[rng.permutation(40)]
        a = llr_score(FeatureMatrix(frames), speaker, ubm)
        b = llr_score(FeatureMatrix(shuffled), speaker, ubm)
        assert a == pytest.approx(b, rel=1e-12)


class TestNormalization:
    def test_at_mean(self):
        assert normalize_score(1.0, CohortStats(1.0, 2.0)) == 0.0

    def test_one_sigma_above(self):
        assert normalize_score(3.0, CohortStats(1.0, 2.0)) == 1.0

    def test_affine_equivariance(self):
        a, b = 2.5, -1.0
        raw, mu, sigma = 4.0, 1.5, 0.5
        base = normalize_score(raw, CohortStats(mu, sigma))
        scaled = normalize_score(a * raw + b, CohortStats(a * mu + b, a * sigma))
        assert scaled == pytest.approx(base, rel=1e-12)

    def test_cohort_from_scores(self):
        cohort = cohort_from_scores([0.0, 2.0])
        assert cohort.mean_mu == 1.0
        assert cohort.std_sigma == pytest.approx(np.sqrt(2.0))

    def test_all_equal_degenerate(self):
        with pytest.raises(DegenerateCohort):
            cohort_from_scores([1.0, 1.0, 1.0])

    def test_shift_equivariance(self):
        scores = [0.5, 1.5, 4.0]
        base = cohort_from_scores(scores)
        shifted = cohort_from_scores([s + 10.0 for s in scores])
        assert shifted.mean_mu == pytest.approx(base.mean_mu + 10.0)
        assert shifted.std_sigma == pytest.approx(base.std_sigma)

    def test_rank_preservation(self):
        rng = np.random.default_rng(4)
        raws = rng.normal(0, 5, 10)
        cohort = cohort_from_scores(raws)
        normed = [normalize_score(r, cohort) for r in raws]
        assert np.argmax(raws) == np.argmax(normed)


class TestCosine:
    def test_identical_vectors(self):
        v = IVector(np.array([0.3, -1.2, 0.8]))
        assert cosine_score(v, v) == 1.0

    def test_orthogonal(self):
        assert cosine_score(IVector(np.array([1.0, 0.0])),
                            IVector(np.array([0.0, 1.0]))) == 0.0

    def test_scale_invariance(self):
        rng = np.random.default_rng(5)
        u = rng.standard_normal(6)
        v = rng.standard_normal(6)
        base = cosine_score(IVector(u), IVector(v))
        # power-of-two scales commute exactly with IEEE rounding
        assert cosine_score(IVector(4.0 * u), IVector(0.25 * v)) == base
        # arbitrary positive scales differ only by rounding
        assert cosine_score(IVector(3.0 * u), IVector(0.7 * v)) == pytest.approx(
            base, abs=1e-15
        )

    def test_symmetry_and_bounds(self):
        rng = np.random.default_rng(6)
        for _ in range(50):
            u = IVector(rng.standard_normal(5))
            v = IVector(rng.standard_normal(5))
            s = cosine_score(u, v)
            assert s == cosine_score(v, u)
            assert -1.0 <= s <= 1.0

    def test_zero_vector(self):
        with pytest.raises(ZeroVector):
            cosine_score(IVector(np.zeros(3)), IVector(np.ones(3)))

    def test_length_mismatch(self):
        with pytest.raises(DimensionMismatch):
            cosine_score(IVector(np.ones(3)), IVector(np.ones(4)))


class TestBhattacharyya:
    def test_identical_distribution(self):
        p = np.array([0.2, 0.3, 0.5])
        assert bhattacharyya_coefficient(p, p) == pytest.approx(1.0, abs=1e-12)

    def test_disjoint_support(self):
        assert bhattacharyya_coefficient([1.0, 0.0], [0.0, 1.0]) == 0.0

    def test_uniform_pair(self):
        assert bhattacharyya_coefficient([0.5, 0.5], [0.5, 0.5]) == pytest.approx(1.0)

    def test_equals_cosine_of_sqrt_embedding(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            p = rng.gamma(1.0, size=6)
            q = rng.gamma(1.0, size=6)
            p /= p.sum()
            q /= q.sum()
            rho = bhattacharyya_coefficient(p, q)
            cos = cosine_score(IVector(np.sqrt(p)), IVector(np.sqrt(q)))
            assert abs(rho - cos) < 1e-12
            assert 0.0 <= rho <= 1.0

    def test_strictly_below_one_when_different(self):
        rng = np.random.default_rng(8)
        for _ in range(50):
            p = rng.gamma(1.0, size=5)
            q = rng.gamma(1.0, size=5)
            p /= p.sum()
            q /= q.sum()
            if np.abs(p - q).sum() > 1e-3:
                assert bhattacharyya_coefficient(p, q) < 1.0 - 1e-9

    def test_not_a_distribution(self):
        with pytest.raises(NotADistribution):
            bhattacharyya_coefficient([0.5, 0.6], [0.5, 0.5])
        with pytest.raises(NotADistribution):
            bhattacharyya_coefficient([-0.1, 1.1], [0.5, 0.5])


class TestDecide:
    policy = DecisionPolicy(threshold=1.0, mode="llr-normalized")

    def test_above_accepts(self):
        assert decide(2.2, self.policy) is True

    def test_below_rejects(self):
        assert decide(0.45, self.policy) is False

    def test_tie_rejects(self):
        assert decide(1.0, self.policy) is False

    def test_cosine_threshold_range(self):
        with pytest.raises(ValueError):
            DecisionPolicy(threshold=1.5, mode="cosine")
