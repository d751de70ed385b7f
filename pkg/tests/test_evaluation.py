import numpy as np
import pytest

from voxid.errors import (
    DuplicateSpeakerId,
    EmptyRegistry,
    EmptyScoreSet,
    InvalidExperimentConfig,
    ModeMismatch,
)
from voxid.evaluation import (
    RegistryEntry,
    SpeakerRegistry,
    Trial,
    compute_eer,
    det_points,
    identify,
    report_to_csv,
    summarize,
)
from voxid.experiment import (
    ExperimentConfig,
    build_world,
    parse_experiment_config,
    run_experiment,
    sample_from_gmm,
)
from voxid.features import FeatureMatrix
from voxid.gmm import DiagonalGmm
from voxid.scoring import DecisionPolicy
from voxid.speaker_models import SpeakerModel, Ubm
from voxid.total_variability import IVector


def brute_force_eer(targets, nontargets):
    """Exhaustive enumeration over every threshold in the score union."""
    targets = np.asarray(targets, float)
    nontargets = np.asarray(nontargets, float)
    best = None
    for t in np.unique(np.concatenate([targets, nontargets])):
        far = (nontargets > t).mean()
        frr = (targets <= t).mean()
        gap = abs(far - frr)
        if best is None or gap < best[0]:
            best = (gap, (far + frr) / 2)
    return best[1]


class TestEer:
    def test_perfect_separation(self):
        assert compute_eer([2.0, 3.0], [0.0, 1.0]) == 0.0

    def test_identical_sets(self):
        scores = [0.1, 0.5, 0.9]
        assert compute_eer(scores, scores) == 0.5

    def test_interleaved(self):
        assert compute_eer([1.0, 3.0], [2.0, 4.0]) == 0.5
        assert brute_force_eer([1.0, 3.0], [2.0, 4.0]) == 0.5

    def test_matches_brute_force(self):
        rng = np.random.default_rng(9)
        for _ in range(100):
            n_t = int(rng.integers(1, 50))
            n_n = int(rng.integers(1, 50))
            targets = rng.normal(1, 1, n_t)
            nontargets = rng.normal(0, 1, n_n)
            assert compute_eer(targets, nontargets) == brute_force_eer(
                targets, nontargets
            )

    def test_empty_scores(self):
        with pytest.raises(EmptyScoreSet):
            compute_eer([], [1.0])


class TestDetPoints:
    def test_perfect_separation_contains_origin(self):
        points = det_points([2.0, 3.0], [0.0, 1.0])
        assert (0.0, 0.0) in points

    def test_single_pair_sweep(self):
        points = det_points([1.0], [0.0])
        assert points == [(0.0, 0.0), (0.0, 1.0)]

    def test_monotone(self):
        rng = np.random.default_rng(10)
        for _ in range(20):
            points = det_points(rng.normal(1, 1, 15), rng.normal(0, 1, 15))
            fars = [p[0] for p in points]
            frrs = [p[1] for p in points]
            assert all(a >= b for a, b in zip(fars, fars[1:]))
            assert all(a <= b for a, b in zip(frrs, frrs[1:]))


def tiny_gmm(center):
    return DiagonalGmm(weights=[1.0], means=[[center]], variances=[[1.0]])


def registry_of(centers, ivectors=None):
    registry = SpeakerRegistry()
    for i, c in enumerate(centers):
        sid = f"s{i}"
        iv = IVector(np.asarray(ivectors[i], float)) if ivectors else None
        registry.add(RegistryEntry(
            speaker_id=sid, cluster_id="c0",
            model=SpeakerModel(speaker_id=sid, gmm=tiny_gmm(c)),
            ivector=iv,
        ))
    return registry


class TestIdentify:
    def test_own_speaker_ranks_first(self):
        rng = np.random.default_rng(11)
        registry = registry_of([-6.0, 0.0, 6.0])
        ubm = Ubm(gmm=tiny_gmm(0.0))
        feats = FeatureMatrix(rng.normal(6.0, 1.0, (50, 1)))
        policy = DecisionPolicy(threshold=1.0, mode="llr-normalized")
        result = identify(Trial(trial_id="t", test_features=feats,
                                true_speaker_id="s2"), registry, policy, ubm=ubm)
        assert result.ranked[0][0] == "s2"

    def test_cosine_exact_match_scores_one(self):
        registry = registry_of([0.0, 1.0], ivectors=[[1.0, 0.0], [0.0, 1.0]])
        policy = DecisionPolicy(threshold=0.5, mode="cosine")
        result = identify(
            Trial(trial_id="t", test_ivector=IVector(np.array([0.0, 2.0]))),
            registry, policy,
        )
        assert result.ranked[0][0] == "s1"
        assert result.ranked[0][2] == 1.0

    def test_normalized_peak_pattern(self):
        # only the true model's normalized score exceeds the 1.0 threshold
        rng = np.random.default_rng(12)
        registry = registry_of([5.0, -3.0, 6.0, 7.0, 8.0, 9.0])
        ubm = Ubm(gmm=tiny_gmm(0.0))
        feats = FeatureMatrix(rng.normal(-3.0, 1.0, (80, 1)))
        policy = DecisionPolicy(threshold=1.0, mode="llr-normalized")
        result = identify(Trial(trial_id="t", test_features=feats,
                                true_speaker_id="s1"), registry, policy, ubm=ubm)
        accepted = [sid for sid, _, norm, acc in result.ranked if acc]
        assert accepted == ["s1"]

    def test_ranking_invariant_under_registry_order(self):
        rng = np.random.default_rng(13)
        feats = FeatureMatrix(rng.normal(0.0, 2.0, (30, 1)))
        ubm = Ubm(gmm=tiny_gmm(0.0))
        policy = DecisionPolicy(threshold=1.0, mode="llr-normalized")
        fwd = registry_of([-4.0, 0.0, 4.0])
        rev = SpeakerRegistry(entries=list(reversed(fwd.entries)))
        a = identify(Trial(trial_id="t", test_features=feats), fwd, policy, ubm=ubm)
        b = identify(Trial(trial_id="t", test_features=feats), rev, policy, ubm=ubm)
        assert [r[0] for r in a.ranked] == [r[0] for r in b.ranked]

    def test_empty_registry(self):
        policy = DecisionPolicy(threshold=1.0, mode="llr-normalized")
        with pytest.raises(EmptyRegistry):
            identify(Trial(trial_id="t"), SpeakerRegistry(), policy)

    def test_mode_mismatch(self):
        registry = registry_of([0.0])  # no i-vectors
        policy = DecisionPolicy(threshold=0.5, mode="cosine")
        with pytest.raises(ModeMismatch):
            identify(Trial(trial_id="t", test_ivector=IVector(np.ones(2))),
                     registry, policy)

    def test_duplicate_speaker(self):
        registry = registry_of([0.0])
        with pytest.raises(DuplicateSpeakerId):
            registry.add(registry.entries[0])


class TestSummarize:
    def test_empty_results(self):
        report = summarize([], 1.0, "llr-normalized")
        assert report.false_accepts == 0 and report.false_rejects == 0
        assert report.top1_accuracy == 0.0

    def test_threshold_monotonicity(self):
        rng = np.random.default_rng(14)
        registry = registry_of([-6.0, 0.0, 6.0])
        ubm = Ubm(gmm=tiny_gmm(0.0))
        results = []
        for i, center in enumerate([-6.0, 0.0, 6.0]):
            feats = FeatureMatrix(rng.normal(center, 1.5, (40, 1)))
            policy = DecisionPolicy(threshold=0.0, mode="llr-normalized")
            results.append(identify(
                Trial(trial_id=f"t{i}", test_features=feats,
                      true_speaker_id=f"s{i}"),
                registry, policy, ubm=ubm))
        prev_fa, prev_fr = None, None
        from voxid.experiment import _redecide

        for threshold in (-1.0, 0.0, 1.0, 2.0):
            policy = DecisionPolicy(threshold=threshold, mode="llr-normalized")
            report = summarize(_redecide(results, policy), threshold, policy.mode)
            if prev_fa is not None:
                assert report.false_accepts <= prev_fa
                assert report.false_rejects >= prev_fr
            prev_fa, prev_fr = report.false_accepts, report.false_rejects

    def test_csv_rows(self):
        registry = registry_of([0.0, 1.0], ivectors=[[1.0, 0.0], [0.0, 1.0]])
        policy = DecisionPolicy(threshold=0.5, mode="cosine")
        result = identify(
            Trial(trial_id="t0", test_ivector=IVector(np.array([1.0, 0.1]))),
            registry, policy,
        )
        csv_text = report_to_csv(summarize([result], 0.5, "cosine"))
        lines = csv_text.strip().split("\n")
        assert lines[0] == "trial_id,speaker_id,raw_score,normalized_score,decision"
        assert len(lines) == 3


class TestExperiment:
    def test_config_parsing(self):
        cfg = parse_experiment_config(
            "mode = cosine\nseed = 3\nthresholds = 0.5, 0.7\n# comment\n"
        )
        assert cfg.mode == "cosine" and cfg.seed == 3
        assert cfg.thresholds == (0.5, 0.7)

    def test_malformed_config(self):
        with pytest.raises(InvalidExperimentConfig):
            parse_experiment_config("mode cosine")
        with pytest.raises(InvalidExperimentConfig):
            parse_experiment_config("nonsense = 1")
        with pytest.raises(InvalidExperimentConfig):
            parse_experiment_config("mode = telepathy")

    def test_deterministic_reports(self):
        cfg = ExperimentConfig(
            mode="llr", num_true_speakers=3, num_impostors=1,
            ubm_components=4, ubm_frames=800, enroll_frames=400,
            test_frames=150, seed=5,
        )
        a = run_experiment(cfg)[0]
        b = run_experiment(cfg)[0]
        assert a.per_trial == b.per_trial
        assert a.top1_accuracy == b.top1_accuracy

    def test_small_llr_experiment(self):
        cfg = ExperimentConfig(
            mode="llr", num_true_speakers=4, num_impostors=2,
            ubm_components=4, ubm_frames=1500, enroll_frames=600,
            test_frames=200, seed=0,
        )
        report = run_experiment(cfg)[0]
        assert report.top1_accuracy == 1.0

    def test_world_cluster_assignment(self):
        cfg = ExperimentConfig(
            mode="llr", num_true_speakers=4, num_impostors=2, num_clusters=3,
            ubm_components=4, ubm_frames=800, enroll_frames=300, test_frames=100,
        )
        world = build_world(cfg)
        clusters = {e.cluster_id for e in world.registry.entries}
        assert clusters == {"cluster0", "cluster1", "cluster2"}
        assert sum(e.is_impostor for e in world.registry.entries) == 2

    def test_sampling_shape(self):
        gmm = tiny_gmm(0.0)
        feats = sample_from_gmm(gmm, 25, np.random.default_rng(0))
        assert feats.frames.shape == (25, 1)
