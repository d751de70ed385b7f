"""Synthetic two-stage evaluation protocol at desk scale.

Stage 1: enrolled speaker models in clusters with planted impostors,
identification by cohort-normalized log-likelihood ratio at one or more
thresholds. Stage 2: the same synthetic speakers pushed through the
total-variability front-end and scored by cosine against a small target
list containing both true speakers and impostors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidExperimentConfig
from .evaluation import (
    EvalReport,
    RegistryEntry,
    SpeakerRegistry,
    Trial,
    identify,
    summarize,
)
from .features import FeatureMatrix
from .gmm import DiagonalGmm, GmmTrainingConfig
from .scoring import DecisionPolicy
from .speaker_models import accumulate_stats, map_adapt, train_ubm
from .total_variability import extract_ivector, init_tv, train_tv


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str = "llr"             # "llr" | "cosine"
    seed: int = 0
    num_true_speakers: int = 12
    num_impostors: int = 3
    num_clusters: int = 3
    feature_dim: int = 8
    ubm_components: int = 16
    ubm_frames: int = 8000
    enroll_frames: int = 3000     # ~30 s at a 10 ms shift
    test_frames: int = 1000       # ~10 s
    speaker_spread: float = 1.0   # std of the per-speaker mean offsets
    relevance: float = 16.0
    thresholds: tuple = (1.0,)
    tv_rank: int = 8
    tv_iterations: int = 5
    tv_chunk_frames: int = 300
    cosine_target_true: int = 4
    cosine_target_impostors: int = 3

    def __post_init__(self):
        if self.mode not in ("llr", "cosine"):
            raise InvalidExperimentConfig(f"unknown mode {self.mode!r}")
        if self.num_true_speakers < 1 or self.num_clusters < 1:
            raise InvalidExperimentConfig("need at least one speaker and cluster")
        if not self.thresholds:
            raise InvalidExperimentConfig("need at least one threshold")
        if self.mode == "cosine":
            if self.cosine_target_true > self.num_true_speakers:
                raise InvalidExperimentConfig("target list larger than speaker pool")
            if self.cosine_target_impostors > self.num_impostors:
                raise InvalidExperimentConfig("not enough impostors for target list")


_CONFIG_TYPES = {
    "mode": str,
    "seed": int,
    "num_true_speakers": int,
    "num_impostors": int,
    "num_clusters": int,
    "feature_dim": int,
    "ubm_components": int,
    "ubm_frames": int,
    "enroll_frames": int,
    "test_frames": int,
    "speaker_spread": float,
    "relevance": float,
    "thresholds": "floats",
    "tv_rank": int,
    "tv_iterations": int,
    "tv_chunk_frames": int,
    "cosine_target_true": int,
    "cosine_target_impostors": int,
}


def parse_experiment_config(text: str) -> ExperimentConfig:
    """Parse the flat "key = value" experiment description."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise InvalidExperimentConfig(f"line {lineno}: expected key = value")
        key, _, value = stripped.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _CONFIG_TYPES:
            raise InvalidExperimentConfig(f"line {lineno}: unknown key {key!r}")
        kind = _CONFIG_TYPES[key]
        try:
            if kind == "floats":
                values[key] = tuple(float(v) for v in value.split(","))
            else:
                values[key] = kind(value)
        except ValueError as exc:
            raise InvalidExperimentConfig(f"line {lineno}: {exc}") from exc
    try:
        return ExperimentConfig(**values)
    except TypeError as exc:
        raise InvalidExperimentConfig(str(exc)) from exc


def _random_gmm(rng: np.random.Generator, components: int, dim: int) -> DiagonalGmm:
    weights = rng.gamma(5.0, size=components)
    weights /= weights.sum()
    means = rng.normal(0.0, 2.0, size=(components, dim))
    variances = rng.uniform(0.5, 1.5, size=(components, dim))
    return DiagonalGmm(weights=weights, means=means, variances=variances)


def sample_from_gmm(gmm: DiagonalGmm, n: int, rng: np.random.Generator) -> FeatureMatrix:
    comps = rng.choice(gmm.num_components, size=n, p=gmm.weights)
    noise = rng.standard_normal((n, gmm.dim_k))
    frames = gmm.means[comps] + noise * np.sqrt(gmm.variances[comps])
    return FeatureMatrix(frames)


@dataclass
class SyntheticWorld:
    """Everything the two stages share: UBM, registry and held-out tests."""

    config: ExperimentConfig
    ubm: object
    registry: SpeakerRegistry
    test_sets: dict  # speaker_id -> FeatureMatrix
    enroll_sets: dict  # speaker_id -> FeatureMatrix
    tv_model: object = None


def build_world(config: ExperimentConfig) -> SyntheticWorld:
    rng = np.random.default_rng(config.seed)
    base = _random_gmm(rng, config.ubm_components, config.feature_dim)

    pooled = sample_from_gmm(base, config.ubm_frames, rng)
    gmm_config = GmmTrainingConfig(
        num_components=config.ubm_components, rng_seed=config.seed
    )
    ubm = train_ubm([pooled], gmm_config)

    registry = SpeakerRegistry()
    test_sets = {}
    enroll_sets = {}
    total = config.num_true_speakers + config.num_impostors
    for idx in range(total):
        is_impostor = idx >= config.num_true_speakers
        sid = f"imp{idx - config.num_true_speakers:02d}" if is_impostor else f"spk{idx:02d}"
        offset = rng.normal(0.0, config.speaker_spread, size=base.means.shape)
        truth = DiagonalGmm(
            weights=base.weights, means=base.means + offset, variances=base.variances
        )
        enroll = sample_from_gmm(truth, config.enroll_frames, rng)
        stats = accumulate_stats(enroll, ubm)
        model = map_adapt(stats, ubm, relevance=config.relevance, speaker_id=sid)
        registry.add(
            RegistryEntry(
                speaker_id=sid,
                cluster_id=f"cluster{idx % config.num_clusters}",
                model=model,
                is_impostor=is_impostor,
            )
        )
        enroll_sets[sid] = enroll
        if not is_impostor:
            test_sets[sid] = sample_from_gmm(truth, config.test_frames, rng)
    return SyntheticWorld(
        config=config, ubm=ubm, registry=registry,
        test_sets=test_sets, enroll_sets=enroll_sets,
    )


def _chunk_stats(feats: FeatureMatrix, ubm, chunk: int):
    frames = feats.frames
    return [
        accumulate_stats(FeatureMatrix(frames[start:start + chunk]), ubm)
        for start in range(0, frames.shape[0] - chunk + 1, chunk)
    ]


def attach_ivectors(world: SyntheticWorld) -> SyntheticWorld:
    """Train the variability model on enrollment chunks, set registry i-vectors."""
    config = world.config
    stats_set = []
    for sid in sorted(world.enroll_sets):
        stats_set.extend(_chunk_stats(world.enroll_sets[sid], world.ubm, config.tv_chunk_frames))
    tv = init_tv(world.ubm, config.tv_rank, rng_seed=config.seed)
    tv = train_tv(stats_set, tv, iterations=config.tv_iterations)
    for entry in world.registry.entries:
        stats = accumulate_stats(world.enroll_sets[entry.speaker_id], world.ubm)
        entry.ivector = extract_ivector(stats, tv)
    world.tv_model = tv
    return world


def _redecide(results, policy: DecisionPolicy):
    from .evaluation import TrialResult
    from .scoring import decide

    out = []
    for res in results:
        ranked = [
            (sid, raw, norm, decide(norm, policy)) for sid, raw, norm, _ in res.ranked
        ]
        out.append(TrialResult(res.trial_id, res.true_speaker_id, ranked))
    return out


def run_experiment(config: ExperimentConfig) -> list[EvalReport]:
    """Build the synthetic world, run all trials, report once per threshold."""
    world = build_world(config)

    if config.mode == "llr":
        policy = DecisionPolicy(threshold=config.thresholds[0], mode="llr-normalized")
        results = []
        for sid in sorted(world.test_sets):
            trial = Trial(
                trial_id=f"trial-{sid}",
                test_features=world.test_sets[sid],
                true_speaker_id=sid,
            )
            results.append(identify(trial, world.registry, policy, ubm=world.ubm))
        reports = []
        for threshold in config.thresholds:
            policy = DecisionPolicy(threshold=threshold, mode="llr-normalized")
            reports.append(
                summarize(_redecide(results, policy), threshold, "llr-normalized")
            )
        return reports

    world = attach_ivectors(world)
    true_ids = sorted(world.test_sets)[: config.cosine_target_true]
    imp_ids = sorted(
        e.speaker_id for e in world.registry.entries if e.is_impostor
    )[: config.cosine_target_impostors]
    targets = SpeakerRegistry()
    for sid in true_ids + imp_ids:
        targets.add(world.registry.get(sid))

    results = []
    for sid in true_ids:
        stats = accumulate_stats(world.test_sets[sid], world.ubm)
        trial = Trial(
            trial_id=f"trial-{sid}",
            test_ivector=extract_ivector(stats, world.tv_model),
            true_speaker_id=sid,
        )
        policy = DecisionPolicy(threshold=config.thresholds[0], mode="cosine")
        results.append(identify(trial, targets, policy))
    reports = []
    for threshold in config.thresholds:
        policy = DecisionPolicy(threshold=threshold, mode="cosine")
        reports.append(_redecide(results, policy))
        reports[-1] = summarize(reports[-1], threshold, "cosine")
    return reports
