"""Batch command-line interface.

Commands: features, train-ubm, enroll, train-tv, ivector, identify,
evaluate, inspect. Exit codes: 0 success, 1 domain error, 2 input-data
error, 64 usage/config error. All randomness flows from --seed
(default 0), so every command is reproducible by default.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import store
from .audio import read_wav
from .errors import (
    InvalidExperimentConfig,
    VoxidDataError,
    VoxidDomainError,
    VoxidError,
    VoxidUsageError,
)
from .evaluation import RegistryEntry, SpeakerRegistry, Trial, identify, report_to_csv
from .experiment import parse_experiment_config, run_experiment
from .features import MfccConfig, extract_mfcc
from .gmm import GmmTrainingConfig, em_fit_detailed
from .scoring import DecisionPolicy
from .speaker_models import DEFAULT_RELEVANCE, Ubm, accumulate_stats, map_adapt
from .total_variability import extract_ivector, init_tv, train_tv

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_DATA = 2
EXIT_USAGE = 64


# --- flat key = value config files -------------------------------------------

_CONFIG_KEYS = {
    "pre_emphasis_alpha": float,
    "frame_length_ms": float,
    "frame_shift_ms": float,
    "dft_size": int,
    "num_mel_filters": int,
    "num_cepstra": int,
    "apply_cmvn": lambda v: v.lower() in ("1", "true", "yes", "on"),
    "num_components": int,
    "max_iterations": int,
    "convergence_tol": float,
    "variance_floor": float,
    "relevance": float,
    "tv_rank": int,
    "tv_iterations": int,
    "threshold": float,
    "mode": str,
}


def load_config_file(path) -> dict:
    values = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise VoxidUsageError(f"cannot read config {path}: {exc}") from exc
    for lineno, line in enumerate(lines, 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise VoxidUsageError(f"{path}:{lineno}: expected key = value")
        key, _, value = stripped.partition("=")
        key = key.strip()
        if key not in _CONFIG_KEYS:
            raise VoxidUsageError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            values[key] = _CONFIG_KEYS[key](value.strip())
        except ValueError as exc:
            raise VoxidUsageError(f"{path}:{lineno}: {exc}") from exc
    return values


def _mfcc_config(settings: dict) -> MfccConfig:
    fields = (
        "pre_emphasis_alpha", "frame_length_ms", "frame_shift_ms",
        "dft_size", "num_mel_filters", "num_cepstra", "apply_cmvn",
    )
    kwargs = {k: settings[k] for k in fields if k in settings}
    try:
        return MfccConfig(**kwargs)
    except ValueError as exc:
        raise VoxidUsageError(str(exc)) from exc


def _gmm_config(settings: dict, seed: int) -> GmmTrainingConfig:
    fields = ("num_components", "max_iterations", "convergence_tol", "variance_floor")
    kwargs = {k: settings[k] for k in fields if k in settings}
    try:
        return GmmTrainingConfig(rng_seed=seed, **kwargs)
    except ValueError as exc:
        raise VoxidUsageError(str(exc)) from exc


# --- SVG bar chart ------------------------------------------------------------

def score_bar_svg(labels, scores, threshold: float) -> str:
    """Minimal bar chart: one rect per speaker, threshold as a horizontal line."""
    width, height, margin = 640, 360, 40
    plot_w, plot_h = width - 2 * margin, height - 2 * margin
    lo = min(0.0, min(scores), threshold)
    hi = max(max(scores), threshold, lo + 1e-9)
    span = hi - lo

    def y_of(value):
        return margin + plot_h * (1.0 - (value - lo) / span)

    bar_w = plot_w / max(len(scores), 1)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]
    for i, (label, score) in enumerate(zip(labels, scores)):
        x = margin + i * bar_w
        top = y_of(max(score, 0.0))
        base = y_of(max(lo, 0.0)) if lo < 0 else y_of(lo)
        bar_h = abs(y_of(score) - y_of(max(min(0.0, hi), lo)))
        parts.append(
            f'<rect x="{x + 0.1 * bar_w:.2f}" y="{min(top, base):.2f}" '
            f'width="{0.8 * bar_w:.2f}" height="{max(bar_h, 0.5):.2f}" fill="steelblue"/>'
        )
        parts.append(
            f'<text x="{x + 0.5 * bar_w:.2f}" y="{height - margin + 16}" '
            f'font-size="11" text-anchor="middle">{label}</text>'
        )
        parts.append(
            f'<text x="{x + 0.5 * bar_w:.2f}" y="{min(top, base) - 4:.2f}" '
            f'font-size="10" text-anchor="middle">{score:.3g}</text>'
        )
    ty = y_of(threshold)
    parts.append(
        f'<line x1="{margin}" y1="{ty:.2f}" x2="{width - margin}" y2="{ty:.2f}" '
        f'stroke="crimson" stroke-dasharray="6,3"/>'
    )
    parts.append(
        f'<text x="{width - margin}" y="{ty - 5:.2f}" font-size="11" '
        f'text-anchor="end" fill="crimson">threshold {threshold:g}</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _write_text(path, text: str):
    store._atomic_write(path, text.encode("utf-8"))


# --- commands -----------------------------------------------------------------

def cmd_features(args, settings):
    if not args.inputs:
        raise VoxidUsageError("no input audio files given")
    config = _mfcc_config(settings)
    failures = 0
    for path in args.inputs:
        try:
            clip = read_wav(path)
            feats = extract_mfcc(clip, config)
        except VoxidError as exc:
            print(f"{path}: {type(exc).__name__}: {exc}", file=sys.stderr)
            failures += 1
            continue
        out = _derive_output(path, args.out_dir, ".feat")
        store.save(feats, "features", out)
        if args.verbose:
            print(f"{path} -> {out} ({feats.count_L}x{feats.dim_k})")
    return EXIT_DATA if failures else EXIT_OK


def _derive_output(path, out_dir, suffix):
    import os

    stem = os.path.splitext(os.path.basename(path))[0]
    directory = out_dir or os.path.dirname(path) or "."
    return os.path.join(directory, stem + suffix)


def cmd_train_ubm(args, settings):
    if not args.inputs:
        raise VoxidUsageError("no feature files given")
    config = _gmm_config(settings, args.seed)
    mats = [store.load(p, "features") for p in args.inputs]
    pooled = np.vstack([fm.frames for fm in mats])
    from .features import FeatureMatrix

    gmm, history = em_fit_detailed(FeatureMatrix(pooled), config)
    for i, ll in enumerate(history):
        print(f"iteration {i}: log-likelihood {ll:.6f}")
    store.save(Ubm(gmm=gmm), "ubm", args.output)
    return EXIT_OK


def cmd_enroll(args, settings):
    ubm = store.load(args.ubm, "ubm")
    feats = store.load(args.features[0], "features")
    for extra in args.features[1:]:
        feats = feats.concat(store.load(extra, "features"))
    stats = accumulate_stats(feats, ubm)
    relevance = settings.get("relevance", DEFAULT_RELEVANCE)
    model = map_adapt(stats, ubm, relevance=relevance, speaker_id=args.speaker_id)

    import os

    if os.path.exists(args.registry):
        registry = store.load(args.registry, "registry")
    else:
        registry = SpeakerRegistry()
    ivector = None
    if args.tv:
        tv = store.load(args.tv, "tv_model")
        ivector = extract_ivector(stats, tv)
    registry.add(
        RegistryEntry(
            speaker_id=args.speaker_id,
            cluster_id=args.cluster,
            model=model,
            ivector=ivector,
            language_tag=args.language,
            is_impostor=args.impostor,
        )
    )
    store.save(registry, "registry", args.registry)
    if args.verbose:
        print(f"enrolled {args.speaker_id} in {args.cluster}")
    return EXIT_OK


def cmd_train_tv(args, settings):
    ubm = store.load(args.ubm, "ubm")
    rank = settings.get("tv_rank", args.rank)
    iterations = settings.get("tv_iterations", args.iterations)
    tv = init_tv(ubm, rank, rng_seed=args.seed)
    stats_set = [
        accumulate_stats(store.load(p, "features"), ubm) for p in args.inputs
    ]
    tv = train_tv(stats_set, tv, iterations=iterations)
    store.save(tv, "tv_model", args.output)
    return EXIT_OK


def cmd_ivector(args, settings):
    ubm = store.load(args.ubm, "ubm")
    tv = store.load(args.tv, "tv_model")
    feats = store.load(args.features, "features")
    stats = accumulate_stats(feats, ubm)
    store.save(extract_ivector(stats, tv), "ivector", args.output)
    return EXIT_OK


def cmd_identify(args, settings):
    registry = store.load(args.registry, "registry")
    mode = settings.get("mode", args.mode)
    threshold = settings.get("threshold", args.threshold)
    if mode == "llr":
        mode = "llr-normalized"
    policy = DecisionPolicy(threshold=threshold, mode=mode)

    if mode == "cosine":
        test_iv = store.load(args.test, "ivector")
        trial = Trial(trial_id="cli", test_ivector=test_iv)
        result = identify(trial, registry, policy)
    else:
        ubm = store.load(args.ubm, "ubm") if args.ubm else None
        if ubm is None:
            raise VoxidUsageError("--ubm is required in LLR mode")
        feats = store.load(args.test, "features")
        trial = Trial(trial_id="cli", test_features=feats)
        result = identify(trial, registry, policy, ubm=ubm)

    print(f"{'speaker':<12} {'raw':>14} {'score':>10} decision")
    for sid, raw, norm, accepted in result.ranked:
        verdict = "accept" if accepted else "reject"
        print(f"{sid:<12} {raw:>14.4f} {norm:>10.4f} {verdict}")

    if args.json:
        from .evaluation import summarize

        store.save(summarize([result], threshold, mode), "report", args.json)
    if args.csv:
        from .evaluation import summarize

        _write_text(args.csv, report_to_csv(summarize([result], threshold, mode)))
    if args.svg:
        labels = [sid for sid, _, _, _ in result.ranked]
        scores = [norm for _, _, norm, _ in result.ranked]
        _write_text(args.svg, score_bar_svg(labels, scores, threshold))
    return EXIT_OK


def cmd_evaluate(args, settings):
    try:
        with open(args.config_file, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InvalidExperimentConfig(f"cannot read {args.config_file}: {exc}") from exc
    config = parse_experiment_config(text)
    reports = run_experiment(config)
    for report in reports:
        tag = f"{report.threshold:g}".replace(".", "_")
        json_path = f"{args.output_prefix}-t{tag}.json"
        csv_path = f"{args.output_prefix}-t{tag}.csv"
        store.save(report, "report", json_path)
        _write_text(csv_path, report_to_csv(report))
        print(
            f"threshold {report.threshold:g}: top1={report.top1_accuracy:.3f} "
            f"FA={report.false_accepts} FR={report.false_rejects} eer={report.eer:.3f}"
        )
    return EXIT_OK


def cmd_inspect(args, settings):
    for kind in store.KINDS:
        try:
            artifact = store.load(args.path, kind)
        except VoxidError:
            continue
        print(f"kind: {kind}")
        if kind == "features":
            print(f"frames: {artifact.count_L} x {artifact.dim_k}")
        elif kind in ("gmm", "ubm", "speaker_model"):
            gmm = artifact.gmm if hasattr(artifact, "gmm") else artifact
            print(f"components: {gmm.num_components}, dim: {gmm.dim_k}")
        elif kind == "tv_model":
            print(f"rank: {artifact.rank_R}, supervector: {artifact.m.size}")
        elif kind == "ivector":
            print(f"rank: {artifact.w.size}")
        elif kind == "registry":
            for e in artifact.entries:
                flag = " (impostor)" if e.is_impostor else ""
                print(f"  {e.speaker_id} cluster={e.cluster_id}{flag}")
        elif kind == "report":
            print(
                f"trials: {len(artifact.per_trial)}, top1: {artifact.top1_accuracy:.3f}"
            )
        return EXIT_OK
    raise VoxidDataError(f"{args.path} is not a recognized artifact")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="voxid", description=__doc__)
    parser.add_argument("--config", help="flat key = value settings file")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("features", help="extract MFCC features from WAV files")
    p.add_argument("inputs", nargs="*")
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("train-ubm", help="train the background model")
    p.add_argument("inputs", nargs="*")
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_train_ubm)

    p = sub.add_parser("enroll", help="MAP-adapt and register a speaker")
    p.add_argument("--speaker-id", required=True)
    p.add_argument("--cluster", default="default")
    p.add_argument("--language", default="")
    p.add_argument("--impostor", action="store_true")
    p.add_argument("--registry", required=True)
    p.add_argument("--ubm", required=True)
    p.add_argument("--tv")
    p.add_argument("features", nargs="+")
    p.set_defaults(func=cmd_enroll)

    p = sub.add_parser("train-tv", help="train the total-variability matrix")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--ubm", required=True)
    p.add_argument("--rank", type=int, default=8)
    p.add_argument("--iterations", type=int, default=5)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_train_tv)

    p = sub.add_parser("ivector", help="extract an i-vector for one utterance")
    p.add_argument("features")
    p.add_argument("--ubm", required=True)
    p.add_argument("--tv", required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_ivector)

    p = sub.add_parser("identify", help="score a test input against the registry")
    p.add_argument("test")
    p.add_argument("--registry", required=True)
    p.add_argument("--ubm")
    p.add_argument("--mode", choices=["llr", "llr-normalized", "cosine"], default="llr")
    p.add_argument("--threshold", type=float, default=1.0)
    p.add_argument("--json")
    p.add_argument("--csv")
    p.add_argument("--svg")
    p.set_defaults(func=cmd_identify)

    p = sub.add_parser("evaluate", help="run a synthetic evaluation experiment")
    p.add_argument("config_file")
    p.add_argument("--output-prefix", default="report")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("inspect", help="describe a stored artifact")
    p.add_argument("path")
    p.set_defaults(func=cmd_inspect)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        settings = load_config_file(args.config) if args.config else {}
        return args.func(args, settings)
    except VoxidUsageError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except VoxidDataError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except VoxidDomainError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except ValueError as exc:
        print(f"ValueError: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
