"""Versioned on-disk artifacts.

Models, registries and reports are JSON documents with a top-level
{kind, format_version, payload} envelope; every real number is encoded
as a full-precision decimal string (repr of the float) so round-trips
are bit-exact. Feature matrices use the binary VOXF1 layout: magic
"VOXF1", dim_k and count_L as uint32 LE, then count_L * dim_k float32
LE values row-major. All writes are atomic (temp file + rename).
"""

from __future__ import annotations

import json
import os
import struct
import tempfile

import numpy as np

from .errors import (
    CorruptArtifact,
    IoFailure,
    UnsupportedVersion,
    WrongKind,
)
from .evaluation import EvalReport, RegistryEntry, SpeakerRegistry, TrialResult
from .features import FeatureMatrix
from .gmm import DiagonalGmm
from .speaker_models import SpeakerModel, Ubm
from .total_variability import IVector, TotalVariabilityModel

FORMAT_VERSION = 1

KINDS = (
    "features",
    "gmm",
    "ubm",
    "speaker_model",
    "tv_model",
    "ivector",
    "registry",
    "report",
)

_MAGIC = b"VOXF1"


def _atomic_write(path, data: bytes):
    directory = os.path.dirname(os.path.abspath(path))
    try:
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=".voxid-")
        try:
            os.write(fd, data)
        finally:
            os.close(fd)
        os.replace(tmp, path)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


# --- numeric encoding -------------------------------------------------------

def _enc(value):
    """Floats become repr strings (bit-exact round-trip); arrays become lists."""
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, np.ndarray):
        return [_enc(v) for v in value.tolist()]
    if isinstance(value, list):
        return [_enc(v) for v in value]
    return value


def _dec_vec(data) -> np.ndarray:
    try:
        return np.array([float(v) for v in data], dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise CorruptArtifact(f"bad numeric vector: {exc}") from exc


def _dec_mat(data) -> np.ndarray:
    try:
        return np.array([[float(v) for v in row] for row in data], dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise CorruptArtifact(f"bad numeric matrix: {exc}") from exc


# --- feature matrices (binary) ----------------------------------------------

def write_features(feats: FeatureMatrix, path):
    header = _MAGIC + struct.pack("<II", feats.dim_k, feats.count_L)
    body = feats.frames.astype("<f4").tobytes()
    _atomic_write(path, header + body)


def read_features(path) -> FeatureMatrix:
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    if len(data) < 13 or data[:5] != _MAGIC:
        raise CorruptArtifact(f"{path} is not a VOXF1 feature file")
    dim_k, count_l = struct.unpack_from("<II", data, 5)
    expected = 13 + 4 * dim_k * count_l
    if len(data) != expected:
        raise CorruptArtifact(f"{path}: expected {expected} bytes, found {len(data)}")
    frames = np.frombuffer(data, dtype="<f4", offset=13).astype(np.float64)
    return FeatureMatrix(frames.reshape(count_l, dim_k))


# --- per-kind payload codecs -------------------------------------------------

def _gmm_payload(gmm: DiagonalGmm) -> dict:
    return {
        "weights": _enc(gmm.weights),
        "means": _enc(gmm.means),
        "variances": _enc(gmm.variances),
    }


def _gmm_from_payload(payload) -> DiagonalGmm:
    try:
        return DiagonalGmm(
            weights=_dec_vec(payload["weights"]),
            means=_dec_mat(payload["means"]),
            variances=_dec_mat(payload["variances"]),
        )
    except (KeyError, Exception) as exc:
        if isinstance(exc, CorruptArtifact):
            raise
        raise CorruptArtifact(f"invalid GMM payload: {exc}") from exc


def _speaker_payload(model: SpeakerModel) -> dict:
    payload = _gmm_payload(model.gmm)
    payload["speaker_id"] = model.speaker_id
    return payload


def _speaker_from_payload(payload) -> SpeakerModel:
    return SpeakerModel(
        speaker_id=str(payload.get("speaker_id", "")),
        gmm=_gmm_from_payload(payload),
    )


def _tv_payload(tv: TotalVariabilityModel) -> dict:
    return {
        "m": _enc(tv.m),
        "sigma": _enc(tv.sigma),
        "t_matrix": _enc(tv.t_matrix),
        "num_components": tv.num_components,
        "dim_k": tv.dim_k,
    }


def _tv_from_payload(payload) -> TotalVariabilityModel:
    try:
        return TotalVariabilityModel(
            m=_dec_vec(payload["m"]),
            sigma=_dec_vec(payload["sigma"]),
            t_matrix=_dec_mat(payload["t_matrix"]),
            num_components=int(payload["num_components"]),
            dim_k=int(payload["dim_k"]),
        )
    except (KeyError, Exception) as exc:
        if isinstance(exc, CorruptArtifact):
            raise
        raise CorruptArtifact(f"invalid TV payload: {exc}") from exc


def _registry_payload(registry: SpeakerRegistry) -> dict:
    entries = []
    for e in registry.entries:
        entry = {
            "speaker_id": e.speaker_id,
            "cluster_id": e.cluster_id,
            "model": _speaker_payload(e.model),
            "language_tag": e.language_tag,
            "is_impostor": e.is_impostor,
        }
        if e.ivector is not None:
            entry["ivector"] = _enc(e.ivector.w)
        entries.append(entry)
    return {"entries": entries}


def _registry_from_payload(payload) -> SpeakerRegistry:
    registry = SpeakerRegistry()
    try:
        for entry in payload["entries"]:
            ivec = None
            if "ivector" in entry:
                ivec = IVector(w=_dec_vec(entry["ivector"]))
            registry.add(
                RegistryEntry(
                    speaker_id=str(entry["speaker_id"]),
                    cluster_id=str(entry["cluster_id"]),
                    model=_speaker_from_payload(entry["model"]),
                    ivector=ivec,
                    language_tag=str(entry.get("language_tag", "")),
                    is_impostor=bool(entry.get("is_impostor", False)),
                )
            )
    except (KeyError, TypeError, Exception) as exc:
        if isinstance(exc, CorruptArtifact):
            raise
        raise CorruptArtifact(f"invalid registry payload: {exc}") from exc
    return registry


def _report_payload(report: EvalReport) -> dict:
    return {
        "mode": report.mode,
        "threshold": _enc(report.threshold),
        "false_accepts": report.false_accepts,
        "false_rejects": report.false_rejects,
        "eer": _enc(report.eer),
        "top1_accuracy": _enc(report.top1_accuracy),
        "per_trial": [
            {
                "trial_id": r.trial_id,
                "true_speaker_id": r.true_speaker_id,
                "ranked": [
                    [sid, _enc(raw), _enc(norm), accepted]
                    for sid, raw, norm, accepted in r.ranked
                ],
            }
            for r in report.per_trial
        ],
    }


def _report_from_payload(payload) -> EvalReport:
    try:
        trials = [
            TrialResult(
                trial_id=str(t["trial_id"]),
                true_speaker_id=t.get("true_speaker_id"),
                ranked=[
                    (str(sid), float(raw), float(norm), bool(accepted))
                    for sid, raw, norm, accepted in t["ranked"]
                ],
            )
            for t in payload["per_trial"]
        ]
        return EvalReport(
            per_trial=trials,
            threshold=float(payload["threshold"]),
            mode=str(payload["mode"]),
            false_accepts=int(payload["false_accepts"]),
            false_rejects=int(payload["false_rejects"]),
            eer=float(payload["eer"]),
            top1_accuracy=float(payload["top1_accuracy"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptArtifact(f"invalid report payload: {exc}") from exc


_ENCODERS = {
    "gmm": _gmm_payload,
    "ubm": lambda ubm: _gmm_payload(ubm.gmm),
    "speaker_model": _speaker_payload,
    "tv_model": _tv_payload,
    "ivector": lambda iv: {"w": _enc(iv.w)},
    "registry": _registry_payload,
    "report": _report_payload,
}

_DECODERS = {
    "gmm": _gmm_from_payload,
    "ubm": lambda payload: Ubm(gmm=_gmm_from_payload(payload)),
    "speaker_model": _speaker_from_payload,
    "tv_model": _tv_from_payload,
    "ivector": lambda payload: IVector(w=_dec_vec(payload["w"])),
    "registry": _registry_from_payload,
    "report": _report_from_payload,
}


def save(obj, kind: str, path):
    """Persist an artifact; deterministic bytes for identical artifacts."""
    if kind not in KINDS:
        raise WrongKind(f"unknown artifact kind {kind!r}")
    if kind == "features":
        write_features(obj, path)
        return
    document = {
        "kind": kind,
        "format_version": FORMAT_VERSION,
        "payload": _ENCODERS[kind](obj),
    }
    text = json.dumps(document, sort_keys=True, separators=(",", ":")) + "\n"
    _atomic_write(path, text.encode("utf-8"))


def load(path, expected_kind: str):
    """Load, version-check and invariant-check an artifact."""
    if expected_kind not in KINDS:
        raise WrongKind(f"unknown artifact kind {expected_kind!r}")
    if expected_kind == "features":
        return read_features(path)
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    try:
        document = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptArtifact(f"{path} is not a JSON artifact: {exc}") from exc
    if not isinstance(document, dict) or "kind" not in document:
        raise CorruptArtifact(f"{path} lacks an artifact envelope")
    if document["kind"] != expected_kind:
        raise WrongKind(
            f"{path} holds {document['kind']!r}, expected {expected_kind!r}"
        )
    if document.get("format_version") != FORMAT_VERSION:
        raise UnsupportedVersion(
            f"format_version {document.get('format_version')!r} unsupported"
        )
    try:
        return _DECODERS[expected_kind](document.get("payload", {}))
    except CorruptArtifact:
        raise
    except Exception as exc:
        raise CorruptArtifact(f"{path}: invariant violation on load: {exc}") from exc
