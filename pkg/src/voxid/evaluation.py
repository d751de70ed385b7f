"""Speaker registry, identification trials, threshold sweeps and
FA/FR/EER bookkeeping.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DuplicateSpeakerId,
    EmptyRegistry,
    EmptyScoreSet,
    ModeMismatch,
)
from .features import FeatureMatrix
from .scoring import (
    CohortStats,
    DecisionPolicy,
    cohort_from_scores,
    cosine_score,
    decide,
    llr_score,
    normalize_score,
)
from .speaker_models import SpeakerModel, Ubm
from .total_variability import IVector


@dataclass
class RegistryEntry:
    speaker_id: str
    cluster_id: str
    model: SpeakerModel
    ivector: IVector | None = None
    language_tag: str = ""
    is_impostor: bool = False


@dataclass
class SpeakerRegistry:
    entries: list[RegistryEntry] = field(default_factory=list)

    def add(self, entry: RegistryEntry):
        if any(e.speaker_id == entry.speaker_id for e in self.entries):
            raise DuplicateSpeakerId(f"speaker {entry.speaker_id!r} already enrolled")
        self.entries.append(entry)

    def get(self, speaker_id: str) -> RegistryEntry:
        for e in self.entries:
            if e.speaker_id == speaker_id:
                return e
        raise KeyError(speaker_id)

    def __len__(self):
        return len(self.entries)


@dataclass(frozen=True)
class Trial:
    trial_id: str
    test_features: FeatureMatrix | None = None
    test_ivector: IVector | None = None
    true_speaker_id: str | None = None
    description: str = ""


@dataclass(frozen=True)
class TrialResult:
    trial_id: str
    true_speaker_id: str | None
    # (speaker_id, raw score, normalized/decision score, accepted)
    ranked: list[tuple[str, float, float, bool]]


@dataclass
class EvalReport:
    per_trial: list[TrialResult]
    threshold: float
    mode: str
    false_accepts: int = 0
    false_rejects: int = 0
    eer: float = 0.0
    top1_accuracy: float = 0.0


def identify(trial: Trial, registry: SpeakerRegistry, policy: DecisionPolicy,
             ubm: Ubm | None = None, cohort: CohortStats | None = None) -> TrialResult:
    """Score a trial against every registry entry, rank and decide.

    LLR mode: raw log-likelihood ratios against all models; the cohort
    defaults to those raw scores themselves (z-style), or a fixed
    impostor cohort may be passed in. Cosine mode: cosine of the trial
    i-vector against each registered i-vector; the cosine score is used
    directly as the decision score.
    """
    if not registry.entries:
        raise EmptyRegistry("no enrolled speakers")

    if policy.mode == "llr-normalized":
        if trial.test_features is None or ubm is None:
            raise ModeMismatch("LLR mode needs test features and a UBM")
        raw = [
            (e.speaker_id, llr_score(trial.test_features, e.model, ubm))
            for e in registry.entries
        ]
        stats = cohort if cohort is not None else cohort_from_scores(
            [score for _, score in raw]
        )
        scored = [
            (sid, score, normalize_score(score, stats)) for sid, score in raw
        ]
    else:
        if trial.test_ivector is None:
            raise ModeMismatch("cosine mode needs a test i-vector")
        if any(e.ivector is None for e in registry.entries):
            raise ModeMismatch("registry entries lack i-vectors")
        scored = []
        for e in registry.entries:
            score = cosine_score(e.ivector, trial.test_ivector)
            scored.append((e.speaker_id, score, score))

    scored.sort(key=lambda item: (-item[2], item[0]))
    ranked = [
        (sid, raw_s, norm_s, decide(norm_s, policy)) for sid, raw_s, norm_s in scored
    ]
    return TrialResult(
        trial_id=trial.trial_id, true_speaker_id=trial.true_speaker_id, ranked=ranked
    )


def _error_rates(target, nontarget):
    targets = np.asarray(list(target), dtype=np.float64)
    nontargets = np.asarray(list(nontarget), dtype=np.float64)
    if targets.size == 0 or nontargets.size == 0:
        raise EmptyScoreSet("need both target and nontarget scores")
    thresholds = np.unique(np.concatenate([targets, nontargets]))
    far = np.array([(nontargets > t).mean() for t in thresholds])
    frr = np.array([(targets <= t).mean() for t in thresholds])
    return thresholds, far, frr


def compute_eer(target_scores, nontarget_scores) -> float:
    """Equal error rate via a sweep over the sorted union of scores.

    Returns (FAR + FRR) / 2 at the threshold minimizing |FAR - FRR|,
    ties broken toward the lower threshold.
    """
    _, far, frr = _error_rates(target_scores, nontarget_scores)
    best = int(np.argmin(np.abs(far - frr)))  # argmin keeps the first (lowest) tie
    return float((far[best] + frr[best]) / 2.0)


def det_points(target_scores, nontarget_scores) -> list[tuple[float, float]]:
    """(FAR, FRR) at each candidate threshold, in increasing threshold order."""
    _, far, frr = _error_rates(target_scores, nontarget_scores)
    return list(zip(far.tolist(), frr.tolist()))


def summarize(results: list[TrialResult], threshold: float, mode: str) -> EvalReport:
    """Assemble FA/FR counts, EER and top-1 accuracy from trial results.

    A trial counts one false accept if any non-true speaker is accepted
    and one false reject if the true speaker (when enrolled) is not.
    """
    fa = 0
    fr = 0
    top1_hits = 0
    labelled = 0
    target_scores: list[float] = []
    nontarget_scores: list[float] = []

    for res in results:
        truth = res.true_speaker_id
        ids_present = [sid for sid, _, _, _ in res.ranked]
        if truth is not None and truth in ids_present:
            labelled += 1
            if res.ranked and res.ranked[0][0] == truth:
                top1_hits += 1
        accepted_true = False
        accepted_other = False
        for sid, _, norm_s, accepted in res.ranked:
            is_true = truth is not None and sid == truth
            if is_true:
                target_scores.append(norm_s)
                accepted_true = accepted_true or accepted
            else:
                nontarget_scores.append(norm_s)
                accepted_other = accepted_other or accepted
        if accepted_other:
            fa += 1
        if truth is not None and truth in ids_present and not accepted_true:
            fr += 1

    eer = 0.0
    if target_scores and nontarget_scores:
        eer = compute_eer(target_scores, nontarget_scores)
    top1 = top1_hits / labelled if labelled else 0.0
    return EvalReport(
        per_trial=results,
        threshold=threshold,
        mode=mode,
        false_accepts=fa,
        false_rejects=fr,
        eer=eer,
        top1_accuracy=top1,
    )


def report_rows(report: EvalReport) -> list[dict]:
    """Flatten a report to one row per trial x speaker."""
    rows = []
    for res in report.per_trial:
        for sid, raw_s, norm_s, accepted in res.ranked:
            rows.append(
                {
                    "trial_id": res.trial_id,
                    "speaker_id": sid,
                    "raw_score": raw_s,
                    "normalized_score": norm_s,
                    "decision": "accept" if accepted else "reject",
                }
            )
    return rows


def report_to_csv(report: EvalReport) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(
        buf,
        fieldnames=["trial_id", "speaker_id", "raw_score", "normalized_score", "decision"],
        lineterminator="\n",
    )
    writer.writeheader()
    for row in report_rows(report):
        formatted = dict(row)
        formatted["raw_score"] = repr(row["raw_score"])
        formatted["normalized_score"] = repr(row["normalized_score"])
        writer.writerow(formatted)
    return buf.getvalue()
