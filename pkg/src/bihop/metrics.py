"""Ranking metrics, threshold selection, and score-mass summaries.

AUC uses the Mann-Whitney identity: the fraction of (positive, negative)
score pairs ranked correctly, ties counted half.  Average precision walks the
ranking from the top and sums precision at each recall step; among tied
scores negatives are placed BEFORE positives, so tied blocks can only lower
precision (documented pessimistic convention; the optimistic
positives-first order is not used).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .scoring import ScorerKind


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    fn: int
    tn: int
    threshold: float

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    @property
    def precision(self) -> float:
        denom = self.tp + self.fp
        return self.tp / denom if denom else 0.0

    @property
    def recall(self) -> float:
        denom = self.tp + self.fn
        return self.tp / denom if denom else 0.0

    @property
    def f1(self) -> float:
        denom = 2 * self.tp + self.fp + self.fn
        return 2 * self.tp / denom if denom else 0.0


@dataclass(frozen=True)
class MetricReport:
    """One (dataset, scorer, run) evaluation row."""

    dataset: str
    scorer: ScorerKind
    run: int
    seed: int
    auc: float
    ap: float


def _validate_scores(arr, name: str) -> np.ndarray:
    arr = np.asarray(arr, dtype=np.float64).ravel()
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def roc_auc(pos_scores, neg_scores) -> float:
    """Probability a random positive outranks a random negative (ties half).

    Rank-based O((P+N) log(P+N)) evaluation; exactly equals the brute-force
    pair count (# greater + 0.5 # equal) / (P * N).
    """
    pos = _validate_scores(pos_scores, "pos_scores")
    neg = _validate_scores(neg_scores, "neg_scores")
    if pos.size == 0 or neg.size == 0:
        raise ValueError("roc_auc needs at least one positive and one negative score")
    ranks = rankdata(np.concatenate([pos, neg]), method="average")
    u_stat = ranks[: pos.size].sum() - pos.size * (pos.size + 1) / 2.0
    return float(u_stat / (pos.size * neg.size))


def _ranked_labels(pos: np.ndarray, neg: np.ndarray) -> np.ndarray:
    """Labels sorted by score descending, tied negatives ahead of positives."""
    scores = np.concatenate([neg, pos])
    labels = np.concatenate([np.zeros(neg.size, dtype=np.int64), np.ones(pos.size, dtype=np.int64)])
    order = np.argsort(-scores, kind="stable")
    return labels[order]


def average_precision(pos_scores, neg_scores, interpolated: bool = False) -> float:
    """Area under precision-recall by step summation.

    AP = sum_k (R_k - R_{k-1}) P_k over ranking positions; recall steps occur
    exactly at positives, so this is the mean of precision-at-positive.  With
    ``interpolated`` each positive instead contributes the maximum precision
    at or below its rank position.
    """
    pos = _validate_scores(pos_scores, "pos_scores")
    neg = _validate_scores(neg_scores, "neg_scores")
    if pos.size == 0:
        raise ValueError("average_precision needs at least one positive score")
    labels = _ranked_labels(pos, neg)
    positions = np.arange(1, labels.size + 1)
    precision = np.cumsum(labels) / positions
    if interpolated:
        precision = np.maximum.accumulate(precision[::-1])[::-1]
    return float(precision[labels == 1].sum() / pos.size)


def best_f1_threshold(scores, labels):
    """Threshold (from the distinct score values) maximizing F1.

    Predicts positive when score >= threshold.  Ties on F1 resolve to the
    larger threshold.  Returns (threshold, f1).
    """
    scores = _validate_scores(scores, "scores")
    labels = np.asarray(labels, dtype=np.int64).ravel()
    if scores.size != labels.size:
        raise ValueError("scores and labels differ in length")
    if scores.size == 0 or not np.any(labels == 1):
        raise ValueError("best_f1_threshold needs at least one positive label")
    order = np.argsort(-scores, kind="stable")
    s_sorted = scores[order]
    l_sorted = labels[order]
    cum_pos = np.cumsum(l_sorted)
    total_pos = cum_pos[-1]
    # Candidate thresholds: each distinct value, evaluated at its LAST
    # occurrence in the descending order so the >= rule is respected.
    last = np.nonzero(np.diff(s_sorted, append=-np.inf) != 0)[0]
    ks = last + 1
    tp = cum_pos[last].astype(np.float64)
    f1s = 2.0 * tp / (ks + total_pos)
    best = int(np.argmax(f1s))  # first (= largest threshold) among F1 ties
    return float(s_sorted[last[best]]), float(f1s[best])


def confusion_at(scores, labels, threshold: float) -> ConfusionMatrix:
    """Confusion counts for the rule: predict positive iff score >= threshold."""
    scores = _validate_scores(scores, "scores")
    labels = np.asarray(labels, dtype=np.int64).ravel()
    if scores.size != labels.size:
        raise ValueError("scores and labels differ in length")
    pred = scores >= threshold
    actual = labels == 1
    tp = int(np.sum(pred & actual))
    fp = int(np.sum(pred & ~actual))
    fn = int(np.sum(~pred & actual))
    tn = int(np.sum(~pred & ~actual))
    return ConfusionMatrix(tp=tp, fp=fp, fn=fn, tn=tn, threshold=float(threshold))


@dataclass(frozen=True)
class ScoreMassReport:
    """Mean raw score of a scorer over edge vs non-edge sets (3 x 2 table)."""

    test_edge: float
    test_false: float
    val_edge: float
    val_false: float
    all_edge: float
    all_false: float

    def rows(self):
        return (
            ("test", self.test_edge, self.test_false),
            ("val", self.val_edge, self.val_false),
            ("all_edges", self.all_edge, self.all_false),
        )


def score_mass_report(test_pos, test_neg, val_pos, val_neg, all_edges, false_edges) -> ScoreMassReport:
    """Arithmetic mean of raw scores per evaluation set.

    Separation of the edge column from the false-edge column is the
    calibration signal that distinguishes a useful two-hop surface from a
    flat one.
    """
    sets = {
        "test_pos": test_pos,
        "test_neg": test_neg,
        "val_pos": val_pos,
        "val_neg": val_neg,
        "all_edges": all_edges,
        "false_edges": false_edges,
    }
    means = {}
    for name, values in sets.items():
        arr = _validate_scores(values, name)
        if arr.size == 0:
            raise ValueError(f"score set {name} is empty")
        means[name] = float(arr.mean())
    return ScoreMassReport(
        test_edge=means["test_pos"],
        test_false=means["test_neg"],
        val_edge=means["val_pos"],
        val_false=means["val_neg"],
        all_edge=means["all_edges"],
        all_false=means["false_edges"],
    )


def format_mass_table(report: ScoreMassReport, title: str = "") -> str:
    lines = []
    if title:
        lines.append(title)
    lines.append(f"{'set':<10} {'edge':>12} {'false edge':>12}")
    for name, edge, false in report.rows():
        lines.append(f"{name:<10} {edge:>12.6f} {false:>12.6f}")
    return "\n".join(lines)
