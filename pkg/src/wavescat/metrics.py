"""Anti-spoofing detection metrics: DCF/minDCF, EER, F1, AUC, bootstrap.

Score convention, fixed everywhere: higher score = more likely fake; a
"miss" is a fake item scored below the threshold, a "false alarm" is a
real item scored at or above it. Threshold searches are exact, over the
midpoints between consecutive distinct scores plus sentinels beyond the
extremes.
"""

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, MetricError

LABEL_NAMES = {"real": 0, "fake": 1}


@dataclass(frozen=True)
class ScoreSet:
    """Aligned detection scores and {real, fake} ground truth."""

    scores: np.ndarray
    labels: np.ndarray  # 1 = fake, 0 = real

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=float)
        labels = np.asarray(self.labels)
        if labels.dtype.kind in "US":
            try:
                labels = np.array([LABEL_NAMES[str(v)] for v in labels])
            except KeyError as exc:
                raise DataError(f"unknown label {exc}") from None
        labels = labels.astype(np.int8)
        if scores.shape != labels.shape or scores.ndim != 1:
            raise DataError("scores and labels must be aligned 1D vectors")
        if not np.all(np.isfinite(scores)):
            raise DataError("scores contain NaN or Inf")
        if not np.all((labels == 0) | (labels == 1)):
            raise DataError("labels must be real/fake")
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "labels", labels)

    def __len__(self):
        return len(self.scores)

    @property
    def n_fake(self):
        return int(self.labels.sum())

    @property
    def n_real(self):
        return int(len(self.labels) - self.labels.sum())

    def require_both_classes(self):
        if self.n_fake == 0 or self.n_real == 0:
            raise MetricError("both classes are required for threshold metrics")

    def subset(self, idx):
        return ScoreSet(self.scores[idx], self.labels[idx])


@dataclass(frozen=True)
class DcfParams:
    """ASVspoof-5 style detection cost model; beta is always derived."""

    c_miss: float = 1.0
    c_fa: float = 10.0
    pi_spoof: float = 0.05

    @property
    def beta(self):
        return (self.c_miss * (1.0 - self.pi_spoof)) / (self.c_fa * self.pi_spoof)


def _candidate_thresholds(scores):
    uniq = np.unique(scores)
    mids = (uniq[:-1] + uniq[1:]) / 2.0
    return np.concatenate([[uniq[0] - 1.0], mids, [uniq[-1] + 1.0]])


def _error_rates(score_set, taus):
    """P_miss and P_fa at each threshold, vectorized over taus."""
    fake = np.sort(score_set.scores[score_set.labels == 1])
    real = np.sort(score_set.scores[score_set.labels == 0])
    p_miss = np.searchsorted(fake, taus, side="left") / len(fake)
    p_fa = 1.0 - np.searchsorted(real, taus, side="left") / len(real)
    return p_miss, p_fa


def min_dcf(score_set, params=DcfParams()):
    """Minimum of DCF(tau) = beta * P_miss(tau) + P_fa(tau).

    Exact: the cost is piecewise constant between consecutive scores, so
    minimizing over the midpoint candidates equals the infimum over all
    real thresholds. Returns (value, argmin threshold).
    """
    score_set.require_both_classes()
    taus = _candidate_thresholds(score_set.scores)
    p_miss, p_fa = _error_rates(score_set, taus)
    dcf = params.beta * p_miss + p_fa
    i = int(np.argmin(dcf))
    return float(dcf[i]), float(taus[i])


def eer(score_set):
    """Equal error rate on the interpolated ROC.

    Operating points are joined piecewise-linearly (per false-alarm rate,
    keeping the best miss rate); the EER is the exact crossing of
    P_miss = P_fa along that curve. Returns (value, threshold), the
    threshold linearly interpolated between the bracketing candidates.
    """
    score_set.require_both_classes()
    taus = _candidate_thresholds(score_set.scores)
    p_miss, p_fa = _error_rates(score_set, taus)
    # taus ascending => p_fa descending, p_miss ascending
    order = np.argsort(p_fa, kind="stable")
    fa, miss, tt = p_fa[order], p_miss[order], taus[order]
    # best (lowest) miss per distinct fa
    keep_fa, keep_miss, keep_tau = [], [], []
    for f, m, t in zip(fa, miss, tt):
        if keep_fa and keep_fa[-1] == f:
            if m < keep_miss[-1]:
                keep_miss[-1] = m
                keep_tau[-1] = t
        else:
            keep_fa.append(f)
            keep_miss.append(m)
            keep_tau.append(t)
    fa = np.array(keep_fa)
    miss = np.array(keep_miss)
    tt = np.array(keep_tau)

    # miss - fa decreases along the curve from +1-ish to -1-ish; the EER is
    # the exact zero crossing of the piecewise-linear interpolant.
    diff = miss - fa
    idx = int(np.argmax(diff <= 0.0))
    if diff[idx] > 0.0:  # no crossing recorded (cannot happen: fa reaches 1)
        return float(max(fa[-1], miss[-1])), float(tt[-1])
    if idx == 0:
        return float(fa[0]), float(tt[0])
    f0, f1 = fa[idx - 1], fa[idx]
    m0, m1 = miss[idx - 1], miss[idx]
    t0, t1 = tt[idx - 1], tt[idx]
    denom = (f1 - f0) - (m1 - m0)
    t = 0.0 if denom == 0.0 else (m0 - f0) / denom
    value = f0 + t * (f1 - f0)
    return float(value), float(t0 + t * (t1 - t0))


def auc(score_set):
    """P(score_fake > score_real) with ties counted 1/2 (rank statistic)."""
    score_set.require_both_classes()
    scores = score_set.scores
    labels = score_set.labels
    order = np.argsort(scores, kind="mergesort")
    ranks = np.empty(len(scores))
    sorted_scores = scores[order]
    # average ranks over ties
    i = 0
    while i < len(scores):
        j = i
        while j + 1 < len(scores) and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    n_fake = score_set.n_fake
    n_real = score_set.n_real
    rank_sum = ranks[labels == 1].sum()
    return float((rank_sum - n_fake * (n_fake + 1) / 2.0) / (n_fake * n_real))


def f1(score_set, threshold):
    """F1 with fake as the positive class, decided by score >= threshold.

    Degenerate precision/recall denominators yield F1 = 0 by convention.
    """
    pred = score_set.scores >= threshold
    truth = score_set.labels == 1
    tp = float(np.sum(pred & truth))
    fp = float(np.sum(pred & ~truth))
    fn = float(np.sum(~pred & truth))
    if tp == 0.0:
        return 0.0
    precision = tp / (tp + fp)
    recall = tp / (tp + fn)
    return 2.0 * precision * recall / (precision + recall)


@dataclass
class EvalReport:
    """Point estimates with +/- 2 sigma bootstrap intervals."""

    min_dcf: float
    eer: float
    f1: float
    auc: float
    intervals: dict
    params: DcfParams = field(default_factory=DcfParams)
    n_bootstrap: int = 1000
    seed: int = 0

    def to_dict(self):
        metrics = {"min_dcf": self.min_dcf, "eer": self.eer,
                   "f1": self.f1, "auc": self.auc}
        return {
            "metrics": {k: {"value": v, "ci2sigma": self.intervals[k]}
                        for k, v in metrics.items()},
            "params": {"c_miss": self.params.c_miss, "c_fa": self.params.c_fa,
                       "pi_spoof": self.params.pi_spoof,
                       "beta": self.params.beta},
            "n_bootstrap": self.n_bootstrap,
            "seed": self.seed,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


_MAX_REDRAWS = 1000


def bootstrap(score_set, params=DcfParams(), n=1000, seed=0):
    """Utterance-level bootstrap: n resamples with replacement.

    Point estimates come from the full set; each interval is 2x the
    standard deviation of the metric over resamples. Resamples that lose
    a class are redrawn from the same substream (documented policy). F1
    is evaluated at the full-set EER threshold throughout.
    """
    score_set.require_both_classes()
    if len(score_set) < 10:
        raise MetricError(f"need at least 10 scored items, got {len(score_set)}")

    eer_value, eer_tau = eer(score_set)
    point = {
        "min_dcf": min_dcf(score_set, params)[0],
        "eer": eer_value,
        "f1": f1(score_set, eer_tau),
        "auc": auc(score_set),
    }

    streams = np.random.SeedSequence(seed).spawn(n)
    samples = {k: np.empty(n) for k in point}
    m = len(score_set)
    for i, ss in enumerate(streams):
        rng = np.random.default_rng(ss)
        for attempt in range(_MAX_REDRAWS):
            idx = rng.integers(0, m, size=m)
            sub = score_set.subset(idx)
            if sub.n_fake > 0 and sub.n_real > 0:
                break
        else:
            raise MetricError("could not draw a two-class bootstrap resample")
        samples["min_dcf"][i] = min_dcf(sub, params)[0]
        samples["eer"][i] = eer(sub)[0]
        samples["f1"][i] = f1(sub, eer_tau)
        samples["auc"][i] = auc(sub)
    intervals = {k: float(2.0 * np.std(v)) for k, v in samples.items()}
    return EvalReport(min_dcf=point["min_dcf"], eer=point["eer"],
                      f1=point["f1"], auc=point["auc"],
                      intervals=intervals, params=params,
                      n_bootstrap=n, seed=seed)


def read_score_csv(path):
    """Load `id,score,label` rows into a ScoreSet."""
    scores, labels = [], []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["id", "score", "label"]:
            raise DataError(f"{path}: expected header id,score,label")
        for row in reader:
            scores.append(float(row["score"]))
            labels.append(row["label"])
    return ScoreSet(np.array(scores), np.array(labels))
