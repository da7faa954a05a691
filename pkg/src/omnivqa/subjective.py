"""Subjective score processing and objective/subjective agreement statistics."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np
from scipy import optimize, stats


class SubjectiveError(ValueError):
    pass


@dataclass
class ScoreTable:
    """Raw opinion scores, ``scores[i, j]`` for subject ``i`` and sequence ``j``.

    Missing ratings are NaN.  ``groups`` optionally assigns each sequence to
    a viewing group.
    """

    subjects: list[str]
    sequences: list[str]
    scores: np.ndarray
    groups: Optional[list[str]] = None

    def __post_init__(self):
        self.scores = np.asarray(self.scores, dtype=float)
        if self.scores.shape != (len(self.subjects), len(self.sequences)):
            raise SubjectiveError(
                f"score matrix {self.scores.shape} does not match "
                f"{len(self.subjects)} subjects x {len(self.sequences)} sequences")
        finite = self.scores[~np.isnan(self.scores)]
        if np.any((finite < 0) | (finite > 100)):
            raise SubjectiveError("scores must lie in [0, 100]")
        if self.groups is not None and len(self.groups) != len(self.sequences):
            raise SubjectiveError("one group label per sequence required")

    @classmethod
    def from_records(cls, records, groups: Optional[Mapping[str, str]] = None) -> "ScoreTable":
        """Build a table from ``(subject, sequence, score)`` triples."""
        subjects, sequences = [], []
        seen_s, seen_q = {}, {}
        for subj, seq, _ in records:
            if subj not in seen_s:
                seen_s[subj] = len(subjects)
                subjects.append(subj)
            if seq not in seen_q:
                seen_q[seq] = len(sequences)
                sequences.append(seq)
        scores = np.full((len(subjects), len(sequences)), np.nan)
        for subj, seq, score in records:
            scores[seen_s[subj], seen_q[seq]] = float(score)
        group_list = None if groups is None else [groups.get(s, "") for s in sequences]
        return cls(subjects, sequences, scores, group_list)

    def valid_counts(self) -> np.ndarray:
        return np.sum(~np.isnan(self.scores), axis=0)

    def drop_subjects(self, ids) -> "ScoreTable":
        keep = [i for i, s in enumerate(self.subjects) if s not in set(ids)]
        return ScoreTable([self.subjects[i] for i in keep], list(self.sequences),
                          self.scores[keep], None if self.groups is None else list(self.groups))


def read_score_csv(path) -> ScoreTable:
    """Read a CSV with columns ``subject, sequence, score`` (header required)."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = {"subject", "sequence", "score"} - set(reader.fieldnames or [])
        if missing:
            raise SubjectiveError(f"{path}: missing columns {sorted(missing)}")
        rows = [(r["subject"], r["sequence"], float(r["score"])) for r in reader]
    return ScoreTable.from_records(rows)


def mos(table: ScoreTable) -> np.ndarray:
    """Mean opinion score per sequence over its valid subjects."""
    counts = table.valid_counts()
    if np.any(counts == 0):
        bad = [table.sequences[j] for j in np.flatnonzero(counts == 0)]
        raise SubjectiveError(f"sequences without valid ratings: {bad}")
    return np.nansum(table.scores, axis=0) / counts


def screening_counts(table: ScoreTable) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-subject ``(P, Q, ratings)`` counts of the BT.500 outlier screening."""
    n_subj = len(table.subjects)
    P = np.zeros(n_subj, dtype=int)
    Q = np.zeros(n_subj, dtype=int)
    for j in range(len(table.sequences)):
        col = table.scores[:, j]
        rated = ~np.isnan(col)
        x = col[rated]
        if len(x) < 2 or np.ptp(x) == 0:
            continue
        mean = x.mean()
        dev = x - mean
        m2 = np.mean(dev ** 2)
        std = math.sqrt(np.sum(dev ** 2) / (len(x) - 1))
        kurt = np.mean(dev ** 4) / m2 ** 2
        k = 2.0 if 2.0 <= kurt <= 4.0 else math.sqrt(20.0)
        idx = np.flatnonzero(rated)
        P[idx[x >= mean + k * std]] += 1
        Q[idx[x <= mean - k * std]] += 1
    ratings = np.sum(~np.isnan(table.scores), axis=1)
    return P, Q, ratings


def _screen_once(table: ScoreTable) -> list[str]:
    P, Q, ratings = screening_counts(table)
    rejected = []
    for i, subj in enumerate(table.subjects):
        pq = P[i] + Q[i]
        if ratings[i] == 0 or pq == 0:
            continue
        if pq / ratings[i] > 0.05 and abs(P[i] - Q[i]) / pq < 0.3:
            rejected.append(subj)
    return rejected


def reject_subjects(table: ScoreTable) -> tuple[ScoreTable, list[str]]:
    """BT.500 subject screening; returns the reduced table and rejected ids.

    Screening is repeated on the survivors until it rejects nobody, so the
    result is a fixed point (screening it again changes nothing).
    """
    if len(table.subjects) < 2:
        raise SubjectiveError("subject rejection needs at least two subjects")
    rejected: list[str] = []
    while len(table.subjects) >= 2:
        batch = _screen_once(table)
        if not batch:
            break
        if len(batch) == len(table.subjects):
            raise SubjectiveError("screening would reject every subject")
        rejected += batch
        table = table.drop_subjects(batch)
    return table, rejected


@dataclass
class QualityScores:
    sequences: list[str]
    mos: np.ndarray
    dmos: np.ndarray
    is_reference: np.ndarray
    flagged_subjects: list[str] = field(default_factory=list)


def dmos(table: ScoreTable, reference_of: Mapping[str, str]) -> QualityScores:
    """Differential MOS from raw scores.

    ``reference_of`` maps each impaired sequence to its reference sequence;
    sequences absent from the mapping (or mapped to themselves) are
    references.  Per subject, difference scores (reference minus impaired)
    are z-normalized over that subject's impaired ratings, rescaled with
    ``(z + 3) * 100 / 6`` and clamped to [0, 100], then averaged per
    sequence.  Subjects whose differences have zero variance get z = 0 and
    are reported in ``flagged_subjects``.  References get DMOS 0.
    """
    seq_index = {s: j for j, s in enumerate(table.sequences)}
    is_ref = np.array([reference_of.get(s, s) == s for s in table.sequences])
    for s, r in reference_of.items():
        if s == r:
            continue
        if s not in seq_index:
            continue
        if r not in seq_index:
            raise SubjectiveError(f"reference {r!r} of {s!r} was never rated")
        if table.groups is not None and table.groups[seq_index[s]] != table.groups[seq_index[r]]:
            raise SubjectiveError(f"{s!r} and its reference {r!r} belong to different groups")
    n_subj, n_seq = table.scores.shape
    diffs = np.full((n_subj, n_seq), np.nan)
    for j, s in enumerate(table.sequences):
        if is_ref[j]:
            continue
        r = seq_index[reference_of[s]]
        diffs[:, j] = table.scores[:, r] - table.scores[:, j]
    z = np.full_like(diffs, np.nan)
    flagged = []
    for i in range(n_subj):
        d = diffs[i]
        rated = ~np.isnan(d)
        if not np.any(rated):
            continue
        mu = d[rated].mean()
        sd = d[rated].std(ddof=1) if rated.sum() > 1 else 0.0
        if sd > 0:
            z[i, rated] = (d[rated] - mu) / sd
        else:
            z[i, rated] = 0.0
            flagged.append(table.subjects[i])
    scaled = np.clip((z + 3.0) * 100.0 / 6.0, 0.0, 100.0)
    out = np.zeros(n_seq)
    for j in range(n_seq):
        if is_ref[j]:
            continue
        col = scaled[:, j]
        col = col[~np.isnan(col)]
        if len(col) == 0:
            raise SubjectiveError(f"no subject rated both {table.sequences[j]!r} and its reference")
        out[j] = col.mean()
    return QualityScores(list(table.sequences), mos(table), out, is_ref, flagged)


# -- regression -------------------------------------------------------------

def logistic(x, b1, b2, b3, b4):
    """Monotonic 4-parameter logistic; ``b1``/``b2`` are the upper/lower plateaus."""
    return _centered(x, 0.5 * (b1 + b2), 0.5 * (b1 - b2), b3, b4)


def _centered(x, mid, half, b3, b4):
    # midpoint/half-height form: m + h * tanh(t / 2) equals the logistic and
    # stays accurate when the plateaus are huge (near-linear fits)
    t = (np.asarray(x, dtype=float) - b3) / max(abs(b4), 1e-300)
    return mid + half * np.tanh(t / 2.0)


@dataclass
class RegressionFit:
    params: tuple[float, float, float, float]
    fitted: np.ndarray
    converged: bool
    rmse: float
    centered: Optional[tuple[float, float, float, float]] = None

    def predict(self, x) -> np.ndarray:
        if self.centered is not None:
            return _centered(x, *self.centered)
        return logistic(x, *self.params)


# Scales of the near-linear starts, relative to the data range.  Wider
# stretches flatten the curvature of the logistic over the data.
_LINEAR_STRETCH = (1e3, 1e4, 1e5, 1e6)


def _starts(x, y):
    """Initial ``(mid, half, center, scale)`` guesses."""
    lo, hi = float(x.min()), float(x.max())
    span = hi - lo
    slope, intercept = np.polyfit(x, y, 1)
    y_lo, y_hi = float(y.min()), float(y.max())
    mid_y = 0.5 * (y_lo + y_hi)
    half = 0.5 * (y_hi - y_lo) * (1.0 if slope >= 0 else -1.0)
    for c in np.linspace(lo, hi, 8):
        yield (mid_y, half, float(c), span / 4.0)
    # nests a straight line and a constant, so the fit never does worse
    centre_x = float(np.mean(x))
    centre_y = intercept + slope * centre_x
    for stretch in _LINEAR_STRETCH:
        scale = stretch * span
        yield (centre_y, 2.0 * slope * scale, centre_x, scale)
    yield (float(y.mean()), 0.0, centre_x, span)


def logistic_fit(objective, subjective) -> RegressionFit:
    """Least-squares logistic regression of subjective on objective scores.

    Levenberg-Marquardt from eight starts spread over the objective range
    plus near-linear and constant starts; the best fit wins.
    """
    x = np.asarray(objective, dtype=float)
    y = np.asarray(subjective, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise SubjectiveError("objective and subjective must be equal-length vectors")
    if len(x) < 5:
        raise SubjectiveError("logistic fit needs at least 5 points")
    if np.ptp(x) == 0:
        raise SubjectiveError("objective scores are constant")

    def resid(p):
        return _centered(x, *p) - y

    best = None
    converged_any = False
    for start in _starts(x, y):
        start = np.array(start, dtype=float)
        candidates = [(start, False)]
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                res = optimize.least_squares(resid, start, method="lm", xtol=1e-15,
                                             ftol=1e-15, gtol=1e-15, max_nfev=4000)
            if np.all(np.isfinite(res.x)):
                candidates.append((res.x, res.status > 0))
        except (ValueError, FloatingPointError):
            pass
        for p, ok in candidates:
            r = resid(p)
            if not np.all(np.isfinite(r)):
                continue
            cost = float(r @ r)
            if best is None or cost < best[0]:
                best = (cost, p)
            converged_any |= ok
    cost, p = best
    mid, half, b3, b4 = (float(v) for v in p)
    b4 = abs(b4)
    params = (mid + half, mid - half, b3, b4)
    fitted = _centered(x, mid, half, b3, b4)
    return RegressionFit(params, fitted, converged_any, math.sqrt(cost / len(x)),
                         (mid, half, b3, b4))


@dataclass
class CorrelationReport:
    pcc: float
    srcc: float
    rmse: float
    mae: float
    n: int

    @property
    def flagged(self) -> bool:
        return math.isnan(self.pcc) or math.isnan(self.srcc)


def _pcc(a, b) -> float:
    da = a - a.mean()
    db = b - b.mean()
    denom = math.sqrt(float(da @ da) * float(db @ db))
    if denom == 0.0:
        return math.nan
    return float(np.clip(float(da @ db) / denom, -1.0, 1.0))


def correlate(fitted, subjective) -> CorrelationReport:
    """PCC, SRCC (average ranks for ties), RMSE and MAE of fitted vs subjective."""
    a = np.asarray(fitted, dtype=float)
    b = np.asarray(subjective, dtype=float)
    if a.shape != b.shape or a.ndim != 1 or len(a) < 2:
        raise SubjectiveError("correlate needs two equal-length vectors of length >= 2")
    err = a - b
    return CorrelationReport(
        pcc=_pcc(a, b),
        srcc=_pcc(stats.rankdata(a), stats.rankdata(b)),
        rmse=math.sqrt(float(np.mean(err ** 2))),
        mae=float(np.mean(np.abs(err))),
        n=len(a),
    )


def evaluate_metric(objective, subjective) -> tuple[RegressionFit, CorrelationReport]:
    """Fit the logistic mapping, then correlate fitted scores with the subjective ones."""
    fit = logistic_fit(objective, subjective)
    return fit, correlate(fit.fitted, subjective)


def mean_report(reports: Sequence[CorrelationReport]) -> CorrelationReport:
    """Average of per-group reports (NaN correlations skipped)."""
    if not reports:
        raise SubjectiveError("no reports to average")

    def avg(name):
        vals = [getattr(r, name) for r in reports if not math.isnan(getattr(r, name))]
        return float(np.mean(vals)) if vals else math.nan

    return CorrelationReport(avg("pcc"), avg("srcc"), avg("rmse"), avg("mae"),
                             sum(r.n for r in reports))
