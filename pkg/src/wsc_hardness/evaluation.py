"""Metrics, evaluation reports and latency timing.

Hardness values live on [0, 1].  Accuracy is reported on the percent
scale as ``100 - 100 * MAE``.  Pearson correlation is ``None`` when either
series has zero variance.
"""

import json
import math
import time
from dataclasses import asdict, dataclass

import numpy as np

from .errors import EvaluationError, MetricInputError


def _pair(pred, label):
    p = np.asarray(pred, dtype=np.float64).ravel()
    y = np.asarray(label, dtype=np.float64).ravel()
    if len(p) != len(y):
        raise MetricInputError(f"length mismatch: {len(p)} vs {len(y)}")
    if len(p) == 0:
        raise MetricInputError("empty input")
    if not (np.isfinite(p).all() and np.isfinite(y).all()):
        raise MetricInputError("non-finite value in metric input")
    return p, y


def mean_absolute_error(pred, label):
    p, y = _pair(pred, label)
    return float(np.mean(np.abs(p - y)))


def accuracy_score(pred, label):
    return 100.0 * (1.0 - mean_absolute_error(pred, label))


def pearson(x, y):
    x, y = _pair(x, y)
    # exact test: a re-rounded mean can leave tiny nonzero deviations
    if x.min() == x.max() or y.min() == y.max():
        return None
    dx = x - x.mean()
    dy = y - y.mean()
    sx = math.sqrt(float(dx @ dx))
    sy = math.sqrt(float(dy @ dy))
    if sx == 0.0 or sy == 0.0:
        return None
    r = float(dx @ dy) / (sx * sy)
    return max(-1.0, min(1.0, r))


@dataclass(frozen=True)
class EvaluationReport:
    mae_unit: float
    pearson: float
    n: int
    subset_tag: str = None

    @property
    def mae_percent(self):
        return 100.0 * self.mae_unit

    @property
    def accuracy(self):
        return 100.0 - self.mae_percent

    def to_dict(self):
        d = asdict(self)
        d["mae_percent"] = self.mae_percent
        d["accuracy"] = self.accuracy
        return d


def report_from_predictions(pred, label, tag=None):
    return EvaluationReport(mean_absolute_error(pred, label),
                            pearson(pred, label), len(np.ravel(label)), tag)


def evaluate(predictor, dataset, subset_ids=None, tag=None):
    """Score ``predictor.predict(half)`` against the labelled halves."""
    halves = list(dataset.halves)
    if subset_ids is not None:
        wanted = set(subset_ids)
        halves = [h for h in halves if h.id in wanted]
        tag = tag or "subset"
    if not halves:
        raise EvaluationError("no halves left to evaluate")
    unlabeled = [h.id for h in halves if h.hardness is None]
    if unlabeled:
        raise EvaluationError(f"{len(unlabeled)} halves lack a hardness "
                              f"label, e.g. {unlabeled[0]}")
    pred = [predictor.predict(h) for h in halves]
    return report_from_predictions(pred, [h.hardness for h in halves], tag)


@dataclass(frozen=True)
class TimingReport:
    extract_seconds: tuple
    infer_seconds: tuple

    @property
    def n(self):
        return len(self.infer_seconds)

    @staticmethod
    def _agg(xs):
        if not xs:
            return {"mean": None, "p95": None}
        a = np.asarray(xs)
        return {"mean": float(a.mean()), "p95": float(np.percentile(a, 95))}

    def summary(self):
        return {"n": self.n, "extract": self._agg(self.extract_seconds),
                "infer": self._agg(self.infer_seconds)}


def benchmark_latency(predictor, dataset, warmup=1, clock=time.perf_counter):
    """Per-half wall-clock time, split into extraction and inference.

    ``predictor`` must offer ``prepare(half)`` returning model input and
    ``predict_prepared(x)``; the first ``warmup`` halves are run but not
    recorded.
    """
    halves = list(dataset.halves)
    if not halves:
        raise EvaluationError("empty dataset")
    if warmup < 0 or warmup >= len(halves):
        raise EvaluationError(f"warmup={warmup} leaves nothing to time out "
                              f"of {len(halves)} halves")
    extract, infer = [], []
    for i, h in enumerate(halves):
        t0 = clock()
        x = predictor.prepare(h)
        t1 = clock()
        predictor.predict_prepared(x)
        t2 = clock()
        if i >= warmup:
            extract.append(t1 - t0)
            infer.append(t2 - t1)
    return TimingReport(tuple(extract), tuple(infer))


def _fmt(v, spec):
    return "undefined" if v is None else format(v, spec)


def render_table(rows):
    """Aligned text table; ``rows`` maps system name to a report."""
    header = ("System", "MAE", "Correlation Coefficient", "Accuracy")
    body = [(name, _fmt(r.mae_percent, ".2f"), _fmt(r.pearson, ".2f"),
             _fmt(r.accuracy, ".2f")) for name, r in rows.items()]
    widths = [max(len(str(c)) for c in col) for col in zip(header, *body)]
    lines = []
    for k, row in enumerate([header] + body):
        lines.append("  ".join(str(c).ljust(w) if j == 0 else str(c).rjust(w)
                               for j, (c, w) in enumerate(zip(row, widths))))
        if k == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)


def reports_to_json(rows):
    return json.dumps({k: r.to_dict() for k, r in rows.items()}, indent=2,
                      sort_keys=True) + "\n"
