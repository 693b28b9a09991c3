"""Frame-level VAD scoring: miss/false-alarm rates, frame error rate, detection cost."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

__all__ = ["EvalCounts", "EvalResult", "AggregateResult", "count_errors", "rates_from_counts", "score", "aggregate"]

DEFAULT_GAMMA = 0.25


@dataclass
class EvalCounts:
    """Confusion counts of hypothesis labels against a reference."""

    n_speech_ref: int
    n_nonspeech_ref: int
    n_miss: int
    n_fa: int

    @property
    def n_total(self) -> int:
        return self.n_speech_ref + self.n_nonspeech_ref

    def __add__(self, other: "EvalCounts") -> "EvalCounts":
        return EvalCounts(
            self.n_speech_ref + other.n_speech_ref,
            self.n_nonspeech_ref + other.n_nonspeech_ref,
            self.n_miss + other.n_miss,
            self.n_fa + other.n_fa,
        )


@dataclass
class EvalResult:
    """Rates in percent plus the detection cost (0..1 scale)."""

    p_miss: float
    p_fa: float
    fer: float
    dcf: float
    gamma: float
    n_frames: int
    ref_has_speech: bool = True
    ref_has_nonspeech: bool = True


@dataclass
class AggregateResult:
    """Micro-averaged rates over pooled counts, with the macro FER on the side."""

    pooled: EvalResult
    macro_fer: float
    num_files: int


def _as_bool(labels) -> np.ndarray:
    arr = getattr(labels, "labels", labels)
    return np.asarray(arr, dtype=bool)


def count_errors(ref, hyp) -> EvalCounts:
    """Confusion counts after truncating both label sequences to the shorter."""
    r = _as_bool(ref)
    h = _as_bool(hyp)
    n = min(len(r), len(h))
    if n == 0:
        raise ValueError("no frames to score")
    if len(r) != len(h):
        warnings.warn(
            f"label length mismatch ({len(r)} vs {len(h)}); truncating to {n} frames",
            stacklevel=2,
        )
    r, h = r[:n], h[:n]
    n_speech = int(np.count_nonzero(r))
    return EvalCounts(
        n_speech_ref=n_speech,
        n_nonspeech_ref=n - n_speech,
        n_miss=int(np.count_nonzero(r & ~h)),
        n_fa=int(np.count_nonzero(~r & h)),
    )


def rates_from_counts(counts: EvalCounts, gamma: float = DEFAULT_GAMMA) -> EvalResult:
    """Turn raw counts into percent rates and the weighted detection cost.

    A class absent from the reference yields rate 0 and is flagged on the
    result.
    """
    if not 0.0 <= gamma <= 1.0:
        raise ValueError("gamma must be in [0, 1]")
    if counts.n_total == 0:
        raise ValueError("no frames to score")
    p_miss = 100.0 * counts.n_miss / counts.n_speech_ref if counts.n_speech_ref else 0.0
    p_fa = 100.0 * counts.n_fa / counts.n_nonspeech_ref if counts.n_nonspeech_ref else 0.0
    fer = 100.0 * (counts.n_miss + counts.n_fa) / counts.n_total
    dcf = (1.0 - gamma) * p_miss / 100.0 + gamma * p_fa / 100.0
    return EvalResult(
        p_miss=p_miss,
        p_fa=p_fa,
        fer=fer,
        dcf=dcf,
        gamma=gamma,
        n_frames=counts.n_total,
        ref_has_speech=counts.n_speech_ref > 0,
        ref_has_nonspeech=counts.n_nonspeech_ref > 0,
    )


def score(ref, hyp, gamma: float = DEFAULT_GAMMA) -> EvalResult:
    """Frame-level error rates of hypothesis labels against reference labels."""
    return rates_from_counts(count_errors(ref, hyp), gamma)


def aggregate(items, gamma: float = DEFAULT_GAMMA) -> AggregateResult:
    """Pool counts across files (micro-average); macro FER kept as a secondary figure.

    `items` is a sequence of (EvalCounts, file_id) pairs.
    """
    items = list(items)
    if not items:
        raise ValueError("nothing to aggregate")
    total = EvalCounts(0, 0, 0, 0)
    fers = []
    for counts, _ in items:
        total = total + counts
        fers.append(rates_from_counts(counts, gamma).fer)
    return AggregateResult(rates_from_counts(total, gamma), float(np.mean(fers)), len(items))
