"""Precision / recall / F1 containers."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional


@dataclass(frozen=True)
class PRF:
    """Precision, recall and their harmonic mean.

    ``counts`` is (matched, predicted, gold) when the scores were derived
    from counting; aggregate summaries (e.g. fold means) leave it None.
    """

    precision: float
    recall: float
    f1: float
    counts: Optional[tuple[int, int, int]] = None

    @classmethod
    def from_counts(cls, matched: int, predicted: int, gold: int) -> "PRF":
        precision = matched / predicted if predicted > 0 else 0.0
        recall = matched / gold if gold > 0 else 0.0
        if precision + recall > 0:
            f1 = 2 * precision * recall / (precision + recall)
        else:
            f1 = 0.0
        return cls(precision, recall, f1, (matched, predicted, gold))


def mean_prf(parts: list[PRF]) -> PRF:
    """Arithmetic mean of P, R and F1 over folds; counts are summed."""
    n = len(parts)
    if n == 0:
        return PRF(0.0, 0.0, 0.0, (0, 0, 0))
    counts = (
        sum(p.counts[0] for p in parts if p.counts),
        sum(p.counts[1] for p in parts if p.counts),
        sum(p.counts[2] for p in parts if p.counts),
    )
    return PRF(
        sum(p.precision for p in parts) / n,
        sum(p.recall for p in parts) / n,
        sum(p.f1 for p in parts) / n,
        counts,
    )
