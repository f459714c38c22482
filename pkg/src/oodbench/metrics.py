"""Detection metrics and method comparison.

Framing: ID test examples are positives, OOD examples negatives, and the
detector's score is the classifier statistic (higher = more ID).

* auroc: rank-based (Mann-Whitney) with ties counted 0.5. All tie-adjusted
  rank sums are half-integers well below 2^53, so the sorted computation is
  bit-identical to brute-force pair counting, not merely close.
* fnr_at_tnr95: order-statistic convention, pinned exactly so independent
  implementations agree: k = ceil(0.95 * n_ood), tau = k-th smallest OOD
  score, decision "OOD iff score <= tau", return fraction of ID scores <= tau.
* compare: per (ID, OOD) dataset pair, a method beats another on higher
  AUROC, then lower FNR@95, then (exact double tie) lexicographically earlier
  method id, so every pair is decided and wins[i][j] + wins[j][i] = pairs.
"""

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .errors import IncompleteGrid

__all__ = [
    "EvalResult",
    "ScoredPopulations",
    "WinMatrix",
    "auroc",
    "compare",
    "fnr_at_tnr95",
]


class ScoredPopulations:
    """Finite, non-empty score vectors for ID (positive) and OOD (negative)."""

    def __init__(self, id_scores, ood_scores):
        id_scores = np.asarray(id_scores, dtype=np.float64)
        ood_scores = np.asarray(ood_scores, dtype=np.float64)
        if id_scores.ndim != 1 or ood_scores.ndim != 1:
            raise ValueError("score populations must be 1-D")
        if len(id_scores) == 0 or len(ood_scores) == 0:
            raise ValueError("score populations must be non-empty")
        if not (np.all(np.isfinite(id_scores)) and np.all(np.isfinite(ood_scores))):
            raise ValueError("scores must be finite")
        self.id_scores = id_scores
        self.ood_scores = ood_scores


@dataclass(frozen=True)
class EvalResult:
    auroc: float
    fnr95: float

    def __post_init__(self):
        if not (0.0 <= self.auroc <= 1.0 and 0.0 <= self.fnr95 <= 1.0):
            raise ValueError("metrics must lie in [0, 1]")


def auroc(s):
    """P(id > ood) + 0.5 P(id == ood) over all cross pairs, via rank sums."""
    n_id = len(s.id_scores)
    n_ood = len(s.ood_scores)
    ranks = rankdata(np.concatenate([s.id_scores, s.ood_scores]), method="average")
    u = ranks[:n_id].sum() - n_id * (n_id + 1) / 2.0
    return u / (n_id * n_ood)


def fnr_at_tnr95(s):
    """Fraction of ID scores at or below the 95th-percentile OOD threshold."""
    n_ood = len(s.ood_scores)
    k = (95 * n_ood + 99) // 100  # ceil(0.95 * n) in exact integer arithmetic
    tau = np.partition(s.ood_scores, k - 1)[k - 1]
    return float(np.mean(s.id_scores <= tau))


class WinMatrix:
    """wins[i][j] = dataset pairs on which method i beats method j."""

    def __init__(self, methods, wins, pair_total):
        self.methods = list(methods)
        self.wins = np.asarray(wins, dtype=np.int64)
        self.pair_total = int(pair_total)

    def wins_for(self, method_a, method_b):
        i = self.methods.index(method_a)
        j = self.methods.index(method_b)
        return int(self.wins[i, j])


def _beats(a, name_a, b, name_b):
    if a.auroc != b.auroc:
        return a.auroc > b.auroc
    if a.fnr95 != b.fnr95:
        return a.fnr95 < b.fnr95
    return name_a < name_b  # exact double tie: earlier id wins


def compare(results, methods=None, pairs=None):
    """Build the win matrix from a complete {(pair, method): EvalResult} grid.

    Method and pair orderings default to sorted key order; pass explicit
    lists to control row order and to detect missing cells of an intended
    grid rather than of the observed one.
    """
    if methods is None:
        methods = sorted({m for _, m in results})
    if pairs is None:
        pairs = sorted({p for p, _ in results})
    if not methods or not pairs:
        raise IncompleteGrid("no results to compare")
    missing = [
        (p, m) for p in pairs for m in methods if (p, m) not in results
    ]
    if missing:
        raise IncompleteGrid(f"missing {len(missing)} cell(s): {missing}")

    k = len(methods)
    wins = np.zeros((k, k), dtype=np.int64)
    for p in pairs:
        for i in range(k):
            for j in range(i + 1, k):
                a = results[(p, methods[i])]
                b = results[(p, methods[j])]
                if _beats(a, methods[i], b, methods[j]):
                    wins[i, j] += 1
                else:
                    wins[j, i] += 1
    return WinMatrix(methods, wins, len(pairs))
