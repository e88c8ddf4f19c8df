"""Classical chance-corrected agreement coefficients.

Kept for side-by-side comparison with the model-based reliability
estimate: the S coefficient assumes uniform chance agreement, Fleiss' pi
uses pooled category marginals, and the reported kappa is Cohen's
two-rater kappa averaged over all rater pairs (each pair corrected with
its own per-rater marginals).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .model import RatingsMatrix

__all__ = ["CoefficientReport", "coefficients"]


@dataclass(frozen=True)
class CoefficientReport:
    percent_agreement: float
    s_value: float
    cohen_kappa_mean: float
    fleiss_pi: float
    flags: tuple[str, ...]


def coefficients(ratings: RatingsMatrix) -> CoefficientReport:
    """Observed agreement plus S, mean pairwise Cohen kappa, and Fleiss pi.

    A coefficient whose expected agreement reaches 1 (all mass on one
    category) is undefined; it is reported as 0 and flagged.
    """
    n, r = ratings.n_items, ratings.n_raters
    if r < 2:
        raise ValueError("need at least two raters")
    m = ratings.categories.m
    codes = ratings.codes
    counts = np.zeros((n, m), dtype=np.int64)
    np.add.at(counts, (np.arange(n)[:, None], codes), 1)

    agree_pairs = (counts * (counts - 1)).sum() // 2
    observed = float(agree_pairs) / (n * r * (r - 1) / 2.0)
    s_value = (observed - 1.0 / m) / (1.0 - 1.0 / m)

    flags: list[str] = []
    pooled = counts.sum(axis=0) / float(n * r)
    pe_pooled = float(pooled @ pooled)
    if pe_pooled >= 1.0:
        flags.append("pi undefined: expected agreement is 1")
        fleiss_pi = 0.0
    else:
        fleiss_pi = (observed - pe_pooled) / (1.0 - pe_pooled)

    marginals = np.stack([np.bincount(codes[:, i], minlength=m) / n for i in range(r)])
    kappas = []
    undefined_pairs = 0
    for i, j in combinations(range(r), 2):
        po = float(np.mean(codes[:, i] == codes[:, j]))
        pe = float(marginals[i] @ marginals[j])
        if pe >= 1.0:
            undefined_pairs += 1
            continue
        kappas.append((po - pe) / (1.0 - pe))
    if not kappas:
        flags.append("kappa undefined: expected agreement is 1")
        kappa_mean = 0.0
    else:
        if undefined_pairs:
            flags.append(f"kappa undefined for {undefined_pairs} rater pair(s)")
        kappa_mean = sum(kappas) / len(kappas)

    return CoefficientReport(
        percent_agreement=observed,
        s_value=float(s_value),
        cohen_kappa_mean=float(kappa_mean),
        fleiss_pi=float(fleiss_pi),
        flags=tuple(flags),
    )
