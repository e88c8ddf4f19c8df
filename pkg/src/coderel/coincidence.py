"""Agreement moments of a rating experiment.

Three families of expected relative frequencies carry all the information
the estimators use:

* ``e1[c]``   -- a single rater assigns category ``c`` to an item,
* ``e2[a][b]`` -- one rater assigns ``a`` and another assigns ``b`` to the
  same item,
* ``e3[c]``   -- three raters unanimously assign ``c``.

They can be evaluated exactly from model parameters
(:func:`theoretical_stats`), estimated from an observed rating table by
pooling over all rater pairs and triples (:func:`empirical_stats`), or
recomputed by brute-force enumeration of the joint outcome space
(:func:`enumerate_stats_oracle`), which exists purely as an independent
cross-check of the closed-form evaluation.
"""

from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import CategorySet, CoderModel, RatingsMatrix

__all__ = [
    "StatsSource",
    "CoincidenceStats",
    "theoretical_stats",
    "empirical_stats",
    "enumerate_stats_oracle",
    "write_stats_csv",
    "read_stats_csv",
]

ORACLE_MAX_OUTCOMES = 10**6


@dataclass(frozen=True)
class StatsSource:
    """Provenance tag: exact model evaluation or pooled sample estimate."""

    kind: str  # "theoretical" or "empirical"
    n_items: Optional[int] = None
    n_raters: Optional[int] = None

    def __post_init__(self):
        if self.kind not in ("theoretical", "empirical"):
            raise ValueError(f"unknown stats source: {self.kind!r}")
        if self.kind == "empirical" and (self.n_items is None or self.n_raters is None):
            raise ValueError("empirical stats need n_items and n_raters")


@dataclass(frozen=True)
class CoincidenceStats:
    """Single, pairwise, and triple coincidence moments for one experiment.

    ``e3`` is ``None`` when the data cannot support triple coincidences
    (fewer than three raters).
    """

    categories: CategorySet
    e1: np.ndarray
    e2: np.ndarray
    e3: Optional[np.ndarray]
    source: StatsSource

    def __post_init__(self):
        for arr in (self.e1, self.e2) + (() if self.e3 is None else (self.e3,)):
            arr.flags.writeable = False
        _validate(self)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CoincidenceStats):
            return NotImplemented
        if self.e3 is None or other.e3 is None:
            e3_equal = self.e3 is None and other.e3 is None
        else:
            e3_equal = np.array_equal(self.e3, other.e3)
        return (
            self.categories == other.categories
            and self.source == other.source
            and np.array_equal(self.e1, other.e1)
            and np.array_equal(self.e2, other.e2)
            and e3_equal
        )

    @property
    def m(self) -> int:
        return self.categories.m

    def excess(self) -> np.ndarray:
        """Self-coincidence excess ``e2[c][c] - e1[c]**2`` per category."""
        return np.diag(self.e2) - self.e1**2

    def index(self, label: str) -> int:
        return self.categories.index(label)


def _validate(stats: CoincidenceStats) -> None:
    m = stats.categories.m
    e1, e2, e3 = stats.e1, stats.e2, stats.e3
    if e1.shape != (m,) or e2.shape != (m, m):
        raise ValueError("moment arrays do not match the category set")
    eps = 1e-9
    for name, arr in (("e1", e1), ("e2", e2)) + (() if e3 is None else (("e3", e3),)):
        if np.any(arr < -1e-15) or np.any(arr > 1.0 + 1e-12):
            raise ValueError(f"{name} entries must lie in [0, 1]")
    if abs(float(e1.sum()) - 1.0) > eps:
        raise ValueError("e1 must sum to 1")
    if abs(float(e2.sum()) - 1.0) > eps:
        raise ValueError("e2 must sum to 1")
    if np.max(np.abs(e2 - e2.T)) > 1e-12:
        raise ValueError("e2 must be symmetric")
    if np.any(np.diag(e2) > e1 + 1e-12):
        raise ValueError("pair agreement cannot exceed single frequency")
    if e3 is not None and np.any(e3 > np.diag(e2) + 1e-12):
        raise ValueError("triple agreement cannot exceed pair agreement")


def theoretical_stats(model: CoderModel) -> CoincidenceStats:
    """Exact moments of a coder model.

    With ``b`` the reliability, ``t`` the true-category frequencies and
    ``p`` the a-priori distribution::

        e1[c]    = b*t[c] + (1-b)*p[c]
        e2[a][b] = b^2*d(a,b)*t[a] + b*(1-b)*(t[a]p[b] + t[b]p[a])
                   + (1-b)^2*p[a]p[b]
        e3[c]    = b^3*t[c] + 3b^2(1-b)*t[c]p[c] + 3b(1-b)^2*t[c]p[c]^2
                   + (1-b)^3*p[c]^3
    """
    b = model.beta
    t = model.labeling.tau
    p = model.apriori.p
    q = 1.0 - b
    e1 = b * t + q * p
    e2 = (
        b * b * np.diag(t)
        + b * q * (np.outer(t, p) + np.outer(p, t))
        + q * q * np.outer(p, p)
    )
    e3 = b**3 * t + 3 * b * b * q * t * p + 3 * b * q * q * t * p * p + q**3 * p**3
    return CoincidenceStats(
        categories=model.categories,
        e1=e1,
        e2=e2,
        e3=e3,
        source=StatsSource("theoretical"),
    )


def empirical_stats(ratings: RatingsMatrix) -> CoincidenceStats:
    """Pooled plug-in estimates of the coincidence moments.

    ``e1`` pools all cells; ``e2`` pools every ordered rater pair per item;
    ``e3`` pools every unordered rater triple per item and is only computed
    for three or more raters.  All accumulation happens on integer counts,
    so the result is independent of iteration order.
    """
    n, r = ratings.n_items, ratings.n_raters
    if r < 2:
        raise ValueError("need at least two raters")
    m = ratings.categories.m
    counts = np.zeros((n, m), dtype=np.int64)
    np.add.at(counts, (np.arange(n)[:, None], ratings.codes), 1)
    total = counts.sum(axis=0)

    e1 = total / float(n * r)
    gram = counts.T @ counts
    pairs = gram - np.diag(total)
    e2 = pairs / float(n * r * (r - 1))

    e3 = None
    if r >= 3:
        triples = (counts * (counts - 1) * (counts - 2) // 6).sum(axis=0)
        n_triples = r * (r - 1) * (r - 2) // 6
        e3 = triples / float(n * n_triples)

    return CoincidenceStats(
        categories=ratings.categories,
        e1=e1,
        e2=e2,
        e3=e3,
        source=StatsSource("empirical", n_items=n, n_raters=r),
    )


def enumerate_stats_oracle(model: CoderModel, n_raters: int) -> CoincidenceStats:
    """Exact moments by full enumeration of the joint outcome space.

    For every item, every possible assignment of categories to ``n_raters``
    raters is enumerated and weighted by its probability under the mixture;
    the same pooled indicators as :func:`empirical_stats` are averaged.
    Independent of :func:`theoretical_stats` by construction -- it never
    touches the closed-form moment expressions.
    """
    m = model.categories.m
    n = model.n_items
    if m**n_raters * n > ORACLE_MAX_OUTCOMES:
        raise ValueError("instance too large for oracle")
    if n_raters < 2:
        raise ValueError("need at least two raters")

    b = model.beta
    p = model.apriori.p
    e1 = np.zeros(m)
    e2 = np.zeros((m, m))
    e3 = np.zeros(m) if n_raters >= 3 else None
    n_pairs = n_raters * (n_raters - 1)
    n_triples = n_raters * (n_raters - 1) * (n_raters - 2) // 6

    for g in model.labeling.codes:
        cell = (1.0 - b) * p.copy()
        cell[g] += b
        for outcome in itertools.product(range(m), repeat=n_raters):
            prob = 1.0
            for x in outcome:
                prob *= cell[x]
            occ = np.bincount(np.array(outcome), minlength=m)
            e1 += prob * occ / n_raters
            e2 += prob * (np.outer(occ, occ) - np.diag(occ)) / n_pairs
            if e3 is not None:
                e3 += prob * (occ * (occ - 1) * (occ - 2) / 6.0) / n_triples

    e1 /= n
    e2 /= n
    if e3 is not None:
        e3 /= n
    return CoincidenceStats(
        categories=model.categories,
        e1=e1,
        e2=e2,
        e3=e3,
        source=StatsSource("theoretical"),
    )


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_stats_csv(stats: CoincidenceStats, path_or_buf) -> None:
    """Serialize to a single sectioned CSV (meta, categories, E1, E2, E3).

    Floats are written with 17 significant digits, so reading the file back
    reproduces every value exactly.
    """

    def _write(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["section", "a", "b", "value"])
        w.writerow(["meta", "kind", "", stats.source.kind])
        if stats.source.kind == "empirical":
            w.writerow(["meta", "n_items", "", stats.source.n_items])
            w.writerow(["meta", "n_raters", "", stats.source.n_raters])
        w.writerow(["meta", "has_e3", "", "true" if stats.e3 is not None else "false"])
        for i, label in enumerate(stats.categories):
            w.writerow(["category", i, "", label])
        labels = stats.categories.labels
        for c, v in zip(labels, stats.e1):
            w.writerow(["E1", c, "", _fmt(v)])
        for i, a in enumerate(labels):
            for j, bb in enumerate(labels):
                w.writerow(["E2", a, bb, _fmt(stats.e2[i, j])])
        if stats.e3 is not None:
            for c, v in zip(labels, stats.e3):
                w.writerow(["E3", c, "", _fmt(v)])

    if isinstance(path_or_buf, (str, bytes)) or hasattr(path_or_buf, "__fspath__"):
        with open(path_or_buf, "w", encoding="utf-8", newline="") as fh:
            _write(fh)
    else:
        _write(path_or_buf)


def read_stats_csv(path_or_buf) -> CoincidenceStats:
    if isinstance(path_or_buf, (str, bytes)) or hasattr(path_or_buf, "__fspath__"):
        with open(path_or_buf, "r", encoding="utf-8", newline="") as fh:
            text = fh.read()
    else:
        text = path_or_buf.read()
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header != ["section", "a", "b", "value"]:
        raise ValueError("malformed coincidence-stats CSV")
    meta: dict[str, str] = {}
    cat_rows: list[tuple[int, str]] = []
    cells: dict[str, dict] = {"E1": {}, "E2": {}, "E3": {}}
    for section, a, b_, value in reader:
        if section == "meta":
            meta[a] = value
        elif section == "category":
            cat_rows.append((int(a), value))
        elif section in cells:
            key = a if section != "E2" else (a, b_)
            cells[section][key] = float(value)
        else:
            raise ValueError(f"unknown section {section!r} in stats CSV")
    labels = [lab for _, lab in sorted(cat_rows)]
    cats = CategorySet(labels)
    m = cats.m
    e1 = np.array([cells["E1"][c] for c in labels])
    e2 = np.array([[cells["E2"][(a, b_)] for b_ in labels] for a in labels])
    has_e3 = meta.get("has_e3") == "true"
    e3 = np.array([cells["E3"][c] for c in labels]) if has_e3 else None
    if meta["kind"] == "empirical":
        source = StatsSource("empirical", int(meta["n_items"]), int(meta["n_raters"]))
    else:
        source = StatsSource("theoretical")
    return CoincidenceStats(categories=cats, e1=e1, e2=e2, e3=e3, source=source)
