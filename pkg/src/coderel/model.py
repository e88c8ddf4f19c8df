"""Generative model of nominal-scale rating experiments.

A rating experiment is described by four pieces: the category set, the
latent true labeling of the items, a shared a-priori category distribution,
and a reliability probability ``beta``.  Each rater recognizes an item's
true category with probability ``beta``; otherwise the rater falls back on
an independent draw from the a-priori distribution.  :func:`sample_ratings`
turns a model into a concrete item-by-rater table of category labels.

All types are immutable after construction and sampling is a pure function
of ``(model, n_raters, seed)``, so everything here is safe to share across
threads.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from functools import singledispatch
from typing import Mapping, Sequence

import numpy as np

__all__ = [
    "CategorySet",
    "TrueLabeling",
    "AprioriDist",
    "CoderModel",
    "RatingsMatrix",
    "sample_ratings",
    "map_categories",
    "write_ratings_csv",
    "read_ratings_csv",
]


@dataclass(frozen=True)
class CategorySet:
    """Ordered set of at least two distinct category labels."""

    labels: tuple[str, ...]

    def __init__(self, labels: Sequence[str]):
        object.__setattr__(self, "labels", tuple(str(x) for x in labels))
        if len(self.labels) < 2:
            raise ValueError("need at least two categories")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("category labels must be pairwise distinct")

    @property
    def m(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"unknown category: {label!r}") from None

    def __iter__(self):
        return iter(self.labels)

    def __len__(self) -> int:
        return len(self.labels)


def _as_simplex(values: Sequence[float], m: int, what: str) -> np.ndarray:
    vec = np.asarray(values, dtype=np.float64)
    if vec.shape != (m,):
        raise ValueError(f"{what} must have one entry per category")
    if np.any(vec < 0.0) or np.any(vec > 1.0):
        raise ValueError(f"{what} entries must lie in [0, 1]")
    if abs(float(vec.sum()) - 1.0) > 1e-12:
        raise ValueError(f"{what} must sum to 1")
    vec.flags.writeable = False
    return vec


@dataclass(frozen=True)
class TrueLabeling:
    """Explicit item-to-category assignment.

    The per-category relative frequencies (``tau``) are derived from the
    labeling, so ``n_items * tau[c]`` is an integer count by construction.
    """

    categories: CategorySet
    gamma: tuple[str, ...]
    codes: np.ndarray = field(repr=False, compare=False)

    def __init__(self, categories: CategorySet, gamma: Sequence[str]):
        object.__setattr__(self, "categories", categories)
        object.__setattr__(self, "gamma", tuple(str(x) for x in gamma))
        if not self.gamma:
            raise ValueError("labeling must cover at least one item")
        codes = np.array([categories.index(x) for x in self.gamma], dtype=np.int64)
        codes.flags.writeable = False
        object.__setattr__(self, "codes", codes)

    @classmethod
    def from_frequencies(
        cls, categories: CategorySet, n_items: int, tau: Sequence[float]
    ) -> "TrueLabeling":
        """Build a blocked labeling (first ``n*tau[0]`` items get the first
        label, and so on) from exact per-category frequencies.

        Raises if any ``n_items * tau[c]`` is not an integer count: the
        frequencies are defined as exact count ratios, not approximations.
        """
        tau_vec = _as_simplex(tau, categories.m, "tau")
        counts = []
        for c, t in zip(categories, tau_vec):
            raw = t * n_items
            k = round(raw)
            if abs(raw - k) > 1e-9:
                raise ValueError(
                    f"n_items * tau must be integral; got {raw!r} for {c!r}"
                )
            counts.append(int(k))
        if sum(counts) != n_items:
            raise ValueError("tau counts do not add up to n_items")
        gamma = [c for c, k in zip(categories, counts) for _ in range(k)]
        return cls(categories, gamma)

    @property
    def n_items(self) -> int:
        return len(self.gamma)

    @property
    def counts(self) -> np.ndarray:
        return np.bincount(self.codes, minlength=self.categories.m)

    @property
    def tau(self) -> np.ndarray:
        return self.counts / self.n_items


@dataclass(frozen=True)
class AprioriDist:
    """Category distribution a rater falls back on when not certain."""

    categories: CategorySet
    p: np.ndarray

    def __init__(self, categories: CategorySet, p: Sequence[float]):
        object.__setattr__(self, "categories", categories)
        object.__setattr__(self, "p", _as_simplex(p, categories.m, "p"))

    def __eq__(self, other) -> bool:
        if not isinstance(other, AprioriDist):
            return NotImplemented
        return self.categories == other.categories and np.array_equal(self.p, other.p)

    def __getitem__(self, label: str) -> float:
        return float(self.p[self.categories.index(label)])


@dataclass(frozen=True)
class CoderModel:
    """Full parameter set of the rating process: (beta, labeling, a-priori)."""

    beta: float
    labeling: TrueLabeling
    apriori: AprioriDist

    def __post_init__(self):
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError("beta must lie in [0, 1]")
        if self.labeling.categories.labels != self.apriori.categories.labels:
            raise ValueError("labeling and a-priori distribution use different categories")

    @property
    def categories(self) -> CategorySet:
        return self.labeling.categories

    @property
    def n_items(self) -> int:
        return self.labeling.n_items

    @classmethod
    def from_frequencies(
        cls,
        labels: Sequence[str],
        beta: float,
        tau: Sequence[float],
        p: Sequence[float],
        n_items: int,
    ) -> "CoderModel":
        """Convenience constructor from (beta, tau, p, N) with blocked labeling."""
        cats = CategorySet(labels)
        return cls(
            beta=float(beta),
            labeling=TrueLabeling.from_frequencies(cats, n_items, tau),
            apriori=AprioriDist(cats, p),
        )


@dataclass(frozen=True)
class RatingsMatrix:
    """Item-by-rater table of category assignments.

    Stored as integer codes into the category set; use :meth:`label_rows`
    or the CSV writer for the label view.
    """

    categories: CategorySet
    codes: np.ndarray

    def __init__(self, categories: CategorySet, codes: np.ndarray):
        codes = np.asarray(codes, dtype=np.int64)
        if codes.ndim != 2 or codes.shape[0] < 1 or codes.shape[1] < 1:
            raise ValueError("ratings must form an N x R matrix with N, R >= 1")
        if np.any(codes < 0) or np.any(codes >= categories.m):
            raise ValueError("rating code outside the category set")
        codes = codes.copy()
        codes.flags.writeable = False
        object.__setattr__(self, "categories", categories)
        object.__setattr__(self, "codes", codes)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RatingsMatrix):
            return NotImplemented
        return self.categories == other.categories and np.array_equal(
            self.codes, other.codes
        )

    @classmethod
    def from_labels(
        cls, categories: CategorySet, rows: Sequence[Sequence[str]]
    ) -> "RatingsMatrix":
        codes = [[categories.index(x) for x in row] for row in rows]
        return cls(categories, np.array(codes, dtype=np.int64))

    @property
    def n_items(self) -> int:
        return int(self.codes.shape[0])

    @property
    def n_raters(self) -> int:
        return int(self.codes.shape[1])

    def label_rows(self) -> list[list[str]]:
        labels = self.categories.labels
        return [[labels[c] for c in row] for row in self.codes]


def sample_ratings(model: CoderModel, n_raters: int, seed: int) -> RatingsMatrix:
    """Draw a complete N x R rating table from the generative process.

    Randomness comes from numpy's PCG64 stream seeded with ``seed``.  Two
    uniforms are consumed per (item, rater) cell in row-major order: the
    first decides certainty (``u < beta`` means the rater emits the true
    category), the second picks the fallback category by inverse CDF over
    the a-priori distribution in label order.  Equal ``(model, n_raters,
    seed)`` therefore reproduce the matrix bit for bit on any platform.
    """
    if n_raters < 1:
        raise ValueError("need at least one rater")
    n = model.n_items
    rng = np.random.Generator(np.random.PCG64(seed))
    u = rng.random((n, n_raters, 2))
    cum = np.cumsum(model.apriori.p)
    fallback = np.searchsorted(cum, u[:, :, 1], side="right")
    np.clip(fallback, 0, model.categories.m - 1, out=fallback)
    certain = u[:, :, 0] < model.beta
    codes = np.where(certain, model.labeling.codes[:, None], fallback)
    return RatingsMatrix(model.categories, codes)


def _build_code_map(
    source: CategorySet, phi: Mapping[str, str], target: CategorySet
) -> np.ndarray:
    """Translate a label map into a source-code -> target-code table.

    Unmapped source labels get code -1; callers decide whether that is an
    error (it is one exactly when such a label actually occurs).
    """
    table = np.full(source.m, -1, dtype=np.int64)
    for c, c_new in phi.items():
        idx = source.index(c)
        if c_new not in target.labels:
            raise ValueError(f"map target {c_new!r} not in target categories")
        table[idx] = target.index(c_new)
    return table


@singledispatch
def map_categories(obj, phi: Mapping[str, str], target: CategorySet):
    """Apply a category map entrywise to ratings, or push a model forward.

    For a :class:`RatingsMatrix` the map is applied to every cell.  For a
    :class:`CoderModel` the true labeling is composed with the map and the
    a-priori mass of merged categories is added up; ``beta`` is untouched.
    """
    raise TypeError(f"cannot map categories of {type(obj).__name__}")


@map_categories.register
def _(obj: RatingsMatrix, phi: Mapping[str, str], target: CategorySet) -> RatingsMatrix:
    table = _build_code_map(obj.categories, phi, target)
    occurring = np.unique(obj.codes)
    missing = [obj.categories.labels[c] for c in occurring if table[c] < 0]
    if missing:
        raise ValueError(f"unmapped category: {missing[0]!r}")
    return RatingsMatrix(target, table[obj.codes])


@map_categories.register
def _(obj: CoderModel, phi: Mapping[str, str], target: CategorySet) -> CoderModel:
    table = _build_code_map(obj.categories, phi, target)
    if np.any(table < 0):
        # The pushed-forward a-priori mass needs every source category.
        missing = obj.categories.labels[int(np.argmin(table))]
        raise ValueError(f"unmapped category: {missing!r}")
    gamma_new = [target.labels[table[c]] for c in obj.labeling.codes]
    p_new = np.zeros(target.m)
    np.add.at(p_new, table, obj.apriori.p)
    # Guard against drift from summing float masses.
    p_new /= p_new.sum()
    return CoderModel(
        beta=obj.beta,
        labeling=TrueLabeling(target, gamma_new),
        apriori=AprioriDist(target, p_new),
    )


def write_ratings_csv(ratings: RatingsMatrix, path_or_buf) -> None:
    """Write ``item,rater_1,...,rater_R`` rows; category cells are quoted."""

    def _write(fh):
        writer = csv.writer(fh, quoting=csv.QUOTE_NONNUMERIC, lineterminator="\n")
        fh.write("item," + ",".join(f"rater_{i + 1}" for i in range(ratings.n_raters)) + "\n")
        for item, row in enumerate(ratings.label_rows(), start=1):
            writer.writerow([item] + row)

    if isinstance(path_or_buf, (str, bytes)) or hasattr(path_or_buf, "__fspath__"):
        with open(path_or_buf, "w", encoding="utf-8", newline="") as fh:
            _write(fh)
    else:
        _write(path_or_buf)


def read_ratings_csv(path_or_buf, categories: CategorySet | None = None) -> RatingsMatrix:
    """Read a ratings CSV written by :func:`write_ratings_csv`.

    When ``categories`` is omitted, the category set is inferred from the
    occurring labels in sorted order (inference needs at least two distinct
    labels).  Writing and re-reading round-trips the matrix exactly.
    """
    if isinstance(path_or_buf, (str, bytes)) or hasattr(path_or_buf, "__fspath__"):
        with open(path_or_buf, "r", encoding="utf-8", newline="") as fh:
            text = fh.read()
    else:
        text = path_or_buf.read()
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if not header or header[0] != "item":
        raise ValueError("malformed ratings CSV: missing 'item' header")
    rows = [row[1:] for row in reader if row]
    if not rows:
        raise ValueError("ratings CSV contains no items")
    if categories is None:
        seen = sorted({x for row in rows for x in row})
        categories = CategorySet(seen)
    return RatingsMatrix.from_labels(categories, rows)
