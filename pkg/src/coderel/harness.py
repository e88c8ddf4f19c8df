"""Monte-Carlo accuracy studies of the estimation pipeline.

A sweep fixes a base model, varies one axis (reliability, dominant true
frequency, a-priori distribution, rater count, or item count), and for each
axis value replays many simulated experiments: sample ratings, pool the
coincidence moments, run the closed-form dispatch, refine.  The absolute
estimation errors are condensed into inverse-empirical-CDF quantiles.

Replication ``r`` of sweep point ``i`` always draws its sampling seed as
``mix64(master_seed, i, r)``, so reports are reproducible regardless of
worker count or scheduling, and replications can run in parallel processes
without any shared state.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .baselines import coefficients
from .coincidence import empirical_stats
from .estimators import estimate
from .model import AprioriDist, CategorySet, CoderModel, TrueLabeling, sample_ratings
from .refine import RefineOptions, refine
from .seeding import mix64

__all__ = [
    "ModelSpec",
    "SweepConfig",
    "QuantileRow",
    "QuantileReport",
    "apportion_counts",
    "run_replications",
    "quantiles",
    "sweep",
    "write_report_csv",
]

DEFAULT_QUANTILE_LEVELS = (0.5, 0.8, 0.9, 0.95, 0.98, 1.0)
SWEEP_AXES = ("beta", "tau", "p", "R", "N")


def apportion_counts(n_items: int, tau: Sequence[float]) -> list[int]:
    """Integer per-category counts closest to ``n_items * tau``.

    Largest-remainder rounding with ties broken by category position, so a
    sweep point whose frequencies are not exact count ratios still yields a
    well-defined blocked labeling.
    """
    raw = [t * n_items for t in tau]
    counts = [int(math.floor(x)) for x in raw]
    short = n_items - sum(counts)
    remainders = sorted(
        range(len(tau)), key=lambda i: (-(raw[i] - counts[i]), i)
    )
    for i in remainders[:short]:
        counts[i] += 1
    return counts


@dataclass(frozen=True)
class ModelSpec:
    """Plain-value description of a coder model (JSON-friendly)."""

    labels: tuple[str, ...]
    beta: float
    tau: tuple[float, ...]
    p: tuple[float, ...]
    n_items: int

    def __post_init__(self):
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError("beta must lie in [0, 1]")
        if self.n_items < 1:
            raise ValueError("need at least one item")
        for name, vec in (("tau", self.tau), ("p", self.p)):
            if len(vec) != len(self.labels):
                raise ValueError(f"{name} must have one entry per category")
            if any(x < 0 or x > 1 for x in vec) or abs(sum(vec) - 1.0) > 1e-9:
                raise ValueError(f"{name} must be a probability simplex")

    def resolve(self) -> CoderModel:
        """Instantiate with a blocked labeling (frequencies apportioned to
        integer counts when needed)."""
        cats = CategorySet(self.labels)
        counts = apportion_counts(self.n_items, self.tau)
        gamma = [c for c, k in zip(self.labels, counts) for _ in range(k)]
        return CoderModel(
            beta=self.beta,
            labeling=TrueLabeling(cats, gamma),
            apriori=AprioriDist(cats, self.p),
        )


@dataclass(frozen=True)
class SweepConfig:
    """Complete design of one accuracy study."""

    base: ModelSpec
    n_raters: int
    replications: int
    master_seed: int
    sweep_axis: str
    sweep_values: tuple
    quantile_levels: tuple[float, ...] = DEFAULT_QUANTILE_LEVELS
    include_baselines: bool = False
    refine_opts: RefineOptions = field(default_factory=RefineOptions)
    eps: Optional[float] = None

    def __post_init__(self):
        if self.n_raters < 2:
            raise ValueError("need at least two raters")
        if self.replications < 1:
            raise ValueError("need at least one replication")
        if self.sweep_axis not in SWEEP_AXES:
            raise ValueError(f"sweep_axis must be one of {SWEEP_AXES}")
        if not self.sweep_values:
            raise ValueError("sweep_values must not be empty")
        if not all(0.0 < q <= 1.0 for q in self.quantile_levels):
            raise ValueError("quantile levels must lie in (0, 1]")
        if tuple(sorted(self.quantile_levels)) != tuple(self.quantile_levels):
            raise ValueError("quantile levels must be increasing")
        for value in self.sweep_values:
            self.resolve_point(value)  # validates

    def resolve_point(self, value) -> tuple[ModelSpec, int]:
        """Model spec and rater count at one axis value.

        The ``tau`` axis (three categories only) places the axis value on
        the first category as the maximum frequency and splits the rest
        (2/3, 1/3) over the other two, capped so no entry exceeds the
        maximum; at value 1/3 this degenerates to the uniform simplex.
        """
        base = self.base
        if self.sweep_axis == "beta":
            v = float(value)
            return ModelSpec(base.labels, v, base.tau, base.p, base.n_items), self.n_raters
        if self.sweep_axis == "tau":
            if len(base.labels) != 3:
                raise ValueError("tau sweep needs exactly three categories")
            t = float(value)
            if not 1.0 / 3.0 <= t < 1.0:
                raise ValueError("tau sweep values must lie in [1/3, 1)")
            second = min(2.0 * (1.0 - t) / 3.0, t)
            tau = (t, second, 1.0 - t - second)
            return ModelSpec(base.labels, base.beta, tau, base.p, base.n_items), self.n_raters
        if self.sweep_axis == "p":
            p = tuple(float(x) for x in value)
            return ModelSpec(base.labels, base.beta, base.tau, p, base.n_items), self.n_raters
        if self.sweep_axis == "R":
            r = int(value)
            if r < 2:
                raise ValueError("rater counts must be at least 2")
            return base, r
        if self.sweep_axis == "N":
            n = int(value)
            spec = ModelSpec(base.labels, base.beta, base.tau, base.p, n)
            return spec, self.n_raters
        raise ValueError(f"sweep_axis must be one of {SWEEP_AXES}")


@dataclass(frozen=True)
class QuantileRow:
    sweep_value: object
    n_success: int
    n_fail: int
    quantiles: tuple[tuple[float, float], ...]
    baselines: Optional[tuple[float, float, float]] = None
    flagged: bool = False


@dataclass(frozen=True)
class QuantileReport:
    axis: str
    levels: tuple[float, ...]
    rows: tuple[QuantileRow, ...]


def _one_replication(args):
    """Worker body: one simulated experiment end to end."""
    (spec, n_raters, seed, opts, eps, want_baselines) = args
    model = spec.resolve()
    ratings = sample_ratings(model, n_raters, seed)
    coeffs = None
    if want_baselines:
        rep = coefficients(ratings)
        coeffs = (rep.s_value, rep.cohen_kappa_mean, rep.fleiss_pi)
    stats = empirical_stats(ratings)
    try:
        start = estimate(stats, eps)
        result = refine(stats, start, opts)
    except ValueError as exc:
        return None, coeffs, str(exc)
    return abs(result.beta_hat - model.beta), coeffs, None


def run_replications(
    spec: ModelSpec,
    n_raters: int,
    replications: int,
    master_seed: int,
    sweep_index: int = 0,
    opts: Optional[RefineOptions] = None,
    eps: Optional[float] = None,
    include_baselines: bool = False,
    workers: int = 1,
) -> tuple[list[float], int, Optional[tuple[float, float, float]]]:
    """Absolute estimation errors over ``replications`` fresh experiments.

    Returns ``(errors, n_failures, baseline_means)``.  Failed estimations
    are counted, never silently dropped.  The result is identical for any
    worker count because each replication is a pure function of its
    derived seed and aggregation runs in replication order.
    """
    opts = opts or RefineOptions()
    tasks = [
        (spec, n_raters, mix64(master_seed, sweep_index, r), opts, eps, include_baselines)
        for r in range(replications)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_one_replication, tasks, chunksize=16))
    else:
        outcomes = [_one_replication(t) for t in tasks]
    errors = [err for err, _, _ in outcomes if err is not None]
    failures = sum(1 for err, _, _ in outcomes if err is None)
    baseline_means = None
    if include_baselines:
        triples = [c for _, c, _ in outcomes if c is not None]
        if triples:
            arr = np.asarray(triples)
            baseline_means = tuple(float(x) for x in arr.mean(axis=0))
    return errors, failures, baseline_means


def quantiles(errors: Sequence[float], levels: Sequence[float]) -> tuple[tuple[float, float], ...]:
    """Inverse empirical distribution function at the given levels.

    Level ``q`` maps to the ``ceil(q*n)``-th smallest error, so ``q = 1``
    is the maximum.
    """
    if len(errors) == 0:
        raise ValueError("no successful replications")
    ordered = sorted(errors)
    n = len(ordered)
    out = []
    for q in levels:
        if not 0.0 < q <= 1.0:
            raise ValueError("quantile levels must lie in (0, 1]")
        # Tolerance keeps q*n at intended integers (0.9 * 1000 -> 900).
        rank = math.ceil(q * n - 1e-9)
        out.append((float(q), ordered[max(rank, 1) - 1]))
    return tuple(out)


def sweep(config: SweepConfig, workers: int = 1) -> QuantileReport:
    """One quantile row per sweep value; deterministic given the config."""
    rows = []
    for index, value in enumerate(config.sweep_values):
        spec, n_raters = config.resolve_point(value)
        errors, failures, baselines = run_replications(
            spec,
            n_raters,
            config.replications,
            config.master_seed,
            sweep_index=index,
            opts=config.refine_opts,
            eps=config.eps,
            include_baselines=config.include_baselines,
            workers=workers,
        )
        rows.append(
            QuantileRow(
                sweep_value=value,
                n_success=len(errors),
                n_fail=failures,
                quantiles=quantiles(errors, config.quantile_levels),
                baselines=baselines,
                flagged=failures > 0.01 * config.replications,
            )
        )
    return QuantileReport(
        axis=config.sweep_axis,
        levels=tuple(config.quantile_levels),
        rows=tuple(rows),
    )


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _fmt_value(value) -> str:
    if isinstance(value, (tuple, list)):
        return ";".join(_fmt(v) for v in value)
    if isinstance(value, int):
        return str(value)
    return _fmt(value)


def write_report_csv(report: QuantileReport, path_or_buf) -> None:
    """``sweep_value,n_success,n_fail,q50,...[,s_value,kappa,pi]`` rows."""
    has_baselines = any(row.baselines is not None for row in report.rows)

    def _write(fh):
        cols = ["sweep_value", "n_success", "n_fail"]
        cols += [f"q{format(q * 100, 'g')}" for q in report.levels]
        if has_baselines:
            cols += ["s_value", "kappa", "pi"]
        fh.write(",".join(cols) + "\n")
        for row in report.rows:
            cells = [_fmt_value(row.sweep_value), str(row.n_success), str(row.n_fail)]
            cells += [_fmt(v) for _, v in row.quantiles]
            if has_baselines:
                if row.baselines is None:
                    cells += ["", "", ""]
                else:
                    cells += [_fmt(v) for v in row.baselines]
            fh.write(",".join(cells) + "\n")

    if isinstance(path_or_buf, (str, bytes)) or hasattr(path_or_buf, "__fspath__"):
        with open(path_or_buf, "w", encoding="utf-8", newline="") as fh:
            _write(fh)
    else:
        _write(path_or_buf)
