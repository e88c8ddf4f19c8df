"""Closed-form recovery of the reliability parameter from coincidence moments.

Every estimator here exploits the same algebraic fact: the self-coincidence
excess ``e2[c][c] - e1[c]**2`` equals ``beta**2 * tau[c] * (1 - tau[c])``,
so different kinds of side knowledge (the true-category frequencies, the
a-priori distribution, or neither) lead to different exact formulas.  The
categories with strictly positive excess form the active set that drives
dispatch: empty means reliability zero, a pair needs triple coincidences,
three or more allow both the triple-based and the pairwise-only solutions.

All operations are pure functions over immutable inputs.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .coincidence import CoincidenceStats, theoretical_stats
from .model import AprioriDist, CategorySet, CoderModel, TrueLabeling

__all__ = [
    "EstimateResult",
    "BetaInterval",
    "IndeterminacyRegion",
    "detect_cstar",
    "default_excess_threshold",
    "beta_tau_known",
    "beta_bounds",
    "beta_p_known",
    "beta_tau_eq_p",
    "beta_two_star",
    "beta_triple",
    "beta_pairwise",
    "indeterminacy_region",
    "estimate",
    "equivalent_model_single_category",
    "equivalent_model_two_category",
    "result_to_kv_text",
]


@dataclass(frozen=True)
class EstimateResult:
    """Reliability estimate with whatever side quantities were recovered.

    ``cstar`` records the categories the estimate drew information from.
    ``tau_hat`` and ``p_hat`` are full per-category tuples aligned with
    ``categories`` when recoverable, ``None`` otherwise.
    """

    beta_hat: float
    method: str
    categories: tuple[str, ...]
    cstar: tuple[str, ...] = ()
    tau_hat: Optional[tuple[float, ...]] = None
    p_hat: Optional[tuple[float, ...]] = None
    diagnostics: tuple[str, ...] = ()

    def __post_init__(self):
        if not 0.0 <= self.beta_hat <= 1.0:
            raise ValueError("beta_hat must lie in [0, 1]")
        if self.method not in (
            "tau_known",
            "p_known",
            "tau_eq_p",
            "two_star",
            "triple",
            "pairwise",
            "refined",
        ):
            raise ValueError(f"unknown method tag: {self.method!r}")
        for name, vec in (("tau_hat", self.tau_hat), ("p_hat", self.p_hat)):
            if vec is None:
                continue
            if len(vec) != len(self.categories):
                raise ValueError(f"{name} does not match the category set")
            if any(x < -1e-9 or x > 1 + 1e-9 for x in vec):
                raise ValueError(f"{name} entries must lie in [0, 1]")
            if abs(sum(vec) - 1.0) > 1e-9:
                raise ValueError(f"{name} must sum to 1")
        if not set(self.cstar) <= set(self.categories):
            raise ValueError("cstar must be a subset of the categories")


@dataclass(frozen=True)
class BetaInterval:
    """Two-sided bound on the reliability parameter."""

    lo: float
    hi: float

    def __post_init__(self):
        if not 0.0 <= self.lo <= self.hi <= 1.0:
            raise ValueError("need 0 <= lo <= hi <= 1")

    def width(self) -> float:
        return self.hi - self.lo

    def __contains__(self, beta: float) -> bool:
        return self.lo <= beta <= self.hi


@dataclass(frozen=True)
class IndeterminacyRegion:
    """Alternative reliability values compatible with pairwise moments only.

    ``intervals`` is the continuous admissible region (at most two pieces),
    ``discrete`` lists the ``(n, beta_prime)`` pairs that additionally admit
    an integral true-category count for ``n_items`` items.
    """

    intervals: tuple[tuple[float, float], ...]
    discrete: tuple[tuple[int, float], ...]

    def contains(self, x: float, tol: float = 0.0) -> bool:
        return any(lo - tol <= x <= hi + tol for lo, hi in self.intervals)


def default_excess_threshold(stats: CoincidenceStats) -> float:
    """Threshold separating real self-coincidence excess from noise.

    Exact moments only need protection from float rounding; pooled sample
    moments get a threshold on the standard-error scale of the pooled
    pair statistics, ``2 / sqrt(N * R * (R-1))``.
    """
    if stats.source.kind == "theoretical":
        return 1e-12
    n, r = stats.source.n_items, stats.source.n_raters
    return 2.0 / math.sqrt(n * r * (r - 1))


def detect_cstar(stats: CoincidenceStats, eps: Optional[float] = None) -> tuple[str, ...]:
    """Categories whose self-coincidence exceeds the squared base frequency.

    Returns the labels with ``e2[c][c] - e1[c]**2 > eps`` in category order.
    An empty result is the signature of zero reliability.
    """
    if eps is None:
        eps = default_excess_threshold(stats)
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    excess = stats.excess()
    return tuple(c for c, x in zip(stats.categories, excess) if x > eps)


def _clamp_unit(value: float, diags: list[str], what: str) -> float:
    if value < 0.0 or value > 1.0:
        diags.append(f"{what} {value:.6g} clamped into [0, 1]")
        return min(1.0, max(0.0, value))
    return value


def _sqrt_excess(value: float, diags: list[str], what: str) -> float:
    if value < 0.0:
        diags.append(f"negative {what} treated as zero reliability")
        return 0.0
    return math.sqrt(value)


def _project_simplex(vec: np.ndarray, diags: list[str], what: str) -> tuple[float, ...]:
    w = np.clip(np.asarray(vec, dtype=float), 0.0, None)
    s = float(w.sum())
    if s <= 0.0:
        diags.append(f"{what} degenerate; fell back to uniform")
        w = np.full(len(w), 1.0 / len(w))
    else:
        w = w / s
    if float(np.max(np.abs(w - vec))) > 1e-9:
        diags.append(f"{what} adjusted onto the probability simplex")
    return tuple(float(x) for x in w)


def _check_simplex(vec: Sequence[float], m: int, what: str) -> np.ndarray:
    arr = np.asarray(vec, dtype=float)
    if arr.shape != (m,):
        raise ValueError(f"{what} must have one entry per category")
    if np.any(arr < 0) or np.any(arr > 1) or abs(float(arr.sum()) - 1.0) > 1e-9:
        raise ValueError(f"{what} must be a probability simplex")
    return arr


def _recover_p(
    stats: CoincidenceStats, beta: float, tau: np.ndarray, diags: list[str]
) -> Optional[tuple[float, ...]]:
    """Invert the single-rater frequency relation for the a-priori mass."""
    if beta >= 1.0 - 1e-12:
        diags.append("a-priori distribution unrecoverable at beta = 1")
        return None
    raw = (stats.e1 - beta * tau) / (1.0 - beta)
    return _project_simplex(raw, diags, "p_hat")


def beta_tau_known(stats: CoincidenceStats, tau: Sequence[float]) -> EstimateResult:
    """Exact reliability when the true-category frequencies are known.

    For every category with interior frequency and positive excess,
    ``beta = sqrt(excess / (tau*(1-tau)))``; with several such categories
    the estimates are averaged and their spread reported.  No positive
    excess at all means reliability zero.
    """
    tau_arr = _check_simplex(tau, stats.m, "tau")
    if np.any(tau_arr >= 1.0):
        raise ValueError("degenerate true distribution")
    excess = stats.excess()
    diags: list[str] = []
    qualifying = [
        i for i in range(stats.m) if 0.0 < tau_arr[i] < 1.0 and excess[i] > 0.0
    ]
    labels = stats.categories.labels
    if not qualifying:
        diags.append("no positive self-coincidence excess; reliability 0")
        return EstimateResult(
            beta_hat=0.0,
            method="tau_known",
            categories=labels,
            cstar=(),
            tau_hat=tuple(float(x) for x in tau_arr),
            p_hat=_project_simplex(stats.e1, diags, "p_hat"),
            diagnostics=tuple(diags),
        )
    betas = [
        math.sqrt(excess[i] / (tau_arr[i] * (1.0 - tau_arr[i]))) for i in qualifying
    ]
    if len(betas) > 1:
        diags.append(f"per-category estimate spread {max(betas) - min(betas):.3e}")
    beta = _clamp_unit(sum(betas) / len(betas), diags, "beta_hat")
    return EstimateResult(
        beta_hat=beta,
        method="tau_known",
        categories=labels,
        cstar=tuple(labels[i] for i in qualifying),
        tau_hat=tuple(float(x) for x in tau_arr),
        p_hat=_recover_p(stats, beta, tau_arr, diags),
        diagnostics=tuple(diags),
    )


def beta_bounds(stats: CoincidenceStats, pi0: float, pi1: float) -> BetaInterval:
    """Enclosing interval for the reliability from a-priori mass bounds.

    ``pi0 <= p[c] <= pi1`` for all categories yields
    ``sqrt(max(0, e2 - pi1)/(1 - pi1)) <= beta <= sqrt((e2 - pi0)/(1 - pi0))``
    with ``e2`` the summed self-coincidence.  With ``pi0 = pi1 = 1/m`` both
    ends collapse to the classical uniform-chance S coefficient (as a
    squared relation).
    """
    if not 0.0 <= pi0 <= pi1:
        raise ValueError("need 0 <= pi0 <= pi1")
    if pi1 >= 1.0:
        raise ValueError("upper a-priori bound must be < 1")
    e2sum = float(np.trace(stats.e2))
    lo = math.sqrt(max(0.0, e2sum - pi1) / (1.0 - pi1))
    hi = math.sqrt(max(0.0, e2sum - pi0) / (1.0 - pi0))
    lo, hi = min(lo, 1.0), min(hi, 1.0)
    return BetaInterval(lo=min(lo, hi), hi=hi)


def beta_p_known(stats: CoincidenceStats, p: Sequence[float]) -> EstimateResult:
    """Exact reliability when the a-priori distribution is known.

    Per category with positive a-priori mass the quadratic
    ``(b-1)^2 p(1-p) + (b-1)(p(1-e1) + e1(1-p)) + (e1 - e2) = 0`` has
    exactly one root in [0, 1]; the atomic ``p[c] = 1`` cases degenerate to
    a linear equation (or to reliability zero when ``e1[c] = 1``).
    """
    p_arr = _check_simplex(p, stats.m, "p")
    diags: list[str] = []
    labels = stats.categories.labels
    e1 = stats.e1
    e2d = np.diag(stats.e2)
    betas = []
    used = []
    for i in range(stats.m):
        pc = float(p_arr[i])
        if pc <= 0.0:
            continue
        used.append(i)
        if pc >= 1.0:
            if e1[i] >= 1.0 - 1e-15:
                betas.append(0.0)
            else:
                betas.append((1.0 - 2.0 * e1[i] + e2d[i]) / (1.0 - e1[i]))
        else:
            half_sum = 0.5 * ((1.0 - e1[i]) / (1.0 - pc) + e1[i] / pc)
            disc = half_sum * half_sum - (e1[i] - e2d[i]) / (pc * (1.0 - pc))
            if disc < 0.0:
                diags.append(f"negative discriminant clamped for {labels[i]!r}")
                disc = 0.0
            betas.append(1.0 - half_sum + math.sqrt(disc))
    if len(betas) > 1:
        diags.append(f"per-category estimate spread {max(betas) - min(betas):.3e}")
    beta = _clamp_unit(sum(betas) / len(betas), diags, "beta_hat")
    tau_hat = None
    if beta > 1e-12:
        tau_hat = _project_simplex(
            (e1 - (1.0 - beta) * p_arr) / beta, diags, "tau_hat"
        )
    return EstimateResult(
        beta_hat=beta,
        method="p_known",
        categories=labels,
        cstar=tuple(labels[i] for i in used),
        tau_hat=tau_hat,
        p_hat=tuple(float(x) for x in p_arr),
        diagnostics=tuple(diags),
    )


def beta_tau_eq_p(stats: CoincidenceStats, c: str) -> EstimateResult:
    """Exact reliability when a category's a-priori mass matches its
    true frequency: ``beta = sqrt(excess / (e1*(1-e1)))`` at that category.
    """
    i = stats.index(c)
    e1c = float(stats.e1[i])
    if e1c <= 0.0 or e1c >= 1.0:
        raise ValueError("base-rate category degenerate")
    diags: list[str] = []
    excess = float(stats.e2[i, i]) - e1c * e1c
    beta = _sqrt_excess(excess / (e1c * (1.0 - e1c)), diags, "excess ratio")
    beta = _clamp_unit(beta, diags, "beta_hat")
    return EstimateResult(
        beta_hat=beta,
        method="tau_eq_p",
        categories=stats.categories.labels,
        cstar=(c,),
        diagnostics=tuple(diags),
    )


def beta_two_star(stats: CoincidenceStats, cstar: Sequence[str]) -> EstimateResult:
    """Reliability from one active category's triple coincidences.

    With ``a`` the excess and ``b = (e3 - e1^3)/a - 3*e1`` at an active
    category, ``beta = sqrt(4a + b^2)``; the recovered frequency of that
    category is ``(1 - b/beta)/2`` and its partner takes the complement.
    ``4a + b^2 <= 0`` is only possible at zero reliability.
    """
    if stats.e3 is None:
        raise ValueError("need triple coincidences")
    pair = sorted(stats.index(c) for c in cstar)
    if len(pair) != 2:
        raise ValueError("two-star path needs exactly two categories")
    labels = stats.categories.labels
    diags: list[str] = []
    excess = stats.excess()
    i = max(pair, key=lambda k: excess[k])
    a = float(excess[i])
    if a <= 0.0:
        diags.append("no self-coincidence excess; reliability 0")
        return EstimateResult(
            beta_hat=0.0,
            method="two_star",
            categories=labels,
            cstar=tuple(labels[k] for k in pair),
            diagnostics=tuple(diags),
        )
    e1c = float(stats.e1[i])
    b = (float(stats.e3[i]) - e1c**3) / a - 3.0 * e1c
    val = 4.0 * a + b * b
    if val <= 0.0:
        diags.append("vanishing triple-moment combination; reliability 0")
        return EstimateResult(
            beta_hat=0.0,
            method="two_star",
            categories=labels,
            cstar=tuple(labels[k] for k in pair),
            diagnostics=tuple(diags),
        )
    beta_raw = math.sqrt(val)
    beta = _clamp_unit(beta_raw, diags, "beta_hat")
    tau = np.zeros(stats.m)
    tau_c = 0.5 * (1.0 - b / beta_raw)
    j = pair[0] if pair[1] == i else pair[1]
    tau[i] = tau_c
    tau[j] = 1.0 - tau_c
    tau_hat = _project_simplex(tau, diags, "tau_hat")
    return EstimateResult(
        beta_hat=beta,
        method="two_star",
        categories=labels,
        cstar=tuple(labels[k] for k in pair),
        tau_hat=tau_hat,
        p_hat=_recover_p(stats, beta, np.asarray(tau_hat), diags),
        diagnostics=tuple(diags),
    )


def beta_triple(stats: CoincidenceStats, cstar: Sequence[str]) -> EstimateResult:
    """Reliability from triple coincidences over three or more active
    categories::

        beta = (sum_active (e3-e1^3)/(e2-e1^2) + 3*sum_inactive e1 - 3)
               / (m_active - 2)
    """
    if stats.e3 is None:
        raise ValueError("need triple coincidences")
    idx = sorted(stats.index(c) for c in cstar)
    m_star = len(idx)
    if m_star < 3:
        raise ValueError("use two-star path")
    excess = stats.excess()
    if any(excess[i] <= 0.0 for i in idx):
        raise ValueError("category not in C*")
    diags: list[str] = []
    e1 = stats.e1
    ratios = sum((float(stats.e3[i]) - float(e1[i]) ** 3) / float(excess[i]) for i in idx)
    outside = float(e1.sum()) - sum(float(e1[i]) for i in idx)
    beta = (ratios + 3.0 * outside - 3.0) / (m_star - 2)
    beta = _clamp_unit(beta, diags, "beta_hat")
    labels = stats.categories.labels
    return EstimateResult(
        beta_hat=beta,
        method="triple",
        categories=labels,
        cstar=tuple(labels[i] for i in idx),
        diagnostics=tuple(diags),
    )


def beta_pairwise(stats: CoincidenceStats, cstar: Sequence[str]) -> EstimateResult:
    """Reliability from pairwise coincidences alone (three or more active
    categories required).

    Solves ``lam_i * rho[i][j] = lam_k * rho[k][j]`` with the normalization
    ``sum(lam) = m_active - 1`` by forward substitution against the first
    active category, where ``rho[i][j]`` is the cross excess scaled by the
    self excess.  The recovered frequencies are ``1 - lam``; reliability
    follows from the total excess.  Numerically delicate -- intended as a
    cross-check, not as the primary path.
    """
    idx = sorted(stats.index(c) for c in cstar)
    m_star = len(idx)
    if m_star < 3:
        raise ValueError("use two-star path")
    excess = stats.excess()
    if any(excess[i] <= 0.0 for i in idx):
        raise ValueError("category not in C*")
    diags: list[str] = []
    e1 = stats.e1
    e2 = stats.e2

    def rho(i: int, j: int) -> float:
        return (float(e2[i, j]) - float(e1[i]) * float(e1[j])) / float(excess[i])

    lam = np.ones(m_star)
    for pos in range(1, m_star):
        j = next(k for k in idx if k != idx[0] and k != idx[pos])
        num, den = rho(idx[0], j), rho(idx[pos], j)
        if den == 0.0:
            raise ValueError("inconsistent pairwise stats")
        if abs(den) < 1e-10 * max(1.0, abs(num)):
            diags.append("ill-conditioned pairwise system")
        lam[pos] = num / den
    lam *= (m_star - 1) / lam.sum()
    denom = 1.0 - float(np.sum((1.0 - lam) ** 2))
    if denom <= 0.0:
        raise ValueError("inconsistent pairwise stats")
    total_excess = float(np.sum(excess))
    beta = _clamp_unit(
        _sqrt_excess(total_excess / denom, diags, "total excess"), diags, "beta_hat"
    )
    tau = np.zeros(stats.m)
    for pos, i in enumerate(idx):
        tau[i] = 1.0 - lam[pos]
    tau_hat = _project_simplex(tau, diags, "tau_hat")
    labels = stats.categories.labels
    return EstimateResult(
        beta_hat=beta,
        method="pairwise",
        categories=labels,
        cstar=tuple(labels[i] for i in idx),
        tau_hat=tau_hat,
        p_hat=_recover_p(stats, beta, np.asarray(tau_hat), diags),
        diagnostics=tuple(diags),
    )


def indeterminacy_region(
    beta: float, tau: float, e1_max: float, n_items: int
) -> IndeterminacyRegion:
    """Alternative two-category reliabilities with identical pair moments.

    Given a two-category model's reliability, one true-category frequency,
    and the larger single-rater frequency ``e1_max``, returns the region of
    ``beta'`` values for which some alternative model reproduces every
    single and pairwise moment, plus the discrete ``beta'`` choices whose
    implied true-category count is integral for ``n_items`` items.  Triple
    moments are what rule this ambiguity out.
    """
    if not 0.0 <= beta <= 1.0:
        raise ValueError("beta must lie in [0, 1]")
    if not 0.0 <= tau < 1.0:
        raise ValueError("tau must lie in [0, 1)")
    if not 0.5 <= e1_max <= 1.0:
        raise ValueError("e1_max must lie in [0.5, 1]")
    if n_items < 1:
        raise ValueError("need at least one item")
    v = beta * beta * tau * (1.0 - tau)
    lo = 2.0 * beta * math.sqrt(tau * (1.0 - tau))
    hi = min(1.0, e1_max + v / e1_max)
    if e1_max >= 1.0:
        allowed = [(0.0, 1.0)]
    else:
        allowed = [
            (0.0, 2.0 * (1.0 - e1_max)),
            (1.0 - e1_max + v / (1.0 - e1_max), 1.0),
        ]
    intervals = []
    for a_lo, a_hi in allowed:
        lo2, hi2 = max(lo, a_lo), min(hi, a_hi)
        if lo2 <= hi2:
            intervals.append((lo2, hi2))
    # Merge touching pieces so callers see at most the true disjoint parts.
    merged: list[tuple[float, float]] = []
    for piece in sorted(intervals):
        if merged and piece[0] <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], piece[1]))
        else:
            merged.append(piece)
    region = IndeterminacyRegion(intervals=tuple(merged), discrete=())
    discrete = []
    for n in range(1, n_items):
        if (n + n_items) % 2 != 0:
            continue
        denom = 1.0 - (n / n_items) ** 2
        bp = math.sqrt(4.0 * v / denom)
        if region.contains(bp, tol=1e-12):
            discrete.append((n, bp))
    return IndeterminacyRegion(intervals=tuple(merged), discrete=tuple(discrete))


def estimate(stats: CoincidenceStats, eps: Optional[float] = None) -> EstimateResult:
    """Dispatch to the applicable closed-form estimator.

    The active-category count decides the path: none means reliability
    zero; one is treated as noise and padded with the next-largest-excess
    category; two uses the triple-coincidence pair formula; three or more
    use the triple formula with the pairwise solution recorded as a
    cross-check (or, without triple data, the pairwise solution itself).
    """
    cstar = detect_cstar(stats, eps)
    labels = stats.categories.labels
    diags: list[str] = []
    if len(cstar) == 0:
        return EstimateResult(
            beta_hat=0.0,
            method="triple",
            categories=labels,
            cstar=(),
            diagnostics=("no excess",),
        )
    if len(cstar) == 1:
        diags.append("noise-dominated C*")
        excess = stats.excess()
        have = stats.index(cstar[0])
        rest = sorted(
            (i for i in range(stats.m) if i != have),
            key=lambda i: -excess[i],
        )
        cstar = tuple(
            labels[i] for i in sorted((have, rest[0]))
        )
    if len(cstar) == 2:
        if stats.e3 is None:
            raise ValueError("two categories need three raters")
        result = beta_two_star(stats, cstar)
    elif stats.e3 is not None:
        result = beta_triple(stats, cstar)
        try:
            cross = beta_pairwise(stats, cstar)
            diags.append(f"pairwise cross-check beta={cross.beta_hat:.6f}")
        except ValueError as exc:
            diags.append(f"pairwise cross-check failed: {exc}")
    else:
        diags.append("no triple coincidences; pairwise moment solution")
        result = beta_pairwise(stats, cstar)
    if diags:
        result = dataclasses.replace(
            result, diagnostics=result.diagnostics + tuple(diags)
        )
    return result


def equivalent_model_single_category(model: CoderModel, beta_prime: float) -> CoderModel:
    """Alternative model with identical cell probabilities when every item
    shares one true category.

    For ``beta' <= beta + (1-beta)*p[c0]`` the a-priori mass can be
    reshuffled to make the mixture distribution identical, which is exactly
    why reliability is unidentifiable in that degenerate situation.
    """
    tau = model.labeling.tau
    c0 = int(np.argmax(tau))
    if tau[c0] < 1.0:
        raise ValueError("model is not single-category degenerate")
    beta = model.beta
    p = model.apriori.p
    limit = beta + (1.0 - beta) * float(p[c0])
    if not 0.0 <= beta_prime <= limit + 1e-12:
        raise ValueError("beta_prime outside the admissible range")
    if beta_prime >= 1.0:
        p_new = p.copy()
    else:
        scale = (1.0 - beta) / (1.0 - beta_prime)
        p_new = scale * p
        p_new[c0] = (beta - beta_prime + (1.0 - beta) * float(p[c0])) / (
            1.0 - beta_prime
        )
    return CoderModel(
        beta=float(beta_prime),
        labeling=model.labeling,
        apriori=AprioriDist(model.categories, p_new / p_new.sum()),
    )


def equivalent_model_two_category(model: CoderModel, n: int) -> CoderModel:
    """Alternative two-category model with identical single and pairwise
    moments, for an admissible discrete index ``n`` (``n + N`` even).

    The alternative reliability is ``sqrt(4*beta^2*tau*(1-tau)/(1-n^2/N^2))``
    with implied true-category count ``(n + N)/2`` for the dominant
    category; the a-priori mass is then fixed by the single-rater frequency.
    """
    if model.categories.m != 2:
        raise ValueError("construction needs exactly two categories")
    n_items = model.n_items
    if not 1 <= n < n_items:
        raise ValueError("need 1 <= n < n_items")
    if (n + n_items) % 2 != 0:
        raise ValueError("n + n_items must be even")
    tau = model.labeling.tau
    if np.any(tau >= 1.0):
        raise ValueError("true distribution must not be degenerate")
    stats = theoretical_stats(model)
    c0 = int(np.argmax(stats.e1))
    e1 = float(stats.e1[c0])
    t0 = float(tau[c0])
    v = model.beta**2 * t0 * (1.0 - t0)
    beta_prime = math.sqrt(4.0 * v / (1.0 - (n / n_items) ** 2))
    region = indeterminacy_region(model.beta, t0, e1, n_items)
    if not region.contains(beta_prime, tol=1e-12):
        raise ValueError("beta_prime outside the indeterminacy region")
    if beta_prime >= 1.0:
        raise ValueError("degenerate beta_prime = 1 construction not supported")
    tau0_new = (n + n_items) / (2 * n_items)
    p0_new = (e1 - beta_prime * tau0_new) / (1.0 - beta_prime)
    labels = model.categories.labels
    other = 1 - c0
    count0 = (n + n_items) // 2
    gamma = [labels[c0]] * count0 + [labels[other]] * (n_items - count0)
    p_new = np.zeros(2)
    p_new[c0] = p0_new
    p_new[other] = 1.0 - p0_new
    return CoderModel(
        beta=float(beta_prime),
        labeling=TrueLabeling(model.categories, gamma),
        apriori=AprioriDist(model.categories, p_new),
    )


def result_to_kv_text(result: EstimateResult) -> str:
    """Flat ``key=value`` record, one entry per line."""
    lines = [
        f"beta_hat={format(result.beta_hat, '.17g')}",
        f"method={result.method}",
        "cstar=" + ",".join(result.cstar),
    ]
    for name, vec in (("tau_hat", result.tau_hat), ("p_hat", result.p_hat)):
        if vec is not None:
            for c, x in zip(result.categories, vec):
                lines.append(f"{name}_{c}={format(x, '.17g')}")
    for d in result.diagnostics:
        lines.append(f"diagnostic={d}")
    return "\n".join(lines) + "\n"
