"""Constrained least-squares refinement of (beta, tau, p).

Closed-form moment estimates are exact on expectation values but noisy on
observed frequencies, especially where moment differences are small.  This
module polishes them by minimizing the summed squared residuals of all
single, pairwise, and (when available) triple coincidence moments over the
full parameter space.

The constraints are folded away by reparameterization: the reliability
runs through a logistic transform and each simplex through a softmax over
unconstrained scores.  Minimization is a derivative-free downhill-simplex
descent (see the kernel backends for the exact moves) from the closed-form
start, repeated from a moment-based alternative start and from
deterministically jittered copies, keeping the lowest objective; a final
small-step descent from the winner tightens convergence.  Everything is a
pure function of its arguments, so refinement is reproducible bit for bit.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .backend import kernels
from .coincidence import CoincidenceStats
from .estimators import EstimateResult, beta_bounds, detect_cstar
from .seeding import mix64, unit_uniforms

__all__ = ["RefineOptions", "lsq_objective", "refine"]

_JITTER_SCALE = 0.75
_JITTER_TAG = 0x5245464E  # "REFN"
_PAIR_MODES = ("full", "diagonal")


@dataclass(frozen=True)
class RefineOptions:
    """Knobs of the refinement loop.

    ``pair_terms`` selects how the pairwise residual block is read:
    ``"full"`` matches every cross pair ``(c1, c2)`` against the full
    mixture cross formula (the default and the recommended reading);
    ``"diagonal"`` matches only the self-pair residuals.
    """

    max_iters: int = 2000
    tol: float = 1e-12
    restarts: int = 3
    pair_terms: str = "full"

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if not self.tol > 0.0:
            raise ValueError("tol must be positive")
        if self.restarts < 0:
            raise ValueError("restarts must be nonnegative")
        if self.pair_terms not in _PAIR_MODES:
            raise ValueError(f"pair_terms must be one of {_PAIR_MODES}")


def _stats_buffers(stats: CoincidenceStats):
    e1 = [float(x) for x in stats.e1]
    e2 = [float(x) for x in stats.e2.ravel()]
    e3 = None if stats.e3 is None else [float(x) for x in stats.e3]
    return e1, e2, e3


def lsq_objective(
    beta: float,
    tau: Sequence[float],
    p: Sequence[float],
    stats: CoincidenceStats,
    pair_terms: str = "full",
) -> float:
    """Summed squared residuals of the moment equations at (beta, tau, p).

    Includes the triple-coincidence block exactly when the statistics carry
    one.  Zero if and only if the parameters reproduce every moment.
    """
    if not 0.0 <= beta <= 1.0:
        raise ValueError("beta must lie in [0, 1]")
    if pair_terms not in _PAIR_MODES:
        raise ValueError(f"pair_terms must be one of {_PAIR_MODES}")
    m = stats.m
    tau = np.asarray(tau, dtype=float)
    p = np.asarray(p, dtype=float)
    for name, vec in (("tau", tau), ("p", p)):
        if vec.shape != (m,) or np.any(vec < -1e-9) or abs(vec.sum() - 1.0) > 1e-9:
            raise ValueError(f"{name} must be a probability simplex")
    e1, e2, e3 = _stats_buffers(stats)
    return float(
        kernels.objective(
            float(beta),
            [float(x) for x in tau],
            [float(x) for x in p],
            e1,
            e2,
            e3,
            m,
            e3 is not None,
            pair_terms == "full",
        )
    )


def _default_tau(stats: CoincidenceStats, beta: float) -> np.ndarray:
    """Start frequencies from the excess identity, square-rooted and scaled
    back by the reliability, then renormalized."""
    z = np.sqrt(np.clip(stats.excess(), 0.0, None))
    if beta > 1e-9:
        z = z / beta
    s = z.sum()
    if s <= 0.0:
        return np.full(stats.m, 1.0 / stats.m)
    return z / s


def _default_p(stats: CoincidenceStats, beta: float, tau: np.ndarray) -> np.ndarray:
    """Start a-priori mass from inverting the single-rater frequencies."""
    if beta >= 1.0 - 1e-9:
        raw = np.asarray(stats.e1, dtype=float)
    else:
        raw = (stats.e1 - beta * tau) / (1.0 - beta)
    raw = np.clip(raw, 0.0, None)
    s = raw.sum()
    if s <= 0.0:
        return np.full(stats.m, 1.0 / stats.m)
    return raw / s


def _theta_from(beta: float, tau: np.ndarray, p: np.ndarray) -> list[float]:
    b = min(1.0 - 1e-3, max(1e-3, beta))
    theta = [math.log(b / (1.0 - b))]
    theta += [math.log(max(float(x), 1e-9)) for x in tau]
    theta += [math.log(max(float(x), 1e-9)) for x in p]
    return theta


def refine(
    stats: CoincidenceStats,
    start: EstimateResult,
    opts: Optional[RefineOptions] = None,
) -> EstimateResult:
    """Polish an estimate by least-squares fitting of all moments.

    The returned objective value never exceeds the objective at the start
    parameters; when no descent run improves on the start, the start values
    come back unchanged under the ``refined`` tag.
    """
    opts = opts or RefineOptions()
    m = stats.m
    e1, e2, e3 = _stats_buffers(stats)
    use_e3 = e3 is not None
    full_pairs = opts.pair_terms == "full"
    diags: list[str] = []

    if not use_e3 and len(detect_cstar(stats)) == 2:
        diags.append("beta not identifiable for m*=2")

    beta0 = float(start.beta_hat)
    tau0 = (
        np.asarray(start.tau_hat, dtype=float)
        if start.tau_hat is not None
        else _default_tau(stats, beta0)
    )
    p0 = (
        np.asarray(start.p_hat, dtype=float)
        if start.p_hat is not None
        else _default_p(stats, beta0, tau0)
    )

    def result_from(beta, tau, p, extra):
        return EstimateResult(
            beta_hat=float(beta),
            method="refined",
            categories=stats.categories.labels,
            cstar=start.cstar,
            tau_hat=tuple(float(x) for x in tau),
            p_hat=tuple(float(x) for x in p),
            diagnostics=tuple(diags) + tuple(extra),
        )

    f_start = kernels.objective(
        beta0,
        [float(x) for x in tau0],
        [float(x) for x in p0],
        e1,
        e2,
        e3,
        m,
        use_e3,
        full_pairs,
    )
    if f_start <= opts.tol:
        return result_from(
            beta0, tau0, p0, (f"start already optimal (objective {f_start:.3e})",)
        )

    centers = [_theta_from(beta0, tau0, p0)]
    if opts.restarts >= 1:
        # Moment-based alternative start: uniform-chance reliability bound
        # collapsed at pi0 = pi1 = 1/m, with both simplexes started at the
        # observed single-rater frequencies.
        beta_m = beta_bounds(stats, 1.0 / m, 1.0 / m).hi
        e1_simplex = np.clip(np.asarray(stats.e1, dtype=float), 1e-9, None)
        e1_simplex = e1_simplex / e1_simplex.sum()
        centers.append(_theta_from(beta_m, e1_simplex, e1_simplex))
    base = centers[0]
    for r in range(2, opts.restarts + 1):
        noise = unit_uniforms(mix64(_JITTER_TAG, r), len(base))
        centers.append(
            [x + _JITTER_SCALE * (2.0 * u - 1.0) for x, u in zip(base, noise)]
        )

    runs = []
    for idx, theta_c in enumerate(centers):
        theta, f, iters, converged = kernels.minimize(
            theta_c, e1, e2, e3, m, use_e3, full_pairs, opts.max_iters, opts.tol
        )
        runs.append((f, idx, theta, iters, converged))
    f_best, best_idx, theta_best, iters_best, converged_best = min(
        runs, key=lambda t: (t[0], t[1])
    )
    total_iters = sum(r[3] for r in runs)

    # Scale-reduction pass from the winner tightens the final vertex; the
    # tolerance drops with the step so the polished point sits well inside
    # the tol-wide basin found above.
    theta_p, f_p, iters_p, converged_p = kernels.minimize(
        theta_best,
        e1,
        e2,
        e3,
        m,
        use_e3,
        full_pairs,
        opts.max_iters,
        max(opts.tol * 1e-4, 1e-300),
        0.01,
    )
    total_iters += iters_p
    if f_p <= f_best:
        theta_best, f_best, converged_best = theta_p, f_p, converged_p

    if f_best > f_start:
        return result_from(
            beta0, tau0, p0, ("no improvement over start; start returned",)
        )

    beta, tau, p = kernels.transform(theta_best, m)
    extra = [
        f"objective {f_best:.6e} after {total_iters} iterations "
        f"({len(runs)} starts, best #{best_idx})"
    ]
    if not converged_best:
        extra.append("max iterations")
    return result_from(beta, tau, p, extra)
