"""Pure-Python twin of the compiled fitting kernels.

Selected at import time when the Cython extension is unavailable (or when
``CODEREL_BACKEND=python`` forces it).  The arithmetic mirrors the compiled
code operation for operation -- same accumulation order, same simplex
moves -- so both backends walk the same optimization path up to floating
rounding.

Hot-path conventions shared by both backends:

* parameters travel as an unconstrained vector ``theta`` of length
  ``1 + 2m``: a logit for the reliability followed by two blocks of ``m``
  softmax scores for the true-category and a-priori simplexes;
* ``e2`` is passed as a flat row-major ``m*m`` buffer;
* the simplex search uses reflection 1.0, expansion 2.0, contraction 0.5,
  shrink 0.5, and stops when the worst-to-best objective spread falls
  below ``tol``.
"""

from __future__ import annotations

import math

BACKEND_NAME = "python"

_INIT_STEP = 0.25


def transform(theta, m):
    """Map the unconstrained vector to (beta, tau, p)."""
    beta = 1.0 / (1.0 + math.exp(-theta[0]))
    tau = _softmax(theta, 1, m)
    p = _softmax(theta, 1 + m, m)
    return beta, tau, p


def _softmax(theta, offset, m):
    mx = theta[offset]
    for i in range(1, m):
        if theta[offset + i] > mx:
            mx = theta[offset + i]
    w = [0.0] * m
    s = 0.0
    for i in range(m):
        w[i] = math.exp(theta[offset + i] - mx)
        s += w[i]
    for i in range(m):
        w[i] /= s
    return w


def objective(beta, tau, p, e1, e2_flat, e3, m, use_e3, full_pairs):
    """Sum of squared moment residuals at explicit (beta, tau, p)."""
    q = 1.0 - beta
    obj = 0.0
    for c in range(m):
        d = beta * tau[c] + q * p[c] - e1[c]
        obj += d * d
    if full_pairs:
        for c1 in range(m):
            for c2 in range(m):
                mod = beta * q * (tau[c1] * p[c2] + tau[c2] * p[c1]) + q * q * p[c1] * p[c2]
                if c1 == c2:
                    mod += beta * beta * tau[c1]
                d = mod - e2_flat[c1 * m + c2]
                obj += d * d
    else:
        for c in range(m):
            mod = beta * beta * tau[c] + 2.0 * beta * q * tau[c] * p[c] + q * q * p[c] * p[c]
            d = mod - e2_flat[c * m + c]
            obj += d * d
    if use_e3:
        b2 = beta * beta
        q2 = q * q
        for c in range(m):
            mod = (
                beta * b2 * tau[c]
                + 3.0 * b2 * q * tau[c] * p[c]
                + 3.0 * beta * q2 * tau[c] * p[c] * p[c]
                + q * q2 * p[c] * p[c] * p[c]
            )
            d = mod - e3[c]
            obj += d * d
    return obj


def objective_theta(theta, e1, e2_flat, e3, m, use_e3, full_pairs):
    beta, tau, p = transform(theta, m)
    return objective(beta, tau, p, e1, e2_flat, e3, m, use_e3, full_pairs)


def minimize(theta0, e1, e2_flat, e3, m, use_e3, full_pairs, max_iters, tol, step=_INIT_STEP):
    """Downhill-simplex descent from ``theta0``.

    Returns ``(theta_best, f_best, iterations, converged)``.  Deterministic:
    vertex ordering is a stable sort on objective values, so equal inputs
    replay the identical search path.
    """
    n = len(theta0)
    verts = [list(theta0)]
    for i in range(n):
        v = list(theta0)
        v[i] += step
        verts.append(v)
    fvals = [objective_theta(v, e1, e2_flat, e3, m, use_e3, full_pairs) for v in verts]

    def f(x):
        return objective_theta(x, e1, e2_flat, e3, m, use_e3, full_pairs)

    iters = 0
    converged = False
    while True:
        order = sorted(range(n + 1), key=lambda k: fvals[k])
        verts = [verts[k] for k in order]
        fvals = [fvals[k] for k in order]
        if fvals[n] - fvals[0] <= tol:
            converged = True
            break
        if iters >= max_iters:
            break
        iters += 1

        centroid = [0.0] * n
        for k in range(n):
            for j in range(n):
                centroid[j] += verts[k][j]
        for j in range(n):
            centroid[j] /= n

        worst = verts[n]
        xr = [centroid[j] + (centroid[j] - worst[j]) for j in range(n)]
        fr = f(xr)
        if fr < fvals[0]:
            xe = [centroid[j] + 2.0 * (centroid[j] - worst[j]) for j in range(n)]
            fe = f(xe)
            if fe < fr:
                verts[n], fvals[n] = xe, fe
            else:
                verts[n], fvals[n] = xr, fr
        elif fr < fvals[n - 1]:
            verts[n], fvals[n] = xr, fr
        else:
            shrink = False
            if fr < fvals[n]:
                xc = [centroid[j] + 0.5 * (xr[j] - centroid[j]) for j in range(n)]
                fc = f(xc)
                if fc <= fr:
                    verts[n], fvals[n] = xc, fc
                else:
                    shrink = True
            else:
                xc = [centroid[j] - 0.5 * (centroid[j] - worst[j]) for j in range(n)]
                fc = f(xc)
                if fc < fvals[n]:
                    verts[n], fvals[n] = xc, fc
                else:
                    shrink = True
            if shrink:
                best = verts[0]
                for k in range(1, n + 1):
                    for j in range(n):
                        verts[k][j] = best[j] + 0.5 * (verts[k][j] - best[j])
                    fvals[k] = f(verts[k])
    return list(verts[0]), fvals[0], iters, converged
