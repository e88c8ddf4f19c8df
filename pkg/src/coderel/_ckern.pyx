# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled fitting kernels.

Twin of ``_pykern`` with the identical arithmetic -- same residual
accumulation order, same simplex moves, same stable vertex ordering -- so
the two backends follow the same search path.  See ``_pykern`` for the
contract documentation.
"""

from libc.math cimport exp
from libc.stdlib cimport free, malloc

BACKEND_NAME = "compiled"


cdef void _softmax_c(const double* theta, int offset, int m, double* out) noexcept nogil:
    cdef int i
    cdef double mx = theta[offset]
    cdef double s = 0.0
    for i in range(1, m):
        if theta[offset + i] > mx:
            mx = theta[offset + i]
    for i in range(m):
        out[i] = exp(theta[offset + i] - mx)
        s += out[i]
    for i in range(m):
        out[i] /= s


cdef double _objective_c(
    double beta,
    const double* tau,
    const double* p,
    const double* e1,
    const double* e2_flat,
    const double* e3,
    int m,
    bint use_e3,
    bint full_pairs,
) noexcept nogil:
    cdef double q = 1.0 - beta
    cdef double obj = 0.0
    cdef double d, mod, b2, q2
    cdef int c, c1, c2
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


cdef double _objective_theta_c(
    const double* theta,
    const double* e1,
    const double* e2_flat,
    const double* e3,
    int m,
    bint use_e3,
    bint full_pairs,
    double* tau_buf,
    double* p_buf,
) noexcept nogil:
    cdef double beta = 1.0 / (1.0 + exp(-theta[0]))
    _softmax_c(theta, 1, m, tau_buf)
    _softmax_c(theta, 1 + m, m, p_buf)
    return _objective_c(beta, tau_buf, p_buf, e1, e2_flat, e3, m, use_e3, full_pairs)


cdef int _copy_seq(object seq, double* buf, int k) except -1:
    cdef int i
    for i in range(k):
        buf[i] = seq[i]
    return 0


def transform(theta, int m):
    """Map the unconstrained vector to (beta, tau, p)."""
    cdef double* buf = <double*> malloc((1 + 2 * m) * sizeof(double))
    cdef double* tau = <double*> malloc(m * sizeof(double))
    cdef double* p = <double*> malloc(m * sizeof(double))
    if buf == NULL or tau == NULL or p == NULL:
        free(buf); free(tau); free(p)
        raise MemoryError()
    try:
        _copy_seq(theta, buf, 1 + 2 * m)
        beta = 1.0 / (1.0 + exp(-buf[0]))
        _softmax_c(buf, 1, m, tau)
        _softmax_c(buf, 1 + m, m, p)
        return beta, [tau[i] for i in range(m)], [p[i] for i in range(m)]
    finally:
        free(buf); free(tau); free(p)


def objective(double beta, tau, p, e1, e2_flat, e3, int m, bint use_e3, bint full_pairs):
    """Sum of squared moment residuals at explicit (beta, tau, p)."""
    cdef double* buf = <double*> malloc(m * (4 + m) * sizeof(double))
    if buf == NULL:
        raise MemoryError()
    cdef double* t_ = buf
    cdef double* p_ = buf + m
    cdef double* e1_ = buf + 2 * m
    cdef double* e3_ = buf + 3 * m
    cdef double* e2_ = buf + 4 * m
    try:
        _copy_seq(tau, t_, m)
        _copy_seq(p, p_, m)
        _copy_seq(e1, e1_, m)
        _copy_seq(e2_flat, e2_, m * m)
        if use_e3:
            _copy_seq(e3, e3_, m)
        return _objective_c(beta, t_, p_, e1_, e2_, e3_, m, use_e3, full_pairs)
    finally:
        free(buf)


def objective_theta(theta, e1, e2_flat, e3, int m, bint use_e3, bint full_pairs):
    beta, tau, p = transform(theta, m)
    return objective(beta, tau, p, e1, e2_flat, e3, m, use_e3, full_pairs)


def minimize(
    theta0,
    e1,
    e2_flat,
    e3,
    int m,
    bint use_e3,
    bint full_pairs,
    int max_iters,
    double tol,
    double step=0.25,
):
    """Downhill-simplex descent from ``theta0``; see the pure twin."""
    cdef int n = len(theta0)
    cdef int nv = n + 1
    cdef int i, j, k, iters
    cdef bint converged = False
    cdef double fr, fe, fc
    cdef double* verts = <double*> malloc(nv * n * sizeof(double))
    cdef double* scratch = <double*> malloc(nv * n * sizeof(double))
    cdef double* fvals = <double*> malloc(nv * sizeof(double))
    cdef double* fscratch = <double*> malloc(nv * sizeof(double))
    cdef double* centroid = <double*> malloc(n * sizeof(double))
    cdef double* xr = <double*> malloc(n * sizeof(double))
    cdef double* xe = <double*> malloc(n * sizeof(double))
    cdef double* data = <double*> malloc(m * (3 + m) * sizeof(double))
    cdef double* tau_buf = <double*> malloc(m * sizeof(double))
    cdef double* p_buf = <double*> malloc(m * sizeof(double))
    cdef int* order = <int*> malloc(nv * sizeof(int))
    if (
        verts == NULL or scratch == NULL or fvals == NULL or fscratch == NULL
        or centroid == NULL or xr == NULL or xe == NULL or data == NULL
        or tau_buf == NULL or p_buf == NULL or order == NULL
    ):
        free(verts); free(scratch); free(fvals); free(fscratch); free(centroid)
        free(xr); free(xe); free(data); free(tau_buf); free(p_buf); free(order)
        raise MemoryError()
    cdef double* e1_ = data
    cdef double* e3_ = data + m
    cdef double* e2_ = data + 3 * m

    try:
        _copy_seq(e1, e1_, m)
        _copy_seq(e2_flat, e2_, m * m)
        if use_e3:
            _copy_seq(e3, e3_, m)
        _copy_seq(theta0, verts, n)
        for i in range(1, nv):
            for j in range(n):
                verts[i * n + j] = verts[j]
            verts[i * n + (i - 1)] += step

        with nogil:
            for i in range(nv):
                fvals[i] = _objective_theta_c(
                    verts + i * n, e1_, e2_, e3_, m, use_e3, full_pairs, tau_buf, p_buf
                )
            iters = 0
            while True:
                # Stable sort of vertices by objective (insertion sort).
                for i in range(nv):
                    order[i] = i
                for i in range(1, nv):
                    k = order[i]
                    j = i - 1
                    while j >= 0 and fvals[order[j]] > fvals[k]:
                        order[j + 1] = order[j]
                        j -= 1
                    order[j + 1] = k
                for i in range(nv):
                    fscratch[i] = fvals[order[i]]
                    for j in range(n):
                        scratch[i * n + j] = verts[order[i] * n + j]
                for i in range(nv):
                    fvals[i] = fscratch[i]
                    for j in range(n):
                        verts[i * n + j] = scratch[i * n + j]

                if fvals[n] - fvals[0] <= tol:
                    converged = True
                    break
                if iters >= max_iters:
                    break
                iters += 1

                for j in range(n):
                    centroid[j] = 0.0
                for k in range(n):
                    for j in range(n):
                        centroid[j] += verts[k * n + j]
                for j in range(n):
                    centroid[j] /= n

                for j in range(n):
                    xr[j] = centroid[j] + (centroid[j] - verts[n * n + j])
                fr = _objective_theta_c(xr, e1_, e2_, e3_, m, use_e3, full_pairs, tau_buf, p_buf)
                if fr < fvals[0]:
                    for j in range(n):
                        xe[j] = centroid[j] + 2.0 * (centroid[j] - verts[n * n + j])
                    fe = _objective_theta_c(xe, e1_, e2_, e3_, m, use_e3, full_pairs, tau_buf, p_buf)
                    if fe < fr:
                        for j in range(n):
                            verts[n * n + j] = xe[j]
                        fvals[n] = fe
                    else:
                        for j in range(n):
                            verts[n * n + j] = xr[j]
                        fvals[n] = fr
                elif fr < fvals[n - 1]:
                    for j in range(n):
                        verts[n * n + j] = xr[j]
                    fvals[n] = fr
                else:
                    if fr < fvals[n]:
                        # Outside contraction (xe reused as the trial point).
                        for j in range(n):
                            xe[j] = centroid[j] + 0.5 * (xr[j] - centroid[j])
                        fc = _objective_theta_c(xe, e1_, e2_, e3_, m, use_e3, full_pairs, tau_buf, p_buf)
                        if fc <= fr:
                            for j in range(n):
                                verts[n * n + j] = xe[j]
                            fvals[n] = fc
                        else:
                            _shrink(verts, fvals, n, e1_, e2_, e3_, m, use_e3, full_pairs, tau_buf, p_buf)
                    else:
                        for j in range(n):
                            xe[j] = centroid[j] - 0.5 * (centroid[j] - verts[n * n + j])
                        fc = _objective_theta_c(xe, e1_, e2_, e3_, m, use_e3, full_pairs, tau_buf, p_buf)
                        if fc < fvals[n]:
                            for j in range(n):
                                verts[n * n + j] = xe[j]
                            fvals[n] = fc
                        else:
                            _shrink(verts, fvals, n, e1_, e2_, e3_, m, use_e3, full_pairs, tau_buf, p_buf)

        theta_best = [verts[j] for j in range(n)]
        return theta_best, fvals[0], iters, converged
    finally:
        free(verts); free(scratch); free(fvals); free(fscratch); free(centroid)
        free(xr); free(xe); free(data); free(tau_buf); free(p_buf); free(order)


cdef void _shrink(
    double* verts,
    double* fvals,
    int n,
    const double* e1_,
    const double* e2_,
    const double* e3_,
    int m,
    bint use_e3,
    bint full_pairs,
    double* tau_buf,
    double* p_buf,
) noexcept nogil:
    cdef int k, j
    for k in range(1, n + 1):
        for j in range(n):
            verts[k * n + j] = verts[j] + 0.5 * (verts[k * n + j] - verts[j])
        fvals[k] = _objective_theta_c(
            verts + k * n, e1_, e2_, e3_, m, use_e3, full_pairs, tau_buf, p_buf
        )
