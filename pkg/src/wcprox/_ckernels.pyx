# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled loops for the built-in one-dimensional instances.

Kind codes: 0 = max{2 - y^2, y^2}, 1 = (y - c)^2 / 2, 2 = |y^2 - 1|.
Every routine mirrors its pure-Python counterpart operation for operation so
the two backends agree to rounding.
"""
from libc.math cimport fabs, INFINITY

cdef enum:
    BRACKET_OK = 0
    BRACKET_LOW = 1
    BRACKET_HIGH = 2

cdef enum:
    FP_OK = 0
    FP_NONCONVERGED = 1
    FP_LEFT_BALL = 2
    FP_PROX_FAILED = 3


cdef inline double _value(int kind, double c, double y) nogil:
    cdef double t
    if kind == 0:
        t = y * y
        return 2.0 - t if 2.0 - t > t else t
    elif kind == 1:
        return 0.5 * (y - c) * (y - c)
    else:
        return fabs(y * y - 1.0)


cdef inline double _subgrad(int kind, double c, double y) nogil:
    cdef double t, a, h
    if kind == 0:
        t = y * y
        a = 2.0 - t
        if t > a:
            return 2.0 * y
        if a > t:
            return -2.0 * y
        return 0.5 * (-2.0 * y + 2.0 * y)
    elif kind == 1:
        return y - c
    else:
        h = y * y - 1.0
        if h > 0.0:
            return 2.0 * y
        if h < 0.0:
            return -2.0 * y
        return 0.0


def value(int kind, double c, double y):
    return _value(kind, c, y)


def subgradient(int kind, double c, double y):
    return _subgrad(kind, c, y)


def grid_argmin_1d(int kind, double c, double x, double lam, double lo, double step, long npts):
    cdef long i, best_i = -1
    cdef double y, phi, best_v = INFINITY
    cdef double inv2l = 0.5 / lam
    with nogil:
        for i in range(npts):
            y = lo + <double>i * step
            phi = _value(kind, c, y) + (y - x) * (y - x) * inv2l
            if phi < best_v:
                best_v = phi
                best_i = i
    return best_i, best_v


cdef int _bisect(int kind, double c, double x, double lam, double* plo, double* phi_,
                 double tol, long maxit, long* pit) nogil:
    cdef double lo = plo[0], hi = phi_[0], mid, g
    cdef long it = 0
    pit[0] = 0
    g = _subgrad(kind, c, lo) + (lo - x) / lam
    if g > 0.0:
        return BRACKET_LOW
    if g == 0.0:
        phi_[0] = lo
        return BRACKET_OK
    g = _subgrad(kind, c, hi) + (hi - x) / lam
    if g < 0.0:
        return BRACKET_HIGH
    if g == 0.0:
        plo[0] = hi
        return BRACKET_OK
    while hi - lo > 2.0 * tol and it < maxit:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        g = _subgrad(kind, c, mid) + (mid - x) / lam
        it += 1
        if g > 0.0:
            hi = mid
        elif g < 0.0:
            lo = mid
        else:
            lo = mid
            hi = mid
            break
    plo[0] = lo
    phi_[0] = hi
    pit[0] = it
    return BRACKET_OK


def bisect_prox_1d(int kind, double c, double x, double lam, double lo, double hi, double tol, long maxit):
    cdef long it
    cdef int status
    with nogil:
        status = _bisect(kind, c, x, lam, &lo, &hi, tol, maxit, &it)
    return lo, hi, it, status


cdef int _prox(int kind, double c, double z, double gam, double rlo, double rhi,
               double radius, double tol, long maxit, double* out) nogil:
    cdef double lo, hi
    cdef long it
    cdef int status
    if kind == 0 and gam <= 0.25:
        if fabs(z - 1.0) <= 2.0 * gam:
            out[0] = 1.0
            return BRACKET_OK
        if fabs(z + 1.0) <= 2.0 * gam:
            out[0] = -1.0
            return BRACKET_OK
    elif kind == 1:
        out[0] = (z + gam * c) / (1.0 + gam)
        return BRACKET_OK
    lo = z - radius
    hi = z + radius
    if lo < rlo:
        lo = rlo
    if hi > rhi:
        hi = rhi
    status = _bisect(kind, c, z, gam, &lo, &hi, tol, maxit, &it)
    out[0] = 0.5 * (lo + hi)
    return status


def fixed_point_1d(int kind, double c, double x, double z0, double gam, double lam, double sigma,
                   double xbar, double delta, double rlo, double rhi, double tol, long max_iter,
                   double prox_tol, double prox_radius, long prox_maxit, double ratio_floor):
    """Iterate z <- z - sigma (S(z) - x), S(z) = z + (lam - gam) (z - P_gam f(z)) / gam.

    Returns (status, z, iterations, residual, ratio, best_z, best_residual).
    """
    cdef double z = z0, s, r, p, znew, step, prev_step = -1.0, ratio = 0.0
    cdef double best_z = z0, best_r = INFINITY
    cdef long it = 0
    cdef int status = FP_OK, pstat
    with nogil:
        while True:
            pstat = _prox(kind, c, z, gam, rlo, rhi, prox_radius, prox_tol, prox_maxit, &p)
            if pstat != BRACKET_OK:
                status = FP_PROX_FAILED
                break
            s = z + (lam - gam) * ((z - p) / gam)
            r = fabs(s - x)
            if r < best_r:
                best_r = r
                best_z = z
            if r <= tol:
                break
            if it >= max_iter:
                status = FP_NONCONVERGED
                break
            znew = z - sigma * (s - x)
            step = fabs(znew - z)
            if prev_step > ratio_floor and step / prev_step > ratio:
                ratio = step / prev_step
            prev_step = step
            z = znew
            it += 1
            if fabs(z - xbar) > delta:
                status = FP_LEFT_BALL
                break
    return status, z, it, r, ratio, best_z, best_r
