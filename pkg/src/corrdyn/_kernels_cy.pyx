# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled numeric kernels: Horner evaluation and simultaneous root finding.

Twin of _kernels_py with identical operation order.  Complex arithmetic is
written out on double pairs (division via Smith's scaling, square root via
the explicit real formulas), and the build disables FP contraction, so this
backend is bit-identical to the pure-Python one.
"""

from libc.math cimport fabs, hypot, sqrt, cos, sin
from libc.stdlib cimport malloc, free

BACKEND_NAME = "cython"

cdef double _EPS = 2.0 ** -53
cdef double _CONV_TOL = 1e-14
cdef int _MAX_ITERS = 200
cdef double _TWO_PI = 6.283185307179586


cdef inline void _cdiv(double ar, double ai, double br, double bi,
                       double *qr, double *qi) nogil:
    cdef double r, den
    if fabs(br) >= fabs(bi):
        r = bi / br
        den = br + bi * r
        qr[0] = (ar + ai * r) / den
        qi[0] = (ai - ar * r) / den
    else:
        r = br / bi
        den = bi + br * r
        qr[0] = (ar * r + ai) / den
        qi[0] = (ai * r - ar) / den


cdef inline void _csqrt(double zr, double zi, double *qr, double *qi) nogil:
    cdef double m, re, t
    if zr == 0.0 and zi == 0.0:
        qr[0] = 0.0
        qi[0] = 0.0
        return
    m = hypot(zr, zi)
    if zr >= 0.0:
        re = sqrt(0.5 * (m + zr))
        qr[0] = re
        qi[0] = zi / (2.0 * re)
    else:
        t = sqrt(0.5 * (m - zr))
        if zi >= 0.0:
            qr[0] = zi / (2.0 * t)
            qi[0] = t
        else:
            qr[0] = -zi / (2.0 * t)
            qi[0] = -t


cdef inline double _cabs(double re, double im) nogil:
    return hypot(re, im)


cdef void _horner_c(double *cr, double *ci, int n, double xr, double xi,
                    double *out_r, double *out_i) nogil:
    cdef double ar = 0.0, ai = 0.0, tr
    cdef int k
    for k in range(n - 1, -1, -1):
        tr = ar * xr - ai * xi + cr[k]
        ai = ar * xi + ai * xr + ci[k]
        ar = tr
    out_r[0] = ar
    out_i[0] = ai


cdef double _horner_mag_c(double *cr, double *ci, int n, double r) nogil:
    cdef double acc = 0.0
    cdef int k
    for k in range(n - 1, -1, -1):
        acc = acc * r + hypot(cr[k], ci[k])
    return acc


def horner(coeffs, x):
    """Evaluate sum(coeffs[i] * x**i) by Horner's rule."""
    cdef int n = len(coeffs)
    cdef double xr = (<complex> x).real
    cdef double xi = (<complex> x).imag
    cdef double ar = 0.0, ai = 0.0, tr
    cdef double br, bi
    cdef int k
    for k in range(n - 1, -1, -1):
        c = complex(coeffs[k])
        br = c.real
        bi = c.imag
        tr = ar * xr - ai * xi + br
        ai = ar * xi + ai * xr + bi
        ar = tr
    return complex(ar, ai)


def horner_mag(coeffs, r):
    """Evaluate sum(|coeffs[i]| * r**i); majorant used for error floors."""
    cdef int n = len(coeffs)
    cdef double rr = r
    cdef double acc = 0.0
    cdef int k
    for k in range(n - 1, -1, -1):
        c = complex(coeffs[k])
        acc = acc * rr + hypot(c.real, c.imag)
    return acc


def residual_floor(coeffs, x):
    """Attainable accuracy of Horner evaluation at x in double precision."""
    return 4.0 * len(coeffs) * _EPS * horner_mag(coeffs, abs(x))


cdef int _roots_core(double *cr, double *ci, int m, double *rr, double *ri) nogil:
    """Roots of the degree m polynomial cr/ci (length m+1, c0 != 0, cm != 0).

    Writes m roots into rr/ri.  Returns 0 on success, 1 on non-convergence.
    """
    cdef double sr, si, qr, qi, br, bi, ar2, ai2, c0r, c0i
    cdef double radius, lead, mm, theta
    cdef double pr, pi, dpr, dpi, ratr, rati, sumr, sumi
    cdef double diffr, diffi, invr, invi, denr, deni, corrr, corri, xr, xi
    cdef double floor_val
    cdef int k, j, it, n
    cdef bint all_done, collide
    cdef double *dr
    cdef double *di

    if m == 1:
        _cdiv(cr[0], ci[0], cr[1], ci[1], &qr, &qi)
        rr[0] = -qr
        ri[0] = -qi
        return 0
    if m == 2:
        c0r = cr[0]; c0i = ci[0]
        br = cr[1]; bi = ci[1]
        ar2 = cr[2]; ai2 = ci[2]
        # disc = b*b - 4*a*c
        sr = br * br - bi * bi - 4.0 * (ar2 * c0r - ai2 * c0i)
        si = 2.0 * br * bi - 4.0 * (ar2 * c0i + ai2 * c0r)
        _csqrt(sr, si, &qr, &qi)
        if br * qr + bi * qi >= 0.0:
            qr = -0.5 * (br + qr)
            qi = -0.5 * (bi + qi)
        else:
            qr = -0.5 * (br - qr)
            qi = -0.5 * (bi - qi)
        if qr == 0.0 and qi == 0.0:
            rr[0] = 0.0; ri[0] = 0.0
            rr[1] = 0.0; ri[1] = 0.0
            return 0
        _cdiv(qr, qi, ar2, ai2, &rr[0], &ri[0])
        _cdiv(c0r, c0i, qr, qi, &rr[1], &ri[1])
        return 0

    n = m
    dr = <double *> malloc(2 * n * sizeof(double))
    if dr == NULL:
        return 1
    di = dr + n
    for k in range(1, n + 1):
        dr[k - 1] = cr[k] * k
        di[k - 1] = ci[k] * k
    lead = hypot(cr[n], ci[n])
    radius = 0.0
    for k in range(n):
        mm = hypot(cr[k], ci[k]) / lead
        if mm > radius:
            radius = mm
    radius = 1.0 + radius
    for k in range(n):
        theta = _TWO_PI * (k + 0.25) / n + 0.5
        rr[k] = radius * cos(theta)
        ri[k] = radius * sin(theta)

    for it in range(_MAX_ITERS):
        all_done = True
        for k in range(n):
            xr = rr[k]; xi = ri[k]
            _horner_c(cr, ci, n + 1, xr, xi, &pr, &pi)
            if pr == 0.0 and pi == 0.0:
                continue
            _horner_c(dr, di, n, xr, xi, &dpr, &dpi)
            if dpr == 0.0 and dpi == 0.0:
                rr[k] = xr + 1e-8 * (1.0 + hypot(xr, xi))
                ri[k] = xi + 1e-8
                all_done = False
                continue
            _cdiv(pr, pi, dpr, dpi, &ratr, &rati)
            sumr = 0.0; sumi = 0.0
            collide = False
            for j in range(n):
                if j == k:
                    continue
                diffr = xr - rr[j]
                diffi = xi - ri[j]
                if diffr == 0.0 and diffi == 0.0:
                    collide = True
                    break
                _cdiv(1.0, 0.0, diffr, diffi, &invr, &invi)
                sumr += invr
                sumi += invi
            if collide:
                rr[k] = xr + 1e-8 * (1.0 + hypot(xr, xi))
                ri[k] = xi - 1e-8
                all_done = False
                continue
            denr = 1.0 - (ratr * sumr - rati * sumi)
            deni = -(ratr * sumi + rati * sumr)
            if denr == 0.0 and deni == 0.0:
                corrr = ratr; corri = rati
            else:
                _cdiv(ratr, rati, denr, deni, &corrr, &corri)
            xr = xr - corrr
            xi = xi - corri
            rr[k] = xr
            ri[k] = xi
            if hypot(corrr, corri) >= _CONV_TOL * (1.0 + hypot(xr, xi)):
                floor_val = 4.0 * (n + 1) * _EPS * _horner_mag_c(
                    cr, ci, n + 1, hypot(xr, xi))
                if hypot(pr, pi) > floor_val:
                    all_done = False
        if all_done:
            free(dr)
            return 0
    free(dr)
    return 1


def roots(coeffs):
    """All roots of a dense polynomial, multiplicity as repetition.

    Same contract as the pure backend: ascending coefficients, nonzero
    lead, degree >= 1; returns None on non-convergence.
    """
    cdef int total = len(coeffs)
    cdef int strip = 0
    cdef int m, k, rc
    cdef double *cr
    cdef double *ci
    cdef double *rr
    cdef double *ri
    while strip < total and complex(coeffs[strip]) == 0j:
        strip += 1
    out = [0j] * strip
    m = total - strip - 1
    if m == 0:
        return out
    cr = <double *> malloc(4 * (m + 1) * sizeof(double))
    if cr == NULL:
        raise MemoryError()
    ci = cr + (m + 1)
    rr = ci + (m + 1)
    ri = rr + (m + 1)
    for k in range(m + 1):
        c = complex(coeffs[strip + k])
        cr[k] = c.real
        ci[k] = c.imag
    with nogil:
        rc = _roots_core(cr, ci, m, rr, ri)
    if rc != 0:
        free(cr)
        return None
    for k in range(m):
        out.append(complex(rr[k], ri[k]))
    free(cr)
    return out


def fiber_coeffs(cols, z):
    """w-coefficients of curve(z, .); cols[j] is the z-poly on w^j."""
    return [horner(col, z) for col in cols]


def batch_fiber_roots(cols, d, zs):
    """Fiber roots for many z against a fixed curve (flat results + status).

    Same contract as the pure backend: status 0 appends exactly d roots,
    status 1 flags a leading-coefficient drop, status 2 non-convergence.
    """
    cdef int dd = d
    cdef int ncols = len(cols)
    cdef int nz = len(zs)
    cdef int depth = 0
    cdef int j, k, i, e, strip, rc, m
    cdef double zr, zi, scale, mag
    cdef double *col_r
    cdef double *col_i
    cdef int *col_len
    cdef double *wc_r
    cdef double *wc_i
    cdef double *rt_r
    cdef double *rt_i

    for j in range(ncols):
        if len(cols[j]) > depth:
            depth = len(cols[j])
    col_r = <double *> malloc(2 * ncols * depth * sizeof(double))
    col_len = <int *> malloc(ncols * sizeof(int))
    wc_r = <double *> malloc(4 * (dd + 1) * sizeof(double))
    if col_r == NULL or col_len == NULL or wc_r == NULL:
        if col_r != NULL: free(col_r)
        if col_len != NULL: free(col_len)
        if wc_r != NULL: free(wc_r)
        raise MemoryError()
    col_i = col_r + ncols * depth
    wc_i = wc_r + (dd + 1)
    rt_r = wc_i + (dd + 1)
    rt_i = rt_r + (dd + 1)
    for j in range(ncols):
        col_len[j] = len(cols[j])
        for k in range(col_len[j]):
            c = complex(cols[j][k])
            col_r[j * depth + k] = c.real
            col_i[j * depth + k] = c.imag

    flat = []
    status = []
    try:
        for i in range(nz):
            zc = complex(zs[i])
            zr = zc.real
            zi = zc.imag
            scale = 0.0
            for j in range(dd + 1):
                if j < ncols:
                    _horner_c(col_r + j * depth, col_i + j * depth,
                              col_len[j], zr, zi, &wc_r[j], &wc_i[j])
                else:
                    wc_r[j] = 0.0
                    wc_i[j] = 0.0
                mag = hypot(wc_r[j], wc_i[j])
                if mag > scale:
                    scale = mag
            if scale == 0.0 or hypot(wc_r[dd], wc_i[dd]) <= 1e-14 * scale:
                status.append(1)
                continue
            strip = 0
            while wc_r[strip] == 0.0 and wc_i[strip] == 0.0:
                strip += 1
            m = dd - strip
            if m == 0:
                rc = 0
            else:
                with nogil:
                    rc = _roots_core(wc_r + strip, wc_i + strip, m, rt_r, rt_i)
            if rc != 0:
                status.append(2)
                continue
            for k in range(strip):
                flat.append(0j)
            for k in range(m):
                flat.append(complex(rt_r[k], rt_i[k]))
            status.append(0)
    finally:
        free(col_r)
        free(col_len)
        free(wc_r)
    return flat, status
